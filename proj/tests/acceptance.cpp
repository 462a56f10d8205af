// Acceptance battery: one line per criterion, nonzero exit when any fails.
// Windows and tolerances are fixed here, not tuned at run time.

#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mattersim/analytic.hpp"
#include "mattersim/bloch.hpp"
#include "mattersim/interferometer.hpp"
#include "mattersim/propagator.hpp"

using namespace mattersim;

namespace {

constexpr double pi = std::numbers::pi;

int failures = 0;

void report(int id, const char* label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, label,
                detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

double wrapped(double phase) { return std::remainder(phase, 2.0 * pi); }

// 1. Converged ground-band energy vs the -q^2/2 level shift. Known red at
// q = 1: the converged ratio is 0.0897 (Mathieu series beyond the quartic
// term), while the 0.11 window tracks the leading 7 q^2 / 64 estimate.
void criterion_band_shifts() {
    const double r03 = std::abs(ground_energy_shift(0.3) + 0.045) / 0.045;
    const double r10 = std::abs(ground_energy_shift(1.0) + 0.5) / 0.5;
    const bool ok03 = std::abs(r03 - 0.010) <= 0.003;
    const bool ok10 = std::abs(r10 - 0.11) <= 0.02;
    report(1, "ground-band level shift", ok03 && ok10,
           fmt("q=0.3: |e0+q^2/2|/(q^2/2) = %.6f (want 0.010+-0.003)%s; "
               "q=1: %.6f (want 0.11+-0.02)%s",
               r03, ok03 ? "" : " MISS", r10, ok10 ? "" : " MISS"));
}

// 2. Short strong pulse vs the Bessel amplitudes (-i)^|p| J_|p|(0.2).
// Populations hold to ~1e-6. Known red on the phases: the exact amplitudes
// carry kinetic dressing that grows with the order (about -8, -27, -56 mrad
// at p = 1, 2, 3 for tau = 0.004), which a 5 mrad window cannot absorb.
void criterion_raman_nath() {
    PropagationSettings s;
    s.phase_tolerance = 1e-6;
    const auto out = propagate(PlaneWaveState::basis_state(0.0, 0),
                               PulseEnvelope::rectangular(25.0, 0.0, 0.004), 0.0, 0.004, s);
    bool pops_ok = true, phases_ok = true;
    std::ostringstream detail;
    for (int p = -3; p <= 3; ++p) {
        const double j = bessel_j(std::abs(p), 0.2);
        const double dpop = std::abs(out.population(p) - j * j);
        const double ref_arg = -0.5 * pi * static_cast<double>(std::abs(p) % 4);
        const double dphase = std::abs(wrapped(std::arg(out.amplitude(p)) - ref_arg));
        pops_ok = pops_ok && dpop <= 1e-3;
        phases_ok = phases_ok && dphase <= 5e-3;
        if (p >= 0) {
            detail << fmt("p=%d: dpop=%.1e dphase=%.1f mrad; ", p, dpop, 1e3 * dphase);
        }
    }
    report(2, "raman-nath amplitudes", pops_ok && phases_ok,
           detail.str() + (pops_ok ? "populations ok" : "populations MISS") +
               (phases_ok ? ", phases within 5 mrad"
                          : ", phases MISS 5 mrad (kinetic dressing ~ 2 p^2 tau)"));
}

// 3. Second-order Bragg pi pulse at q = 0.2: +pi and -5pi/6 phases.
void criterion_bragg_phases() {
    const double q = 0.2;
    const double dt = 2.0 * pi / (q * q);
    const auto env = PulseEnvelope::rectangular(q, 0.0, dt);

    const auto from0 = propagate(PlaneWaveState::basis_state(0.0, 0), env, 0.0, dt, {});
    const double dev0 = wrapped(std::arg(from0.amplitude(0)) - pi);

    const auto from2 = propagate(PlaneWaveState::basis_state(0.0, 1), env, 0.0, dt, {});
    const double transfer = from2.population(-1);
    const double dev2 = wrapped(std::arg(from2.amplitude(-1)) + 4.0 * dt + 5.0 * pi / 6.0);

    const bool ok = std::abs(dev0) <= 0.030 && std::abs(dev2) <= 0.030 && transfer >= 0.99;
    report(3, "bragg pi-pulse phases", ok,
           fmt("|0>: dev from +pi = %+.1f mrad; |+2>: dev from -5pi/6 = %+.1f mrad "
               "(both within 30 mrad), transfer = %.4f (>= 0.99)",
               1e3 * dev0, 1e3 * dev2, transfer));
}

// 4. Contrast-interferometer phase: pi/3 analytically, numerically at weak
// mirror coupling.
void criterion_interferometer_phase() {
    InterferometerConfig ana;
    ana.mode = SimulationMode::Analytic;
    ana.gamma = 1.17;
    ana.mirror_time = 50.0;
    ana.bragg = rect_pi_pulse(0.3, ana.mirror_time);
    const double phi_ana = simulate(ana).fit.phase;

    InterferometerConfig num;
    num.mode = SimulationMode::Numeric;
    num.gamma = 0.7;  // keeps second-order splitter leakage small
    num.first_pulse_q = 50.0;
    num.mirror_time = 350.0;
    num.bragg = rect_pi_pulse(0.1, num.mirror_time);
    num.settings.phase_tolerance = 1e-3;
    const double phi_num = simulate(num).fit.phase;

    const bool ok_ana = std::abs(phi_ana - pi / 3.0) <= 1e-6;
    const bool ok_num = std::abs(phi_num - pi / 3.0) <= 0.050;
    report(4, "signal phase 7pi/3 mod pi", ok_ana && ok_num,
           fmt("analytic: |Phi - pi/3| = %.2e rad (<= 1e-6); numeric q=0.1: "
               "%+.1f mrad (within 50 mrad)",
               std::abs(phi_ana - pi / 3.0), 1e3 * (phi_num - pi / 3.0)));
}

// 5. Phase sensitivity to the mirror laser power.
void criterion_power_sensitivity() {
    InterferometerConfig cfg;
    cfg.mode = SimulationMode::Analytic;
    cfg.gamma = 1.17;
    cfg.mirror_time = 50.0;
    cfg.bragg = rect_pi_pulse(0.3, cfg.mirror_time);
    const std::vector<double> eps{-0.02, -0.01, 0.0, 0.01, 0.02};
    const auto sens = power_sensitivity(cfg, eps);

    const double level_shift_mrad = 1e3 * sens.level_shift_slope * 0.01;
    const double fitted_mrad = 1e3 * sens.fitted_slope * 0.01;
    const bool ok_level = std::abs(level_shift_mrad - 83.8) <= 0.1;
    const bool ok_fit = std::abs(fitted_mrad - 115.2) <= 0.5;
    report(5, "power sensitivity", ok_level && ok_fit,
           fmt("level-shift part: %.2f mrad per 1%% (want 83.8+-0.1); full model fit: "
               "%.2f mrad per 1%% (want 115.2+-0.5)",
               level_shift_mrad, fitted_mrad));
}

// 6. Gaussian pi-pulse design at sigma = 0.6.
void criterion_pulse_design() {
    const double q_max = design_pi_pulse(PulseShape::Gaussian, 0.6);
    const double phase = rabi_phase(PulseEnvelope::gaussian(q_max, 0.0, 0.6));
    const bool ok = q_max >= 2.42 && q_max <= 2.44 && std::abs(phase - pi) <= 1e-6;
    report(6, "pi-pulse design", ok,
           fmt("q_max = %.6f (want [2.42, 2.44]), rabi phase = pi %+.1e", q_max, phase - pi));
}

// 7. Validity bound and its bite.
void criterion_validity_bound() {
    const double bound = raman_nath_validity_bound(3.7);
    const bool ok_value = std::abs(bound - 0.130) <= 0.001;

    const auto error_at = [](double tau) {
        const auto out = propagate(PlaneWaveState::basis_state(0.0, 0),
                                   PulseEnvelope::rectangular(3.7, 0.0, tau), 0.0, tau, {});
        const double gamma = 2.0 * 3.7 * tau;
        const auto rn = raman_nath_state(gamma, raman_nath_min_span(gamma));
        double worst = 0.0;
        for (int p = -4; p <= 4; ++p) {
            worst = std::max(worst, std::abs(out.amplitude(p) - rn.amplitude(p)));
        }
        return worst;
    };
    const double inside = error_at(0.5 * bound);
    const double at_bound = error_at(bound);
    const bool ok_monotone = at_bound > inside;
    report(7, "raman-nath validity bound", ok_value && ok_monotone,
           fmt("bound(q=3.7) = %.6f (want 0.130+-0.001); short-pulse error %.4f -> %.4f "
               "as tau reaches the bound",
               bound, inside, at_bound));
}

// 8. Order-n coupling scales as q^n.
void criterion_qn_scaling() {
    const double tau = 0.1;
    const double qs[3] = {0.02, 0.04, 0.08};
    double a1[3], a2[3];
    PropagationSettings s;
    s.phase_tolerance = 1e-6;
    for (int i = 0; i < 3; ++i) {
        const auto out = propagate(PlaneWaveState::basis_state(0.0, 0),
                                   PulseEnvelope::rectangular(qs[i], 0.0, tau), 0.0, tau, s);
        a1[i] = std::abs(out.amplitude(1));
        a2[i] = std::abs(out.amplitude(2));
    }
    const auto slope = [&qs](const double* amp) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double x = std::log(qs[i]);
            const double y = std::log(amp[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
    };
    const double s1 = slope(a1);
    const double s2 = slope(a2);
    const bool ok = std::abs(s1 - 1.0) <= 0.1 && std::abs(s2 - 2.0) <= 0.1;
    report(8, "q^n coupling scaling", ok,
           fmt("log-log slopes: n=1: %.4f, n=2: %.4f (want n +- 0.1)", s1, s2));
}

// 9. Property bundle: unitarity, gauge freedom, parity, eigensolver
// residuals, Bessel normalization, reproducible CLI output.
void criterion_properties(const char* cli) {
    std::ostringstream detail;
    bool ok = true;

    {
        PropagationSettings s;
        s.phase_tolerance = 1e-3;
        s.max_step = 1e-3;
        PropagationReport rep;
        propagate(PlaneWaveState::basis_state(0.0, 0),
                  PulseEnvelope::rectangular(1.0, 0.0, 1.0), 0.0, 1.0, s, &rep);
        const double per_thousand =
            rep.norm_drift / (static_cast<double>(rep.steps) / 1000.0);
        ok = ok && per_thousand <= 1e-12;
        detail << fmt("norm drift %.1e/1e3 steps; ", per_thousand);
    }
    {
        const double q = 0.3, tau = 0.25, offset = 2.0 * q;
        const auto env = PulseEnvelope::rectangular(q, 0.0, tau);
        const auto initial = raman_nath_state(0.5, raman_nath_min_span(0.5));
        PropagationSettings plain;
        plain.phase_tolerance = 1e-6;
        plain.max_step = 2e-6;
        PropagationSettings shifted = plain;
        shifted.diagonal_offset = offset;
        const auto a = propagate(initial, env, 0.0, tau, plain);
        const auto b = propagate(initial, env, 0.0, tau, shifted);
        double worst = 0.0;
        for (int p = a.p_min; p <= a.p_max(); ++p) {
            worst = std::max(worst, std::abs(a.population(p) - b.population(p)));
            if (a.population(p) > 1e-6) {
                const double rel_a = wrapped(std::arg(a.amplitude(p)) - std::arg(a.amplitude(0)));
                const double rel_b = wrapped(std::arg(b.amplitude(p)) - std::arg(b.amplitude(0)));
                worst = std::max(worst, std::abs(wrapped(rel_a - rel_b)));
            }
        }
        ok = ok && worst <= 1e-10;
        detail << fmt("gauge residue %.1e; ", worst);
    }
    {
        const auto initial = raman_nath_state(0.7, raman_nath_min_span(0.7));
        PropagationSettings s;
        s.phase_tolerance = 1e-6;
        const auto out = propagate(initial, PulseEnvelope::rectangular(0.7, 0.0, 1.0), 0.0,
                                   1.0, s);
        double worst = 0.0;
        for (int p = 1; p <= out.p_max(); ++p) {
            worst = std::max(worst, std::abs(out.amplitude(p) - out.amplitude(-p)));
        }
        ok = ok && worst <= 1e-10;
        detail << fmt("parity residue %.1e; ", worst);
    }
    {
        double worst = 0.0;
        for (double q : {0.2, 1.3, 4.7}) {
            for (double kappa : {-0.6, 0.0, 1.0}) {
                const auto h = build_hamiltonian(kappa, q, 8);
                const auto sys = eigensystem(h);
                const int n = h.size();
                for (int i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (int r = 0; r < n; ++r) {
                        double val = (h.diagonal[static_cast<std::size_t>(r)] -
                                      sys.values[static_cast<std::size_t>(i)]) *
                                     sys.vectors[static_cast<std::size_t>(i)]
                                                [static_cast<std::size_t>(r)];
                        if (r > 0) val += q * sys.vectors[static_cast<std::size_t>(i)]
                                                         [static_cast<std::size_t>(r - 1)];
                        if (r + 1 < n) val += q * sys.vectors[static_cast<std::size_t>(i)]
                                                             [static_cast<std::size_t>(r + 1)];
                        acc += val * val;
                    }
                    const double res = std::sqrt(acc) /
                                       std::max(1.0, std::abs(sys.values[static_cast<std::size_t>(i)]));
                    worst = std::max(worst, res);
                }
            }
        }
        ok = ok && worst <= 1e-10;
        detail << fmt("eigen residual %.1e; ", worst);
    }
    {
        double worst = 0.0;
        for (double gamma = 0.0; gamma <= 10.0; gamma += 0.5) {
            double sum = bessel_j(0, gamma) * bessel_j(0, gamma);
            for (int n = 1; n <= 40; ++n) {
                const double j = bessel_j(n, gamma);
                sum += 2.0 * j * j;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
        }
        ok = ok && worst <= 1e-9;
        detail << fmt("bessel identity %.1e; ", worst);
    }
    {
        bool identical = false;
        if (cli) {
            const auto dir = std::filesystem::temp_directory_path() / "mattersim_acceptance";
            std::filesystem::create_directories(dir);
            const auto cfg = dir / "bands.json";
            {
                std::ofstream out(cfg);
                out << R"({"command":"bands","q":1.0,"n_kappa":32,"n_bands":4})";
            }
            const auto read_back = [](const std::filesystem::path& p) {
                std::ifstream in(p, std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                return ss.str();
            };
            const auto out1 = dir / "a.csv";
            const auto out2 = dir / "b.csv";
            const std::string base = std::string(cli) + " bands --config " + cfg.string();
            const int rc1 = std::system((base + " --out " + out1.string()).c_str());
            const int rc2 = std::system((base + " --out " + out2.string()).c_str());
            identical = rc1 == 0 && rc2 == 0 && read_back(out1) == read_back(out2) &&
                        !read_back(out1).empty();
        }
        ok = ok && identical;
        detail << (identical ? "CLI reruns byte-identical" : "CLI rerun check FAILED");
    }
    report(9, "property bundle", ok, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
    const char* cli = argc > 1 ? argv[1] : nullptr;
    criterion_band_shifts();
    criterion_raman_nath();
    criterion_bragg_phases();
    criterion_interferometer_phase();
    criterion_power_sensitivity();
    criterion_pulse_design();
    criterion_validity_bound();
    criterion_qn_scaling();
    criterion_properties(cli);
    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures;
}
