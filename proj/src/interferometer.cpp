#include "mattersim/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mattersim/analytic.hpp"
#include "mattersim/parallel.hpp"

namespace mattersim {

namespace {

constexpr double pi = std::numbers::pi;

double wrap_mod_pi(double phase) {
    double w = std::fmod(phase, pi);
    if (w < 0.0) w += pi;
    return w;
}

}  // namespace

PulseEnvelope InterferometerConfig::resolved_first_pulse() const {
    if (first_pulse) return *first_pulse;
    if (!(first_pulse_q > 0.0)) {
        throw std::invalid_argument("first_pulse_q must be positive");
    }
    const double tau_rn = gamma / (2.0 * first_pulse_q);
    return PulseEnvelope::rectangular(first_pulse_q, 0.0, tau_rn);
}

double InterferometerConfig::resolved_gamma() const {
    if (first_pulse) return 2.0 * first_pulse->area();
    return gamma;
}

DetectionWindow InterferometerConfig::resolved_detection() const {
    if (detection) return *detection;
    DetectionWindow w;
    w.tau_start = bragg.tau_end + 0.25;
    w.span = pi / 2.0;
    w.samples = 64;
    return w;
}

void InterferometerConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("gamma must be finite and non-negative");
    }
    const auto first = resolved_first_pulse();
    if (first.tau_start < 0.0) {
        throw std::invalid_argument("the splitter pulse may not start before tau = 0");
    }
    if (!(mirror_time > 0.0)) {
        throw std::invalid_argument("mirror_time must be positive");
    }
    if (first.tau_end > 0.1 * mirror_time) {
        throw std::invalid_argument("the splitter pulse must be short against the mirror time");
    }
    if (!(bragg.tau_start > first.tau_end)) {
        throw std::invalid_argument("the mirror pulse must start after the splitter pulse");
    }
    const auto window = resolved_detection();
    if (!(window.tau_start >= bragg.tau_end)) {
        throw std::invalid_argument("detection must start after the mirror pulse");
    }
    if (window.samples < 8 || !(window.span > 0.0)) {
        throw std::invalid_argument("detection window needs span > 0 and at least 8 samples");
    }
    if (std::abs(power_scale) > 0.1) {
        throw std::invalid_argument("power_scale must satisfy |eps| <= 0.1");
    }
    settings.validate();
}

std::complex<double> grating_amplitude(const PlaneWaveState& state) {
    if (state.kappa != 0.0) {
        throw std::invalid_argument("grating_amplitude requires kappa = 0");
    }
    if (std::abs(state.norm_squared() - 1.0) > 1e-9) {
        throw std::invalid_argument("grating_amplitude requires a normalized state");
    }
    std::complex<double> c2{};
    for (int p = state.p_min; p < state.p_max(); ++p) {
        c2 += state.amplitude(p + 1) * std::conj(state.amplitude(p));
    }
    return c2;
}

FitResult extract_phase(std::span<const double> taus, std::span<const double> values,
                        double angular_frequency) {
    if (taus.size() != values.size()) {
        throw std::invalid_argument("extract_phase: sample arrays differ in length");
    }
    const std::size_t n = taus.size();
    if (n < 8) throw std::invalid_argument("extract_phase needs at least 8 samples");
    const auto [lo, hi] = std::minmax_element(taus.begin(), taus.end());
    if (!(angular_frequency > 0.0)) {
        throw std::invalid_argument("angular frequency must be positive");
    }
    const double omega = angular_frequency;
    if (*hi - *lo < pi / omega - 1e-9) {
        throw std::invalid_argument("extract_phase needs samples spanning half a beat period");
    }

    // normal equations for S = c0 + cc cos(2 w tau) + cs sin(2 w tau)
    double m[3][3] = {};
    double b[3] = {};
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(2.0 * omega * taus[i]);
        const double s = std::sin(2.0 * omega * taus[i]);
        const double basis[3] = {1.0, c, s};
        for (int r = 0; r < 3; ++r) {
            for (int col = 0; col < 3; ++col) m[r][col] += basis[r] * basis[col];
            b[r] += basis[r] * values[i];
        }
    }

    // Gaussian elimination with partial pivoting on the 3x3 system
    int index[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[index[r]][col]) > std::abs(m[index[pivot]][col])) pivot = r;
        }
        std::swap(index[col], index[pivot]);
        const double diag = m[index[col]][col];
        if (std::abs(diag) < 1e-12 * static_cast<double>(n)) {
            throw DegenerateFitError("extract_phase: degenerate sampling grid");
        }
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[index[r]][col] / diag;
            for (int c2 = col; c2 < 3; ++c2) m[index[r]][c2] -= f * m[index[col]][c2];
            b[index[r]] -= f * b[index[col]];
        }
    }
    double coef[3];
    for (int r = 2; r >= 0; --r) {
        double acc = b[index[r]];
        for (int c2 = r + 1; c2 < 3; ++c2) acc -= m[index[r]][c2] * coef[c2];
        coef[r] = acc / m[index[r]][r];
    }

    FitResult fit;
    const double half_amp = std::hypot(coef[1], coef[2]);
    fit.amplitude = 2.0 * half_amp;
    fit.offset = coef[0] - half_amp;

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(values[i]));
    if (half_amp <= 1e-12 * std::max(scale, 1e-300)) {
        fit.degenerate = true;
        fit.amplitude = 0.0;
        fit.offset = coef[0];
        fit.phase = 0.0;
    } else {
        // cc cos + cs sin = half_amp cos(2 w tau + 2 Phi)
        fit.phase = wrap_mod_pi(0.5 * std::atan2(-coef[2], coef[1]));
    }

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double model = coef[0] + coef[1] * std::cos(2.0 * omega * taus[i]) +
                             coef[2] * std::sin(2.0 * omega * taus[i]);
        ss += (values[i] - model) * (values[i] - model);
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

FitResult extract_phase(const SignalTrace& trace, double angular_frequency) {
    return extract_phase(trace.taus, trace.values, angular_frequency);
}

namespace {

// State right after the mirror pulse plus the time it refers to.
struct PreparedState {
    PlaneWaveState state;
    double tau;
};

PreparedState run_analytic(const InterferometerConfig& cfg, const PulseEnvelope& bragg) {
    const double gamma = cfg.resolved_gamma();
    const int span = gamma > 0.0 ? raman_nath_min_span(gamma) : 1;
    const auto full = raman_nath_state(gamma, span);
    // splitter treated as instantaneous at tau = 0, second-order amplitudes dropped
    std::vector<std::complex<double>> kept{full.amplitude(-1), full.amplitude(0),
                                           full.amplitude(+1)};
    auto state = PlaneWaveState::from_amplitudes(0.0, -1, std::move(kept));
    state = free_propagate(state, bragg.tau_start);
    state = bragg_apply(state, bragg);
    return {std::move(state), bragg.tau_end};
}

PreparedState run_numeric(const InterferometerConfig& cfg, const PulseEnvelope& bragg) {
    const auto first = cfg.resolved_first_pulse();
    auto state = PlaneWaveState::basis_state(0.0, 0);
    state = propagate(state, first, 0.0, first.tau_end, cfg.settings);
    state = free_propagate(state, bragg.tau_start - first.tau_end);
    state = propagate(state, bragg, bragg.tau_start, bragg.tau_end, cfg.settings);
    return {std::move(state), bragg.tau_end};
}

}  // namespace

SignalTrace simulate(const InterferometerConfig& config) {
    config.validate();
    const auto bragg = config.bragg.scaled(1.0 + config.power_scale);

    PreparedState prepared = (config.mode == SimulationMode::Analytic)
                                 ? run_analytic(config, bragg)
                                 : run_numeric(config, bragg);

    const auto window = config.resolved_detection();
    SignalTrace trace;
    trace.mode = config.mode;
    trace.taus.resize(static_cast<std::size_t>(window.samples));
    trace.values.resize(static_cast<std::size_t>(window.samples));
    const double step = window.span / window.samples;
    for (int i = 0; i < window.samples; ++i) {
        const double tau = window.tau_start + step * i;
        const auto at_detection = free_propagate(prepared.state, tau - prepared.tau);
        const auto c2 = grating_amplitude(at_detection);
        trace.taus[static_cast<std::size_t>(i)] = tau;
        trace.values[static_cast<std::size_t>(i)] = std::norm(c2);
    }

    try {
        trace.fit = extract_phase(trace.taus, trace.values);
    } catch (const DegenerateFitError&) {
        trace.fit = FitResult{};
        trace.fit.degenerate = true;  // raw trace still returned
    }
    return trace;
}

PowerSensitivity power_sensitivity(const InterferometerConfig& config,
                                   std::span<const double> epsilons) {
    for (double eps : epsilons) {
        if (!(std::abs(eps) <= 0.1)) {
            throw std::invalid_argument("power_sensitivity requires |eps| <= 0.1");
        }
    }
    PowerSensitivity out;
    out.epsilons.assign(epsilons.begin(), epsilons.end());
    out.phases.resize(epsilons.size());
    out.level_shift_slope = 2.0 * (4.0 * pi / 3.0);
    out.full_model_slope = 2.0 * (11.0 * pi / 6.0);

    std::vector<int> failed(epsilons.size(), 0);
    parallel_for(static_cast<int>(epsilons.size()), [&](int i) {
        InterferometerConfig run = config;
        run.power_scale = epsilons[static_cast<std::size_t>(i)];
        const auto trace = simulate(run);
        if (trace.fit.degenerate) {
            failed[static_cast<std::size_t>(i)] = 1;
            return;
        }
        out.phases[static_cast<std::size_t>(i)] = trace.fit.phase;
    });
    for (std::size_t i = 0; i < failed.size(); ++i) {
        if (failed[i]) throw DegenerateFitError("power_sensitivity: degenerate fit");
    }

    // unwrap the mod-pi phases along ascending eps, then regress
    std::vector<std::size_t> order(epsilons.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return epsilons[a] < epsilons[b]; });
    std::vector<double> x(order.size()), y(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        x[i] = epsilons[order[i]];
        double phi = out.phases[order[i]];
        if (i > 0) phi += pi * std::round((y[i - 1] - phi) / pi);
        y[i] = phi;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    out.fitted_slope = (std::abs(denom) < 1e-30) ? 0.0 : (n * sxy - sx * sy) / denom;
    return out;
}

PulseEnvelope rect_pi_pulse(double q, double mirror_time) {
    if (!(q > 0.0)) throw std::invalid_argument("rect_pi_pulse requires q > 0");
    const double half = pi / (q * q);  // duration 2 pi / q^2
    return PulseEnvelope::rectangular(q, mirror_time - half, mirror_time + half);
}

PulseEnvelope gaussian_pi_pulse(double sigma, double mirror_time) {
    const double q_max = design_pi_pulse(PulseShape::Gaussian, sigma);
    return PulseEnvelope::gaussian(q_max, mirror_time, sigma);
}

InterferometerConfig mit_2002_preset(double mirror_time) {
    InterferometerConfig cfg;
    cfg.mode = SimulationMode::Numeric;
    cfg.first_pulse = PulseEnvelope::rectangular(3.7, 0.0, 0.157);
    cfg.gamma = 2.0 * cfg.first_pulse->area();
    cfg.mirror_time = mirror_time;
    cfg.bragg = gaussian_pi_pulse(0.6, mirror_time);
    return cfg;
}

}  // namespace mattersim
