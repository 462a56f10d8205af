#include "mattersim/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mattersim {

namespace {

using cplx = std::complex<double>;

constexpr int max_half_span = 512;

struct Ladder {
    double kappa = 0.0;
    double offset = 0.0;
    int p_lo = 0;
    std::vector<cplx> amps;

    int p_hi() const { return p_lo + static_cast<int>(amps.size()) - 1; }

    double diag(int p) const {
        const double k = kappa + 2.0 * p;
        return k * k + offset;
    }

    void grow_low(int by) {
        amps.insert(amps.begin(), static_cast<std::size_t>(by), cplx{});
        p_lo -= by;
    }
    void grow_high(int by) { amps.insert(amps.end(), static_cast<std::size_t>(by), cplx{}); }
};

// Gershgorin bound on the spectral span of the truncated Hamiltonian.
double spectral_span(const Ladder& w, double q_peak) {
    double d_min = w.diag(w.p_lo);
    double d_max = d_min;
    for (int p = w.p_lo + 1; p <= w.p_hi(); ++p) {
        const double d = w.diag(p);
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    return d_max - d_min + 4.0 * q_peak;
}

double edge_population_low(const Ladder& w) {
    const int n = static_cast<int>(w.amps.size());
    double pop = std::norm(w.amps[0]);
    if (n > 1) pop += std::norm(w.amps[1]);
    return pop;
}

double edge_population_high(const Ladder& w) {
    const int n = static_cast<int>(w.amps.size());
    double pop = std::norm(w.amps[static_cast<std::size_t>(n - 1)]);
    if (n > 1) pop += std::norm(w.amps[static_cast<std::size_t>(n - 2)]);
    return pop;
}

// Extends the basis while the two outermost orders on either side hold
// more population than the threshold.
void ensure_padding(Ladder& w, double threshold) {
    for (;;) {
        const bool low = edge_population_low(w) > threshold;
        const bool high = edge_population_high(w) > threshold;
        if (!low && !high) return;
        if (low) w.grow_low(4);
        if (high) w.grow_high(4);
        if (w.p_hi() - w.p_lo > 2 * max_half_span) {
            throw NonConvergenceError("propagate: basis growth exceeded the hard cap");
        }
    }
}

// Thomas factorization of (1 + i h/2 H); reusable while h, q and the basis
// stay fixed, which covers every step of a rectangular-segment plan.
struct CnFactorization {
    double h = -1.0, q = -1.0;
    int p_lo = 0;
    std::size_t n = 0;
    cplx off{};
    std::vector<cplx> lower_diag;  // 1 - i h/2 d_i, for the explicit half
    std::vector<cplx> inv_denom;   // reciprocal pivots of the forward sweep
    std::vector<cplx> upper;       // off * inv_denom, for back substitution
};

struct CnWorkspace {
    std::vector<cplx> rhs, backup;
    CnFactorization fact;
};

void prepare_factorization(const Ladder& w, double q, double h, CnFactorization& f) {
    const std::size_t n = w.amps.size();
    if (f.h == h && f.q == q && f.p_lo == w.p_lo && f.n == n) return;
    f.h = h;
    f.q = q;
    f.p_lo = w.p_lo;
    f.n = n;
    const cplx ih2(0.0, 0.5 * h);
    f.off = ih2 * q;
    f.lower_diag.resize(n);
    f.inv_denom.resize(n);
    f.upper.resize(n);
    cplx carry{};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = w.diag(w.p_lo + static_cast<int>(i));
        f.lower_diag[i] = 1.0 - ih2 * d;
        const cplx denom = (1.0 + ih2 * d) - f.off * carry;
        f.inv_denom[i] = 1.0 / denom;
        carry = f.off * f.inv_denom[i];
        f.upper[i] = carry;
    }
}

// One Cayley step: (1 + i h/2 H) psi' = (1 - i h/2 H) psi, H tridiagonal
// with uniform off-diagonal q. The matrix is strongly diagonally dominant
// for every step size produced by the planner.
void cn_step(Ladder& w, double q, double h, CnWorkspace& ws) {
    const std::size_t n = w.amps.size();
    prepare_factorization(w, q, h, ws.fact);
    const cplx off = ws.fact.off;

    ws.rhs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx below = (i > 0) ? w.amps[i - 1] : cplx{};
        const cplx above = (i + 1 < n) ? w.amps[i + 1] : cplx{};
        ws.rhs[i] = ws.fact.lower_diag[i] * w.amps[i] - off * (below + above);
    }
    ws.rhs[0] *= ws.fact.inv_denom[0];
    for (std::size_t i = 1; i < n; ++i) {
        ws.rhs[i] = (ws.rhs[i] - off * ws.rhs[i - 1]) * ws.fact.inv_denom[i];
    }
    w.amps[n - 1] = ws.rhs[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        w.amps[i] = ws.rhs[i] - ws.fact.upper[i] * w.amps[i + 1];
    }
}

void free_segment(Ladder& w, double len) {
    for (int i = 0; i < static_cast<int>(w.amps.size()); ++i) {
        const double phase = -w.diag(w.p_lo + i) * len;
        w.amps[static_cast<std::size_t>(i)] *= cplx(std::cos(phase), std::sin(phase));
    }
}

struct Segment {
    double a = 0.0;
    double b = 0.0;
    bool driven = false;  // envelope non-zero somewhere inside
};

std::vector<Segment> plan_segments(const PulseEnvelope& env, double tau_a, double tau_b) {
    std::vector<double> cuts{tau_a, tau_b};
    if (!env.is_zero()) {
        for (double t : env.breakpoints()) {
            if (t > tau_a && t < tau_b) cuts.push_back(t);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Segment> segments;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        Segment s{cuts[i - 1], cuts[i], false};
        if (!env.is_zero()) {
            const double mid = 0.5 * (s.a + s.b);
            s.driven = mid >= env.tau_start && mid <= env.tau_end;
        }
        if (s.b > s.a) segments.push_back(s);
    }
    return segments;
}

// Integrates all segments once at the given refinement; returns the step count.
// A step that pushes population into the outermost orders is undone and
// retried on the grown basis.
long run_once(Ladder& w, const PulseEnvelope& env, const std::vector<Segment>& segments,
              const PropagationSettings& s, int refine, CnWorkspace& ws) {
    long steps = 0;
    for (const auto& seg : segments) {
        if (!seg.driven) {
            free_segment(w, seg.b - seg.a);
            continue;
        }
        double tau = seg.a;
        while (tau < seg.b) {
            ensure_padding(w, s.truncation_threshold);
            const double span = spectral_span(w, env.q_max);
            const double bound = std::min(s.max_step, 0.05 / (1.0 + span)) / refine;
            if (bound < 1e-12) {
                throw NonConvergenceError("propagate: required step below 1e-12");
            }
            const double remaining = seg.b - tau;
            const long n_left = std::max(1L, static_cast<long>(std::ceil(remaining / bound - 1e-9)));
            const double h = remaining / static_cast<double>(n_left);
            const double tau0 = tau;
            for (long k = 0; k < n_left; ++k) {
                ws.backup = w.amps;
                cn_step(w, env.value(tau + 0.5 * h), h, ws);
                const bool spill_low = edge_population_low(w) > s.truncation_threshold;
                const bool spill_high = edge_population_high(w) > s.truncation_threshold;
                if (spill_low || spill_high) {
                    w.amps = ws.backup;  // redo this step on a grown basis
                    if (spill_low) w.grow_low(4);
                    if (spill_high) w.grow_high(4);
                    if (w.p_hi() - w.p_lo > 2 * max_half_span) {
                        throw NonConvergenceError("propagate: basis growth exceeded the hard cap");
                    }
                    break;
                }
                ++steps;
                tau = (k + 1 == n_left) ? seg.b : tau0 + static_cast<double>(k + 1) * h;
            }
        }
    }
    return steps;
}

double max_amplitude_difference(const Ladder& x, const Ladder& y) {
    const int lo = std::min(x.p_lo, y.p_lo);
    const int hi = std::max(x.p_hi(), y.p_hi());
    double worst = 0.0;
    for (int p = lo; p <= hi; ++p) {
        const cplx ax = (p >= x.p_lo && p <= x.p_hi())
                            ? x.amps[static_cast<std::size_t>(p - x.p_lo)] : cplx{};
        const cplx ay = (p >= y.p_lo && p <= y.p_hi())
                            ? y.amps[static_cast<std::size_t>(p - y.p_lo)] : cplx{};
        worst = std::max(worst, std::abs(ax - ay));
    }
    return worst;
}

}  // namespace

void PropagationSettings::validate() const {
    if (!(phase_tolerance > 0.0)) throw std::invalid_argument("phase_tolerance must be positive");
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    if (!(truncation_threshold > 0.0) || truncation_threshold > 1e-6) {
        throw std::invalid_argument("truncation_threshold must lie in (0, 1e-6]");
    }
    if (!std::isfinite(diagonal_offset)) throw std::invalid_argument("diagonal_offset must be finite");
}

PlaneWaveState propagate(const PlaneWaveState& state, const PulseEnvelope& env,
                         double tau_a, double tau_b,
                         const PropagationSettings& settings, PropagationReport* report) {
    settings.validate();
    if (!(tau_a <= tau_b)) throw std::invalid_argument("propagate requires tau_a <= tau_b");
    if (std::abs(state.norm_squared() - 1.0) > 1e-9) {
        throw std::invalid_argument("propagate requires a normalized state");
    }

    const auto segments = plan_segments(env, tau_a, tau_b);
    Ladder initial{state.kappa, settings.diagonal_offset, state.p_min, state.amplitudes};
    CnWorkspace ws;

    auto run = [&](int refine, long* steps) {
        Ladder w = initial;
        *steps = run_once(w, env, segments, settings, refine, ws);
        return w;
    };

    long steps_prev = 0;
    Ladder prev = run(1, &steps_prev);
    int refine = 1;
    if (steps_prev > 0) {
        // single Richardson acceptance check, repeated with halved steps on failure
        for (;;) {
            if (refine > (1 << 12)) {
                throw NonConvergenceError("propagate: step halving failed to converge");
            }
            long steps_next = 0;
            Ladder next = run(2 * refine, &steps_next);
            const double diff = max_amplitude_difference(prev, next);
            prev = std::move(next);
            steps_prev = steps_next;
            refine *= 2;
            if (diff <= settings.phase_tolerance) break;
        }
    }

    if (report) {
        report->steps = steps_prev;
        report->refinement = refine;
        report->p_min = prev.p_lo;
        report->p_max = prev.p_hi();
        double norm_sq = 0.0;
        for (const auto& a : prev.amps) norm_sq += std::norm(a);
        report->norm_drift = std::abs(norm_sq - 1.0);
    }

    PlaneWaveState out;
    out.kappa = state.kappa;
    out.p_min = prev.p_lo;
    out.amplitudes = std::move(prev.amps);
    return out;
}

PlaneWaveState free_propagate(const PlaneWaveState& state, double dtau) {
    if (!(dtau >= 0.0)) throw std::invalid_argument("free_propagate requires dtau >= 0");
    PlaneWaveState out = state;
    for (int p = out.p_min; p <= out.p_max(); ++p) {
        const double k = out.kappa + 2.0 * p;
        const double phase = -k * k * dtau;
        out.amplitudes[static_cast<std::size_t>(p - out.p_min)] *=
            std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return out;
}

std::vector<DiffractionLine> diffraction_spectrum(const PlaneWaveState& state) {
    if (std::abs(state.norm_squared() - 1.0) > 1e-9) {
        throw std::invalid_argument("diffraction_spectrum requires a normalized state");
    }
    std::vector<DiffractionLine> lines;
    lines.reserve(state.amplitudes.size());
    for (int p = state.p_min; p <= state.p_max(); ++p) {
        const auto a = state.amplitude(p);
        DiffractionLine line;
        line.order = p;
        line.population = std::norm(a);
        line.phase = (a == std::complex<double>{}) ? 0.0 : std::arg(a);
        if (line.phase <= -std::numbers::pi) line.phase = std::numbers::pi;  // fold to (-pi, pi]
        lines.push_back(line);
    }
    return lines;
}

}  // namespace mattersim
