#include "mattersim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mattersim {

namespace {

constexpr double pi = std::numbers::pi;

double bessel_series_small_x(int n, double x) {
    // (x/2)^n / n! * (1 - (x/2)^2 / (n+1)), enough below x ~ 1e-6
    const double half = 0.5 * x;
    double term = 1.0;
    for (int k = 1; k <= n; ++k) term *= half / k;
    return term * (1.0 - half * half / (n + 1));
}

}  // namespace

double bessel_j(int n, double x) {
    if (n < 0 || n > 64) throw std::invalid_argument("bessel_j: order must be in [0, 64]");
    if (!(x >= 0.0) || x > 64.0) throw std::invalid_argument("bessel_j: argument must be in [0, 64]");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x < 1e-6) return bessel_series_small_x(n, x);

    const int start = 2 * std::max(n, static_cast<int>(std::ceil(x))) + 20;
    double fkp1 = 0.0;   // f_{k+1}
    double fk = 1e-30;   // f_k, arbitrary seed
    double result = (n == start) ? fk : 0.0;
    double even_sum = (start % 2 == 0) ? fk : 0.0;
    for (int k = start; k > 0; --k) {
        double fkm1 = (2.0 * k / x) * fk - fkp1;
        fkp1 = fk;
        fk = fkm1;
        const int order = k - 1;
        if (order == n) result = fk;
        if (order > 0 && order % 2 == 0) even_sum += fk;
        if (std::abs(fk) > 1e250) {  // rescale to avoid overflow
            fk *= 1e-250;
            fkp1 *= 1e-250;
            result *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    const double norm = fk + 2.0 * even_sum;  // J_0 + 2 sum_{k>=1} J_2k = 1
    return result / norm;
}

int raman_nath_min_span(double gamma) {
    for (int span = 1; span <= 64; ++span) {
        double kept = bessel_j(0, gamma) * bessel_j(0, gamma);
        for (int p = 1; p <= span; ++p) {
            const double j = bessel_j(p, gamma);
            kept += 2.0 * j * j;
        }
        if (kept >= 1.0 - 1e-10) return span;
    }
    throw std::invalid_argument("raman_nath_min_span: gamma too large");
}

PlaneWaveState raman_nath_state(double gamma, int p_span, double* truncation_deficit) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
    if (p_span < 0) throw std::invalid_argument("p_span must be non-negative");

    // powers of (-i), exact
    static const std::complex<double> phase_cycle[4] = {
        {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};
    std::vector<std::complex<double>> amps(static_cast<std::size_t>(2 * p_span + 1));
    double kept = 0.0;
    for (int p = -p_span; p <= p_span; ++p) {
        const int ap = std::abs(p);
        const double j = bessel_j(ap, gamma);
        amps[static_cast<std::size_t>(p + p_span)] = phase_cycle[ap % 4] * j;
        kept += j * j;
    }
    const double deficit = 1.0 - kept;
    if (deficit > 1e-10) {
        throw std::invalid_argument("raman_nath_state: p_span too small for this gamma");
    }
    if (truncation_deficit) *truncation_deficit = std::max(deficit, 0.0);
    return PlaneWaveState::from_amplitudes(0.0, -p_span, std::move(amps));
}

double raman_nath_validity_bound(double q) {
    if (!(q > 0.0)) throw std::invalid_argument("validity bound requires q > 0");
    return 1.0 / (4.0 * std::sqrt(q));
}

namespace {

double adaptive_simpson(const PulseEnvelope& env, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = 0.5 * env.value(lm) * env.value(lm);
    const double frm = 0.5 * env.value(rm) * env.value(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(env, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(env, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double simpson_segment(const PulseEnvelope& env, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = 0.5 * env.value(a) * env.value(a);
    const double fm = 0.5 * env.value(m) * env.value(m);
    const double fb = 0.5 * env.value(b) * env.value(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(env, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double rabi_phase(const PulseEnvelope& env) {
    switch (env.shape) {
        case PulseShape::Rectangular:
            return 0.5 * env.q_max * env.q_max * env.duration();
        case PulseShape::Gaussian:
            // q^2 integrates to q_max^2 sigma sqrt(pi) erf(5) over +-5 sigma
            return 0.5 * env.q_max * env.q_max * env.sigma * std::sqrt(pi) * std::erf(5.0);
        case PulseShape::Tabulated: {
            // q is piecewise linear, so q^2/2 is piecewise quadratic and
            // Simpson is exact per interval.
            double acc = 0.0;
            for (std::size_t i = 1; i < env.samples.size(); ++i) {
                const auto& [t1, q1] = env.samples[i - 1];
                const auto& [t2, q2] = env.samples[i];
                const double qm = 0.5 * (q1 + q2);
                acc += (t2 - t1) / 6.0 * (0.5 * q1 * q1 + 4.0 * 0.5 * qm * qm + 0.5 * q2 * q2);
            }
            return acc;
        }
    }
    return 0.0;
}

double rabi_phase_quadrature(const PulseEnvelope& env) {
    if (env.duration() <= 0.0 || env.is_zero()) return 0.0;
    double acc = 0.0;
    const auto pts = env.breakpoints();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        acc += simpson_segment(env, pts[i - 1], pts[i], 1e-12);
    }
    return acc;
}

BraggEffectiveModel effective_two_level(double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw std::invalid_argument("q must be finite and non-negative");
    }
    BraggEffectiveModel m;
    m.q = q;
    m.ground_shift = -0.5 * q * q;
    m.diagonal = 4.0 + q * q / 6.0;
    m.coupling = 0.25 * q * q;
    m.beyond_validity = q > 1.0;
    return m;
}

PlaneWaveState bragg_apply(const PlaneWaveState& state, const PulseEnvelope& env) {
    if (state.kappa != 0.0) {
        throw std::invalid_argument("bragg_apply requires kappa = 0");
    }
    double outside = 0.0;
    for (int p = state.p_min; p <= state.p_max(); ++p) {
        if (p < -1 || p > 1) outside += state.population(p);
    }
    if (outside > 1e-9) {
        throw std::invalid_argument("bragg_apply: population outside p in {-1, 0, +1}");
    }

    const double phi_r = rabi_phase(env);
    const double dtau = env.duration();
    const std::complex<double> i_unit(0.0, 1.0);
    const std::complex<double> zero_phase = std::exp(i_unit * phi_r);
    const std::complex<double> pair_phase = std::exp(-i_unit * (4.0 * dtau + phi_r / 3.0));
    const double c = std::cos(0.5 * phi_r);
    const double s = std::sin(0.5 * phi_r);

    const auto a_m = state.amplitude(-1);
    const auto a_0 = state.amplitude(0);
    const auto a_p = state.amplitude(+1);

    PlaneWaveState out;
    out.kappa = state.kappa;
    out.p_min = std::min(state.p_min, -1);
    const int p_top = std::max(state.p_max(), 1);
    out.amplitudes.resize(static_cast<std::size_t>(p_top - out.p_min + 1));
    for (int p = state.p_min; p <= state.p_max(); ++p) {
        out.amplitudes[static_cast<std::size_t>(p - out.p_min)] = state.amplitude(p);
    }
    auto set = [&out](int p, std::complex<double> v) {
        out.amplitudes[static_cast<std::size_t>(p - out.p_min)] = v;
    };
    set(0, zero_phase * a_0);
    set(-1, pair_phase * (c * a_m - i_unit * s * a_p));
    set(+1, pair_phase * (c * a_p - i_unit * s * a_m));
    return out;
}

double design_pi_pulse(PulseShape shape, double duration_param) {
    if (!(duration_param > 0.0)) {
        throw std::invalid_argument("duration parameter must be positive");
    }
    switch (shape) {
        case PulseShape::Rectangular:
            return std::sqrt(2.0 * pi / duration_param);
        case PulseShape::Gaussian:
            return std::sqrt(2.0 * pi / (duration_param * std::sqrt(pi) * std::erf(5.0)));
        case PulseShape::Tabulated:
            throw std::invalid_argument("tabulated shapes need a base envelope; "
                                        "use design_pi_pulse(const PulseEnvelope&)");
    }
    throw std::invalid_argument("unknown pulse shape");
}

double design_pi_pulse(const PulseEnvelope& base) {
    const double base_phase = rabi_phase(base);
    if (!(base_phase > 0.0)) {
        throw std::invalid_argument("base envelope must have a positive Rabi phase");
    }
    // rabi_phase scales as the square of the amplitude factor; bisect on it.
    double lo = 0.0;
    double hi = 1.0;
    while (rabi_phase(base.scaled(hi)) < pi) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rabi_phase(base.scaled(mid)) < pi) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi) * base.q_max;
}

}  // namespace mattersim
