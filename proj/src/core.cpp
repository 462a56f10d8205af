#include "mattersim/core.hpp"

#include <algorithm>
#include <cmath>

namespace mattersim {

void PhysicalConfig::validate() const {
    if (!(recoil_angular_frequency > 0.0) || !std::isfinite(recoil_angular_frequency)) {
        throw std::invalid_argument("recoil_angular_frequency must be positive");
    }
    if (laser_wavevector > 0.0 && atomic_mass > 0.0) {
        const double expected = hbar * laser_wavevector * laser_wavevector / (2.0 * atomic_mass);
        if (std::abs(expected - recoil_angular_frequency) > 1e-9 * expected) {
            throw std::invalid_argument(
                "recoil_angular_frequency inconsistent with hbar k^2 / (2 m)");
        }
    }
}

double to_reduced(const PhysicalConfig& cfg, double t_seconds) {
    cfg.validate();
    if (!std::isfinite(t_seconds) || t_seconds < 0.0) {
        throw std::invalid_argument("time must be finite and non-negative");
    }
    return cfg.recoil_angular_frequency * t_seconds;
}

double q_from_potential(double v0) {
    if (!std::isfinite(v0) || v0 < 0.0) {
        throw std::invalid_argument("potential depth must be finite and non-negative");
    }
    return v0 / 4.0;
}

PulseEnvelope PulseEnvelope::rectangular(double q_max, double tau_start, double tau_end) {
    if (!(q_max >= 0.0) || !std::isfinite(q_max)) {
        throw std::invalid_argument("q_max must be finite and non-negative");
    }
    if (!(tau_start <= tau_end)) {
        throw std::invalid_argument("pulse support must satisfy tau_start <= tau_end");
    }
    PulseEnvelope env;
    env.shape = PulseShape::Rectangular;
    env.q_max = q_max;
    env.tau_start = tau_start;
    env.tau_end = tau_end;
    return env;
}

PulseEnvelope PulseEnvelope::gaussian(double q_max, double center, double sigma) {
    if (!(q_max >= 0.0) || !std::isfinite(q_max)) {
        throw std::invalid_argument("q_max must be finite and non-negative");
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be positive");
    }
    PulseEnvelope env;
    env.shape = PulseShape::Gaussian;
    env.q_max = q_max;
    env.center = center;
    env.sigma = sigma;
    env.tau_start = center - 5.0 * sigma;
    env.tau_end = center + 5.0 * sigma;
    return env;
}

PulseEnvelope PulseEnvelope::tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("tabulated envelope needs at least two samples");
    }
    double peak = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [tau, q] = samples[i];
        if (!std::isfinite(tau) || !std::isfinite(q) || q < 0.0) {
            throw std::invalid_argument("tabulated samples must be finite with q >= 0");
        }
        if (i > 0 && !(tau > samples[i - 1].first)) {
            throw std::invalid_argument("tabulated sample times must be strictly increasing");
        }
        peak = std::max(peak, q);
    }
    PulseEnvelope env;
    env.shape = PulseShape::Tabulated;
    env.q_max = peak;
    env.tau_start = samples.front().first;
    env.tau_end = samples.back().first;
    env.samples = std::move(samples);
    return env;
}

double PulseEnvelope::value(double tau) const {
    if (tau < tau_start || tau > tau_end) return 0.0;
    switch (shape) {
        case PulseShape::Rectangular:
            return q_max;
        case PulseShape::Gaussian: {
            const double u = (tau - center) / sigma;
            return q_max * std::exp(-0.5 * u * u);
        }
        case PulseShape::Tabulated: {
            auto it = std::lower_bound(samples.begin(), samples.end(), tau,
                                       [](const auto& s, double t) { return s.first < t; });
            if (it == samples.begin()) return it->second;
            if (it == samples.end()) return samples.back().second;
            const auto& [t1, q1] = *(it - 1);
            const auto& [t2, q2] = *it;
            return q1 + (q2 - q1) * (tau - t1) / (t2 - t1);
        }
    }
    return 0.0;
}

bool PulseEnvelope::is_zero() const { return q_max == 0.0; }

std::vector<double> PulseEnvelope::breakpoints() const {
    std::vector<double> pts{tau_start, tau_end};
    if (shape == PulseShape::Tabulated) {
        for (const auto& [tau, q] : samples) pts.push_back(tau);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    }
    return pts;
}

PulseEnvelope PulseEnvelope::scaled(double factor) const {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
        throw std::invalid_argument("scale factor must be finite and non-negative");
    }
    PulseEnvelope env = *this;
    env.q_max *= factor;
    for (auto& [tau, q] : env.samples) q *= factor;
    return env;
}

double PulseEnvelope::area() const {
    switch (shape) {
        case PulseShape::Rectangular:
            return q_max * duration();
        case PulseShape::Gaussian: {
            // integral of q_max exp(-u^2 / (2 sigma^2)) over +-5 sigma
            const double two_pi = 4.0 * std::acos(0.0);
            return q_max * sigma * std::sqrt(two_pi) * std::erf(5.0 / std::sqrt(2.0));
        }
        case PulseShape::Tabulated: {
            double acc = 0.0;
            for (std::size_t i = 1; i < samples.size(); ++i) {
                acc += 0.5 * (samples[i].second + samples[i - 1].second) *
                       (samples[i].first - samples[i - 1].first);
            }
            return acc;
        }
    }
    return 0.0;
}

double envelope_value(const PulseEnvelope& env, double tau) { return env.value(tau); }

std::complex<double> PlaneWaveState::amplitude(int p) const {
    if (p < p_min || p > p_max()) return {0.0, 0.0};
    return amplitudes[static_cast<std::size_t>(p - p_min)];
}

double PlaneWaveState::population(int p) const { return std::norm(amplitude(p)); }

double PlaneWaveState::norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amplitudes) acc += std::norm(a);
    return acc;
}

PlaneWaveState PlaneWaveState::basis_state(double kappa, int p0) {
    const int lo = std::min(p0, 0);
    const int hi = std::max(p0, 0);
    std::vector<std::complex<double>> amps(static_cast<std::size_t>(hi - lo + 1));
    amps[static_cast<std::size_t>(p0 - lo)] = 1.0;
    return from_amplitudes(kappa, lo, std::move(amps));
}

PlaneWaveState PlaneWaveState::from_amplitudes(double kappa, int p_min,
                                               std::vector<std::complex<double>> amps) {
    if (!(kappa > -1.0) || !(kappa <= 1.0)) {
        throw std::invalid_argument("kappa must lie in the first Brillouin zone (-1, 1]");
    }
    if (amps.empty()) {
        throw std::invalid_argument("amplitude vector must be non-empty");
    }
    const int p_max = p_min + static_cast<int>(amps.size()) - 1;
    if (p_min > 0 || p_max < 0) {
        throw std::invalid_argument("order range must contain p = 0");
    }
    double norm_sq = 0.0;
    for (const auto& a : amps) norm_sq += std::norm(a);
    if (!(norm_sq > 0.0) || !std::isfinite(norm_sq)) {
        throw std::invalid_argument("state must have a positive finite norm");
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& a : amps) a *= inv;
    PlaneWaveState state;
    state.kappa = kappa;
    state.p_min = p_min;
    state.amplitudes = std::move(amps);
    return state;
}

}  // namespace mattersim
