#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mattersim {

/// Reported when an iterative routine cannot reach its requested accuracy.
struct NonConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reported when a signal fit has no usable oscillating component.
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double hbar = 1.054571817e-34;  // J s

/// Physical anchor for reduced units. All computation downstream is in
/// reduced units; this only converts laboratory times.
struct PhysicalConfig {
    double recoil_angular_frequency;  // rad/s
    double laser_wavevector = 0.0;    // 1/m, informational
    double atomic_mass = 0.0;         // kg, informational

    // Throws if omega_rec <= 0 or if k_L and m are both given and
    // inconsistent with omega_rec = hbar k^2 / (2 m) at 1e-9 relative.
    void validate() const;
};

/// tau = omega_rec * t. Rejects negative or non-finite t.
double to_reduced(const PhysicalConfig& cfg, double t_seconds);

/// q = V0 / 4 with V0 in units of hbar*omega_rec. Rejects V0 < 0.
double q_from_potential(double v0);

enum class PulseShape { Rectangular, Gaussian, Tabulated };

/// Time profile q(tau) of the reduced coupling. Gaussian pulses are
/// truncated at +-5 sigma; the neglected tail of the q^2 integral is
/// below 3e-6 of the total.
struct PulseEnvelope {
    PulseShape shape = PulseShape::Rectangular;
    double q_max = 0.0;
    double tau_start = 0.0;
    double tau_end = 0.0;
    double center = 0.0;  // Gaussian only
    double sigma = 0.0;   // Gaussian only
    std::vector<std::pair<double, double>> samples;  // Tabulated only

    static PulseEnvelope rectangular(double q_max, double tau_start, double tau_end);
    static PulseEnvelope gaussian(double q_max, double center, double sigma);
    static PulseEnvelope tabulated(std::vector<std::pair<double, double>> samples);

    double value(double tau) const;
    double duration() const { return tau_end - tau_start; }
    bool is_zero() const;

    /// Times where q(tau) is not smooth: support edges plus tabulated knots.
    std::vector<double> breakpoints() const;

    /// Same shape with every q value multiplied by `factor` (>= 0).
    PulseEnvelope scaled(double factor) const;

    /// Pulse area integral q(tau) d tau (exact for all three shapes).
    double area() const;
};

/// q(tau) for any envelope; zero outside the support.
double envelope_value(const PulseEnvelope& env, double tau);

/// Complex amplitudes on the momentum ladder |kappa + 2p>. Normalized on
/// construction; instances are treated as immutable values.
struct PlaneWaveState {
    double kappa = 0.0;  // pseudo-momentum, in (-1, 1]
    int p_min = 0;
    std::vector<std::complex<double>> amplitudes;  // index i <-> p = p_min + i

    int p_max() const { return p_min + static_cast<int>(amplitudes.size()) - 1; }
    std::complex<double> amplitude(int p) const;
    double population(int p) const;
    double norm_squared() const;

    /// |kappa + 2 p0> with the order range padded to include p = 0.
    static PlaneWaveState basis_state(double kappa, int p0);

    /// Builds and normalizes; rejects zero vectors, kappa outside (-1, 1],
    /// and ranges not containing p = 0.
    static PlaneWaveState from_amplitudes(double kappa, int p_min,
                                          std::vector<std::complex<double>> amps);
};

}  // namespace mattersim
