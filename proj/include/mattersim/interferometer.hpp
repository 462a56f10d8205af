#pragma once

#include <optional>
#include <span>

#include "mattersim/core.hpp"
#include "mattersim/propagator.hpp"

namespace mattersim {

enum class SimulationMode { Analytic, Numeric };

struct DetectionWindow {
    double tau_start = 0.0;
    double span = 0.0;
    int samples = 64;
};

/// Splitter at tau = 0, second-order Bragg mirror around tau = T, homodyne
/// read-out of the cos(2X) matter grating afterwards.
struct InterferometerConfig {
    SimulationMode mode = SimulationMode::Analytic;
    double gamma = 0.0;          // splitter pulse area, ignored if first_pulse is set
    double first_pulse_q = 25.0; // rect coupling used to realize gamma in numeric mode
    std::optional<PulseEnvelope> first_pulse;
    double mirror_time = 0.0;    // T
    PulseEnvelope bragg;         // mirror pulse, support inside (tau_RN, detection)
    std::optional<DetectionWindow> detection;  // default: one pi/2 window, 64 samples
    double power_scale = 0.0;    // relative offset applied to the Bragg q_max
    PropagationSettings settings{};

    PulseEnvelope resolved_first_pulse() const;
    double resolved_gamma() const;
    DetectionWindow resolved_detection() const;
    void validate() const;
};

struct FitResult {
    double phase = 0.0;      // in [0, pi); meaningless when degenerate
    double amplitude = 0.0;
    double offset = 0.0;
    double residual = 0.0;   // rms of data minus model
    bool degenerate = false;
};

struct SignalTrace {
    SimulationMode mode = SimulationMode::Analytic;
    std::vector<double> taus;
    std::vector<double> values;
    FitResult fit;
};

struct PowerSensitivity {
    std::vector<double> epsilons;
    std::vector<double> phases;      // fitted phase per epsilon, mod pi
    double fitted_slope = 0.0;      // dPhi/depsilon regressed from the runs
    double level_shift_slope = 0.0; // 2 * (4 pi / 3): only the level-shift phase scales
    double full_model_slope = 0.0;  // 2 * (11 pi / 6): includes the Rabi rotation phase
};

/// e^{2iX} Fourier coefficient of the atomic density at kappa = 0:
/// c2 = sum_p a_{p+1} conj(a_p). The cos(2X) density modulation is 2 |c2|.
std::complex<double> grating_amplitude(const PlaneWaveState& state);

/// Least-squares fit of S = A cos^2(omega tau + Phi) + B by projection on
/// {1, cos(2 omega tau), sin(2 omega tau)}. Throws DegenerateFitError on
/// period-commensurate aliasing; a vanishing oscillation is flagged, not
/// thrown.
FitResult extract_phase(std::span<const double> taus, std::span<const double> values,
                        double angular_frequency = 4.0);

FitResult extract_phase(const SignalTrace& trace, double angular_frequency = 4.0);

/// Full interferometer run: splitter, free flight, mirror, detection scan,
/// phase fit. Analytic mode keeps only p in {-1, 0, +1}; numeric mode
/// integrates the reduced Schroedinger equation through both pulses.
SignalTrace simulate(const InterferometerConfig& config);

/// Reruns simulate with q_max -> (1 + eps) q_max per entry and regresses
/// the fitted phase against eps. Requires |eps| <= 0.1.
PowerSensitivity power_sensitivity(const InterferometerConfig& config,
                                   std::span<const double> epsilons);

/// Rectangular mirror pulse with Rabi phase pi, centered on T.
PulseEnvelope rect_pi_pulse(double q, double mirror_time);

/// Gaussian mirror pulse with Rabi phase pi, centered on T.
PulseEnvelope gaussian_pi_pulse(double sigma, double mirror_time);

/// Experimental preset: rect splitter q = 3.7 over tau = 0.157 and a
/// Gaussian sigma = 0.6 pi-mirror. The designed q_max ~ 2.43 sits outside
/// the second-order validity range; callers should surface that warning.
InterferometerConfig mit_2002_preset(double mirror_time);

}  // namespace mattersim
