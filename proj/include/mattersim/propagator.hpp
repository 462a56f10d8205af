#pragma once

#include "mattersim/core.hpp"

namespace mattersim {

struct PropagationSettings {
    double phase_tolerance = 1e-4;       // target accuracy on every amplitude
    double max_step = 0.05;              // upper bound on the time step
    double truncation_threshold = 1e-12; // edge population that triggers basis growth
    double diagonal_offset = 0.0;        // constant added to the Hamiltonian diagonal

    void validate() const;
};

/// Run diagnostics filled in by propagate().
struct PropagationReport {
    long steps = 0;          // Crank-Nicolson steps of the accepted run
    int refinement = 1;      // step-halving factor of the accepted run
    int p_min = 0;
    int p_max = 0;
    double norm_drift = 0.0; // | |psi|^2 - 1 | at the end
};

/// Evolves `state` under i dPsi/dtau = -d^2 Psi/dX^2 + q(tau)(e^{2iX} + e^{-2iX}) Psi
/// restricted to the |kappa + 2p> ladder, from tau_a to tau_b.
///
/// One-step map is the Cayley (Crank-Nicolson) form with q sampled at the
/// step midpoint; steps never straddle an envelope breakpoint; intervals
/// where the envelope vanishes use the exact free phase map. The basis is
/// extended by 4 orders whenever the two outermost populations on a side
/// exceed the truncation threshold. The whole run is repeated with halved
/// steps until the end states agree to phase_tolerance on every amplitude.
PlaneWaveState propagate(const PlaneWaveState& state, const PulseEnvelope& env,
                         double tau_a, double tau_b,
                         const PropagationSettings& settings = {},
                         PropagationReport* report = nullptr);

/// Exact free evolution: a_p -> exp(-i (kappa + 2p)^2 dtau) a_p.
PlaneWaveState free_propagate(const PlaneWaveState& state, double dtau);

struct DiffractionLine {
    int order = 0;
    double population = 0.0;
    double phase = 0.0;  // in (-pi, pi]
};

/// Per-order populations and phases of a normalized state.
std::vector<DiffractionLine> diffraction_spectrum(const PlaneWaveState& state);

}  // namespace mattersim
