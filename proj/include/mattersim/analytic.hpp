#pragma once

#include "mattersim/core.hpp"

namespace mattersim {

/// Effective two-level model for second-order Bragg diffraction between
/// |+2> and |-2>, valid through O(q^2). Entries in recoil units.
struct BraggEffectiveModel {
    double q = 0.0;
    double ground_shift = 0.0;  // energy correction of |0>, -q^2/2
    double diagonal = 4.0;      // 4 + q^2/6
    double coupling = 0.0;      // q^2/4
    bool beyond_validity = false;  // set when q > 1
};

/// J_n(x) for 0 <= n <= 64, 0 <= x <= 64, absolute error <= 1e-10.
/// Miller downward recurrence normalized by J_0 + 2 sum J_2k = 1.
double bessel_j(int n, double x);

/// Raman-Nath output of a pulse of area gamma = 2 integral q d tau acting
/// on |0>: amplitudes (-i)^|p| J_|p|(gamma), truncated at |p| <= p_span.
/// Requires the kept weight to be >= 1 - 1e-10; the discarded weight is
/// written to *truncation_deficit when given.
PlaneWaveState raman_nath_state(double gamma, int p_span,
                                double* truncation_deficit = nullptr);

/// Smallest p_span accepted by raman_nath_state for this gamma.
int raman_nath_min_span(double gamma);

/// Upper duration bound 1 / (4 sqrt(q)) for the Raman-Nath approximation.
double raman_nath_validity_bound(double q);

/// Rabi phase integral q(tau)^2 / 2 d tau over the pulse. Closed forms for
/// rectangular and Gaussian shapes, exact piecewise integration for
/// tabulated ones.
double rabi_phase(const PulseEnvelope& env);

/// Same integral by adaptive quadrature (cross-check path).
double rabi_phase_quadrature(const PulseEnvelope& env);

BraggEffectiveModel effective_two_level(double q);

/// Second-order Bragg pulse acting on a state confined to p in {-1, 0, +1}
/// at kappa = 0: a_0 gains e^{i phi_r}; the pair (a_-1, a_+1) undergoes the
/// resonant Rabi rotation with the mean-shift phase -(4 dtau + phi_r / 3).
PlaneWaveState bragg_apply(const PlaneWaveState& state, const PulseEnvelope& env);

/// Peak coupling giving rabi_phase = pi for the shape. Rectangular takes
/// the pulse duration, Gaussian takes sigma.
double design_pi_pulse(PulseShape shape, double duration_param);

/// Scales an arbitrary envelope so its Rabi phase is pi; returns the scaled
/// peak coupling.
double design_pi_pulse(const PulseEnvelope& base);

}  // namespace mattersim
