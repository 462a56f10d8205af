#pragma once

#include <span>
#include <vector>

namespace mattersim {

/// Fixed-kappa lattice Hamiltonian in the plane-wave basis |kappa + 2p>,
/// p = -p_span .. +p_span. Diagonal (kappa + 2p)^2, uniform off-diagonal q,
/// energies in recoil units.
struct TridiagonalHamiltonian {
    double kappa = 0.0;
    double q = 0.0;
    int p_min = 0;
    int p_max = 0;
    std::vector<double> diagonal;      // size n
    std::vector<double> off_diagonal;  // size n - 1, all equal to q

    int size() const { return static_cast<int>(diagonal.size()); }
};

struct Eigensystem {
    std::vector<double> values;                 // ascending
    std::vector<std::vector<double>> vectors;   // vectors[i] pairs with values[i]
};

/// Band energies eps(kappa, p) sampled on a uniform grid over (-1, 1]
/// (kappa = 1 included, kappa = -1 excluded).
struct BandStructure {
    double q = 0.0;
    std::vector<double> kappa_grid;
    std::vector<std::vector<double>> energies;  // energies[i][band], ascending per i
};

TridiagonalHamiltonian build_hamiltonian(double kappa, double q, int p_span);

/// Eigenvalues and orthonormal eigenvectors of a symmetric tridiagonal
/// matrix, implicit-shift QL with accumulated rotations. Throws
/// NonConvergenceError after 50 sweeps on any eigenvalue.
Eigensystem tridiagonal_eigensystem(std::span<const double> diagonal,
                                    std::span<const double> off_diagonal);

Eigensystem eigensystem(const TridiagonalHamiltonian& h);

/// Default truncation that keeps edge couplings negligible for all q treated.
int default_p_span(double q);

/// Lowest n_bands eigenvalues per kappa grid point. p_span = 0 picks the
/// default truncation.
BandStructure band_structure(double q, int n_kappa, int n_bands, int p_span = 0);

/// Lowest eigenvalue at kappa = 0, basis enlarged until it moves < 1e-12.
double ground_energy_shift(double q);

}  // namespace mattersim
