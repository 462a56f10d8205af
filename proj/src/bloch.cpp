#include "mattersim/bloch.hpp"

#include "mattersim/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mattersim/parallel.hpp"

namespace mattersim {

TridiagonalHamiltonian build_hamiltonian(double kappa, double q, int p_span) {
    if (!(kappa > -1.0) || !(kappa <= 1.0)) {
        throw std::invalid_argument("kappa must lie in the first Brillouin zone (-1, 1]");
    }
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw std::invalid_argument("q must be finite and non-negative");
    }
    if (p_span < 1) {
        throw std::invalid_argument("p_span must be at least 1");
    }
    TridiagonalHamiltonian h;
    h.kappa = kappa;
    h.q = q;
    h.p_min = -p_span;
    h.p_max = p_span;
    const int n = 2 * p_span + 1;
    h.diagonal.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double k = kappa + 2.0 * (h.p_min + i);
        h.diagonal[static_cast<std::size_t>(i)] = k * k;
    }
    h.off_diagonal.assign(static_cast<std::size_t>(n - 1), q);
    return h;
}

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

}  // namespace

// Implicit-shift QL for a symmetric tridiagonal matrix, derived from the
// Algol tql2 procedure (Bowdler, Martin, Reinsch, Wilkinson) and its
// EISPACK descendant, with eigenvector accumulation and a final sort.
Eigensystem tridiagonal_eigensystem(std::span<const double> diagonal,
                                    std::span<const double> off_diagonal) {
    const int n = static_cast<int>(diagonal.size());
    if (n < 1) throw std::invalid_argument("empty matrix");
    if (off_diagonal.size() + 1 != diagonal.size()) {
        throw std::invalid_argument("off-diagonal must have size n - 1");
    }

    std::vector<double> d(diagonal.begin(), diagonal.end());
    std::vector<double> e(off_diagonal.begin(), off_diagonal.end());
    e.push_back(0.0);

    // z: eigenvector matrix, z[r * n + c] = component r of eigenvector c.
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;

    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 50) {
                    throw NonConvergenceError("tridiagonal QL: sweep limit reached");
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {  // recover from a vanishing rotation
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        auto* row = &z[static_cast<std::size_t>(k) * n];
                        f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    Eigensystem sys;
    sys.values.resize(static_cast<std::size_t>(n));
    sys.vectors.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        sys.values[static_cast<std::size_t>(i)] = d[src];
        auto& v = sys.vectors[static_cast<std::size_t>(i)];
        v.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = z[static_cast<std::size_t>(k) * n + src];
    }
    return sys;
}

Eigensystem eigensystem(const TridiagonalHamiltonian& h) {
    return tridiagonal_eigensystem(h.diagonal, h.off_diagonal);
}

int default_p_span(double q) {
    const int span = static_cast<int>(std::ceil(2.0 * std::sqrt(std::max(q, 0.0)))) + 6;
    return std::max(8, span);
}

BandStructure band_structure(double q, int n_kappa, int n_bands, int p_span) {
    if (n_kappa < 2) throw std::invalid_argument("n_kappa must be at least 2");
    if (p_span == 0) p_span = default_p_span(q);
    if (n_bands < 1 || n_bands > 2 * p_span) {
        throw std::invalid_argument("n_bands must satisfy 1 <= n_bands <= 2 p_span");
    }
    BandStructure bs;
    bs.q = q;
    bs.kappa_grid.resize(static_cast<std::size_t>(n_kappa));
    bs.energies.resize(static_cast<std::size_t>(n_kappa));
    for (int i = 0; i < n_kappa; ++i) {
        bs.kappa_grid[static_cast<std::size_t>(i)] = -1.0 + 2.0 * (i + 1) / n_kappa;
    }
    parallel_for(n_kappa, [&](int i) {
        const auto h = build_hamiltonian(bs.kappa_grid[static_cast<std::size_t>(i)], q, p_span);
        auto sys = eigensystem(h);
        sys.values.resize(static_cast<std::size_t>(n_bands));
        bs.energies[static_cast<std::size_t>(i)] = std::move(sys.values);
    });
    return bs;
}

double ground_energy_shift(double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) {
        throw std::invalid_argument("q must be finite and non-negative");
    }
    if (q == 0.0) return 0.0;
    int span = default_p_span(q);
    double prev = eigensystem(build_hamiltonian(0.0, q, span)).values.front();
    for (int i = 0; i < 64; ++i) {
        span += 4;
        const double next = eigensystem(build_hamiltonian(0.0, q, span)).values.front();
        if (std::abs(next - prev) < 1e-12) return next;
        prev = next;
    }
    throw NonConvergenceError("ground_energy_shift: basis size did not converge");
}

}  // namespace mattersim
