#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "maho/calibration.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/evolve.hpp"
#include "maho/grid.hpp"
#include "maho/model.hpp"
#include "maho/propagator.hpp"
#include "maho/spectrum.hpp"

namespace maho {

/// One-dimensional harmonic-oscillator kernel in its standard complex form,
///   sqrt(m w / (2 pi i hbar sin wT)) *
///   exp{ i m w / (2 hbar sin wT) [ (x1^2 + x2^2) cos wT - 2 x1 x2 ] }.
/// Independent reference for the decoupled limit, where the 2D kernel must
/// factor into a product of two of these.
inline complexd mehler_kernel(double x1, double x2, double T, double omega,
                              double m, double hbar) {
    const double s = std::sin(omega * T);
    if (std::abs(s) < 1e-12)
        throw CausticError(T, s, 1e-12);
    const complexd denom = complexd(0.0, 1.0) * (2.0 * std::numbers::pi * hbar * s);
    const complexd amp = std::sqrt(m * omega / denom);
    const double phase =
        m * omega / (2.0 * hbar * s) * ((x1 * x1 + x2 * x2) * std::cos(omega * T) - 2.0 * x1 * x2);
    return amp * std::polar(1.0, phase);
}

/// Finite-difference Hamiltonian on the grid with Dirichlet walls, using
/// fourth-order central stencils for both derivative orders. Row/column
/// index matches WaveField storage: idx = ix * ny + iy.
///
/// symmetric gauge:
///   H = -hbar^2/2m Lap + (w0/2)(y px - x py)
///       + m/2 [(w1^2 + w0^2/4) x^2 + (w2^2 + w0^2/4) y^2]
/// weighted gauge:
///   H = -hbar^2/2m Lap + (w0/(w1+w2))(w2 y px - w1 x py)
///       + m/2 gamma^2 (w1^2 x^2 + w2^2 y^2)
inline Eigen::SparseMatrix<complexd> build_hamiltonian(const Grid2D& g,
                                                       const OscillatorConfig& cfg,
                                                       const DerivedFrequencies& d,
                                                       Gauge gauge = Gauge::symmetric) {
    validate(g);
    const double hx = g.dx(), hy = g.dy();
    const double kin = -cfg.hbar * cfg.hbar / (2.0 * cfg.m);
    // f''(0) ~ sum_k c2[k] f(k h) / h^2, f'(0) ~ sum_k c1[k] f(k h) / h.
    const double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    const double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};

    double ax, ay;  // coefficients of y*px and x*py
    double vx2, vy2;
    if (gauge == Gauge::symmetric) {
        ax = 0.5 * d.omega0;
        ay = -0.5 * d.omega0;
        vx2 = d.omega1 * d.omega1 + 0.25 * d.omega0 * d.omega0;
        vy2 = d.omega2 * d.omega2 + 0.25 * d.omega0 * d.omega0;
    } else {
        ax = d.omega0 * d.omega2 / (d.omega1 + d.omega2);
        ay = -d.omega0 * d.omega1 / (d.omega1 + d.omega2);
        vx2 = d.gamma * d.gamma * d.omega1 * d.omega1;
        vy2 = d.gamma * d.gamma * d.omega2 * d.omega2;
    }

    const int n = static_cast<int>(g.size());
    std::vector<Eigen::Triplet<complexd>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 9);
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            const int row = ix * g.ny + iy;
            const double pot =
                0.5 * cfg.m * (vx2 * x * x + vy2 * y * y);
            for (int k = -2; k <= 2; ++k) {
                // x-direction neighbors: kinetic + y*px term
                const int jx = ix + k;
                if (jx >= 0 && jx < g.nx) {
                    complexd v = kin * c2[k + 2] / (hx * hx);
                    // (y px) psi = -i hbar y d/dx psi
                    v += complexd(0.0, -cfg.hbar * ax * y) * c1[k + 2] / hx;
                    if (k == 0) v += pot;
                    trip.emplace_back(row, jx * g.ny + iy, v);
                }
                // y-direction neighbors: kinetic + x*py term
                if (k != 0) {
                    const int jy = iy + k;
                    if (jy >= 0 && jy < g.ny) {
                        complexd v = kin * c2[k + 2] / (hy * hy);
                        v += complexd(0.0, -cfg.hbar * ay * x) * c1[k + 2] / hy;
                        trip.emplace_back(row, ix * g.ny + jy, v);
                    }
                } else {
                    trip.emplace_back(row, row, kin * c2[2] / (hy * hy));
                }
            }
        }
    }
    Eigen::SparseMatrix<complexd> H(n, n);
    H.setFromTriplets(trip.begin(), trip.end());
    return H;
}

/// Lowest eigenpairs of a Hermitian sparse matrix.
struct EigenResult {
    std::vector<double> values;   // ascending
    Eigen::MatrixXcd vectors;     // matching columns, unit norm
    std::vector<double> residuals;  // ||H v - lambda v|| per pair
};

namespace detail {

/// One Lanczos run of fixed subspace size on the inverted operator.
/// Returns false when some requested pair misses the residual tolerance
/// (typically a nearly degenerate pair needing a longer recurrence).
inline bool lanczos_invert_once(const Eigen::SparseMatrix<complexd>& H,
                                Eigen::SparseLU<Eigen::SparseMatrix<complexd>>& lu,
                                int k, int m, double tol, EigenResult& res) {
    const int n = static_cast<int>(H.rows());
    Eigen::MatrixXcd V(n, m);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);

    // Deterministic dense start vector.
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = complexd(1.0 + 0.37 * std::sin(1.0 + i), 0.11 * std::cos(2.0 + 3.0 * i));
    v.normalize();

    int built = 0;
    for (int j = 0; j < m; ++j) {
        V.col(j) = v;
        built = j + 1;
        Eigen::VectorXcd w = lu.solve(v);
        alpha[j] = v.dot(w).real();
        w -= alpha[j] * v;
        if (j > 0) w -= beta[j - 1] * V.col(j - 1);
        // Full reorthogonalization, applied twice.
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(built) * (V.leftCols(built).adjoint() * w);
        const double b = w.norm();
        if (b < 1e-14) break;  // invariant subspace reached
        beta[j] = b;
        v = w / b;
    }
    if (built < k) return false;

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
        T(j, j) = alpha[j];
        if (j + 1 < built) {
            T(j, j + 1) = beta[j];
            T(j + 1, j) = beta[j];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
        throw ConvergenceError("eigensolve: tridiagonal solve failed");

    // Largest theta of H^{-1} <-> smallest lambda of H; thetas ascend in es.
    res = EigenResult{};
    res.vectors.resize(n, k);
    std::vector<std::pair<double, Eigen::VectorXcd>> pairs;
    for (int i = 0; i < k; ++i) {
        const int idx = built - 1 - i;
        const double theta = es.eigenvalues()[idx];
        if (!(theta > 0)) return false;
        const double lambda = 1.0 / theta;
        Eigen::VectorXcd u = V.leftCols(built) * es.eigenvectors().col(idx);
        u.normalize();
        pairs.emplace_back(lambda, std::move(u));
    }
    // Nearly tied pairs can come out swapped; present them ascending.
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (int i = 0; i < k; ++i) {
        const double lambda = pairs[static_cast<std::size_t>(i)].first;
        const Eigen::VectorXcd& u = pairs[static_cast<std::size_t>(i)].second;
        const double resid = (H * u - lambda * u).norm();
        if (!(resid < tol)) return false;
        res.values.push_back(lambda);
        res.vectors.col(i) = u;
        res.residuals.push_back(resid);
    }
    return true;
}

} // namespace detail

/// Shift-invert Lanczos about sigma = 0 with full reorthogonalization.
/// Assumes H is Hermitian positive definite (true for these Hamiltonians).
/// Every returned pair is residual-checked against the original matrix; if
/// a pair misses `tol` the recurrence is retried with a doubled subspace
/// (same factorization) before giving up with ConvergenceError.
inline EigenResult eigensolve(const Eigen::SparseMatrix<complexd>& H, int k,
                              int subspace = 0, double tol = 1e-8) {
    const int n = static_cast<int>(H.rows());
    if (k < 1 || k > n) throw std::invalid_argument("eigensolve: bad pair count");
    const int m0 = std::min(subspace > 0 ? subspace : std::max(80, 10 * k + 20), n);

    Eigen::SparseLU<Eigen::SparseMatrix<complexd>> lu;
    lu.compute(H);
    if (lu.info() != Eigen::Success)
        throw ConvergenceError("eigensolve: sparse factorization failed");

    EigenResult res;
    for (int m = m0; m <= std::min(4 * m0, n); m *= 2) {
        if (detail::lanczos_invert_once(H, lu, k, m, tol, res)) return res;
        if (m == n) break;
    }
    throw ConvergenceError("eigensolve: residual tolerance not reached");
}

/// Default spectral window: square grid out to 8 ground-state lengths of the
/// faster hybrid mode.
inline Grid2D suggested_spectrum_grid(const OscillatorConfig& cfg,
                                      const DerivedFrequencies& d, int n = 128) {
    const double Omega = d.decoupled ? std::max(d.omega1, d.omega2) : d.Omega1;
    const double ell = std::sqrt(cfg.hbar / (cfg.m * Omega));
    return Grid2D::centered(8.0 * ell, n);
}

/// Result of arbitrating the closed-form level prefactor against the
/// finite-difference spectrum.
struct CalibrationReport {
    double chosen_prefactor = 0;
    double residual_chosen = 0;       // worst relative miss over k levels
    double residual_alternative = 0;
    std::vector<double> numeric;      // finite-difference eigenvalues
    std::vector<double> predicted;    // closed form with chosen prefactor
};

/// Compare the k lowest finite-difference eigenvalues against the closed
/// form E = 2 kappa hbar [Omega1 (n1 + 1/2) + Omega2 (n2 + 1/2)] for
/// kappa in {1/2, 1/4} and pick the winner. Refuses to answer when the
/// winner misses badly or the two candidates are not clearly separated.
inline CalibrationReport calibrate_spectrum(const OscillatorConfig& cfg,
                                            const DerivedFrequencies& d,
                                            const Grid2D& g, int k,
                                            Gauge gauge = Gauge::symmetric) {
    const auto H = build_hamiltonian(g, cfg, d, gauge);
    const EigenResult eig = eigensolve(H, k);
    const auto levels = levels_sorted(cfg, k);

    const double candidates[2] = {0.5, 0.25};
    double worst[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
        for (int i = 0; i < k; ++i) {
            const double pred =
                energy_canonical(levels[static_cast<std::size_t>(i)].idx, d, cfg,
                                 candidates[c]);
            worst[c] = std::max(worst[c], std::abs(eig.values[static_cast<std::size_t>(i)] - pred) / pred);
        }
    }
    const int best = worst[0] <= worst[1] ? 0 : 1;
    CalibrationReport rep;
    rep.chosen_prefactor = candidates[best];
    rep.residual_chosen = worst[best];
    rep.residual_alternative = worst[1 - best];
    rep.numeric = eig.values;
    for (int i = 0; i < k; ++i)
        rep.predicted.push_back(energy_canonical(levels[static_cast<std::size_t>(i)].idx,
                                                 d, cfg, rep.chosen_prefactor));
    if (!(rep.residual_chosen < 1e-2))
        throw ConvergenceError("calibrate_spectrum: winning prefactor residual " +
                               std::to_string(rep.residual_chosen) + " too large");
    if (!(rep.residual_alternative > 10.0 * rep.residual_chosen))
        throw ConvergenceError("calibrate_spectrum: candidates not separated");
    return rep;
}

/// Largest frequency entering the unitary-step quality bound.
inline double max_frequency(const DerivedFrequencies& d) {
    return d.decoupled ? std::max(d.omega1, d.omega2) : d.Omega_plus;
}

/// Crank-Nicolson reference evolution under the finite-difference
/// Hamiltonian. Unconditionally stable and norm-preserving; second order in
/// dt. By default insists on dt * max_frequency <= 1e-3 so the reference is
/// trustworthy wherever it is used as ground truth; pass enforce_step_limit
/// = false for deliberately coarse runs.
inline WaveField evolve_reference(const WaveField& psi0, const OscillatorConfig& cfg,
                                  const DerivedFrequencies& d, double t, double dt,
                                  Gauge gauge = Gauge::symmetric,
                                  bool enforce_step_limit = true) {
    if (!(t >= 0.0) || !(dt > 0.0))
        throw std::invalid_argument("evolve_reference: bad time arguments");
    if (enforce_step_limit && dt * max_frequency(d) > 1e-3 * (1.0 + 1e-12))
        throw std::invalid_argument(
            "evolve_reference: dt too coarse for reference quality");
    if (t == 0.0) return psi0;
    const int steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
    const double h = t / steps;

    const auto H = build_hamiltonian(psi0.grid, cfg, d, gauge);
    const int n = static_cast<int>(H.rows());
    Eigen::SparseMatrix<complexd> I(n, n);
    I.setIdentity();
    const complexd coef(0.0, 0.5 * h / cfg.hbar);
    Eigen::SparseMatrix<complexd> A = I + coef * H;
    Eigen::SparseMatrix<complexd> B = I - coef * H;
    Eigen::SparseLU<Eigen::SparseMatrix<complexd>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw ConvergenceError("evolve_reference: factorization failed");

    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(psi0.data.data(), n);
    for (int s = 0; s < steps; ++s) v = lu.solve(B * v);

    WaveField out(psi0.grid);
    Eigen::Map<Eigen::VectorXcd>(out.data.data(), n) = v;
    return out;
}

/// Smooth truncation window for oscillatory midpoint integrals: flat near
/// the center, erf roll-off of scale edge_width starting at half_width.
struct WindowSpec {
    double half_width = 0;
    double edge_width = 0;
};

/// Composition check: evaluate integral over the midpoint of
/// K(r2, T - t_mid; rm) K(rm, t_mid; r1) on the given grid, weighted by a
/// smooth window centered on the stationary midpoint (the classical path
/// position at t_mid). A hard cutoff converges only like 1/L on this
/// integrand; the smooth edge suppresses the boundary contribution
/// exponentially.
inline complexd composed_kernel(const Endpoints& ep, const OscillatorConfig& cfg,
                                const DerivedFrequencies& d, double t_mid,
                                const Grid2D& g, const WindowSpec& w) {
    if (!(t_mid > 0.0) || !(t_mid < ep.T))
        throw std::invalid_argument("composed_kernel: t_mid must split (0, T)");
    const ModeCoefficients mc = solve_modes(ep, d);
    const PhasePoint sp = trajectory_point(mc, d, t_mid);

    const KernelForm k1 = kernel_form(cfg, d, t_mid);
    const KernelForm k2 = kernel_form(cfg, d, ep.T - t_mid);
    const double dA = g.dx() * g.dy();

    complexd acc = 0.0;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        const double wx = trapezoid_weight(ix, g.nx) *
                          0.5 * std::erfc((std::abs(x - sp.x) - w.half_width) / w.edge_width);
        if (wx == 0.0) continue;
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            const double wy =
                trapezoid_weight(iy, g.ny) *
                0.5 * std::erfc((std::abs(y - sp.y) - w.half_width) / w.edge_width);
            const double phase = kernel_phase(k1, ep.x1, ep.y1, x, y) +
                                 kernel_phase(k2, x, y, ep.x2, ep.y2);
            acc += wx * wy * std::polar(1.0, phase);
        }
    }
    return acc * dA * k1.amp * k2.amp;
}

} // namespace maho
