#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maho/common.hpp"
#include "maho/grid.hpp"
#include "maho/model.hpp"
#include "maho/propagator.hpp"

namespace maho {

/// Normalized Gaussian packet: center (x0, y0), mean momentum (px, py),
/// position width sigma per axis (|psi|^2 has standard deviation sigma).
struct GaussianSpec {
    double x0 = 0, y0 = 0;
    double px = 0, py = 0;
    double sigma = 1;
};

inline WaveField gaussian(const Grid2D& g, const GaussianSpec& s,
                          const OscillatorConfig& cfg) {
    if (!(s.sigma > 0.0)) throw std::invalid_argument("gaussian: sigma must be positive");
    WaveField f(g);
    const double norm = 1.0 / (2.0 * std::numbers::pi * s.sigma * s.sigma);
    const double amp = std::sqrt(norm);
    const double q = 1.0 / (4.0 * s.sigma * s.sigma);
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            const double r2 = (x - s.x0) * (x - s.x0) + (y - s.y0) * (y - s.y0);
            const double ph = (s.px * x + s.py * y) / cfg.hbar;
            f.at(ix, iy) = amp * std::exp(-q * r2) * std::polar(1.0, ph);
        }
    }
    return f;
}

/// Even two-lobe superposition along x: Gaussians of width sigma centered at
/// -a0/2 and +a0/2, tensored with a matched-width Gaussian in y. Normalized
/// in closed form including the lobe overlap eps = exp(-a0^2 / 8 sigma^2).
inline WaveField cat_state(const Grid2D& g, double a0, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("cat_state: sigma must be positive");
    if (!(a0 >= 0.0)) throw std::invalid_argument("cat_state: a0 must be nonnegative");
    WaveField f(g);
    const double eps = std::exp(-a0 * a0 / (8.0 * sigma * sigma));
    const double ax =
        std::pow(8.0 * std::numbers::pi * sigma * sigma, -0.25) / std::sqrt(1.0 + eps);
    const double ay = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
    const double q = 1.0 / (4.0 * sigma * sigma);
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        const double lobes = std::exp(-q * (x + 0.5 * a0) * (x + 0.5 * a0)) +
                             std::exp(-q * (x - 0.5 * a0) * (x - 0.5 * a0));
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            f.at(ix, iy) = ax * lobes * ay * std::exp(-q * y * y);
        }
    }
    return f;
}

/// Second moment <x^2> of the cat state in closed form, for checking the
/// initial grid sampling.
inline double cat_x2_expectation(double a0, double sigma) {
    const double eps = std::exp(-a0 * a0 / (8.0 * sigma * sigma));
    return sigma * sigma + 0.25 * a0 * a0 / (1.0 + eps);
}

/// Apply the kernel to a sampled state with the trapezoid rule:
///   out(r2) = sum_r1 w(r1) dx dy K(r2, T; r1) psi(r1).
///
/// The phase separation in KernelForm turns the naive O(n^4) double loop
/// over point pairs into, per output row, one (ny x nx) * (nx x m) complex
/// matrix product plus elementwise work. The oscillatory factors along each
/// source axis are generated by a phase recurrence (one complex multiply per
/// element) rather than per-element exponentials.
inline WaveField apply_kernel(const KernelForm& kf, const WaveField& psi,
                              const Grid2D& out_grid) {
    validate(psi.grid);
    validate(out_grid);
    const Grid2D& g = psi.grid;
    const double dA = g.dx() * g.dy();

    // Source-side factor: quadrature weights and the r1-only phase.
    Eigen::MatrixXcd P(g.nx, g.ny);
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        const double wx = trapezoid_weight(ix, g.nx);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            const double wy = trapezoid_weight(iy, g.ny);
            const double ph = kf.u1 * x * x + kf.u2 * y * y - kf.z * x * y;
            P(ix, iy) = wx * wy * dA * psi.at(ix, iy) * std::polar(1.0, ph);
        }
    }

    WaveField res(out_grid);
    const int m = out_grid.ny;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int ix2 = 0; ix2 < out_grid.nx; ++ix2) {
        const double X = out_grid.x(ix2);
        Eigen::VectorXd Lx(m), Ly(m), P2(m);
        for (int j = 0; j < m; ++j) {
            const double Y = out_grid.y(j);
            Lx[j] = kf.v1 * X + kf.w * Y;
            Ly[j] = kf.v2 * Y - kf.w * X;
            P2[j] = kf.u1 * X * X + kf.u2 * Y * Y + kf.z * X * Y;
        }
        // Ex(i, j) = exp(i x1_i Lx_j), Ey likewise, built by recurrence in i.
        Eigen::MatrixXcd Ex(g.nx, m), Ey(g.ny, m);
        for (int j = 0; j < m; ++j) {
            const std::complex<double> sx = std::polar(1.0, g.dx() * Lx[j]);
            std::complex<double> vx = std::polar(1.0, g.x_min * Lx[j]);
            for (int i = 0; i < g.nx; ++i, vx *= sx) Ex(i, j) = vx;
            const std::complex<double> sy = std::polar(1.0, g.dy() * Ly[j]);
            std::complex<double> vy = std::polar(1.0, g.y_min * Ly[j]);
            for (int i = 0; i < g.ny; ++i, vy *= sy) Ey(i, j) = vy;
        }
        const Eigen::MatrixXcd T1 = P.transpose() * Ex;            // ny x m
        const Eigen::RowVectorXcd row = (T1.array() * Ey.array()).colwise().sum();
        for (int j = 0; j < m; ++j)
            res.at(ix2, j) = kf.amp * std::polar(1.0, P2[j]) * row[j];
    }
    return res;
}

/// How to realize finite-time evolution with the exact kernel.
///   direct : one kernel application at time t.
///   split  : equal sub-steps chosen so every sub-step stays away from the
///            caustic zeros of D; needed whenever t itself is at or near a
///            conjugate time.
enum class Method { exact_kernel, exact_kernel_split };

/// Probability fraction in the outer frame above which the window is flagged
/// as too small for the requested evolution.
inline constexpr double kEscapeThreshold = 1e-6;

struct PropagationResult {
    WaveField field;
    double edge_fraction = 0;
    bool escape_warning = false;
    int segments = 1;
};

/// Smallest segment count n such that D(t / n) is comfortably away from
/// zero, judged against the largest |D| seen on (0, t].
inline int choose_split(const DerivedFrequencies& d, double t, int max_segments = 256) {
    double dmax = 0.0;
    const int samples = 512;
    for (int i = 1; i <= samples; ++i) {
        const double ti = t * i / samples;
        dmax = std::max(dmax, std::abs(coefficients(d, ti).D));
    }
    const double floor_val = std::max(0.05 * dmax, 10.0 * caustic_threshold(d));
    for (int n = 1; n <= max_segments; ++n) {
        if (std::abs(coefficients(d, t / n).D) >= floor_val) return n;
    }
    throw ConvergenceError("choose_split: no caustic-safe segmentation found");
}

/// Evolve a sampled state to time t >= 0 on its own grid. t = 0 returns the
/// input unchanged. The edge fraction of the result is always measured; the
/// escape flag warns that probability has reached the window boundary and
/// the samples there are no longer trustworthy.
inline PropagationResult propagate(const WaveField& psi0, const OscillatorConfig& cfg,
                                   const DerivedFrequencies& d, double t,
                                   Method method = Method::exact_kernel) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("propagate: t must be nonnegative and finite");
    PropagationResult pr;
    if (t == 0.0) {
        pr.field = psi0;
        pr.segments = 0;
    } else if (method == Method::exact_kernel) {
        const KernelForm kf = kernel_form(cfg, d, t);
        pr.field = apply_kernel(kf, psi0, psi0.grid);
        pr.segments = 1;
    } else {
        const int n = choose_split(d, t);
        const KernelForm kf = kernel_form(cfg, d, t / n);
        pr.field = psi0;
        for (int k = 0; k < n; ++k) pr.field = apply_kernel(kf, pr.field, psi0.grid);
        pr.segments = n;
    }
    pr.edge_fraction = edge_probability_fraction(pr.field);
    pr.escape_warning = pr.edge_fraction > kEscapeThreshold;
    return pr;
}

/// Scalar diagnostics of a sampled state at one instant.
struct Observables {
    double t = 0;
    double norm = 0;
    double x_mean = 0, y_mean = 0;
    double x2_mean = 0, y2_mean = 0;
    double autocorr = 0;  // |<reference|state>|; 0 when no reference given
};

inline Observables observables(const WaveField& f, double t,
                               const WaveField* reference = nullptr) {
    Observables ob;
    ob.t = t;
    double n2 = 0, xm = 0, ym = 0, x2 = 0, y2 = 0;
    const Grid2D& g = f.grid;
    for (int ix = 0; ix < g.nx; ++ix) {
        const double x = g.x(ix);
        const double wx = trapezoid_weight(ix, g.nx);
        for (int iy = 0; iy < g.ny; ++iy) {
            const double y = g.y(iy);
            const double p = wx * trapezoid_weight(iy, g.ny) * std::norm(f.at(ix, iy));
            n2 += p;
            xm += p * x;
            ym += p * y;
            x2 += p * x * x;
            y2 += p * y * y;
        }
    }
    const double dA = g.dx() * g.dy();
    n2 *= dA;
    ob.norm = std::sqrt(n2);
    if (n2 > 0) {
        ob.x_mean = xm * dA / n2;
        ob.y_mean = ym * dA / n2;
        ob.x2_mean = x2 * dA / n2;
        ob.y2_mean = y2 * dA / n2;
    }
    if (reference) ob.autocorr = std::abs(inner_product(*reference, f));
    return ob;
}

} // namespace maho
