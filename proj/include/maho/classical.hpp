#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maho/common.hpp"
#include "maho/model.hpp"

namespace maho {

/// Boundary data of the classical two-point problem: go from (x1, y1) at
/// time 0 to (x2, y2) at time T > 0.
struct Endpoints {
    double x1 = 0, y1 = 0;
    double x2 = 0, y2 = 0;
    double T = 0;
};

inline void validate(const Endpoints& ep) {
    if (!(ep.T > 0.0) || !std::isfinite(ep.T))
        throw std::invalid_argument("Endpoints: T must be positive and finite");
    if (!std::isfinite(ep.x1) || !std::isfinite(ep.y1) || !std::isfinite(ep.x2) ||
        !std::isfinite(ep.y2))
        throw std::invalid_argument("Endpoints: coordinates must be finite");
}

/// Real amplitudes of the two normal modes. Coupled regime:
///   x(t) =  A cos(Omega1 t) + B sin(Omega1 t) + C cos(Omega2 t) + D sin(Omega2 t)
///   y(t) = -Lambda1 (A sin(Omega1 t) - B cos(Omega1 t))
///          -Lambda2 (C sin(Omega2 t) - D cos(Omega2 t)).
/// Decoupled regime (omega0 ~ 0): (A, B) drive x at omega1 and (C, D) drive
/// y at omega2 independently.
struct ModeCoefficients {
    double A = 0, B = 0, C = 0, D = 0;
};

/// One sample of the classical flow.
struct PhasePoint {
    double t = 0;
    double x = 0, y = 0;
    double vx = 0, vy = 0;
};

/// Velocities at the two ends of a boundary-value solution.
struct EndpointVelocities {
    double vx1 = 0, vy1 = 0;
    double vx2 = 0, vy2 = 0;
};

/// Relative determinant threshold below which the boundary problem is
/// treated as conjugate (caustic) and refused.
inline constexpr double kBoundaryDetTolerance = 1e-9;

/// 4x4 map from mode amplitudes (A, B, C, D) to boundary data
/// (x1, y1, x2, y2). Coupled regime only; the decoupled problem splits into
/// two independent 2x2 solves handled inside solve_modes.
inline Eigen::Matrix4d boundary_matrix(const DerivedFrequencies& d, double T) {
    if (d.decoupled)
        throw std::invalid_argument("boundary_matrix: requires the coupled regime");
    const double L1 = *d.Lambda1, L2 = *d.Lambda2;
    const double s1 = std::sin(d.Omega1 * T), c1 = std::cos(d.Omega1 * T);
    const double s2 = std::sin(d.Omega2 * T), c2 = std::cos(d.Omega2 * T);
    Eigen::Matrix4d M;
    M << 1, 0, 1, 0,
         0, L1, 0, L2,
         c1, s1, c2, s2,
         -L1 * s1, L1 * c1, -L2 * s2, L2 * c2;
    return M;
}

/// Solve the boundary-value problem for the mode amplitudes.
/// Throws CausticError when the endpoints sit at (or numerically near) a
/// conjugate time, where the solution is not unique.
inline ModeCoefficients solve_modes(const Endpoints& ep, const DerivedFrequencies& d) {
    validate(ep);
    if (d.decoupled) {
        auto axis = [&](double q1, double q2, double w, double& cA, double& cB) {
            const double s = std::sin(w * ep.T);
            if (std::abs(s) < kBoundaryDetTolerance)
                throw CausticError(ep.T, s, kBoundaryDetTolerance);
            cA = q1;
            cB = (q2 - q1 * std::cos(w * ep.T)) / s;
        };
        ModeCoefficients mc;
        axis(ep.x1, ep.x2, d.omega1, mc.A, mc.B);
        axis(ep.y1, ep.y2, d.omega2, mc.C, mc.D);
        return mc;
    }
    const Eigen::Matrix4d M = boundary_matrix(d, ep.T);
    // Row equilibration: the Lambda-weighted rows can dwarf the position rows
    // by orders of magnitude near the decoupled regime, which would inflate
    // norm^4 far beyond the determinant's natural scale and misfire the guard
    // on perfectly regular systems. After scaling every row to unit length the
    // determinant measures pure volume collapse, vanishing only at conjugate
    // times.
    Eigen::Vector4d row_scale;
    for (int i = 0; i < 4; ++i) row_scale[i] = 1.0 / M.row(i).norm();
    const Eigen::Matrix4d Me = row_scale.asDiagonal() * M;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(Me);
    const double det = lu.determinant();
    const double norm = Me.norm();
    const double threshold = kBoundaryDetTolerance * norm * norm * norm * norm;
    if (std::abs(det) < threshold) throw CausticError(ep.T, det, threshold);
    const Eigen::Vector4d rhs(ep.x1 * row_scale[0], ep.y1 * row_scale[1],
                              ep.x2 * row_scale[2], ep.y2 * row_scale[3]);
    const Eigen::Vector4d sol = lu.solve(rhs);
    return {sol[0], sol[1], sol[2], sol[3]};
}

/// Evaluate the classical flow of a mode solution at time t.
inline PhasePoint trajectory_point(const ModeCoefficients& mc, const DerivedFrequencies& d,
                                   double t) {
    PhasePoint p;
    p.t = t;
    if (d.decoupled) {
        const double s1 = std::sin(d.omega1 * t), c1 = std::cos(d.omega1 * t);
        const double s2 = std::sin(d.omega2 * t), c2 = std::cos(d.omega2 * t);
        p.x = mc.A * c1 + mc.B * s1;
        p.y = mc.C * c2 + mc.D * s2;
        p.vx = d.omega1 * (-mc.A * s1 + mc.B * c1);
        p.vy = d.omega2 * (-mc.C * s2 + mc.D * c2);
        return p;
    }
    const double L1 = *d.Lambda1, L2 = *d.Lambda2;
    const double O1 = d.Omega1, O2 = d.Omega2;
    const double s1 = std::sin(O1 * t), c1 = std::cos(O1 * t);
    const double s2 = std::sin(O2 * t), c2 = std::cos(O2 * t);
    p.x = mc.A * c1 + mc.B * s1 + mc.C * c2 + mc.D * s2;
    p.y = -L1 * (mc.A * s1 - mc.B * c1) - L2 * (mc.C * s2 - mc.D * c2);
    p.vx = O1 * (-mc.A * s1 + mc.B * c1) + O2 * (-mc.C * s2 + mc.D * c2);
    p.vy = -L1 * O1 * (mc.A * c1 + mc.B * s1) - L2 * O2 * (mc.C * c2 + mc.D * s2);
    return p;
}

/// Uniformly sampled trajectory over [0, T], endpoints included.
inline std::vector<PhasePoint> trajectory(const ModeCoefficients& mc,
                                          const DerivedFrequencies& d, double T,
                                          int samples) {
    if (samples < 2) throw std::invalid_argument("trajectory: need at least 2 samples");
    if (!(T > 0.0)) throw std::invalid_argument("trajectory: T must be positive");
    std::vector<PhasePoint> out;
    out.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double t = T * static_cast<double>(i) / (samples - 1);
        out.push_back(trajectory_point(mc, d, t));
    }
    return out;
}

/// Mode amplitudes from initial phase-space data (x, y, vx, vy) at t = 0.
/// Inverse of trajectory_point at t = 0; useful for forward propagation and
/// centroid tracking.
inline ModeCoefficients modes_from_initial(double x, double y, double vx, double vy,
                                           const DerivedFrequencies& d) {
    if (d.decoupled)
        return {x, vx / d.omega1, y, vy / d.omega2};
    const double L1 = *d.Lambda1, L2 = *d.Lambda2;
    const double O1 = d.Omega1, O2 = d.Omega2;
    // x = A + C, y = L1 B + L2 D, vx = O1 B + O2 D, vy = -L1 O1 A - L2 O2 C.
    Eigen::Matrix2d mAC, mBD;
    mAC << 1, 1, -L1 * O1, -L2 * O2;
    mBD << L1, L2, O1, O2;
    const Eigen::Vector2d ac = mAC.colPivHouseholderQr().solve(Eigen::Vector2d(x, vy));
    const Eigen::Vector2d bd = mBD.colPivHouseholderQr().solve(Eigen::Vector2d(y, vx));
    return {ac[0], bd[0], ac[1], bd[1]};
}

} // namespace maho
