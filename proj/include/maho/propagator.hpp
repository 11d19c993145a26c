#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "maho/action.hpp"
#include "maho/calibration.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/model.hpp"

namespace maho {

using complexd = std::complex<double>;

/// Vector potential convention for the kernel. The quadratic Lagrangian used
/// throughout corresponds to the symmetric gauge A = (B/2)(-y, x); the
/// weighted gauge redistributes the field between the axes in proportion to
/// omega1 : omega2 and differs by a boundary phase only.
enum class Gauge { symmetric, weighted };

/// One evaluation of the time-dependent kernel K(r2, T; r1, 0).
struct KernelValue {
    complexd amplitude;  // prefactor in front of exp(i S / hbar)
    double phase = 0;    // S / hbar
    complexd value;      // amplitude * exp(i phase)
};

/// Mixed second derivatives of the classical action with respect to the two
/// endpoints; the 2x2 block whose determinant fixes the kernel amplitude.
struct VanVleckMatrix {
    double x1x2 = 0, x1y2 = 0;
    double y1x2 = 0, y1y2 = 0;
};

/// Kernel in separated form: value(r1, r2) = amp * exp(i phase(r1, r2)) with
///
///   phase = u1 (x1^2 + x2^2) + u2 (y1^2 + y2^2) + v1 x1 x2 + v2 y1 y2
///           + w (x1 y2 - x2 y1) + z (x2 y2 - x1 y1).
///
/// For a fixed target point (X, Y) the phase splits as
///   [u1 x1^2 + u2 y1^2 - z x1 y1] + [u1 X^2 + u2 Y^2 + z X Y]
///   + x1 (v1 X + w Y) + y1 (v2 Y - w X):
/// one factor depends on the source point only, one on the target only, and
/// the mixing is linear in x1 and y1 separately. That separation is what
/// makes grid application run as matrix products instead of a fresh
/// 4-argument exponential per point pair.
struct KernelForm {
    complexd amp;
    double u1 = 0, u2 = 0;
    double v1 = 0, v2 = 0;
    double w = 0, z = 0;
    double T = 0;
};

/// Branch note: the amplitude uses the principal complex square root times
/// exp(-i pi/2). Between t = 0 and the first conjugate time this is the
/// standard continuation of the free kernel; past a conjugate time the
/// overall constant phase jump per crossing is not accumulated. Every
/// modulus observable and any comparison done on a single branch is
/// unaffected; long evolutions that must cross a caustic should be split at
/// intermediate times and composed.
inline complexd amplitude(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                          const ActionCoefficients& ac) {
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(ac.T, ac.D, thr);
    const double ratio = d.decoupled
                             ? d.omega1 * d.omega2
                             : d.omega1 * d.omega2 * d.Omega_plus * d.Omega_minus;
    const complexd root = std::sqrt(complexd(ratio / ac.D, 0.0));
    const complexd rotate(0.0, -1.0);
    return cfg.m / (2.0 * std::numbers::pi * cfg.hbar) * root * rotate;
}

inline complexd amplitude(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                          double T) {
    return amplitude(cfg, d, coefficients(d, T));
}

/// Van Vleck block of the action Hessian at elapsed time T.
inline VanVleckMatrix van_vleck(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                                double T) {
    const ActionCoefficients ac = coefficients(d, T);
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(T, ac.D, thr);
    const double k = calibration::kActionCrossFactor;
    VanVleckMatrix m;
    m.x1x2 = -cfg.m * ac.b1 / ac.D;
    m.x1y2 = 0.5 * k * cfg.m * ac.c1 / ac.D;
    m.y1x2 = -0.5 * k * cfg.m * ac.c1 / ac.D;
    m.y1y2 = -cfg.m * ac.b2 / ac.D;
    return m;
}

/// Amplitude recomputed from the Van Vleck determinant,
/// |det(-d^2 S / dr1 dr2)|^(1/2) / (2 pi hbar), as an independent numerical
/// route: it consumes b1, b2, c1 instead of the frequency product.
inline complexd amplitude_from_determinant(const OscillatorConfig& cfg,
                                           const DerivedFrequencies& d,
                                           const ActionCoefficients& ac) {
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(ac.T, ac.D, thr);
    const VanVleckMatrix vv = [&] {
        const double k = calibration::kActionCrossFactor;
        VanVleckMatrix m;
        m.x1x2 = -cfg.m * ac.b1 / ac.D;
        m.x1y2 = 0.5 * k * cfg.m * ac.c1 / ac.D;
        m.y1x2 = -0.5 * k * cfg.m * ac.c1 / ac.D;
        m.y1y2 = -cfg.m * ac.b2 / ac.D;
        return m;
    }();
    const double det = vv.x1x2 * vv.y1y2 - vv.x1y2 * vv.y1x2;
    const complexd root = std::sqrt(complexd(det, 0.0));
    const complexd rotate(0.0, -1.0);
    return root * rotate / (2.0 * std::numbers::pi * cfg.hbar);
}

/// Separated kernel coefficients at elapsed time T (symmetric gauge).
inline KernelForm kernel_form(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                              double T) {
    const ActionCoefficients ac = coefficients(d, T);
    const double thr = caustic_threshold(d);
    if (std::abs(ac.D) < thr) throw CausticError(T, ac.D, thr);
    const double s = 0.5 * cfg.m / (cfg.hbar * ac.D);
    KernelForm kf;
    kf.amp = amplitude(cfg, d, ac);
    kf.u1 = s * ac.a1;
    kf.u2 = s * ac.a2;
    kf.v1 = -2.0 * s * ac.b1;
    kf.v2 = -2.0 * s * ac.b2;
    kf.w = s * calibration::kActionCrossFactor * ac.c1;
    kf.z = s * ac.c2;
    kf.T = T;
    return kf;
}

inline double kernel_phase(const KernelForm& kf, double x1, double y1, double x2,
                           double y2) {
    return kf.u1 * (x1 * x1 + x2 * x2) + kf.u2 * (y1 * y1 + y2 * y2) +
           kf.v1 * x1 * x2 + kf.v2 * y1 * y2 + kf.w * (x1 * y2 - x2 * y1) +
           kf.z * (x2 * y2 - x1 * y1);
}

/// Gauge function Lambda(x, y) whose boundary difference converts the
/// symmetric-gauge kernel into the weighted-gauge kernel.
inline double gauge_function(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                             double x, double y) {
    return 0.5 * cfg.m * d.omega0 * (d.omega1 - d.omega2) / (d.omega1 + d.omega2) * x *
           y;
}

/// exp{i [Lambda(r2) - Lambda(r1)] / hbar}.
inline complexd gauge_phase_factor(const OscillatorConfig& cfg,
                                   const DerivedFrequencies& d, const Endpoints& ep) {
    const double dphase = (gauge_function(cfg, d, ep.x2, ep.y2) -
                           gauge_function(cfg, d, ep.x1, ep.y1)) /
                          cfg.hbar;
    return std::polar(1.0, dphase);
}

/// Evaluate the kernel between two endpoints. Throws CausticError at (or
/// numerically near) conjugate times.
inline KernelValue kernel(const Endpoints& ep, const OscillatorConfig& cfg,
                          const DerivedFrequencies& d,
                          Gauge gauge = Gauge::symmetric) {
    validate(ep);
    const KernelForm kf = kernel_form(cfg, d, ep.T);
    KernelValue kv;
    kv.amplitude = kf.amp;
    kv.phase = kernel_phase(kf, ep.x1, ep.y1, ep.x2, ep.y2);
    kv.value = kv.amplitude * std::polar(1.0, kv.phase);
    if (gauge == Gauge::weighted) {
        const complexd g = gauge_phase_factor(cfg, d, ep);
        kv.value *= g;
        kv.phase += std::arg(g);
    }
    return kv;
}

} // namespace maho
