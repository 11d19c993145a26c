#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "maho/common.hpp"

namespace maho {

/// Physical parameters of the planar oscillator: trap frequencies omega1 (x),
/// omega2 (y), cyclotron frequency omega0 = qB0/(m c) of the transverse
/// magnetic field, mass and hbar. Natural units m = hbar = 1 by default.
struct OscillatorConfig {
    double m = 1.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double omega0 = 0.0;
    double hbar = 1.0;
};

/// Cyclotron frequency of a charge in a uniform field, omega0 = q B0 / (m c).
inline double cyclotron_frequency(double charge, double field, double mass,
                                  double light_speed = 1.0) {
    if (mass <= 0.0 || light_speed <= 0.0)
        throw std::invalid_argument("cyclotron_frequency: mass and c must be positive");
    return charge * field / (mass * light_speed);
}

inline void validate(const OscillatorConfig& cfg) {
    auto bad = [](double v) { return !std::isfinite(v); };
    if (bad(cfg.m) || bad(cfg.omega1) || bad(cfg.omega2) || bad(cfg.omega0) || bad(cfg.hbar))
        throw std::invalid_argument("OscillatorConfig: parameters must be finite");
    if (cfg.m <= 0.0) throw std::invalid_argument("OscillatorConfig: m must be > 0");
    if (cfg.hbar <= 0.0) throw std::invalid_argument("OscillatorConfig: hbar must be > 0");
    if (cfg.omega1 <= 0.0 || cfg.omega2 <= 0.0)
        throw std::invalid_argument("OscillatorConfig: omega1 and omega2 must be > 0");
    if (cfg.omega0 < 0.0) throw std::invalid_argument("OscillatorConfig: omega0 must be >= 0");
}

/// Below omega0 < kDecoupledRatio * max(omega1, omega2) the magnetic coupling
/// is numerically negligible and the dynamics is treated as two independent
/// 1D oscillators; the mode-mixing ratios Lambda are undefined there.
inline constexpr double kDecoupledRatio = 1e-8;

/// Frequencies and mode-geometry constants derived from a configuration.
///
/// Omega_plus/Omega_minus are the combination frequencies
///   Omega_pm = sqrt(omega0^2 + (omega1 +- omega2)^2),
/// Omega1/Omega2 = (Omega_plus +- Omega_minus)/2 the two normal-mode
/// frequencies (Omega1 >= Omega2 > 0). Lambda1/Lambda2 are the y/x amplitude
/// ratios of the two rotating modes and exist only in the coupled regime.
struct DerivedFrequencies {
    double omega1 = 0, omega2 = 0, omega0 = 0;  // inputs carried along
    double Omega_plus = 0, Omega_minus = 0;
    double Omega1 = 0, Omega2 = 0;
    double gamma = 0;   // Omega_plus / (omega1 + omega2)
    double b = 0;       // omega2 / omega1
    double c = 0;       // 2 omega0 sqrt(b) / Omega_plus
    std::optional<double> Lambda1, Lambda2;
    bool decoupled = false;
};

inline DerivedFrequencies derive(const OscillatorConfig& cfg) {
    validate(cfg);
    DerivedFrequencies d;
    d.omega1 = cfg.omega1;
    d.omega2 = cfg.omega2;
    d.omega0 = cfg.omega0;
    const double sum = cfg.omega1 + cfg.omega2;
    const double dif = cfg.omega1 - cfg.omega2;
    d.Omega_plus = std::hypot(cfg.omega0, sum);
    d.Omega_minus = std::hypot(cfg.omega0, dif);
    d.Omega1 = 0.5 * (d.Omega_plus + d.Omega_minus);
    d.Omega2 = 0.5 * (d.Omega_plus - d.Omega_minus);
    d.gamma = d.Omega_plus / sum;
    d.b = cfg.omega2 / cfg.omega1;
    d.c = 2.0 * cfg.omega0 * std::sqrt(d.b) / d.Omega_plus;
    d.decoupled = cfg.omega0 < kDecoupledRatio * std::max(cfg.omega1, cfg.omega2);
    if (!d.decoupled) {
        // Lambda = (Omega^2 - omega1^2) / (omega0 Omega) for each mode; the
        // pair satisfies the identity suite checked by lambda_identity_residuals.
        d.Lambda1 = (d.Omega1 * d.Omega1 - cfg.omega1 * cfg.omega1) / (cfg.omega0 * d.Omega1);
        d.Lambda2 = (d.Omega2 * d.Omega2 - cfg.omega1 * cfg.omega1) / (cfg.omega0 * d.Omega2);
    }
    return d;
}

/// Relative residuals of the six algebraic identities tying the Lambda pair
/// to the frequency set. Each residual is |lhs - rhs| scaled by the magnitude
/// of the participating terms, so a correct implementation stays at rounding
/// level (~1e-15) for any coupled configuration:
///
///   [0] Lambda1 + Lambda2          = -Omega_plus (omega1 - omega2) / (omega0 omega2)
///   [1] Lambda1 - Lambda2          = +Omega_minus (omega1 + omega2) / (omega0 omega2)
///   [2] Lambda1 Omega1 + Lambda2 Omega2 = (omega0^2 - (omega1^2 - omega2^2)) / omega0
///   [3] Lambda1 Omega1 - Lambda2 Omega2 = Omega_plus Omega_minus / omega0
///   [4] Lambda1 Omega2 + Lambda2 Omega1 = -(omega1/omega2)(omega0^2 + omega1^2 - omega2^2)/omega0
///   [5] Lambda1 Omega2 - Lambda2 Omega1 = (omega1/omega2) Omega_plus Omega_minus / omega0
///
/// [4] carries the omega1/omega2 factor required for consistency with the
/// mode definitions; dropping it breaks every anisotropic configuration.
inline std::array<double, 6> lambda_identity_residuals(const DerivedFrequencies& d) {
    if (d.decoupled || !d.Lambda1 || !d.Lambda2)
        throw std::invalid_argument("lambda_identity_residuals: requires the coupled regime");
    const double L1 = *d.Lambda1, L2 = *d.Lambda2;
    const double w1 = d.omega1, w2 = d.omega2, w0 = d.omega0;
    const double Wp = d.Omega_plus, Wm = d.Omega_minus;
    const double O1 = d.Omega1, O2 = d.Omega2;

    auto res = [](double lhs, double rhs, double scale) {
        return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), scale});
    };
    const double sL = std::abs(L1) + std::abs(L2);
    const double sLO = std::abs(L1) * O1 + std::abs(L2) * O2;

    return {
        res(L1 + L2, -Wp * (w1 - w2) / (w0 * w2), sL),
        res(L1 - L2, Wm * (w1 + w2) / (w0 * w2), sL),
        res(L1 * O1 + L2 * O2, (w0 * w0 - (w1 * w1 - w2 * w2)) / w0, sLO),
        res(L1 * O1 - L2 * O2, Wp * Wm / w0, sLO),
        res(L1 * O2 + L2 * O1, -(w1 / w2) * (w0 * w0 + w1 * w1 - w2 * w2) / w0, sLO),
        res(L1 * O2 - L2 * O1, (w1 / w2) * Wp * Wm / w0, sLO),
    };
}

} // namespace maho
