#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "maho/action.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/evolve.hpp"
#include "maho/grid.hpp"
#include "maho/io.hpp"
#include "maho/model.hpp"
#include "maho/oracle.hpp"
#include "maho/propagator.hpp"
#include "maho/spectrum.hpp"

namespace maho {

/// One named pass/fail measurement.
struct Check {
    std::string name;
    double measured = 0;
    double tolerance = 0;
    bool pass = false;
};

inline Check make_check(std::string name, double measured, double tolerance) {
    const bool pass = std::isfinite(measured) && measured < tolerance;
    return {std::move(name), measured, tolerance, pass};
}

/// Algebraic consistency of the derived frequencies and the action
/// coefficients: the identities every closed form downstream leans on.
inline std::vector<Check> verify_identities(const OscillatorConfig& cfg) {
    std::vector<Check> out;
    const DerivedFrequencies d = derive(cfg);

    if (!d.decoupled) {
        const auto res = lambda_identity_residuals(d);
        double worst = 0;
        for (double r : res) worst = std::max(worst, r);
        out.push_back(make_check("identities.lambda", worst, 1e-10));
    }

    double worst_sum = 0, worst_diff = 0, worst_det = 0, worst_bm = 0;
    for (double frac : {0.17, 0.43, 0.81}) {
        const double T = frac * std::numbers::pi / d.Omega_plus;
        const ActionCoefficients ac = coefficients(d, T);
        const double cscale = std::abs(ac.f1) + std::abs(ac.f2) + std::abs(ac.c2);
        if (!d.decoupled) {
            worst_sum = std::max(worst_sum,
                                 std::abs(ac.c2 - (ac.f1 + ac.f2)) / std::max(1e-300, cscale));
            worst_diff = std::max(
                worst_diff, std::abs(ac.f1 - ac.f2 - d.omega0 * ac.D) /
                                std::max({1e-300, cscale, std::abs(d.omega0 * ac.D)}));
        }
        const double prod = d.decoupled ? d.omega1 * d.omega2
                                        : d.omega1 * d.omega2 * d.Omega_plus * d.Omega_minus;
        const double lhs = ac.b1 * ac.b2 + 4.0 * ac.c1 * ac.c1;
        worst_det = std::max(worst_det, rel_diff(lhs, prod * ac.D, 1e-300));
        if (!d.decoupled) {
            const double bm = boundary_matrix(d, T).determinant();
            const double pred = -d.Omega_plus * d.Omega_minus /
                                (d.omega0 * d.omega2 * d.omega0 * d.omega2) * ac.D;
            worst_bm = std::max(worst_bm, rel_diff(bm, pred, 1e-300));
        }
    }
    if (!d.decoupled) {
        out.push_back(make_check("identities.coeff_sum", worst_sum, 1e-10));
        out.push_back(make_check("identities.coeff_diff", worst_diff, 1e-10));
        out.push_back(make_check("identities.boundary_det", worst_bm, 1e-8));
    }
    out.push_back(make_check("identities.amp_det", worst_det, 1e-10));

    // Action route agreement and cross-factor arbitration.
    const CrossFactorReport cf = arbitrate_cross_factor(cfg, d);
    out.push_back(make_check("action.cross_factor_mismatch",
                             std::abs(cf.chosen - calibration::kActionCrossFactor), 0.5));
    out.push_back(make_check("action.route_agreement", cf.residual_chosen, 1e-9));
    return out;
}

/// Kernel-level consistency: amplitude routes, gauge factor modulus, and the
/// composition law through a smoothly windowed midpoint integral.
inline std::vector<Check> verify_kernel(const OscillatorConfig& cfg) {
    std::vector<Check> out;
    const DerivedFrequencies d = derive(cfg);

    double worst_amp = 0;
    for (double frac : {0.21, 0.47, 0.76}) {
        const double T = frac * std::numbers::pi / d.Omega_plus;
        const ActionCoefficients ac = coefficients(d, T);
        const complexd a1 = amplitude(cfg, d, ac);
        const complexd a2 = amplitude_from_determinant(cfg, d, ac);
        worst_amp = std::max(worst_amp, std::abs(a1 - a2) / std::abs(a1));
    }
    out.push_back(make_check("kernel.amplitude_routes", worst_amp, 1e-10));

    const double T = 0.4 / d.Omega_plus * 5.0;
    const Endpoints ep{0.9, -0.2, 0.3, 0.55, T};
    const KernelValue sym = kernel(ep, cfg, d, Gauge::symmetric);
    const KernelValue wgt = kernel(ep, cfg, d, Gauge::weighted);
    out.push_back(make_check("kernel.gauge_modulus",
                             std::abs(std::abs(wgt.value) - std::abs(sym.value)) /
                                 std::abs(sym.value),
                             1e-12));

    if (d.decoupled) {
        const complexd prod =
            mehler_kernel(ep.x1, ep.x2, ep.T, d.omega1, cfg.m, cfg.hbar) *
            mehler_kernel(ep.y1, ep.y2, ep.T, d.omega2, cfg.m, cfg.hbar);
        out.push_back(make_check("kernel.product_form",
                                 std::abs(sym.value - prod) / std::abs(prod), 1e-10));
    } else {
        // Composition: integrate over the midpoint with an erf window around
        // the classical midpoint.
        const double t1 = 0.5 * ep.T;
        const ModeCoefficients mc = solve_modes(ep, d);
        const PhasePoint sp = trajectory_point(mc, d, t1);
        const Grid2D g{301, 301, sp.x - 8.0, sp.x + 8.0, sp.y - 8.0, sp.y + 8.0};
        const complexd comp = composed_kernel(ep, cfg, d, t1, g, {4.0, 0.5});
        out.push_back(make_check("kernel.composition",
                                 std::abs(comp - sym.value) / std::abs(sym.value), 1e-6));
    }
    return out;
}

/// Spectrum calibration against the finite-difference eigensolver.
inline std::vector<Check> verify_spectrum(const OscillatorConfig& cfg, int n = 96,
                                          int k = 6) {
    std::vector<Check> out;
    const DerivedFrequencies d = derive(cfg);
    const Grid2D g = suggested_spectrum_grid(cfg, d, n);
    try {
        const CalibrationReport rep = calibrate_spectrum(cfg, d, g, k);
        out.push_back(make_check("spectrum.prefactor_mismatch",
                                 std::abs(rep.chosen_prefactor -
                                          calibration::kSpectrumPrefactor),
                                 1e-12));
        out.push_back(make_check("spectrum.level_residual", rep.residual_chosen, 1e-2));
        out.push_back(make_check("spectrum.separation",
                                 rep.residual_chosen / rep.residual_alternative, 0.1));
    } catch (const ConvergenceError& e) {
        Check c;
        c.name = std::string("spectrum.calibration_error: ") + e.what();
        c.measured = std::numeric_limits<double>::quiet_NaN();
        c.tolerance = 0;
        c.pass = false;
        out.push_back(c);
    }
    return out;
}

/// Kernel-driven evolution against the Crank-Nicolson reference on a modest
/// grid, plus centroid tracking against the classical flow.
inline std::vector<Check> verify_evolution(const OscillatorConfig& cfg, int n = 96) {
    std::vector<Check> out;
    const DerivedFrequencies d = derive(cfg);

    const double ell = std::sqrt(cfg.hbar / (cfg.m * max_frequency(d)));
    const GaussianSpec spec{2.0 * ell, 0.0, 0.0, 0.0, ell};
    const double t = 0.5 * std::numbers::pi / max_frequency(d);

    // Size the window from the classical reach of the centroid plus tails,
    // so the same suite stays honest for strongly coupled configurations.
    const double vx0 = spec.px / cfg.m + 0.5 * d.omega0 * spec.y0;
    const double vy0 = spec.py / cfg.m - 0.5 * d.omega0 * spec.x0;
    const ModeCoefficients mc = modes_from_initial(spec.x0, spec.y0, vx0, vy0, d);
    double reach = 0;
    for (int i = 0; i <= 64; ++i) {
        const PhasePoint q = trajectory_point(mc, d, t * i / 64);
        reach = std::max({reach, std::abs(q.x), std::abs(q.y)});
    }
    const Grid2D g = Grid2D::centered(reach + 7.0 * spec.sigma, n);
    const WaveField psi0 = gaussian(g, spec, cfg);

    const PropagationResult pr = propagate(psi0, cfg, d, t);
    const double dt = 0.8e-3 / max_frequency(d);
    const WaveField ref = evolve_reference(psi0, cfg, d, t, dt);

    double num = 0, den = 0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) {
        num += std::norm(pr.field.data[i] - ref.data[i]);
        den += std::norm(ref.data[i]);
    }
    out.push_back(make_check("evolution.vs_reference", std::sqrt(num / den), 1e-3));
    out.push_back(
        make_check("evolution.norm_drift",
                   std::abs(field_norm(pr.field) - field_norm(psi0)), 1e-6));

    // Centroid against the classical trajectory. The classical velocity at
    // t=0 for a packet of mean momentum p includes the gauge term; mc above
    // already encodes that initial condition.
    const PhasePoint p = trajectory_point(mc, d, t);
    const Observables ob = observables(pr.field, t);
    const double cerr = std::hypot(ob.x_mean - p.x, ob.y_mean - p.y);
    out.push_back(make_check("evolution.centroid", cerr, 1e-4));
    out.push_back(make_check("evolution.edge_leak", pr.edge_fraction, kEscapeThreshold));
    return out;
}

struct VerifyReport {
    std::vector<Check> checks;
    bool all_pass = true;
};

/// Run the verification suites. The identity and kernel suites are cheap;
/// spectrum and evolution involve sparse factorizations and are skipped
/// unless include_heavy is set.
inline VerifyReport run_verification(const OscillatorConfig& cfg, bool include_heavy) {
    VerifyReport rep;
    auto absorb = [&rep](std::vector<Check> v) {
        for (auto& c : v) {
            rep.all_pass = rep.all_pass && c.pass;
            rep.checks.push_back(std::move(c));
        }
    };
    absorb(verify_identities(cfg));
    absorb(verify_kernel(cfg));
    if (include_heavy) {
        absorb(verify_spectrum(cfg));
        absorb(verify_evolution(cfg));
    }
    return rep;
}

inline json to_json(const VerifyReport& rep) {
    json checks = json::array();
    for (const Check& c : rep.checks)
        checks.push_back(json{{"name", c.name},
                              {"measured", c.measured},
                              {"tolerance", c.tolerance},
                              {"pass", c.pass}});
    return json{{"checks", checks}, {"all_pass", rep.all_pass}};
}

inline void write_verify_report(const std::string& path, const VerifyReport& rep) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("verify: cannot open " + path);
    os << to_json(rep).dump(2) << '\n';
}

} // namespace maho
