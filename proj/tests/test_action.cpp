#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "maho/action.hpp"
#include "maho/model.hpp"
#include "support/oracles.hpp"

using namespace maho;

namespace {
const OscillatorConfig kFlagship{1.0, 2.0, 2.0, 3.0, 1.0};
const OscillatorConfig kAniso{1.0, 1.3, 0.7, 0.9, 1.0};
const OscillatorConfig kDecoupled{1.0, 1.3, 0.7, 0.0, 1.0};

double quadrature_action(const OscillatorConfig& cfg, const DerivedFrequencies& d,
                         const Endpoints& ep, int panels) {
    const ModeCoefficients mc = solve_modes(ep, d);
    return testsup::simpson(
        [&](double t) { return lagrangian(trajectory_point(mc, d, t), cfg); }, 0.0,
        ep.T, panels);
}
}

TEST_CASE("coefficient fixture at one fifth of the fundamental period") {
    const DerivedFrequencies d = derive(kFlagship);
    const double T = std::numbers::pi / 5.0;
    const ActionCoefficients ac = coefficients(d, T);
    REQUIRE(ac.D == Catch::Approx(9.6).epsilon(1e-13));
    REQUIRE(ac.f1 == Catch::Approx(14.4).epsilon(1e-13));
    REQUIRE(ac.f2 == Catch::Approx(-14.4).epsilon(1e-13));
    REQUIRE(ac.a1 == Catch::Approx(0.0).margin(1e-13));
    REQUIRE(ac.a2 == Catch::Approx(0.0).margin(1e-13));
    REQUIRE(ac.c2 == Catch::Approx(0.0).margin(1e-13));
    const double b = 24.0 * std::cos(0.3 * std::numbers::pi);
    REQUIRE(ac.b1 == Catch::Approx(b).epsilon(1e-13));
    REQUIRE(ac.b2 == Catch::Approx(b).epsilon(1e-13));
    REQUIRE(ac.c1 == Catch::Approx(12.0 * std::sin(0.3 * std::numbers::pi)).epsilon(1e-13));
    REQUIRE(ac.T == T);
    REQUIRE_THROWS_AS(coefficients(d, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(coefficients(d, -1.0), std::invalid_argument);
}

TEST_CASE("coefficient identities over random configurations") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> logw(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> frac(0.1, 0.95);
    for (int i = 0; i < 400; ++i) {
        const OscillatorConfig cfg{1.0, std::exp(logw(rng)), std::exp(logw(rng)),
                                   std::exp(logw(rng)), 1.0};
        const DerivedFrequencies d = derive(cfg);
        const double T = frac(rng) * std::numbers::pi / d.Omega_plus;
        const ActionCoefficients ac = coefficients(d, T);
        const double cs = std::abs(ac.f1) + std::abs(ac.f2) + std::abs(ac.c2);
        REQUIRE(std::abs(ac.c2 - (ac.f1 + ac.f2)) <= 1e-12 * std::max(1e-30, cs));
        REQUIRE(std::abs(ac.f1 - ac.f2 - d.omega0 * ac.D) <=
                1e-12 * std::max({1e-30, cs, std::abs(d.omega0 * ac.D)}));
        const double prod =
            d.omega1 * d.omega2 * d.Omega_plus * d.Omega_minus;
        REQUIRE(rel_diff(ac.b1 * ac.b2 + 4.0 * ac.c1 * ac.c1, prod * ac.D) < 1e-12);
    }
}

TEST_CASE("reduced decoupled coefficients keep the determinant identity") {
    const DerivedFrequencies d = derive(kDecoupled);
    for (double T : {0.25, 0.8, 1.6}) {
        const ActionCoefficients ac = coefficients(d, T);
        REQUIRE(ac.c1 == 0.0);
        REQUIRE(ac.c2 == 0.0);
        REQUIRE(rel_diff(ac.D, std::sin(1.3 * T) * std::sin(0.7 * T)) < 1e-13);
        // The common mode-frequency factor is divided out, so the pair
        // b1 b2 = omega1 omega2 D replaces the coupled-product form.
        REQUIRE(rel_diff(ac.b1 * ac.b2, 1.3 * 0.7 * ac.D) < 1e-13);
    }
}

TEST_CASE("small-splitting branch joins the direct formula smoothly") {
    // Near-degenerate hybrid frequencies: Omega_minus ~ 1e-5.
    const OscillatorConfig cfg{1.0, 1.0, 1.0, 1e-5, 1.0};
    const DerivedFrequencies d = derive(cfg);
    REQUIRE_FALSE(d.decoupled);
    for (double half : {1e-7, 1e-5, 0.4e-4, 0.6e-4, 1e-3}) {
        const double T = 2.0 * half / d.Omega_minus;
        const double got = detail::ratio_pm_sin2(d, T);
        const double s = std::sin(half);
        const double direct = d.Omega_plus / d.Omega_minus * s * s;
        REQUIRE(rel_diff(got, direct) < 1e-12);
    }
}

TEST_CASE("endpoint velocities agree with the mode solution") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> pos(-1.5, 1.5);
    for (const auto& cfg : {kFlagship, kAniso, kDecoupled}) {
        const DerivedFrequencies d = derive(cfg);
        for (double T : {0.23, 0.55}) {
            const Endpoints ep{pos(rng), pos(rng), pos(rng), pos(rng), T};
            const EndpointVelocities v = endpoint_velocities(ep, d);
            const ModeCoefficients mc = solve_modes(ep, d);
            const PhasePoint p0 = trajectory_point(mc, d, 0.0);
            const PhasePoint p1 = trajectory_point(mc, d, T);
            REQUIRE(v.vx1 == Catch::Approx(p0.vx).margin(1e-10));
            REQUIRE(v.vy1 == Catch::Approx(p0.vy).margin(1e-10));
            REQUIRE(v.vx2 == Catch::Approx(p1.vx).margin(1e-10));
            REQUIRE(v.vy2 == Catch::Approx(p1.vy).margin(1e-10));
        }
    }
}

TEST_CASE("three action routes coincide") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> pos(-1.5, 1.5);
    std::uniform_real_distribution<double> frac(0.15, 0.9);
    for (const auto& cfg : {kFlagship, kAniso, kDecoupled}) {
        const DerivedFrequencies d = derive(cfg);
        const double horizon =
            d.decoupled ? std::numbers::pi / std::max(d.omega1, d.omega2)
                        : std::numbers::pi / d.Omega_plus;
        for (int i = 0; i < 40; ++i) {
            const Endpoints ep{pos(rng), pos(rng), pos(rng), pos(rng),
                               frac(rng) * horizon};
            const double closed = action_closed(ep, cfg, d);
            const double boundary = action_boundary(ep, cfg, d);
            const double quad = quadrature_action(cfg, d, ep, 600);
            REQUIRE(rel_diff(closed, boundary) < 1e-11);
            REQUIRE(rel_diff(closed, quad) < 1e-8);
        }
    }
}

TEST_CASE("action is stationary under path deformation") {
    const DerivedFrequencies d = derive(kAniso);
    const Endpoints ep{1.0, 0.3, 0.2, -0.5, 0.9};
    const ModeCoefficients mc = solve_modes(ep, d);
    auto deformed = [&](double eps) {
        // Bump vanishing at both ends, applied to x only.
        return testsup::simpson(
            [&](double t) {
                PhasePoint p = trajectory_point(mc, d, t);
                const double s = std::sin(std::numbers::pi * t / ep.T);
                const double c = std::cos(std::numbers::pi * t / ep.T);
                p.x += eps * s;
                p.vx += eps * std::numbers::pi / ep.T * c;
                return lagrangian(p, kAniso);
            },
            0.0, ep.T, 800);
    };
    const double s0 = deformed(0.0);
    const double d1 = deformed(1e-3) - s0;
    const double d2 = deformed(2e-3) - s0;
    REQUIRE(std::abs(d1) > 1e-9);          // the second-order term is visible
    REQUIRE(d2 / d1 == Catch::Approx(4.0).epsilon(0.02));  // and quadratic in eps
    REQUIRE(rel_diff(s0, action_closed(ep, kAniso, d)) < 1e-9);
}

TEST_CASE("time derivative of the action is minus the energy") {
    for (const auto& cfg : {kFlagship, kAniso, kDecoupled}) {
        const DerivedFrequencies d = derive(cfg);
        const Endpoints ep{0.9, -0.2, 0.3, 0.55, 0.6};
        const double h = 1e-6;
        Endpoints lo = ep, hi = ep;
        lo.T -= h;
        hi.T += h;
        const double dSdT =
            (action_closed(hi, cfg, d) - action_closed(lo, cfg, d)) / (2.0 * h);
        const EndpointVelocities v = endpoint_velocities(ep, d);
        const double e = energy({0.0, ep.x1, ep.y1, v.vx1, v.vy1}, cfg);
        REQUIRE(dSdT == Catch::Approx(-e).epsilon(1e-6));
    }
}

TEST_CASE("spatial gradients of the action are the canonical momenta") {
    // dS/dr2 = m v2 - (m omega0 / 2) (-y2, x2) and dS/dr1 = -p1 in the same
    // convention; checked by central differences on the closed form.
    for (const auto& cfg : {kFlagship, kAniso}) {
        const DerivedFrequencies d = derive(cfg);
        const Endpoints ep{0.7, -0.4, 0.25, 0.6, 0.5};
        const EndpointVelocities v = endpoint_velocities(ep, d);
        const double h = 1e-5;
        auto S = [&](double x1, double y1, double x2, double y2) {
            return action_closed({x1, y1, x2, y2, ep.T}, cfg, d);
        };
        const double dx2 = (S(ep.x1, ep.y1, ep.x2 + h, ep.y2) -
                            S(ep.x1, ep.y1, ep.x2 - h, ep.y2)) /
                           (2 * h);
        const double dy2 = (S(ep.x1, ep.y1, ep.x2, ep.y2 + h) -
                            S(ep.x1, ep.y1, ep.x2, ep.y2 - h)) /
                           (2 * h);
        const double dx1 = (S(ep.x1 + h, ep.y1, ep.x2, ep.y2) -
                            S(ep.x1 - h, ep.y1, ep.x2, ep.y2)) /
                           (2 * h);
        const double dy1 = (S(ep.x1, ep.y1 + h, ep.x2, ep.y2) -
                            S(ep.x1, ep.y1 - h, ep.x2, ep.y2)) /
                           (2 * h);
        const double m = cfg.m, w0 = cfg.omega0;
        REQUIRE(dx2 == Catch::Approx(m * v.vx2 - 0.5 * m * w0 * ep.y2).margin(1e-7));
        REQUIRE(dy2 == Catch::Approx(m * v.vy2 + 0.5 * m * w0 * ep.x2).margin(1e-7));
        REQUIRE(dx1 == Catch::Approx(-(m * v.vx1 - 0.5 * m * w0 * ep.y1)).margin(1e-7));
        REQUIRE(dy1 == Catch::Approx(-(m * v.vy1 + 0.5 * m * w0 * ep.x1)).margin(1e-7));
    }
}

TEST_CASE("caustic refusal carries the diagnosis") {
    const DerivedFrequencies d = derive(kFlagship);
    const double tc = 2.0 * std::numbers::pi / 5.0;
    try {
        action_closed({1, 0, 0, 1, tc}, kFlagship, d);
        FAIL("expected CausticError");
    } catch (const CausticError& e) {
        REQUIRE(e.time() == Catch::Approx(tc));
        REQUIRE(std::abs(e.d_value()) < e.threshold());
    }
    REQUIRE_THROWS_AS(endpoint_velocities({1, 0, 0, 1, tc}, d), CausticError);
}

TEST_CASE("caustic times of the integer fixture") {
    const DerivedFrequencies d = derive(kFlagship);
    const auto roots = caustics(d, 4.0);
    REQUIRE(roots.size() == 3);
    for (int k = 1; k <= 3; ++k)
        REQUIRE(std::abs(roots[k - 1] - 2.0 * std::numbers::pi * k / 5.0) < 1e-12);
}

TEST_CASE("caustic times in the decoupled regime") {
    const DerivedFrequencies d = derive(kDecoupled);
    const auto roots = caustics(d, 5.0);
    std::vector<double> expected = {std::numbers::pi / 1.3, std::numbers::pi / 0.7,
                                    2.0 * std::numbers::pi / 1.3};
    std::sort(expected.begin(), expected.end());
    REQUIRE(roots.size() == expected.size());
    for (std::size_t i = 0; i < roots.size(); ++i)
        REQUIRE(roots[i] == Catch::Approx(expected[i]).epsilon(1e-13));
}

TEST_CASE("caustic scan agrees with a brute-force determinant sweep") {
    const DerivedFrequencies d = derive(kAniso);
    const double t_max = 8.0;
    const auto roots = caustics(d, t_max);
    REQUIRE_FALSE(roots.empty());

    // Every reported root annihilates D.
    for (double r : roots)
        REQUIRE(std::abs(coefficients(d, r).D) < 1e-8);

    // Every sign change of D on a fine sweep corresponds to a reported root.
    const int n = 160000;
    double prev_t = t_max / n, prev_d = coefficients(d, prev_t).D;
    int changes = 0;
    for (int i = 2; i <= n; ++i) {
        const double t = t_max * i / n;
        const double D = coefficients(d, t).D;
        if (prev_d * D < 0.0) {
            ++changes;
            bool matched = false;
            for (double r : roots) matched = matched || (r >= prev_t && r <= t);
            REQUIRE(matched);
        }
        prev_t = t;
        prev_d = D;
    }
    REQUIRE(changes > 0);
    REQUIRE(static_cast<std::size_t>(changes) <= roots.size());
    REQUIRE_THROWS_AS(caustics(d, 0.0), std::invalid_argument);
}

TEST_CASE("cross-factor arbitration picks the working variant") {
    for (const auto& cfg : {kFlagship, kAniso}) {
        const DerivedFrequencies d = derive(cfg);
        const CrossFactorReport rep = arbitrate_cross_factor(cfg, d);
        REQUIRE(rep.chosen == 4.0);
        REQUIRE(rep.residual_chosen < 1e-10);
        REQUIRE(rep.residual_alternative > 1e-3);
    }
    // Without coupling the cross term vanishes and both variants coincide;
    // the arbitration then simply reports the configured factor.
    const DerivedFrequencies dd = derive(kDecoupled);
    REQUIRE(arbitrate_cross_factor(kDecoupled, dd).chosen == 4.0);
}
