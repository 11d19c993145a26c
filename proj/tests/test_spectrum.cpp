#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maho/spectrum.hpp"

using namespace maho;

namespace {
const OscillatorConfig kFlagship{1.0, 2.0, 2.0, 3.0, 1.0};
}

TEST_CASE("level index validation") {
    REQUIRE_NOTHROW(validate(LevelIndex{0, 0}));
    REQUIRE_THROWS_AS(validate(LevelIndex{-1, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(validate(LevelIndex{0, -3}), std::invalid_argument);
}

TEST_CASE("canonical energies reduce to the two-mode oscillator form") {
    const DerivedFrequencies d = derive(kFlagship);
    // E(n1, n2) = Omega1 (n1 + 1/2) + Omega2 (n2 + 1/2) with Omega1 = 4,
    // Omega2 = 1 on this configuration.
    for (int n1 = 0; n1 <= 4; ++n1)
        for (int n2 = 0; n2 <= 4; ++n2) {
            const double expected = 4.0 * (n1 + 0.5) + 1.0 * (n2 + 0.5);
            REQUIRE(energy_canonical({n1, n2}, d, kFlagship) ==
                    Catch::Approx(expected).epsilon(1e-14));
        }
}

TEST_CASE("quarter-prefactor variant is exactly half the canonical value") {
    const DerivedFrequencies d = derive(kFlagship);
    for (int n1 = 0; n1 <= 3; ++n1)
        for (int n2 = 0; n2 <= 3; ++n2) {
            const LevelIndex idx{n1, n2};
            REQUIRE(energy_printed(idx, d, kFlagship) ==
                    Catch::Approx(0.5 * energy_canonical(idx, d, kFlagship))
                        .epsilon(1e-14));
            REQUIRE(energy_canonical(idx, d, kFlagship, 0.25) ==
                    Catch::Approx(energy_printed(idx, d, kFlagship)).epsilon(1e-14));
        }
}

TEST_CASE("only calibration candidates are accepted as prefactors") {
    const DerivedFrequencies d = derive(kFlagship);
    REQUIRE_NOTHROW(energy_canonical({0, 0}, d, kFlagship, 0.5));
    REQUIRE_NOTHROW(energy_canonical({0, 0}, d, kFlagship, 0.25));
    REQUIRE_THROWS_AS(energy_canonical({0, 0}, d, kFlagship, 0.3),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(energy_canonical({0, 0}, d, kFlagship, 1.0),
                      std::invalid_argument);
}

TEST_CASE("angular relabelling") {
    REQUIRE(landau_map({3, 1}).n_r == 1);
    REQUIRE(landau_map({3, 1}).m == 2);
    REQUIRE(landau_map({1, 3}).n_r == 1);
    REQUIRE(landau_map({1, 3}).m == -2);
    REQUIRE(landau_map({0, 0}).n_r == 0);
    REQUIRE(landau_map({0, 0}).m == 0);
    REQUIRE_THROWS_AS(landau_map({-1, 2}), std::invalid_argument);
}

TEST_CASE("field splitting of the free-oscillator degeneracies") {
    // Without the field, levels with equal n1 + n2 coincide; the
    // Omega_minus (n1 - n2) term splits them by 2 kappa hbar Omega_minus
    // per unit of n1 - n2.
    const DerivedFrequencies d = derive(kFlagship);
    for (int n1 = 0; n1 <= 3; ++n1)
        for (int n2 = 0; n2 <= 3; ++n2) {
            const double split = energy_canonical({n1, n2}, d, kFlagship) -
                                 energy_canonical({n2, n1}, d, kFlagship);
            REQUIRE(split ==
                    Catch::Approx(d.Omega_minus * kFlagship.hbar * (n1 - n2))
                        .margin(1e-13));
        }
}

TEST_CASE("sorted level table of the integer fixture") {
    const auto lv = levels_sorted(kFlagship, 6);
    REQUIRE(lv.size() == 6);
    const double expected[6] = {2.5, 3.5, 4.5, 5.5, 6.5, 6.5};
    for (int i = 0; i < 6; ++i)
        REQUIRE(lv[i].energy_canonical == Catch::Approx(expected[i]).epsilon(1e-14));
    // The 6.5 pair is (0,4) and (1,0); ties resolve by n1.
    REQUIRE(lv[4].idx.n1 == 0);
    REQUIRE(lv[4].idx.n2 == 4);
    REQUIRE(lv[5].idx.n1 == 1);
    REQUIRE(lv[5].idx.n2 == 0);
}

TEST_CASE("sorted level table without the field") {
    const OscillatorConfig iso{1.0, 1.0, 1.0, 0.0, 1.0};
    const auto lv = levels_sorted(iso, 6);
    const double expected[6] = {1.0, 2.0, 2.0, 3.0, 3.0, 3.0};
    for (int i = 0; i < 6; ++i)
        REQUIRE(lv[i].energy_canonical == Catch::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("level table is a stable prefix of a longer one") {
    const auto a = levels_sorted(kFlagship, 5);
    const auto b = levels_sorted(kFlagship, 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].idx.n1 == b[i].idx.n1);
        REQUIRE(a[i].idx.n2 == b[i].idx.n2);
        REQUIRE(a[i].energy_canonical == b[i].energy_canonical);
    }
    REQUIRE_THROWS_AS(levels_sorted(kFlagship, 0), std::invalid_argument);
}
