#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "maho/calibration.hpp"
#include "maho/model.hpp"

namespace maho {

/// Mode occupation numbers of the two rotating normal modes.
struct LevelIndex {
    int n1 = 0;
    int n2 = 0;
};

/// Equivalent angular-momentum labelling: radial index and magnetic quantum
/// number, the isotropic-limit (Landau/Fock-Darwin) quantum numbers.
struct LandauLabel {
    int n_r = 0;
    int m = 0;
};

inline void validate(LevelIndex idx) {
    if (idx.n1 < 0 || idx.n2 < 0)
        throw std::invalid_argument("LevelIndex: occupation numbers must be >= 0");
}

/// Level formula with the quarter prefactor, kept verbatim for comparison:
///   E = (hbar/4) { Omega_plus (n1+n2+1) + Omega_minus (n1-n2) }.
/// The calibrated canonical form carries kappa = 1/2 instead; see
/// energy_canonical and oracle::calibrate_spectrum.
inline double energy_printed(LevelIndex idx, const DerivedFrequencies& d,
                             const OscillatorConfig& cfg) {
    validate(idx);
    return 0.25 * cfg.hbar *
           (d.Omega_plus * (idx.n1 + idx.n2 + 1) + d.Omega_minus * (idx.n1 - idx.n2));
}

/// Canonical level formula
///   E = kappa * hbar * { Omega_plus (n1+n2+1) + Omega_minus (n1-n2) }
///     = hbar Omega1 (n1 + 1/2) + hbar Omega2 (n2 + 1/2)   for kappa = 1/2.
/// kappa must be one of the calibration candidates {1/4, 1/2}; anything else
/// is rejected as uncalibrated.
inline double energy_canonical(LevelIndex idx, const DerivedFrequencies& d,
                               const OscillatorConfig& cfg,
                               double kappa = calibration::kSpectrumPrefactor) {
    validate(idx);
    if (kappa != 0.25 && kappa != 0.5)
        throw std::invalid_argument("energy_canonical: kappa must be 1/4 or 1/2 (calibrated)");
    return kappa * cfg.hbar *
           (d.Omega_plus * (idx.n1 + idx.n2 + 1) + d.Omega_minus * (idx.n1 - idx.n2));
}

/// Map mode occupations to the angular labelling: m = n1 - n2 and
/// n_r = min(n1, n2).
inline LandauLabel landau_map(LevelIndex idx) {
    validate(idx);
    return {std::min(idx.n1, idx.n2), idx.n1 - idx.n2};
}

struct Level {
    LevelIndex idx;
    double energy_printed = 0;
    double energy_canonical = 0;
};

/// The K lowest levels ordered by canonical energy, ties broken
/// lexicographically by (n1, n2). Both energy variants are reported.
inline std::vector<Level> levels_sorted(const OscillatorConfig& cfg, int K) {
    if (K <= 0) throw std::invalid_argument("levels_sorted: K must be >= 1");
    const DerivedFrequencies d = derive(cfg);
    // Each unit of n1 or n2 raises the canonical energy by at least
    // hbar*Omega2 > 0, so the K lowest levels satisfy n1, n2 <= K.
    std::vector<Level> all;
    all.reserve(static_cast<std::size_t>(K + 1) * (K + 1));
    for (int n1 = 0; n1 <= K; ++n1)
        for (int n2 = 0; n2 <= K; ++n2) {
            LevelIndex idx{n1, n2};
            all.push_back({idx, energy_printed(idx, d, cfg), energy_canonical(idx, d, cfg)});
        }
    std::sort(all.begin(), all.end(), [](const Level& a, const Level& b) {
        if (a.energy_canonical != b.energy_canonical)
            return a.energy_canonical < b.energy_canonical;
        if (a.idx.n1 != b.idx.n1) return a.idx.n1 < b.idx.n1;
        return a.idx.n2 < b.idx.n2;
    });
    all.resize(static_cast<std::size_t>(K));
    return all;
}

} // namespace maho
