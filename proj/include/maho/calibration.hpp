#pragma once

namespace maho::calibration {

/// Constants fixed by the numerical calibration oracles and frozen here.
/// `oracle::calibrate_spectrum` and `arbitrate_cross_factor` regenerate them
/// from scratch (finite-difference eigensolver, boundary-route action fit)
/// and the verification suites assert that the regenerated values still match.

/// Prefactor kappa of the level formula
///   E(n1,n2) = kappa * hbar * (Omega_plus (n1+n2+1) + Omega_minus (n1-n2)).
/// Selected between the candidates {1/4, 1/2} by matching finite-difference
/// spectra; 1/2 is also forced by the omega0 -> 0 limit (two 1D oscillators).
inline constexpr double kSpectrumPrefactor = 0.5;

/// Multiplier of the c1 (x1 y2 - x2 y1) cross term in the closed-form action.
/// Selected between the candidates {2, 4} by a least-squares fit against the
/// boundary-route action; 4 is the value consistent with the endpoint
/// velocity closed forms and the Van Vleck determinant.
inline constexpr double kActionCrossFactor = 4.0;

} // namespace maho::calibration
