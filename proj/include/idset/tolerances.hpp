#pragma once

// Membership tolerances. `scale` is the largest absolute moment value seen at
// the parameter point being classified.

namespace idset::tol {

inline double crit(double scale) { return 1e-7 * (1.0 + scale); }
inline double eq(double scale) { return 1e-9 * (1.0 + scale); }
inline double lp(double scale) { return 1e-8 * (1.0 + scale); }
inline double reduction(double scale) { return 1e-7 * (1.0 + scale); }
inline double tie(double scale) { return 1e-9 * (1.0 + scale); }

/// Relative growth under a truncation doubling that counts as divergence.
inline constexpr double kGrow = 0.01;

}  // namespace idset::tol
