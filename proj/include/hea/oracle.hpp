#pragma once

#include "hea/convex.hpp"

namespace hea {

/// Exhaustive grid search over the battery power profile: `grid` points per
/// step across each box, exact simulation of the mass/SOC recursions, SOC
/// feasibility enforced at every intermediate step. Intended for tiny
/// horizons; throws std::invalid_argument when grid^N exceeds 1e7 leaves and
/// std::runtime_error when no grid point is feasible. Deterministic
/// regardless of thread count.
Solution brute_force_solve(const ConvexProblem& problem, int grid,
                           bool parallel = false);

/// Log-barrier interior-point reference solver over (phi, P_b), with the
/// mass and SOC trajectories eliminated affinely. Dense Newton steps, so
/// cost grows cubically with the horizon; certifies a duality gap below
/// `gap_tol` (objective units, kg). Throws std::runtime_error when a
/// strictly feasible start cannot be constructed.
Solution barrier_solve(const ConvexProblem& problem, double gap_tol = 1e-6);

}  // namespace hea
