#pragma once

#include "lmegrid/lp.hpp"

namespace lmegrid::detail {

// Bounded-variable primal simplex. Returns basic optimal solutions with
// exact row duals and reduced costs. Deterministic for identical input.
LpSolution simplex_solve(const LinearProgram& lp, const SolveOptions& options);

}  // namespace lmegrid::detail
