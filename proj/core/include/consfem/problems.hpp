#pragma once

#include <string_view>
#include <vector>

#include "consfem/assembly.hpp"

namespace consfem {

/// Smooth manufactured problem with nonhomogeneous Dirichlet data:
/// p = sin(pi x) sin(pi y) (3y - x) + 1 + x + 2y, mobility = I.
ProblemSpec problem_example1();

/// Homogeneous Neumann problem driven by a unit injection at (0,0) and a
/// unit extraction at (1,1).  No exact solution.
ProblemSpec problem_neumann_singular();

/// Homogeneous Neumann problem with q = x - y.  No exact solution.
ProblemSpec problem_neumann_smooth();

/// Linear solution 1 + x + 2y with q = 0: lies in every Q^r space and is
/// exactly conservative.
ProblemSpec problem_linear_dirichlet();

/// Lookup by id; throws ParameterError for unknown ids.
ProblemSpec make_problem(std::string_view id);
std::vector<std::string_view> problem_ids();

}  // namespace consfem
