#include "consfem/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "consfem/errors.hpp"

namespace consfem {

namespace {
constexpr double pi = std::numbers::pi;
}

ProblemSpec problem_example1() {
  ProblemSpec p;
  p.id = "example1";
  p.boundary = BoundaryKind::AllDirichlet;
  p.forcing = [](Point2 x) {
    const double sx = std::sin(pi * x.x), cx = std::cos(pi * x.x);
    const double sy = std::sin(pi * x.y), cy = std::cos(pi * x.y);
    return 2.0 * pi * (cx * sy - 3.0 * sx * cy + pi * sx * sy * (-x.x + 3.0 * x.y));
  };
  p.dirichlet = [](Point2 x) { return 1.0 + x.x + 2.0 * x.y; };

  ExactSolution ex;
  ex.value = [](Point2 x) {
    return std::sin(pi * x.x) * std::sin(pi * x.y) * (-x.x + 3.0 * x.y) + 1.0 + x.x + 2.0 * x.y;
  };
  ex.gradient = [](Point2 x) {
    const double sx = std::sin(pi * x.x), cx = std::cos(pi * x.x);
    const double sy = std::sin(pi * x.y), cy = std::cos(pi * x.y);
    const double w = -x.x + 3.0 * x.y;
    return Vec2{pi * cx * sy * w - sx * sy + 1.0, pi * sx * cy * w + 3.0 * sx * sy + 2.0};
  };
  ex.dxx = [](Point2 x) {
    const double sx = std::sin(pi * x.x), cx = std::cos(pi * x.x);
    const double sy = std::sin(pi * x.y);
    return -pi * pi * sx * sy * (-x.x + 3.0 * x.y) - 2.0 * pi * cx * sy;
  };
  ex.dyy = [](Point2 x) {
    const double sx = std::sin(pi * x.x);
    const double sy = std::sin(pi * x.y), cy = std::cos(pi * x.y);
    return -pi * pi * sx * sy * (-x.x + 3.0 * x.y) + 6.0 * pi * sx * cy;
  };
  p.exact = std::move(ex);
  return p;
}

ProblemSpec problem_neumann_singular() {
  ProblemSpec p;
  p.id = "neumann_singular";
  p.boundary = BoundaryKind::AllNeumann;
  p.sources = {{{0.0, 0.0}, 1.0}, {{1.0, 1.0}, -1.0}};
  return p;
}

ProblemSpec problem_neumann_smooth() {
  ProblemSpec p;
  p.id = "neumann_smooth";
  p.boundary = BoundaryKind::AllNeumann;
  p.forcing = [](Point2 x) { return x.x - x.y; };
  return p;
}

ProblemSpec problem_linear_dirichlet() {
  ProblemSpec p;
  p.id = "linear";
  p.boundary = BoundaryKind::AllDirichlet;
  p.dirichlet = [](Point2 x) { return 1.0 + x.x + 2.0 * x.y; };
  ExactSolution ex;
  ex.value = p.dirichlet;
  ex.gradient = [](Point2) { return Vec2{1.0, 2.0}; };
  ex.dxx = [](Point2) { return 0.0; };
  ex.dyy = [](Point2) { return 0.0; };
  p.exact = std::move(ex);
  return p;
}

std::vector<std::string_view> problem_ids() {
  return {"example1", "neumann_singular", "neumann_smooth", "linear"};
}

ProblemSpec make_problem(std::string_view id) {
  if (id == "example1") return problem_example1();
  if (id == "neumann_singular") return problem_neumann_singular();
  if (id == "neumann_smooth") return problem_neumann_smooth();
  if (id == "linear") return problem_linear_dirichlet();
  throw ParameterError("unknown problem id '" + std::string(id) + "'");
}

}  // namespace consfem
