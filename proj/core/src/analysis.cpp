#include "consfem/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "consfem/errors.hpp"

namespace consfem {

namespace {

constexpr int kMaxLocal = (ReferenceBasis::kMaxDegree + 1) * (ReferenceBasis::kMaxDegree + 1);

struct Sums {
  double l1 = 0.0, l2 = 0.0, h1 = 0.0, w11 = 0.0, vh = 0.0, l1c = 0.0, l2c = 0.0;

  Sums& operator+=(const Sums& o) {
    l1 += o.l1;
    l2 += o.l2;
    h1 += o.h1;
    w11 += o.w11;
    vh += o.vh;
    l1c += o.l1c;
    l2c += o.l2c;
    return *this;
  }
};

// Difference of two samples accumulated with weight w.
void accumulate(Sums& s, double w, const FieldSample& target, const FieldSample& approx) {
  const double e = target.value - approx.value;
  const Vec2 g = target.grad - approx.grad;
  const double exx = target.dxx - approx.dxx;
  const double eyy = target.dyy - approx.dyy;
  s.l1 += w * std::abs(e);
  s.l2 += w * e * e;
  s.h1 += w * dot(g, g);
  s.w11 += w * (std::abs(g.x) + std::abs(g.y));
  s.vh += w * (exx * exx + eyy * eyy);
}

// Integrate over the four quarters of every element of `mesh`.  The kernel
// receives (point, weight, element of `mesh`, sums).
template <class Kernel>
Sums integrate_quarters(const StructuredMesh& mesh, int quad_points, int threads,
                        const Kernel& kernel) {
  const QuadratureRule2D quad = gauss_2d(quad_points);
  const double half = 0.5 * mesh.h();
  const std::size_t ne = mesh.num_elements();

  auto run = [&](std::size_t begin, std::size_t end) {
    Sums s;
    for (std::size_t e = begin; e < end; ++e) {
      const Point2 o = mesh.element_origin(e);
      for (int qy = 0; qy < 2; ++qy) {
        for (int qx = 0; qx < 2; ++qx) {
          const double x0 = o.x + qx * half;
          const double y0 = o.y + qy * half;
          for (std::size_t q = 0; q < quad.size(); ++q) {
            const Point2 x{x0 + half * quad.points[q].x, y0 + half * quad.points[q].y};
            kernel(x, quad.weights[q] * half * half, e, s);
          }
        }
      }
    }
    return s;
  };

  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, ne);
  if (workers == 1) return run(0, ne);

  std::vector<Sums> partial(workers);
  std::vector<std::thread> pool;
  const std::size_t chunk = (ne + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = std::min(ne, w * chunk);
    const std::size_t e = std::min(ne, b + chunk);
    pool.emplace_back([&, w, b, e] { partial[w] = run(b, e); });
  }
  for (auto& t : pool) t.join();
  Sums total;
  for (const Sums& p : partial) total += p;
  return total;
}

NormErrors finalize(const Sums& s, double h, bool corrected) {
  NormErrors out;
  out.l1 = s.l1;
  out.l2 = std::sqrt(s.l2);
  out.h1 = std::sqrt(s.h1);
  out.w11 = s.w11;
  out.vh_seminorm = std::sqrt(s.vh);
  out.vh = std::sqrt(s.h1 + h * h * s.vh);
  if (corrected) {
    out.l1_corrected = s.l1c;
    out.l2_corrected = std::sqrt(s.l2c);
  }
  return out;
}

// int_a^b -mobility grad p . n along an axis-aligned piece inside element e.
double piece_flux(const FeSpace& space, const ProblemSpec& problem, const Vector& p,
                  std::size_t e, Point2 a, Point2 b, Vec2 normal,
                  const QuadratureRule1D& rule) {
  const StructuredMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const int nb = basis.size();
  std::array<Vec2, kMaxLocal> g;
  std::array<std::size_t, kMaxLocal> dofs;
  space.element_dofs(e, std::span(dofs.data(), nb));
  const Tensor2 mob = problem.mobility_at(mesh.element_box(e).center());
  const double len = std::abs(b.x - a.x) + std::abs(b.y - a.y);
  double flux = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double t = rule.points[q];
    const Point2 x{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    basis.gradients(space.to_reference(e, x), std::span(g.data(), nb));
    Vec2 grad;
    for (int k = 0; k < nb; ++k) grad = grad + p[static_cast<Eigen::Index>(dofs[k])] * g[k];
    grad = (1.0 / mesh.h()) * grad;
    flux -= rule.weights[q] * len * dot(mob.apply(grad), normal);
  }
  return flux;
}

}  // namespace

DiscreteField::DiscreteField(const FeSpace& space, const DualMesh& dual, const Solution& solution)
    : space_(&space), dual_(&dual), solution_(&solution) {
  if (solution.p.size() != static_cast<Eigen::Index>(space.num_dofs())) {
    throw PreconditionError("solution does not match the finite element space");
  }
}

FieldSample DiscreteField::sample_in(std::size_t e, Point2 p) const {
  const ReferenceBasis& basis = space_->basis();
  const int nb = basis.size();
  std::array<double, kMaxLocal> v, dxx, dyy;
  std::array<Vec2, kMaxLocal> g;
  std::array<std::size_t, kMaxLocal> dofs;
  const Point2 xi = space_->to_reference(e, p);
  basis.values(xi, std::span(v.data(), nb));
  basis.gradients(xi, std::span(g.data(), nb));
  basis.second_derivatives(xi, std::span(dxx.data(), nb), std::span(dyy.data(), nb));
  space_->element_dofs(e, std::span(dofs.data(), nb));

  const double inv_h = 1.0 / space_->mesh().h();
  FieldSample s;
  for (int a = 0; a < nb; ++a) {
    const double c = solution_->p[static_cast<Eigen::Index>(dofs[a])];
    s.value += c * v[a];
    s.grad = s.grad + c * g[a];
    s.dxx += c * dxx[a];
    s.dyy += c * dyy[a];
  }
  s.grad = inv_h * s.grad;
  s.dxx *= inv_h * inv_h;
  s.dyy *= inv_h * inv_h;
  return s;
}

FieldSample DiscreteField::sample(Point2 p) const {
  return sample_in(space_->mesh().locate_element(p), p);
}

double DiscreteField::multiplier(Point2 p) const {
  const auto k = dual_->locate_volume(p);
  if (!k || solution_->lambda.size() == 0) return 0.0;
  return solution_->lambda[static_cast<Eigen::Index>(*k)];
}

NormErrors norm_errors(const Solution& solution, const ProblemSpec& problem,
                       const FeSpace& space, const DualMesh& dual,
                       const AnalysisOptions& options) {
  if (!problem.exact) throw PreconditionError("problem '" + problem.id + "' has no exact solution");
  const ExactSolution& ex = *problem.exact;
  const DiscreteField field(space, dual, solution);
  const bool corrected = solution.meta.constrained;

  const Sums s = integrate_quarters(
      space.mesh(), load_quadrature_points(space.degree()), options.threads,
      [&](Point2 x, double w, std::size_t e, Sums& acc) {
        const FieldSample ph = field.sample_in(e, x);
        const FieldSample exact{ex.value(x), ex.gradient(x), ex.dxx(x), ex.dyy(x)};
        accumulate(acc, w, exact, ph);
        if (corrected) {
          const double ec = exact.value - (ph.value + field.multiplier(x));
          acc.l1c += w * std::abs(ec);
          acc.l2c += w * ec * ec;
        }
      });
  return finalize(s, space.mesh().h(), corrected);
}

NormErrors reference_errors(const DiscreteField& approx, const DiscreteField& reference,
                            const AnalysisOptions& options) {
  const StructuredMesh& coarse = approx.space().mesh();
  const StructuredMesh& fine = reference.space().mesh();
  if (fine.level() < coarse.level()) {
    throw PreconditionError("reference mesh must be at least as fine as the approximation");
  }
  const bool corrected = approx.solution().meta.constrained;
  const Sums s = integrate_quarters(
      fine, load_quadrature_points(reference.space().degree()), options.threads,
      [&](Point2 x, double w, std::size_t e_fine, Sums& acc) {
        const FieldSample target = reference.sample_in(e_fine, x);
        const FieldSample ph = approx.sample_in(coarse.locate_element(x), x);
        accumulate(acc, w, target, ph);
        if (corrected) {
          const double ec = (target.value + reference.multiplier(x)) -
                            (ph.value + approx.multiplier(x));
          acc.l1c += w * std::abs(ec);
          acc.l2c += w * ec * ec;
        }
      });
  return finalize(s, coarse.h(), corrected);
}

double vh_seminorm(const Solution& solution, const ProblemSpec& problem, const FeSpace& space,
                   const DualMesh& dual) {
  return norm_errors(solution, problem, space, dual).vh_seminorm;
}

double multiplier_norm(const Vector& lambda, std::span<const DualInterface> interfaces,
                       double h) {
  double sum = 0.0;
  for (const DualInterface& f : interfaces) {
    if (f.on_domain_boundary) continue;
    const double a = lambda[static_cast<Eigen::Index>(f.first)];
    const double b = f.second ? lambda[static_cast<Eigen::Index>(*f.second)] : 0.0;
    sum += f.length * (a - b) * (a - b);
  }
  return std::sqrt(sum / h);
}

Eigen::MatrixXd multiplier_gram(std::size_t num_volumes,
                                std::span<const DualInterface> interfaces, double h) {
  const auto n = static_cast<Eigen::Index>(num_volumes);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (const DualInterface& f : interfaces) {
    if (f.on_domain_boundary) continue;
    const double w = f.length / h;
    const auto a = static_cast<Eigen::Index>(f.first);
    G(a, a) += w;
    if (f.second) {
      const auto b = static_cast<Eigen::Index>(*f.second);
      G(b, b) += w;
      G(a, b) -= w;
      G(b, a) -= w;
    }
  }
  return G;
}

double energy(const Solution& solution, const ProblemSpec& problem, const FeSpace& space) {
  const StructuredMesh& mesh = space.mesh();
  const QuadratureRule2D quad = gauss_2d(load_quadrature_points(space.degree()));
  const double h = mesh.h();
  const ReferenceBasis& basis = space.basis();
  const int nb = basis.size();
  std::array<double, kMaxLocal> v;
  std::array<Vec2, kMaxLocal> g;
  std::array<std::size_t, kMaxLocal> dofs;

  double total = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Point2 o = mesh.element_origin(e);
    const Tensor2 mob = problem.mobility_at(mesh.element_box(e).center());
    space.element_dofs(e, std::span(dofs.data(), nb));
    double local = 0.0;
    for (std::size_t q = 0; q < quad.size(); ++q) {
      const Point2 xi = quad.points[q];
      basis.values(xi, std::span(v.data(), nb));
      basis.gradients(xi, std::span(g.data(), nb));
      double value = 0.0;
      Vec2 grad;
      for (int a = 0; a < nb; ++a) {
        const double c = solution.p[static_cast<Eigen::Index>(dofs[a])];
        value += c * v[a];
        grad = grad + c * g[a];
      }
      grad = (1.0 / h) * grad;
      const Point2 x{o.x + h * xi.x, o.y + h * xi.y};
      local += quad.weights[q] * (0.5 * dot(mob.apply(grad), grad) - problem.forcing_at(x) * value);
    }
    total += h * h * local;
  }
  for (const PointSource& s : problem.sources) {
    const std::size_t e = source_element(mesh, s.location);
    basis.values(space.to_reference(e, s.location), std::span(v.data(), nb));
    space.element_dofs(e, std::span(dofs.data(), nb));
    double value = 0.0;
    for (int a = 0; a < nb; ++a) value += solution.p[static_cast<Eigen::Index>(dofs[a])] * v[a];
    total -= s.strength * value;
  }
  return total;
}

double conservation_indicator(const Solution& solution, const ProblemSpec& problem,
                              const FeSpace& space, const DualMesh& dual, RegionKind regions) {
  const StructuredMesh& mesh = space.mesh();
  const QuadratureRule1D rule = gauss_1d(flux_quadrature_points(space.degree()));
  const bool neumann = mesh.boundary() == BoundaryKind::AllNeumann;
  double sum = 0.0;

  if (regions == RegionKind::ControlVolumes) {
    const Vector rhs = assemble_constraint_rhs(dual, problem, space.degree());
    for (std::size_t k = 0; k < dual.size(); ++k) {
      double defect = -rhs[static_cast<Eigen::Index>(k)];
      for (const Segment& seg : dual.volume(k).segments) {
        if (seg.on_domain_boundary) continue;
        defect += piece_flux(space, problem, solution.p, seg.owner_element, seg.a, seg.b,
                             seg.normal, rule);
      }
      sum += defect * defect;
    }
    return std::sqrt(sum);
  }

  const QuadratureRule2D quad = gauss_2d(load_quadrature_points(space.degree()));
  const double h = mesh.h();
  std::vector<double> source_in(mesh.num_elements(), 0.0);
  for (const PointSource& s : problem.sources) {
    source_in[source_element(mesh, s.location)] += s.strength;
  }
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Rect b = mesh.element_box(e);
    double defect = -source_in[e];
    if (problem.forcing) {
      for (std::size_t q = 0; q < quad.size(); ++q) {
        defect -= quad.weights[q] * h * h *
                  problem.forcing({b.x_lo + h * quad.points[q].x, b.y_lo + h * quad.points[q].y});
      }
    }
    const Point2 c[4] = {{b.x_lo, b.y_lo}, {b.x_hi, b.y_lo}, {b.x_hi, b.y_hi}, {b.x_lo, b.y_hi}};
    const Vec2 normals[4] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
    for (int side = 0; side < 4; ++side) {
      const Point2 a = c[side];
      const Point2 z = c[(side + 1) % 4];
      const bool on_boundary = side % 2 == 0 ? (a.y == 0.0 || a.y == 1.0)
                                             : (a.x == 0.0 || a.x == 1.0);
      if (neumann && on_boundary) continue;
      defect += piece_flux(space, problem, solution.p, e, a, z, normals[side], rule);
    }
    sum += defect * defect;
  }
  return std::sqrt(sum);
}

std::vector<std::optional<double>> convergence_rates(
    std::span<const std::optional<double>> errors) {
  std::vector<std::optional<double>> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const auto& a = errors[i];
    const auto& b = errors[i + 1];
    if (a && b && *a > 0.0 && *b > 0.0 && std::isfinite(*a) && std::isfinite(*b)) {
      rates.emplace_back(std::log2(*a / *b));
    } else {
      rates.emplace_back(std::nullopt);
    }
  }
  return rates;
}

std::vector<std::optional<double>> convergence_rates(std::span<const double> errors) {
  std::vector<std::optional<double>> wrapped(errors.begin(), errors.end());
  return convergence_rates(std::span<const std::optional<double>>(wrapped));
}

std::optional<double> inf_sup_estimate(const SparseSystem& system, const DualMesh& dual) {
  if (system.boundary != BoundaryKind::AllDirichlet) {
    throw PreconditionError(
        "inf-sup estimate needs an AllDirichlet system: the multiplier Gram matrix is singular "
        "on constants otherwise");
  }
  const std::vector<DualInterface> faces = dual_interfaces(dual);
  if (std::none_of(faces.begin(), faces.end(), [](const DualInterface& f) { return f.interior(); })) {
    return std::nullopt;
  }
  const Eigen::MatrixXd G = multiplier_gram(dual.size(), faces, dual.primal().h());

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(system.A);
  if (ldlt.info() != Eigen::Success) throw SolverError("stiffness factorization failed");
  const Eigen::MatrixXd Bt = Eigen::MatrixXd(system.Abar.transpose());
  const Eigen::MatrixXd X = ldlt.solve(Bt);
  Eigen::MatrixXd S = Bt.transpose() * X;
  S = 0.5 * (S + S.transpose());

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, G, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw SolverError("generalized eigen solve failed");
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > 0.0)) return 0.0;
  return std::sqrt(smallest);
}

}  // namespace consfem
