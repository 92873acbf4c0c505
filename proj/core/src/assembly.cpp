#include "consfem/assembly.hpp"

#include <algorithm>
#include <string>

#include "consfem/errors.hpp"

namespace consfem {

using Triplet = Eigen::Triplet<double>;

FeSpace::FeSpace(const StructuredMesh& mesh, int degree)
    : mesh_(mesh), basis_(degree), nodes_per_side_(mesh.cells_per_side() * degree + 1) {
  const std::size_t n = num_dofs();
  free_index_.assign(n, -1);
  const bool dirichlet = mesh_.boundary() == BoundaryKind::AllDirichlet;
  const int last = nodes_per_side_ - 1;
  for (std::size_t dof = 0; dof < n; ++dof) {
    const int I = static_cast<int>(dof % nodes_per_side_);
    const int J = static_cast<int>(dof / nodes_per_side_);
    if (dirichlet && (I == 0 || J == 0 || I == last || J == last)) {
      dirichlet_.push_back(dof);
    } else {
      free_index_[dof] = static_cast<std::ptrdiff_t>(free_.size());
      free_.push_back(dof);
    }
  }
}

Point2 FeSpace::dof_point(std::size_t dof) const {
  const double spacing = mesh_.h() / degree();
  return {static_cast<double>(dof % nodes_per_side_) * spacing,
          static_cast<double>(dof / nodes_per_side_) * spacing};
}

std::size_t FeSpace::global_dof(std::size_t e, int a) const {
  const auto [i, j] = mesh_.element_coords(e);
  const int r = degree();
  const int c = a % (r + 1);
  const int b = a / (r + 1);
  return static_cast<std::size_t>(j * r + b) * nodes_per_side_ + (i * r + c);
}

void FeSpace::element_dofs(std::size_t e, std::span<std::size_t> out) const {
  for (int a = 0; a < dofs_per_element(); ++a) out[a] = global_dof(e, a);
}

Point2 FeSpace::to_reference(std::size_t e, Point2 p) const {
  const Point2 o = mesh_.element_origin(e);
  return {(p.x - o.x) / mesh_.h(), (p.y - o.y) / mesh_.h()};
}

Vector SparseSystem::expand(const Vector& free_values) const {
  Vector full = lift.size() == 0 ? Vector::Zero(num_dofs) : lift;
  for (std::size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] += free_values[i];
  return full;
}

std::size_t source_element(const StructuredMesh& mesh, Point2 p) {
  return mesh.locate_element(p);
}

SparseMatrix assemble_stiffness(const FeSpace& space, const ProblemSpec& problem) {
  const StructuredMesh& mesh = space.mesh();
  const int nb = space.dofs_per_element();
  const bool constant = !problem.mobility;
  const Eigen::MatrixXd k_identity =
      local_stiffness(space.degree(), Tensor2::identity(), mesh.h());

  std::vector<Triplet> triplets;
  triplets.reserve(mesh.num_elements() * nb * nb);
  std::vector<std::size_t> dofs(nb);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::MatrixXd k =
        constant ? k_identity
                 : local_stiffness(space.degree(),
                                   problem.mobility(mesh.element_box(e).center()), mesh.h());
    space.element_dofs(e, dofs);
    for (int a = 0; a < nb; ++a) {
      for (int b = 0; b < nb; ++b) {
        triplets.emplace_back(static_cast<int>(dofs[a]), static_cast<int>(dofs[b]), k(a, b));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(space.num_dofs());
  SparseMatrix A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

SparseMatrix assemble_constraints(const DualMesh& dual, const FeSpace& space,
                                  const ProblemSpec& problem) {
  const StructuredMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const int nb = basis.size();
  const double inv_h = 1.0 / mesh.h();
  const QuadratureRule1D rule = gauss_1d(flux_quadrature_points(space.degree()));

  std::vector<Triplet> triplets;
  std::vector<Vec2> grads(nb);
  std::vector<double> row(nb);
  for (std::size_t k = 0; k < dual.size(); ++k) {
    for (const Segment& seg : dual.volume(k).segments) {
      if (seg.on_domain_boundary) continue;
      const std::size_t e = seg.owner_element;
      if (!mesh.element_box(e).contains(seg.midpoint())) {
        throw InternalError("segment owner does not contain the segment");
      }
      const Tensor2 mob = problem.mobility_at(mesh.element_box(e).center());
      const double len = seg.length();
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double t = rule.points[q];
        const Point2 x{seg.a.x + t * (seg.b.x - seg.a.x), seg.a.y + t * (seg.b.y - seg.a.y)};
        basis.gradients(space.to_reference(e, x), grads);
        for (int a = 0; a < nb; ++a) {
          row[a] -= rule.weights[q] * len * dot(mob.apply(inv_h * grads[a]), seg.normal);
        }
      }
      for (int a = 0; a < nb; ++a) {
        triplets.emplace_back(static_cast<int>(k), static_cast<int>(space.global_dof(e, a)),
                              row[a]);
      }
    }
  }
  SparseMatrix Abar(static_cast<Eigen::Index>(dual.size()),
                    static_cast<Eigen::Index>(space.num_dofs()));
  Abar.setFromTriplets(triplets.begin(), triplets.end());
  return Abar;
}

Vector assemble_load(const FeSpace& space, const ProblemSpec& problem) {
  const StructuredMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const int nb = basis.size();
  const double h = mesh.h();
  Vector f = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  std::vector<double> phi(nb);
  std::vector<std::size_t> dofs(nb);

  if (problem.forcing) {
    const QuadratureRule2D quad = gauss_2d(load_quadrature_points(space.degree()));
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const Point2 o = mesh.element_origin(e);
      space.element_dofs(e, dofs);
      for (std::size_t q = 0; q < quad.size(); ++q) {
        const Point2 xi = quad.points[q];
        const double wq = quad.weights[q] * h * h * problem.forcing({o.x + h * xi.x, o.y + h * xi.y});
        basis.values(xi, phi);
        for (int a = 0; a < nb; ++a) f[dofs[a]] += wq * phi[a];
      }
    }
  }
  for (const PointSource& s : problem.sources) {
    const std::size_t e = source_element(mesh, s.location);
    basis.values(space.to_reference(e, s.location), phi);
    space.element_dofs(e, dofs);
    for (int a = 0; a < nb; ++a) f[dofs[a]] += s.strength * phi[a];
  }
  return f;
}

Vector assemble_constraint_rhs(const DualMesh& dual, const ProblemSpec& problem, int degree) {
  Vector fbar = Vector::Zero(static_cast<Eigen::Index>(dual.size()));
  if (problem.forcing) {
    const QuadratureRule2D quad = gauss_2d(load_quadrature_points(degree));
    for (std::size_t k = 0; k < dual.size(); ++k) {
      const ControlVolume& cv = dual.volume(k);
      // The lines through the vertex cut the volume into element-wise pieces.
      std::vector<double> xs{cv.box.x_lo}, ys{cv.box.y_lo};
      if (cv.center.x > cv.box.x_lo && cv.center.x < cv.box.x_hi) xs.push_back(cv.center.x);
      if (cv.center.y > cv.box.y_lo && cv.center.y < cv.box.y_hi) ys.push_back(cv.center.y);
      xs.push_back(cv.box.x_hi);
      ys.push_back(cv.box.y_hi);
      double sum = 0.0;
      for (std::size_t by = 0; by + 1 < ys.size(); ++by) {
        for (std::size_t bx = 0; bx + 1 < xs.size(); ++bx) {
          const double wx = xs[bx + 1] - xs[bx];
          const double wy = ys[by + 1] - ys[by];
          for (std::size_t q = 0; q < quad.size(); ++q) {
            const Point2 xi = quad.points[q];
            sum += quad.weights[q] * wx * wy *
                   problem.forcing({xs[bx] + wx * xi.x, ys[by] + wy * xi.y});
          }
        }
      }
      fbar[static_cast<Eigen::Index>(k)] = sum;
    }
  }
  for (const PointSource& s : problem.sources) {
    source_element(dual.primal(), s.location);  // domain check
    if (auto k = dual.locate_volume(s.location)) fbar[static_cast<Eigen::Index>(*k)] += s.strength;
  }
  return fbar;
}

Vector assemble_mass_functional(const FeSpace& space) {
  const StructuredMesh& mesh = space.mesh();
  const ReferenceBasis& basis = space.basis();
  const int nb = basis.size();
  const QuadratureRule2D quad = gauss_2d(space.degree() + 1);
  std::vector<double> local(nb, 0.0), phi(nb);
  for (std::size_t q = 0; q < quad.size(); ++q) {
    basis.values(quad.points[q], phi);
    for (int a = 0; a < nb; ++a) local[a] += quad.weights[q] * phi[a];
  }
  const double area = mesh.h() * mesh.h();
  Vector m = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  std::vector<std::size_t> dofs(nb);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    space.element_dofs(e, dofs);
    for (int a = 0; a < nb; ++a) m[dofs[a]] += area * local[a];
  }
  return m;
}

namespace {

SparseMatrix free_selector(const FeSpace& space) {
  std::vector<Triplet> t;
  t.reserve(space.free_dofs().size());
  for (std::size_t i = 0; i < space.free_dofs().size(); ++i) {
    t.emplace_back(static_cast<int>(space.free_dofs()[i]), static_cast<int>(i), 1.0);
  }
  SparseMatrix P(static_cast<Eigen::Index>(space.num_dofs()),
                 static_cast<Eigen::Index>(space.free_dofs().size()));
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

}  // namespace

SparseSystem apply_dirichlet_lift(const SparseMatrix& A_full, const SparseMatrix& Abar_full,
                                  const Vector& f, const Vector& fbar,
                                  const ScalarField& dirichlet, const FeSpace& space) {
  if (space.mesh().boundary() != BoundaryKind::AllDirichlet) {
    throw PreconditionError("Dirichlet lifting requires an AllDirichlet space");
  }
  if (!dirichlet) throw PreconditionError("Dirichlet data is undefined");

  SparseSystem sys;
  sys.boundary = BoundaryKind::AllDirichlet;
  sys.level = space.mesh().level();
  sys.degree = space.degree();
  sys.num_dofs = space.num_dofs();
  sys.free_dofs = space.free_dofs();
  sys.lift = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
  for (std::size_t dof : space.dirichlet_dofs()) sys.lift[dof] = dirichlet(space.dof_point(dof));

  const SparseMatrix P = free_selector(space);
  const Vector A_lift = A_full * sys.lift;
  sys.A = P.transpose() * A_full * P;
  sys.Abar = Abar_full * P;
  sys.f = P.transpose() * (f - A_lift);
  sys.fbar = fbar - Abar_full * sys.lift;
  sys.mass = P.transpose() * assemble_mass_functional(space);
  return sys;
}

SparseSystem assemble_system(const DualMesh& dual, const FeSpace& space,
                             const ProblemSpec& problem) {
  if (dual.primal().level() != space.mesh().level() ||
      dual.primal().boundary() != space.mesh().boundary() ||
      problem.boundary != space.mesh().boundary()) {
    throw PreconditionError("mesh, dual mesh, space and problem disagree on level or boundary");
  }
  const SparseMatrix A = assemble_stiffness(space, problem);
  const SparseMatrix Abar = assemble_constraints(dual, space, problem);
  const Vector f = assemble_load(space, problem);
  const Vector fbar = assemble_constraint_rhs(dual, problem, space.degree());

  SparseSystem sys;
  if (problem.boundary == BoundaryKind::AllDirichlet) {
    sys = apply_dirichlet_lift(A, Abar, f, fbar, problem.dirichlet, space);
  } else {
    sys.boundary = BoundaryKind::AllNeumann;
    sys.level = space.mesh().level();
    sys.degree = space.degree();
    sys.num_dofs = space.num_dofs();
    sys.free_dofs = space.free_dofs();
    sys.A = A;
    sys.Abar = Abar;
    sys.f = f;
    sys.fbar = fbar;
    sys.lift = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
    sys.mass = assemble_mass_functional(space);
  }
  sys.problem_id = problem.id;
  sys.volume_areas.resize(static_cast<Eigen::Index>(dual.size()));
  for (std::size_t k = 0; k < dual.size(); ++k) {
    sys.volume_areas[static_cast<Eigen::Index>(k)] = dual.volume(k).area;
  }
  return sys;
}

}  // namespace consfem
