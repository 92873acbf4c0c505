#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "consfem/assembly.hpp"
#include "consfem/errors.hpp"
#include "consfem/problems.hpp"

using namespace consfem;

namespace {

ProblemSpec unit_forcing(BoundaryKind bc) {
  ProblemSpec p;
  p.id = "unit";
  p.boundary = bc;
  p.forcing = [](Point2) { return 1.0; };
  if (bc == BoundaryKind::AllDirichlet) p.dirichlet = [](Point2) { return 0.0; };
  return p;
}

double dense_max(const SparseMatrix& m) {
  return Eigen::MatrixXd(m).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(FeSpace, CountsAndDirichletSet) {
  for (int r : {1, 2}) {
    const StructuredMesh mesh(3, BoundaryKind::AllDirichlet);
    const FeSpace space(mesh, r);
    const std::size_t side = 8 * r + 1;
    EXPECT_EQ(space.num_dofs(), side * side);
    EXPECT_EQ(space.dirichlet_dofs().size(), 4 * (side - 1));
    EXPECT_EQ(space.dirichlet_dofs().size() + space.free_dofs().size(), space.num_dofs());
    for (std::size_t d : space.dirichlet_dofs()) {
      const Point2 p = space.dof_point(d);
      EXPECT_TRUE(p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0);
      EXPECT_EQ(space.free_index(d), -1);
    }
    const FeSpace neumann(StructuredMesh(3, BoundaryKind::AllNeumann), r);
    EXPECT_TRUE(neumann.dirichlet_dofs().empty());
  }
}

TEST(FeSpace, LocalToGlobalIsConsistent) {
  for (int r : {1, 2}) {
    const StructuredMesh mesh(2, BoundaryKind::AllDirichlet);
    const FeSpace space(mesh, r);
    const ReferenceBasis basis(r);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      std::set<std::size_t> seen;
      const Point2 o = mesh.element_origin(e);
      for (int a = 0; a < basis.size(); ++a) {
        const std::size_t g = space.global_dof(e, a);
        seen.insert(g);
        const Point2 p = space.dof_point(g);
        EXPECT_DOUBLE_EQ(p.x, o.x + mesh.h() * basis.nodes()[a].x);
        EXPECT_DOUBLE_EQ(p.y, o.y + mesh.h() * basis.nodes()[a].y);
      }
      EXPECT_EQ(seen.size(), static_cast<std::size_t>(basis.size()));
    }
    // Elements 0 and 1 share their common edge nodes.
    EXPECT_EQ(space.global_dof(0, r), space.global_dof(1, 0));
  }
}

TEST(Stiffness, SymmetricWithConstantKernel) {
  for (int r : {1, 2}) {
    const FeSpace space(StructuredMesh(3, BoundaryKind::AllNeumann), r);
    ProblemSpec p = problem_neumann_smooth();
    p.mobility = [](Point2 x) { return Tensor2{1.0 + x.x, 0.2, 1.0 + x.y}; };
    const SparseMatrix A = assemble_stiffness(space, p);
    EXPECT_LE(dense_max(SparseMatrix(A - SparseMatrix(A.transpose()))), 1e-14);
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(space.num_dofs()));
    EXPECT_LE((A * ones).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Stiffness, CoerciveOnFreeDofs) {
  const FeSpace space(StructuredMesh(3, BoundaryKind::AllDirichlet), 2);
  const DualMesh dual(space.mesh());
  const SparseSystem sys = assemble_system(dual, space, problem_example1());
  std::mt19937 rng(11);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 10; ++t) {
    Vector x(static_cast<Eigen::Index>(sys.num_free()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n01(rng);
    EXPECT_GT(x.dot(sys.A * x), 0.0);
  }
}

TEST(Stiffness, Q1MatchesNinePointStencil) {
  // Q1 on squares with unit mobility: 8/3 at the centre, -1/3 at the eight
  // neighbours (interior rows).
  const StructuredMesh mesh(2, BoundaryKind::AllDirichlet);
  const FeSpace space(mesh, 1);
  const Eigen::MatrixXd A(assemble_stiffness(space, problem_example1()));
  const int s = space.nodes_per_side();
  for (int J = 1; J < s - 1; ++J) {
    for (int I = 1; I < s - 1; ++I) {
      const int row = J * s + I;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const double expected = (di == 0 && dj == 0) ? 8.0 / 3 : -1.0 / 3;
          EXPECT_NEAR(A(row, (J + dj) * s + I + di), expected, 1e-14);
        }
      }
      EXPECT_NEAR(A.row(row).cwiseAbs().sum(), 16.0 / 3, 1e-14);
    }
  }
}

TEST(Constraints, ReferenceCellFluxCoefficients) {
  // Level 1 Neumann mesh (h = 1/2): the corner volume at the origin is
  // bounded by x = h/2 and y = h/2 inside element 0, i.e. the reference
  // segments x = 1/2 and y = 1/2 of that cell.
  const StructuredMesh mesh(1, BoundaryKind::AllNeumann);
  const FeSpace space(mesh, 1);
  const DualMesh dual(mesh);
  const Eigen::MatrixXd Abar(assemble_constraints(dual, space, problem_neumann_smooth()));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.num_dofs()));
    double P[4];
    for (int a = 0; a < 4; ++a) {
      P[a] = u(rng);
      v[static_cast<Eigen::Index>(space.global_dof(0, a))] = P[a];
    }
    const double right = (P[1] - P[0]) * 3.0 / 8 + (P[3] - P[2]) / 8.0;
    const double top = (P[2] - P[0]) * 3.0 / 8 + (P[3] - P[1]) / 8.0;
    EXPECT_NEAR(Abar.row(0).dot(v), -(right + top), 1e-14);
  }
}

TEST(Constraints, Q1MatchesHandStencil) {
  // Bilinear fluxes across the four sides of an interior dual square give
  // 3 at the centre, -1/2 at edge neighbours and -1/4 at corner neighbours.
  const StructuredMesh mesh(2, BoundaryKind::AllDirichlet);
  const FeSpace space(mesh, 1);
  const DualMesh dual(mesh);
  const Eigen::MatrixXd Abar(assemble_constraints(dual, space, problem_example1()));
  const int s = space.nodes_per_side();
  Eigen::MatrixXd hand = Eigen::MatrixXd::Zero(Abar.rows(), Abar.cols());
  for (std::size_t k = 0; k < dual.size(); ++k) {
    const auto [I, J] = dual.volume(k).vertex;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int taxi = std::abs(di) + std::abs(dj);
        hand(static_cast<Eigen::Index>(k), (J + dj) * s + I + di) =
            taxi == 0 ? 3.0 : (taxi == 1 ? -0.5 : -0.25);
      }
    }
  }
  EXPECT_LE((Abar - hand).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Constraints, ConstantsCarryNoFlux) {
  for (int r : {1, 2}) {
    const StructuredMesh mesh(3, BoundaryKind::AllNeumann);
    const FeSpace space(mesh, r);
    const DualMesh dual(mesh);
    const SparseMatrix Abar = assemble_constraints(dual, space, problem_neumann_smooth());
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(space.num_dofs()));
    EXPECT_LE((Abar * ones).cwiseAbs().maxCoeff(), 1e-14);
    // Columns sum to zero as well: interior fluxes cancel pairwise and
    // the Neumann boundary carries none.
    const Vector colsum = Eigen::RowVectorXd::Ones(Abar.rows()) * Abar;
    EXPECT_LE(colsum.cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Load, UnitForcingSumsToArea) {
  for (int r : {1, 2}) {
    const StructuredMesh mesh(3, BoundaryKind::AllNeumann);
    const FeSpace space(mesh, r);
    const DualMesh dual(mesh);
    const ProblemSpec p = unit_forcing(BoundaryKind::AllNeumann);
    EXPECT_NEAR(assemble_load(space, p).sum(), 1.0, 1e-14);
    EXPECT_NEAR(assemble_constraint_rhs(dual, p, r).sum(), 1.0, 1e-14);
    EXPECT_NEAR(assemble_mass_functional(space).sum(), 1.0, 1e-14);

    const StructuredMesh dm(3, BoundaryKind::AllDirichlet);
    const DualMesh dd(dm);
    const double covered = (1.0 - dm.h()) * (1.0 - dm.h());
    EXPECT_NEAR(assemble_constraint_rhs(dd, unit_forcing(BoundaryKind::AllDirichlet), r).sum(),
                covered, 1e-14);
  }
}

TEST(Load, PointSourcesAreAssembledOnce) {
  const StructuredMesh mesh(2, BoundaryKind::AllNeumann);
  const FeSpace space(mesh, 1);
  const DualMesh dual(mesh);
  ProblemSpec p;
  p.id = "sources";
  p.boundary = BoundaryKind::AllNeumann;
  p.sources = {{{0.5, 0.5}, 2.0}, {{0.0, 0.0}, -0.5}};
  const Vector f = assemble_load(space, p);
  EXPECT_NEAR(f.sum(), 1.5, 1e-15);
  const int s = space.nodes_per_side();
  EXPECT_DOUBLE_EQ(f[2 * s + 2], 2.0);
  EXPECT_DOUBLE_EQ(f[0], -0.5);
  const Vector fbar = assemble_constraint_rhs(dual, p, 1);
  EXPECT_DOUBLE_EQ(fbar[static_cast<Eigen::Index>(*dual.volume_at_vertex(2, 2))], 2.0);
  EXPECT_DOUBLE_EQ(fbar[0], -0.5);

  p.sources = {{{1.5, 0.5}, 1.0}};
  EXPECT_THROW(assemble_load(space, p), ParameterError);
}

TEST(Lift, InterpolatesBoundaryData) {
  const ProblemSpec p = problem_linear_dirichlet();
  for (int r : {1, 2}) {
    const StructuredMesh mesh(3, BoundaryKind::AllDirichlet);
    const FeSpace space(mesh, r);
    const DualMesh dual(mesh);
    const SparseSystem sys = assemble_system(dual, space, p);
    EXPECT_EQ(sys.num_free(), space.free_dofs().size());
    EXPECT_EQ(sys.num_constraints(), dual.size());
    for (std::size_t d : space.dirichlet_dofs()) {
      EXPECT_DOUBLE_EQ(sys.lift[static_cast<Eigen::Index>(d)], p.dirichlet(space.dof_point(d)));
    }
    for (std::size_t d : space.free_dofs()) EXPECT_EQ(sys.lift[static_cast<Eigen::Index>(d)], 0.0);
    // The interpolant of the exact linear solution satisfies both block rows.
    Vector exact_free(static_cast<Eigen::Index>(sys.num_free()));
    for (std::size_t i = 0; i < sys.free_dofs.size(); ++i) {
      exact_free[static_cast<Eigen::Index>(i)] = p.exact->value(space.dof_point(sys.free_dofs[i]));
    }
    EXPECT_LE((sys.A * exact_free - sys.f).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((sys.Abar * exact_free - sys.fbar).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Lift, RequiresDirichletSpaceAndData) {
  const StructuredMesh mesh(2, BoundaryKind::AllNeumann);
  const FeSpace space(mesh, 1);
  const DualMesh dual(mesh);
  const ProblemSpec p = problem_neumann_smooth();
  const SparseMatrix A = assemble_stiffness(space, p);
  const SparseMatrix Abar = assemble_constraints(dual, space, p);
  EXPECT_THROW(apply_dirichlet_lift(A, Abar, assemble_load(space, p),
                                    assemble_constraint_rhs(dual, p, 1), [](Point2) { return 0.0; },
                                    space),
               PreconditionError);
  ProblemSpec missing = problem_example1();
  missing.dirichlet = nullptr;
  const StructuredMesh dm(2, BoundaryKind::AllDirichlet);
  const FeSpace ds(dm, 1);
  EXPECT_THROW(assemble_system(DualMesh(dm), ds, missing), PreconditionError);
}

TEST(System, VolumeAreasAndExpand) {
  const StructuredMesh mesh(2, BoundaryKind::AllNeumann);
  const FeSpace space(mesh, 2);
  const DualMesh dual(mesh);
  const SparseSystem sys = assemble_system(dual, space, problem_neumann_smooth());
  EXPECT_NEAR(sys.volume_areas.sum(), 1.0, 1e-15);
  EXPECT_EQ(sys.num_free(), space.num_dofs());
  const Vector x = Vector::LinSpaced(static_cast<Eigen::Index>(sys.num_free()), 0.0, 1.0);
  EXPECT_EQ(sys.expand(x), x);
}
