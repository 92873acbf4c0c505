#include "consfem/saddle_solver.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "consfem/errors.hpp"

namespace consfem {

namespace {

using Triplet = Eigen::Triplet<double>;
using Index = Eigen::Index;

void append_block(std::vector<Triplet>& out, const SparseMatrix& m, Index row0, Index col0,
                  bool transpose, Index max_rows = -1) {
  for (Index c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (max_rows >= 0 && it.row() >= max_rows) continue;
      if (transpose) {
        out.emplace_back(static_cast<int>(row0 + it.col()), static_cast<int>(col0 + it.row()),
                         it.value());
      } else {
        out.emplace_back(static_cast<int>(row0 + it.row()), static_cast<int>(col0 + it.col()),
                         it.value());
      }
    }
  }
}

std::string rank_report(const SparseMatrix& K) {
  if (K.rows() > 20000) return "rank estimate skipped for n = " + std::to_string(K.rows());
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(K);
  if (qr.info() != Eigen::Success) return "rank estimate unavailable";
  return "estimated rank " + std::to_string(qr.rank()) + " of " + std::to_string(K.rows());
}

Vector lu_solve(const SparseMatrix& K, const Vector& rhs) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) {
    throw SolverError("sparse LU factorization failed (" + lu.lastErrorMessage() + "); " +
                      rank_report(K));
  }
  Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("sparse LU solve failed; " + rank_report(K));
  }
  return x;
}

void check_neumann_compatibility(const SparseSystem& sys, bool constrained) {
  const double tol = 1e-10;
  const double load = sys.f.sum();
  if (std::abs(load) > tol * std::max(1.0, sys.f.lpNorm<1>())) {
    throw PreconditionError("incompatible Neumann data: total load " + std::to_string(load));
  }
  if (constrained) {
    const double vol = sys.fbar.sum();
    if (std::abs(vol) > tol * std::max(1.0, sys.fbar.lpNorm<1>())) {
      throw PreconditionError("incompatible Neumann data: total volume source " +
                              std::to_string(vol));
    }
  }
}

SolveMetadata base_meta(const SparseSystem& sys, bool constrained) {
  SolveMetadata m;
  m.level = sys.level;
  m.degree = sys.degree;
  m.problem_id = sys.problem_id;
  m.constrained = constrained;
  return m;
}

void finish(const SparseSystem& sys, Solution& sol) {
  const Residuals r = residuals(sys, sol);
  sol.meta.energy_residual = r.energy;
  sol.meta.constraint_residual = r.constraint;
}

}  // namespace

Vector free_part(const SparseSystem& system, const Vector& full) {
  Vector out(static_cast<Index>(system.num_free()));
  for (std::size_t i = 0; i < system.free_dofs.size(); ++i) {
    out[static_cast<Index>(i)] = full[static_cast<Index>(system.free_dofs[i])] -
                                 system.lift[static_cast<Index>(system.free_dofs[i])];
  }
  return out;
}

Solution solve_saddle(const SparseSystem& sys) {
  const Index n = static_cast<Index>(sys.num_free());
  const Index m = static_cast<Index>(sys.num_constraints());
  const bool neumann = sys.boundary == BoundaryKind::AllNeumann;
  if (neumann) check_neumann_compatibility(sys, true);

  // AllNeumann: drop the last constraint row, add one row for the mean of p.
  const Index kept = neumann ? m - 1 : m;
  const Index size = n + kept + (neumann ? 1 : 0);

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(sys.A.nonZeros() + 2 * sys.Abar.nonZeros() + 2 * n));
  append_block(t, sys.A, 0, 0, false);
  append_block(t, sys.Abar, n, 0, false, kept);
  append_block(t, sys.Abar, 0, n, true, kept);
  Vector rhs(size);
  rhs.head(n) = sys.f;
  rhs.segment(n, kept) = sys.fbar.head(kept);
  if (neumann) {
    // Pin the first dof; the mean is fixed afterwards by a constant shift.
    const Index s = n + kept;
    t.emplace_back(static_cast<int>(s), 0, 1.0);
    t.emplace_back(0, static_cast<int>(s), 1.0);
    rhs[s] = 0.0;
  }
  SparseMatrix K(size, size);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  const Vector x = lu_solve(K, rhs);

  Solution sol;
  sol.meta = base_meta(sys, true);
  Vector p = x.head(n);
  if (neumann) p.array() -= sys.mass.dot(p) / sys.mass.sum();
  sol.p = sys.expand(p);
  sol.lambda = Vector::Zero(m);
  sol.lambda.head(kept) = x.segment(n, kept);

  if (neumann && m > 0) {
    sol.meta.dropped_constraint = static_cast<std::size_t>(m - 1);
    // Least-squares value of the dropped multiplier against the first block row.
    const Vector last = sys.Abar.row(m - 1).transpose();
    const Vector r = sys.f - sys.A * p - sys.Abar.transpose() * sol.lambda;
    const double denom = last.squaredNorm();
    sol.lambda[m - 1] = denom > 0.0 ? last.dot(r) / denom : 0.0;
    // The rows of Abar sum to zero, so lambda is defined up to a constant.
    if (sys.volume_areas.size() == m) {
      const double shift = sol.lambda.dot(sys.volume_areas) / sys.volume_areas.sum();
      sol.lambda.array() -= shift;
    }
    sol.meta.multiplier_note =
        "dropped constraint " + std::to_string(m - 1) +
        " recovered by least squares; lambda shifted to zero area-weighted mean";
  }
  finish(sys, sol);
  return sol;
}

Solution solve_unconstrained(const SparseSystem& sys) {
  const Index n = static_cast<Index>(sys.num_free());
  Solution sol;
  sol.meta = base_meta(sys, false);
  sol.lambda = Vector::Zero(static_cast<Index>(sys.num_constraints()));

  // AllNeumann: pin the first dof (its equation follows from compatibility),
  // solve the remaining SPD block, then shift p to zero mean.
  const bool neumann = sys.boundary == BoundaryKind::AllNeumann;
  if (neumann) check_neumann_compatibility(sys, false);
  SparseMatrix K = sys.A;
  Vector rhs = sys.f;
  if (neumann && n > 0) {
    for (Index c = 0; c < K.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
        if (it.row() == 0 || it.col() == 0) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
      }
    }
    rhs[0] = 0.0;
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  ldlt.compute(K);
  if (ldlt.info() != Eigen::Success) {
    throw SolverError("LDLT factorization of the stiffness matrix failed; " + rank_report(K));
  }
  Vector p = ldlt.solve(rhs);
  if (!p.allFinite()) throw SolverError("stiffness solve produced non-finite values");
  if (neumann) p.array() -= sys.mass.dot(p) / sys.mass.sum();
  sol.p = sys.expand(p);
  finish(sys, sol);
  return sol;
}

Residuals residuals(const SparseSystem& sys, const Solution& sol) {
  if (sol.p.size() != static_cast<Index>(sys.num_dofs) ||
      sol.lambda.size() != static_cast<Index>(sys.num_constraints())) {
    throw PreconditionError("solution dimensions do not match the system");
  }
  const Vector p = free_part(sys, sol.p);
  Residuals r;
  r.energy = (sys.A * p + sys.Abar.transpose() * sol.lambda - sys.f).lpNorm<Eigen::Infinity>();
  r.constraint = (sys.Abar * p - sys.fbar).lpNorm<Eigen::Infinity>();
  return r;
}

}  // namespace consfem
