#pragma once

#include <optional>
#include <string>

#include "consfem/assembly.hpp"

namespace consfem {

struct SolveMetadata {
  int level = 0;
  int degree = 0;
  std::string problem_id;
  bool constrained = false;
  double energy_residual = 0.0;      ///< ||A p + Abar^T lambda - f||_inf
  double constraint_residual = 0.0;  ///< ||Abar p - fbar||_inf
  /// AllNeumann: index of the constraint row removed before factorization.
  std::optional<std::size_t> dropped_constraint;
  /// How the multiplier's free constant was fixed, empty when it is unique.
  std::string multiplier_note;
};

struct Solution {
  Vector p;       ///< full-DOF coefficients, Dirichlet lift included
  Vector lambda;  ///< one multiplier per control volume (zero when unconstrained)
  SolveMetadata meta;
};

/// Sparse LU on the full indefinite block system.
///
/// AllNeumann systems are regularised by dropping the last constraint row
/// (the rows sum to zero) and pinning the first dof of p; p is then shifted to
/// zero mean, which is exact because constants lie in the kernel of A and
/// Abar.  The dropped multiplier is recovered by least squares against the first block
/// equation, then lambda is shifted to zero area-weighted mean.
Solution solve_saddle(const SparseSystem& system);

/// Standard Galerkin solve ignoring the constraint block.
Solution solve_unconstrained(const SparseSystem& system);

struct Residuals {
  double energy = 0.0;
  double constraint = 0.0;
};

Residuals residuals(const SparseSystem& system, const Solution& solution);

/// Free-DOF part of a full coefficient vector (lift removed).
Vector free_part(const SparseSystem& system, const Vector& full);

}  // namespace consfem
