#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "consfem/assembly.hpp"
#include "consfem/mesh.hpp"
#include "consfem/saddle_solver.hpp"

namespace consfem {

/// Value, gradient and pure second derivatives of a field at a point.
struct FieldSample {
  double value = 0.0;
  Vec2 grad;
  double dxx = 0.0;
  double dyy = 0.0;
};

/// Pointwise evaluation of a discrete solution p^h and its piecewise-constant
/// multiplier.  Holds references: the space, dual mesh and solution must
/// outlive the field.
class DiscreteField {
 public:
  DiscreteField(const FeSpace& space, const DualMesh& dual, const Solution& solution);

  const FeSpace& space() const { return *space_; }
  const DualMesh& dual() const { return *dual_; }
  const Solution& solution() const { return *solution_; }

  /// Evaluate inside element e (p must lie in its closure).
  FieldSample sample_in(std::size_t e, Point2 p) const;
  /// Evaluate in the lowest-index element containing p.
  FieldSample sample(Point2 p) const;
  /// lambda of the lowest-index control volume containing p; 0 outside all
  /// volumes.
  double multiplier(Point2 p) const;

 private:
  const FeSpace* space_;
  const DualMesh* dual_;
  const Solution* solution_;
};

struct NormErrors {
  double l1 = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;           ///< H1 seminorm of the error
  double w11 = 0.0;          ///< W^{1,1} seminorm: int |e_x| + |e_y|
  double vh = 0.0;           ///< sqrt(|e|_H1^2 + h^2 |e|_Vh^2)
  double vh_seminorm = 0.0;  ///< sqrt(sum_l ||e_xx||^2 + ||e_yy||^2), unscaled
  std::optional<double> l1_corrected;  ///< || p - (p^h + lambda^h) ||_L1
  std::optional<double> l2_corrected;  ///< || p - (p^h + lambda^h) ||_L2
};

struct AnalysisOptions {
  int threads = 1;  ///< element-loop workers; partial sums are combined in fixed order
};

/// Errors against the exact solution bundle of the problem.  Integration
/// runs over the four quarters of every element (the dual lines cut elements
/// through their centres) with gauss_2d(r + 4).
NormErrors norm_errors(const Solution& solution, const ProblemSpec& problem,
                       const FeSpace& space, const DualMesh& dual,
                       const AnalysisOptions& options = {});

/// Errors against a discrete reference solution on a nested finer mesh.  The
/// corrected error compares p^h + lambda^h with the reference's own
/// p_ref + lambda_ref.  Integration runs over quarters of the reference mesh.
NormErrors reference_errors(const DiscreteField& approx, const DiscreteField& reference,
                            const AnalysisOptions& options = {});

/// |p - p^h|_{V^h} against the exact solution.
double vh_seminorm(const Solution& solution, const ProblemSpec& problem, const FeSpace& space,
                   const DualMesh& dual);

/// sqrt((1/h) sum over dual interfaces of length * jump^2).  lambda is taken
/// as zero outside the control volumes, so single-sided interfaces facing the
/// uncovered Dirichlet strip contribute lambda_k^2; sides on the domain
/// boundary carry no jump.
double multiplier_norm(const Vector& lambda, std::span<const DualInterface> interfaces,
                       double h);

/// E(p^h) = 1/2 a(p^h, p^h) - F(p^h), Dirichlet lift included.
double energy(const Solution& solution, const ProblemSpec& problem, const FeSpace& space);

enum class RegionKind { ControlVolumes, PrimalElements };

/// Root-sum-square of per-region mass defects int_{dR} -mobility grad p . n
/// - int_R q - sources in R.  Boundary pieces on a Neumann boundary use the
/// prescribed zero flux.
double conservation_indicator(const Solution& solution, const ProblemSpec& problem,
                              const FeSpace& space, const DualMesh& dual, RegionKind regions);

/// rates[i] = log2(e[i] / e[i+1]); missing when either value is absent or
/// not strictly positive.
std::vector<std::optional<double>> convergence_rates(std::span<const std::optional<double>> errors);
std::vector<std::optional<double>> convergence_rates(std::span<const double> errors);

/// Discrete inf-sup constant of the constraint form: sqrt of the smallest
/// eigenvalue of (Abar A^-1 Abar^T) mu = t G mu, G being the Gram matrix of
/// the multiplier norm.  Requires an AllDirichlet system; returns nullopt when
/// the dual mesh has no interior interface.  Dense: intended for level <= 5.
std::optional<double> inf_sup_estimate(const SparseSystem& system, const DualMesh& dual);

/// Gram matrix of multiplier_norm over the given interfaces.
Eigen::MatrixXd multiplier_gram(std::size_t num_volumes,
                                std::span<const DualInterface> interfaces, double h);

}  // namespace consfem
