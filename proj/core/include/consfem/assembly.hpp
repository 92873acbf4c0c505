#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "consfem/elements.hpp"
#include "consfem/geometry.hpp"
#include "consfem/mesh.hpp"

namespace consfem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Continuous Q^r space on a StructuredMesh.
///
/// DOFs live on the (n r + 1)^2 tensor grid with spacing h / r; DOF (I, J)
/// has global index J (n r + 1) + I.  On AllDirichlet meshes the grid
/// boundary forms the Dirichlet set.
class FeSpace {
 public:
  FeSpace(const StructuredMesh& mesh, int degree);

  const StructuredMesh& mesh() const { return mesh_; }
  const ReferenceBasis& basis() const { return basis_; }
  int degree() const { return basis_.degree(); }
  int nodes_per_side() const { return nodes_per_side_; }
  std::size_t num_dofs() const {
    return static_cast<std::size_t>(nodes_per_side_) * nodes_per_side_;
  }
  int dofs_per_element() const { return basis_.size(); }

  Point2 dof_point(std::size_t dof) const;
  /// Global DOF of local node a of element e.
  std::size_t global_dof(std::size_t e, int a) const;
  void element_dofs(std::size_t e, std::span<std::size_t> out) const;

  bool is_dirichlet(std::size_t dof) const { return free_index_[dof] < 0; }
  const std::vector<std::size_t>& dirichlet_dofs() const { return dirichlet_; }
  const std::vector<std::size_t>& free_dofs() const { return free_; }
  /// Position of dof in free_dofs(), or -1 for Dirichlet DOFs.
  std::ptrdiff_t free_index(std::size_t dof) const { return free_index_[dof]; }

  /// Reference coordinates of a physical point in element e.
  Point2 to_reference(std::size_t e, Point2 p) const;

 private:
  StructuredMesh mesh_;
  ReferenceBasis basis_;
  int nodes_per_side_;
  std::vector<std::size_t> dirichlet_;
  std::vector<std::size_t> free_;
  std::vector<std::ptrdiff_t> free_index_;
};

using ScalarField = std::function<double(Point2)>;
using MobilityField = std::function<Tensor2(Point2)>;

struct PointSource {
  Point2 location;
  double strength = 0.0;
};

/// Exact solution bundle used for error evaluation.
struct ExactSolution {
  ScalarField value;
  std::function<Vec2(Point2)> gradient;
  ScalarField dxx;
  ScalarField dyy;
};

/// -div(mobility grad p) = forcing + sources, with either p = dirichlet on
/// the whole boundary or homogeneous Neumann data.
struct ProblemSpec {
  std::string id;
  BoundaryKind boundary = BoundaryKind::AllDirichlet;
  ScalarField forcing;               ///< smooth part of the source term; empty means 0
  std::vector<PointSource> sources;  ///< Dirac sources
  ScalarField dirichlet;             ///< boundary data, AllDirichlet only
  MobilityField mobility;            ///< evaluated at element centres; empty means identity
  std::optional<ExactSolution> exact;

  double forcing_at(Point2 p) const { return forcing ? forcing(p) : 0.0; }
  Tensor2 mobility_at(Point2 p) const { return mobility ? mobility(p) : Tensor2::identity(); }
};

/// Algebraic form of the constrained problem, restricted to free DOFs.
///
///   [ A     Abar^T ] [ p      ]   [ f    ]
///   [ Abar  0      ] [ lambda ] = [ fbar ]
struct SparseSystem {
  BoundaryKind boundary = BoundaryKind::AllDirichlet;
  int level = 0;
  int degree = 0;
  std::string problem_id;

  SparseMatrix A;     ///< free x free
  SparseMatrix Abar;  ///< volumes x free
  Vector f;           ///< over free DOFs
  Vector fbar;        ///< over control volumes
  Vector lift;        ///< full-DOF Dirichlet interpolant, zero on free DOFs
  Vector mass;        ///< int phi_i over free DOFs (zero-mean functional)
  Vector volume_areas;
  std::vector<std::size_t> free_dofs;
  std::size_t num_dofs = 0;

  std::size_t num_free() const { return free_dofs.size(); }
  std::size_t num_constraints() const { return static_cast<std::size_t>(Abar.rows()); }

  /// Scatter free coefficients into a full-DOF vector and add the lift.
  Vector expand(const Vector& free_values) const;
};

/// Quadrature sizes shared by assembly and analysis.
inline int load_quadrature_points(int degree) { return degree + 4; }
inline int flux_quadrature_points(int degree) { return degree + 1; }

/// Full-DOF stiffness matrix.
SparseMatrix assemble_stiffness(const FeSpace& space, const ProblemSpec& problem);

/// Full-DOF constraint matrix: row k holds int_{dV_k} -mobility grad phi_j . n.
/// Segments on the Neumann boundary carry the prescribed zero flux and are
/// skipped.
SparseMatrix assemble_constraints(const DualMesh& dual, const FeSpace& space,
                                  const ProblemSpec& problem);

/// f_i = int q phi_i + sum_s w_s phi_i(x_s), over all DOFs.
Vector assemble_load(const FeSpace& space, const ProblemSpec& problem);

/// fbar_k = int_{V_k} q + strengths of the sources located in V_k.
Vector assemble_constraint_rhs(const DualMesh& dual, const ProblemSpec& problem, int degree);

/// int phi_i over all DOFs.
Vector assemble_mass_functional(const FeSpace& space);

/// Move the Dirichlet interpolant to the right-hand sides and restrict the
/// matrices to free columns.  Requires an AllDirichlet space.
SparseSystem apply_dirichlet_lift(const SparseMatrix& A_full, const SparseMatrix& Abar_full,
                                  const Vector& f, const Vector& fbar,
                                  const ScalarField& dirichlet, const FeSpace& space);

/// Assemble every block and apply boundary treatment for either boundary kind.
SparseSystem assemble_system(const DualMesh& dual, const FeSpace& space,
                             const ProblemSpec& problem);

/// Lowest-index element containing p after checking it is inside the domain.
std::size_t source_element(const StructuredMesh& mesh, Point2 p);

}  // namespace consfem
