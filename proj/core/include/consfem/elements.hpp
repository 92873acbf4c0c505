#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "consfem/geometry.hpp"

namespace consfem {

/// Gauss-Legendre rule on the reference interval [0, 1].
struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Tensor-product Gauss-Legendre rule on the reference square [0, 1]^2.
struct QuadratureRule2D {
  std::vector<Point2> points;
  std::vector<double> weights;
  int exactness_degree = 0;  ///< per-direction polynomial degree integrated exactly

  std::size_t size() const { return points.size(); }
};

/// n-point rule, 1 <= n <= 10; exact for degree 2n - 1.
QuadratureRule1D gauss_1d(int n);
QuadratureRule2D gauss_2d(int n);

/// Tensor-product Lagrange basis of degree r on [0, 1]^2 with equispaced
/// nodes.  Local node a = b (r + 1) + c sits at (c / r, b / r), i.e. nodes are
/// ordered lexicographically by (y, x).  For r = 1 this is (0,0), (1,0),
/// (0,1), (1,1); for r = 2 the centre node is a = 4.
class ReferenceBasis {
 public:
  static constexpr int kMaxDegree = 2;

  explicit ReferenceBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return (degree_ + 1) * (degree_ + 1); }
  const std::vector<Point2>& nodes() const { return nodes_; }

  void values(Point2 xi, std::span<double> out) const;
  void gradients(Point2 xi, std::span<Vec2> out) const;
  /// Pure second derivatives d^2/dxi^2 and d^2/deta^2.
  void second_derivatives(Point2 xi, std::span<double> dxx, std::span<double> dyy) const;

 private:
  struct Line {
    double v, d1, d2;
  };
  void line(double t, std::span<Line> out) const;

  int degree_;
  std::vector<Point2> nodes_;
};

std::vector<double> basis_eval(int degree, Point2 xi);
std::vector<Vec2> basis_grad(int degree, Point2 xi);

/// Element stiffness int_R (mobility grad phi_a) . grad phi_b on a square of
/// side h.  Uses gauss_2d(degree + 1), exact for constant mobility.
Eigen::MatrixXd local_stiffness(int degree, const Tensor2& mobility, double h);

}  // namespace consfem
