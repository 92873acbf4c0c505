#include "consfem/elements.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "consfem/errors.hpp"

namespace consfem {

namespace {

void check_degree(int degree) {
  if (degree < 1 || degree > ReferenceBasis::kMaxDegree) {
    throw ParameterError("unsupported polynomial degree " + std::to_string(degree) +
                         " (supported: 1, 2)");
  }
}

// Legendre P_n and its derivative at x in [-1, 1] by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule1D gauss_1d(int n) {
  if (n < 1 || n > 10) {
    throw ParameterError("Gauss rule size must be in [1, 10], got " + std::to_string(n));
  }
  QuadratureRule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.exactness_degree = 2 * n - 1;
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
    return rule;
  }
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Roots come out in decreasing order; store ascending on [0, 1].
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.5;
  return rule;
}

QuadratureRule2D gauss_2d(int n) {
  const QuadratureRule1D line = gauss_1d(n);
  QuadratureRule2D rule;
  rule.exactness_degree = line.exactness_degree;
  rule.points.reserve(line.size() * line.size());
  rule.weights.reserve(line.size() * line.size());
  for (std::size_t b = 0; b < line.size(); ++b) {
    for (std::size_t a = 0; a < line.size(); ++a) {
      rule.points.push_back({line.points[a], line.points[b]});
      rule.weights.push_back(line.weights[a] * line.weights[b]);
    }
  }
  return rule;
}

ReferenceBasis::ReferenceBasis(int degree) : degree_(degree) {
  check_degree(degree);
  for (int b = 0; b <= degree_; ++b) {
    for (int c = 0; c <= degree_; ++c) {
      nodes_.push_back({static_cast<double>(c) / degree_, static_cast<double>(b) / degree_});
    }
  }
}

void ReferenceBasis::line(double t, std::span<Line> out) const {
  const int r = degree_;
  if (r == 1) {
    out[0] = {1.0 - t, -1.0, 0.0};
    out[1] = {t, 1.0, 0.0};
    return;
  }
  // Quadratic Lagrange polynomials on nodes 0, 1/2, 1.
  out[0] = {2.0 * (t - 0.5) * (t - 1.0), 4.0 * t - 3.0, 4.0};
  out[1] = {-4.0 * t * (t - 1.0), 4.0 - 8.0 * t, -8.0};
  out[2] = {2.0 * t * (t - 0.5), 4.0 * t - 1.0, 4.0};
}

void ReferenceBasis::values(Point2 xi, std::span<double> out) const {
  Line lx[kMaxDegree + 1], ly[kMaxDegree + 1];
  line(xi.x, lx);
  line(xi.y, ly);
  for (int b = 0; b <= degree_; ++b) {
    for (int c = 0; c <= degree_; ++c) out[b * (degree_ + 1) + c] = lx[c].v * ly[b].v;
  }
}

void ReferenceBasis::gradients(Point2 xi, std::span<Vec2> out) const {
  Line lx[kMaxDegree + 1], ly[kMaxDegree + 1];
  line(xi.x, lx);
  line(xi.y, ly);
  for (int b = 0; b <= degree_; ++b) {
    for (int c = 0; c <= degree_; ++c) {
      out[b * (degree_ + 1) + c] = {lx[c].d1 * ly[b].v, lx[c].v * ly[b].d1};
    }
  }
}

void ReferenceBasis::second_derivatives(Point2 xi, std::span<double> dxx,
                                        std::span<double> dyy) const {
  Line lx[kMaxDegree + 1], ly[kMaxDegree + 1];
  line(xi.x, lx);
  line(xi.y, ly);
  for (int b = 0; b <= degree_; ++b) {
    for (int c = 0; c <= degree_; ++c) {
      dxx[b * (degree_ + 1) + c] = lx[c].d2 * ly[b].v;
      dyy[b * (degree_ + 1) + c] = lx[c].v * ly[b].d2;
    }
  }
}

std::vector<double> basis_eval(int degree, Point2 xi) {
  const ReferenceBasis basis(degree);
  std::vector<double> out(basis.size());
  basis.values(xi, out);
  return out;
}

std::vector<Vec2> basis_grad(int degree, Point2 xi) {
  const ReferenceBasis basis(degree);
  std::vector<Vec2> out(basis.size());
  basis.gradients(xi, out);
  return out;
}

Eigen::MatrixXd local_stiffness(int degree, const Tensor2& mobility, double h) {
  if (!mobility.is_spd()) throw ParameterError("mobility tensor is not symmetric positive definite");
  if (!(h > 0.0)) throw ParameterError("element size must be positive");
  const ReferenceBasis basis(degree);
  const QuadratureRule2D quad = gauss_2d(degree + 1);
  const int nb = basis.size();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nb, nb);
  std::vector<Vec2> g(nb);
  // grad = (1/h) grad_xi and dx = h^2 dxi: the h factors cancel in 2D.
  for (std::size_t q = 0; q < quad.size(); ++q) {
    basis.gradients(quad.points[q], g);
    for (int a = 0; a < nb; ++a) {
      const Vec2 flux = mobility.apply(g[a]);
      for (int b = 0; b < nb; ++b) k(a, b) += quad.weights[q] * dot(flux, g[b]);
    }
  }
  return 0.5 * (k + k.transpose());
}

}  // namespace consfem
