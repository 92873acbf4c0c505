#include "consfem/mesh.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "consfem/errors.hpp"

namespace consfem {

namespace {

// Lowest cell index whose closed interval [c h, (c+1) h] contains t, with t
// measured in units of h.
int lowest_cell(double t, int n) {
  const double f = std::floor(t);
  int c = static_cast<int>(f);
  if (f == t && c > 0) --c;
  return std::min(c, n - 1);
}

}  // namespace

StructuredMesh::StructuredMesh(int level, BoundaryKind boundary)
    : level_(level), n_(0), h_(0.0), boundary_(boundary) {
  if (level < kMinLevel || level > kMaxLevel) {
    throw ParameterError("mesh level must be in [1, 12], got " + std::to_string(level));
  }
  n_ = 1 << level;
  h_ = std::ldexp(1.0, -level);
}

Point2 StructuredMesh::element_origin(std::size_t e) const {
  const auto [i, j] = element_coords(e);
  return {i * h_, j * h_};
}

Rect StructuredMesh::element_box(std::size_t e) const {
  const auto [i, j] = element_coords(e);
  return {i * h_, j * h_, (i + 1) * h_, (j + 1) * h_};
}

std::size_t StructuredMesh::locate_element(Point2 p) const {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
    throw ParameterError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                         ") lies outside the unit square");
  }
  return element_index(lowest_cell(p.x / h_, n_), lowest_cell(p.y / h_, n_));
}

StructuredMesh build_primal(int level, BoundaryKind boundary) {
  return StructuredMesh(level, boundary);
}

DualMesh::DualMesh(const StructuredMesh& primal)
    : primal_(primal),
      first_vertex_(primal.boundary() == BoundaryKind::AllDirichlet ? 1 : 0),
      vertices_per_side_(primal.boundary() == BoundaryKind::AllDirichlet
                             ? primal.cells_per_side() - 1
                             : primal.cells_per_side() + 1) {
  const double h = primal_.h();
  const bool neumann = primal_.boundary() == BoundaryKind::AllNeumann;
  volumes_.reserve(static_cast<std::size_t>(vertices_per_side_) * vertices_per_side_);

  for (int vj = first_vertex_; vj < first_vertex_ + vertices_per_side_; ++vj) {
    for (int vi = first_vertex_; vi < first_vertex_ + vertices_per_side_; ++vi) {
      ControlVolume cv;
      cv.vertex = {vi, vj};
      cv.center = {vi * h, vj * h};
      cv.box = {std::max(0.0, (vi - 0.5) * h), std::max(0.0, (vj - 0.5) * h),
                std::min(1.0, (vi + 0.5) * h), std::min(1.0, (vj + 0.5) * h)};
      cv.area = cv.box.area();

      const Rect& b = cv.box;
      const Point2 corners[4] = {{b.x_lo, b.y_lo}, {b.x_hi, b.y_lo}, {b.x_hi, b.y_hi},
                                 {b.x_lo, b.y_hi}};
      const Vec2 normals[4] = {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
      for (int side = 0; side < 4; ++side) {
        const Point2 a = corners[side];
        const Point2 c = corners[(side + 1) % 4];
        const bool horizontal = (side % 2 == 0);
        const double coord = horizontal ? a.y : a.x;
        const bool on_boundary = neumann && (coord == 0.0 || coord == 1.0);

        // Split where the side crosses the primal grid line through the vertex.
        std::vector<Point2> pts{a};
        if (horizontal) {
          const double split = cv.center.x;
          if (split > std::min(a.x, c.x) && split < std::max(a.x, c.x)) pts.push_back({split, a.y});
        } else {
          const double split = cv.center.y;
          if (split > std::min(a.y, c.y) && split < std::max(a.y, c.y)) pts.push_back({a.x, split});
        }
        pts.push_back(c);

        for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
          Segment seg;
          seg.a = pts[s];
          seg.b = pts[s + 1];
          seg.normal = normals[side];
          seg.on_domain_boundary = on_boundary;
          seg.owner_element = primal_.locate_element(seg.midpoint());
          cv.segments.push_back(seg);
        }
      }
      volumes_.push_back(std::move(cv));
    }
  }
}

std::optional<std::size_t> DualMesh::volume_at_vertex(int i, int j) const {
  const int li = i - first_vertex_;
  const int lj = j - first_vertex_;
  if (li < 0 || lj < 0 || li >= vertices_per_side_ || lj >= vertices_per_side_) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(lj) * vertices_per_side_ + li;
}

std::optional<std::size_t> DualMesh::locate_volume(Point2 p) const {
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) return std::nullopt;
  const double h = primal_.h();
  // Volume boxes are [(v - 1/2) h, (v + 1/2) h]; the lowest vertex whose
  // closed interval contains t is ceil(t / h - 1/2).
  const auto lowest_vertex = [h](double t) {
    return static_cast<int>(std::ceil(t / h - 0.5));
  };
  const int vi = lowest_vertex(p.x);
  const int vj = lowest_vertex(p.y);
  if (auto k = volume_at_vertex(vi, vj)) return k;
  // A point exactly on a half-integer line next to an excluded vertex can
  // still belong to the neighbouring volume on the other side.
  const double tx = p.x / h - 0.5;
  const double ty = p.y / h - 0.5;
  const int alt_i = (std::ceil(tx) == tx) ? vi + 1 : vi;
  const int alt_j = (std::ceil(ty) == ty) ? vj + 1 : vj;
  for (const auto [ci, cj] : {std::array<int, 2>{alt_i, vj}, std::array<int, 2>{vi, alt_j},
                              std::array<int, 2>{alt_i, alt_j}}) {
    if (auto k = volume_at_vertex(ci, cj)) return k;
  }
  return std::nullopt;
}

DualMesh build_dual(const StructuredMesh& primal) { return DualMesh(primal); }

std::vector<DualInterface> dual_interfaces(const DualMesh& dual) {
  std::vector<DualInterface> out;
  for (std::size_t k = 0; k < dual.size(); ++k) {
    const ControlVolume& cv = dual.volume(k);
    const auto [vi, vj] = cv.vertex;
    const Rect& b = cv.box;

    // Right and top sides are shared with the next volume when it exists.
    DualInterface right{{b.x_hi, b.y_lo}, {b.x_hi, b.y_hi}, b.height(), k,
                        dual.volume_at_vertex(vi + 1, vj), false};
    DualInterface top{{b.x_lo, b.y_hi}, {b.x_hi, b.y_hi}, b.width(), k,
                      dual.volume_at_vertex(vi, vj + 1), false};
    for (DualInterface* f : {&right, &top}) {
      if (!f->second) f->on_domain_boundary = (f == &right ? b.x_hi : b.y_hi) == 1.0;
      out.push_back(*f);
    }
    if (!dual.volume_at_vertex(vi - 1, vj)) {
      out.push_back({{b.x_lo, b.y_lo}, {b.x_lo, b.y_hi}, b.height(), k, std::nullopt,
                     b.x_lo == 0.0});
    }
    if (!dual.volume_at_vertex(vi, vj - 1)) {
      out.push_back({{b.x_lo, b.y_lo}, {b.x_hi, b.y_lo}, b.width(), k, std::nullopt,
                     b.y_lo == 0.0});
    }
  }
  return out;
}

void write_dual(std::ostream& out, const DualMesh& dual) {
  for (std::size_t k = 0; k < dual.size(); ++k) {
    const Rect& b = dual.volume(k).box;
    out << k << ' ' << b.x_lo << ' ' << b.y_lo << ' ' << b.x_hi << ' ' << b.y_hi << '\n';
  }
}

}  // namespace consfem
