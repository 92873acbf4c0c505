#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "consfem/geometry.hpp"

namespace consfem {

enum class BoundaryKind { AllDirichlet, AllNeumann };

/// Uniform mesh of 2^M x 2^M squares on the unit square.
///
/// Element (i, j) covers [i h, (i+1) h] x [j h, (j+1) h] and has index
/// j * n + i.  All coordinates are multiples of h / 2 with h a power of two,
/// so every geometric predicate here is an exact floating-point comparison.
class StructuredMesh {
 public:
  static constexpr int kMinLevel = 1;
  static constexpr int kMaxLevel = 12;

  StructuredMesh(int level, BoundaryKind boundary);

  int level() const { return level_; }
  int cells_per_side() const { return n_; }
  double h() const { return h_; }
  BoundaryKind boundary() const { return boundary_; }
  std::size_t num_elements() const { return static_cast<std::size_t>(n_) * n_; }

  std::size_t element_index(int i, int j) const {
    return static_cast<std::size_t>(j) * n_ + i;
  }
  std::array<int, 2> element_coords(std::size_t e) const {
    return {static_cast<int>(e % n_), static_cast<int>(e / n_)};
  }
  Point2 element_origin(std::size_t e) const;
  Rect element_box(std::size_t e) const;

  /// Lowest-index element whose closure contains p.  Throws ParameterError
  /// when p lies outside the closed unit square.
  std::size_t locate_element(Point2 p) const;

 private:
  int level_;
  int n_;
  double h_;
  BoundaryKind boundary_;
};

StructuredMesh build_primal(int level, BoundaryKind boundary);

/// Straight piece of a control-volume boundary lying in the closure of a
/// single primal element.
struct Segment {
  Point2 a;
  Point2 b;
  std::size_t owner_element = 0;
  Vec2 normal;  ///< unit outward normal of the control volume
  bool on_domain_boundary = false;

  double length() const { return std::abs(b.x - a.x) + std::abs(b.y - a.y); }
  Point2 midpoint() const { return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)}; }
};

struct ControlVolume {
  std::array<int, 2> vertex;  ///< primal vertex (i, j) owning the volume
  Point2 center;              ///< coordinates of that vertex
  Rect box;                   ///< h x h square around the vertex, clipped to the domain
  double area = 0.0;
  std::vector<Segment> segments;  ///< counter-clockwise: bottom, right, top, left
};

/// Vertex-centred dual mesh obtained by joining element centres.
///
/// AllDirichlet: one volume per interior vertex.  AllNeumann: one volume per
/// vertex, boundary volumes clipped to the domain.  Volume k belongs to the
/// k-th admissible vertex in (j, i) lexicographic order.
class DualMesh {
 public:
  explicit DualMesh(const StructuredMesh& primal);

  const StructuredMesh& primal() const { return primal_; }
  std::size_t size() const { return volumes_.size(); }
  const ControlVolume& volume(std::size_t k) const { return volumes_[k]; }
  const std::vector<ControlVolume>& volumes() const { return volumes_; }

  std::optional<std::size_t> volume_at_vertex(int i, int j) const;

  /// Lowest-index volume whose closure contains p, or nullopt if p is not
  /// covered (the boundary strip of an AllDirichlet mesh).
  std::optional<std::size_t> locate_volume(Point2 p) const;

 private:
  StructuredMesh primal_;
  int first_vertex_;  ///< 1 for AllDirichlet, 0 for AllNeumann
  int vertices_per_side_;
  std::vector<ControlVolume> volumes_;
};

DualMesh build_dual(const StructuredMesh& primal);

/// Full side shared by two control volumes, or a side with a single adjacent
/// volume.  Single-sided interfaces lie either on the domain boundary
/// (AllNeumann) or on the edge of the uncovered boundary strip (AllDirichlet).
struct DualInterface {
  Point2 a;
  Point2 b;
  double length = 0.0;
  std::size_t first = 0;
  std::optional<std::size_t> second;
  bool on_domain_boundary = false;

  bool interior() const { return second.has_value(); }
};

/// Every side of every control volume, each listed exactly once.
std::vector<DualInterface> dual_interfaces(const DualMesh& dual);

/// Debug dump: one line `k x_lo y_lo x_hi y_hi` per control volume.
void write_dual(std::ostream& out, const DualMesh& dual);

}  // namespace consfem
