#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "consfem/errors.hpp"
#include "consfem/mesh.hpp"

using namespace consfem;

TEST(StructuredMesh, RejectsLevelsOutOfRange) {
  EXPECT_THROW(StructuredMesh(0, BoundaryKind::AllDirichlet), ParameterError);
  EXPECT_THROW(StructuredMesh(13, BoundaryKind::AllNeumann), ParameterError);
  EXPECT_NO_THROW(StructuredMesh(1, BoundaryKind::AllDirichlet));
}

TEST(StructuredMesh, SizesFollowLevel) {
  for (int m = 1; m <= 6; ++m) {
    const StructuredMesh mesh(m, BoundaryKind::AllDirichlet);
    EXPECT_EQ(mesh.cells_per_side(), 1 << m);
    EXPECT_EQ(mesh.h(), std::ldexp(1.0, -m));
    EXPECT_EQ(mesh.num_elements(), static_cast<std::size_t>(1 << (2 * m)));
  }
}

TEST(StructuredMesh, ElementIndexRoundTrip) {
  const StructuredMesh mesh(3, BoundaryKind::AllDirichlet);
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto [i, j] = mesh.element_coords(e);
    EXPECT_EQ(mesh.element_index(i, j), e);
    const Rect b = mesh.element_box(e);
    EXPECT_DOUBLE_EQ(b.x_lo, i * mesh.h());
    EXPECT_DOUBLE_EQ(b.y_hi, (j + 1) * mesh.h());
  }
}

TEST(StructuredMesh, LocateUsesLowestIndexOnSharedEdges) {
  const StructuredMesh mesh(2, BoundaryKind::AllDirichlet);
  EXPECT_EQ(mesh.locate_element({0.1, 0.1}), 0u);
  // x = 0.25 is shared by elements 0 and 1.
  EXPECT_EQ(mesh.locate_element({0.25, 0.1}), 0u);
  // (0.5, 0.5) touches elements 5, 6, 9, 10.
  EXPECT_EQ(mesh.locate_element({0.5, 0.5}), 5u);
  EXPECT_EQ(mesh.locate_element({1.0, 1.0}), 15u);
  EXPECT_THROW(mesh.locate_element({1.1, 0.5}), ParameterError);
  EXPECT_THROW(mesh.locate_element({0.5, -1e-12}), ParameterError);
}

TEST(DualMesh, VolumeCounts) {
  EXPECT_EQ(DualMesh(StructuredMesh(1, BoundaryKind::AllDirichlet)).size(), 1u);
  EXPECT_EQ(DualMesh(StructuredMesh(2, BoundaryKind::AllDirichlet)).size(), 9u);
  EXPECT_EQ(DualMesh(StructuredMesh(2, BoundaryKind::AllNeumann)).size(), 25u);
  EXPECT_EQ(DualMesh(StructuredMesh(4, BoundaryKind::AllDirichlet)).size(), 225u);
}

TEST(DualMesh, DirichletVolumesAreFullSquares) {
  const StructuredMesh mesh(3, BoundaryKind::AllDirichlet);
  const DualMesh dual(mesh);
  const double h = mesh.h();
  for (const ControlVolume& v : dual.volumes()) {
    EXPECT_DOUBLE_EQ(v.area, h * h);
    EXPECT_DOUBLE_EQ(v.box.width(), h);
    EXPECT_EQ(v.segments.size(), 8u);
  }
}

TEST(DualMesh, NeumannAreasAreClippedAndTileTheDomain) {
  const StructuredMesh mesh(3, BoundaryKind::AllNeumann);
  const DualMesh dual(mesh);
  const double h = mesh.h();
  const int n = mesh.cells_per_side();
  double total = 0.0;
  for (const ControlVolume& v : dual.volumes()) {
    const auto [i, j] = v.vertex;
    const bool edge_i = i == 0 || i == n;
    const bool edge_j = j == 0 || j == n;
    const double expected = h * h * (edge_i ? 0.5 : 1.0) * (edge_j ? 0.5 : 1.0);
    EXPECT_DOUBLE_EQ(v.area, expected) << "vertex " << i << "," << j;
    total += v.area;
  }
  EXPECT_DOUBLE_EQ(total, 1.0);
  EXPECT_DOUBLE_EQ(dual.volume(0).area, h * h / 4);
}

TEST(DualMesh, SegmentsLieInTheirOwnerWithOutwardNormals) {
  for (BoundaryKind bc : {BoundaryKind::AllDirichlet, BoundaryKind::AllNeumann}) {
    const StructuredMesh mesh(3, bc);
    const DualMesh dual(mesh);
    for (const ControlVolume& v : dual.volumes()) {
      double perimeter = 0.0;
      for (const Segment& s : v.segments) {
        EXPECT_TRUE(mesh.element_box(s.owner_element).contains(s.midpoint()));
        EXPECT_TRUE(mesh.element_box(s.owner_element).contains(s.a));
        EXPECT_TRUE(mesh.element_box(s.owner_element).contains(s.b));
        EXPECT_DOUBLE_EQ(norm(s.normal), 1.0);
        const Point2 m = s.midpoint();
        const Vec2 out{m.x - v.box.center().x, m.y - v.box.center().y};
        EXPECT_GT(dot(out, s.normal), 0.0);
        EXPECT_DOUBLE_EQ(dot(s.normal, {s.b.x - s.a.x, s.b.y - s.a.y}), 0.0);
        perimeter += s.length();
      }
      EXPECT_DOUBLE_EQ(perimeter, 2.0 * (v.box.width() + v.box.height()));
    }
  }
}

TEST(DualMesh, DomainBoundaryFlagsOnlyOnNeumann) {
  const DualMesh dirichlet(StructuredMesh(3, BoundaryKind::AllDirichlet));
  for (const ControlVolume& v : dirichlet.volumes()) {
    for (const Segment& s : v.segments) EXPECT_FALSE(s.on_domain_boundary);
  }
  const DualMesh neumann(StructuredMesh(2, BoundaryKind::AllNeumann));
  int flagged = 0;
  for (const ControlVolume& v : neumann.volumes()) {
    for (const Segment& s : v.segments) {
      const bool on_edge = (s.a.x == s.b.x && (s.a.x == 0.0 || s.a.x == 1.0)) ||
                           (s.a.y == s.b.y && (s.a.y == 0.0 || s.a.y == 1.0));
      EXPECT_EQ(s.on_domain_boundary, on_edge);
      flagged += s.on_domain_boundary ? 1 : 0;
    }
  }
  // Each side of the square is covered by 2n pieces of length h / 2.
  EXPECT_EQ(flagged, 4 * 8);
}

TEST(DualMesh, VertexLookupAndPointLocation) {
  const StructuredMesh mesh(2, BoundaryKind::AllDirichlet);
  const DualMesh dual(mesh);
  EXPECT_FALSE(dual.volume_at_vertex(0, 0).has_value());
  EXPECT_EQ(dual.volume_at_vertex(1, 1), 0u);
  EXPECT_EQ(dual.volume_at_vertex(3, 3), 8u);
  EXPECT_FALSE(dual.volume_at_vertex(4, 2).has_value());

  EXPECT_EQ(dual.locate_volume({0.25, 0.25}), 0u);
  EXPECT_EQ(dual.locate_volume({0.5, 0.5}), 4u);
  // Corner of four volumes: lowest index wins.
  EXPECT_EQ(dual.locate_volume({0.375, 0.375}), 0u);
  // Uncovered boundary strip.
  EXPECT_FALSE(dual.locate_volume({0.05, 0.5}).has_value());

  const DualMesh neumann(StructuredMesh(2, BoundaryKind::AllNeumann));
  EXPECT_EQ(neumann.volume_at_vertex(0, 0), 0u);
  EXPECT_EQ(neumann.locate_volume({0.0, 0.0}), 0u);
  EXPECT_EQ(neumann.locate_volume({1.0, 1.0}), 24u);
}

TEST(DualInterfaces, CountsAndLengths) {
  const auto count_interior = [](const std::vector<DualInterface>& f) {
    return std::count_if(f.begin(), f.end(), [](const DualInterface& d) { return d.interior(); });
  };
  const DualMesh d2(StructuredMesh(2, BoundaryKind::AllDirichlet));
  const auto f2 = dual_interfaces(d2);
  EXPECT_EQ(count_interior(f2), 12);
  EXPECT_EQ(f2.size(), 24u);  // 12 shared + 12 facing the strip

  const DualMesh d1(StructuredMesh(1, BoundaryKind::AllDirichlet));
  const auto f1 = dual_interfaces(d1);
  EXPECT_EQ(count_interior(f1), 0);
  EXPECT_EQ(f1.size(), 4u);

  const DualMesh n2(StructuredMesh(2, BoundaryKind::AllNeumann));
  const auto fn = dual_interfaces(n2);
  EXPECT_EQ(count_interior(fn), 40);
  EXPECT_EQ(fn.size(), 60u);
  for (const DualInterface& f : fn) EXPECT_EQ(f.on_domain_boundary, !f.interior());
  for (const DualInterface& f : f2) {
    EXPECT_FALSE(f.on_domain_boundary);
    EXPECT_DOUBLE_EQ(f.length, 0.25);
  }
}

TEST(DualInterfaces, EverySideListedOnce) {
  const DualMesh dual(StructuredMesh(3, BoundaryKind::AllNeumann));
  const auto faces = dual_interfaces(dual);
  std::vector<double> perimeter(dual.size(), 0.0);
  for (const DualInterface& f : faces) {
    perimeter[f.first] += f.length;
    if (f.second) perimeter[*f.second] += f.length;
  }
  for (std::size_t k = 0; k < dual.size(); ++k) {
    const Rect b = dual.volume(k).box;
    EXPECT_DOUBLE_EQ(perimeter[k], 2.0 * (b.width() + b.height()));
  }
}

TEST(DualMesh, WriteDualListsOneLinePerVolume) {
  const DualMesh dual(StructuredMesh(2, BoundaryKind::AllDirichlet));
  std::ostringstream out;
  write_dual(out, dual);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, dual.size());
  EXPECT_EQ(out.str().substr(0, 2), "0 ");
}
