#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wavestruct {

using Vec2 = Eigen::Vector2d;

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InterfaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed, counterclockwise polygonal curve made of straight panels.
///
/// Panel p runs from node panels[p][0] to panels[p][1]; its unit tangent points
/// along that direction and the outward normal is the tangent rotated by -90°.
class BoundaryMesh {
 public:
  BoundaryMesh(std::vector<Vec2> nodes, std::vector<std::array<int, 2>> panels);

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<std::array<int, 2>>& panels() const { return panels_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int panel_count() const { return static_cast<int>(panels_.size()); }

  const Vec2& start(int p) const { return nodes_[panels_[p][0]]; }
  const Vec2& end(int p) const { return nodes_[panels_[p][1]]; }
  const Vec2& normal(int p) const { return normals_[p]; }
  const Vec2& tangent(int p) const { return tangents_[p]; }
  double length(int p) const { return lengths_[p]; }
  Vec2 midpoint(int p) const { return 0.5 * (start(p) + end(p)); }
  Vec2 point(int p, double t) const { return start(p) + t * (end(p) - start(p)); }

  double perimeter() const;
  double signed_area() const;
  double max_panel_length() const;
  /// Distance from x to the closest point of the curve.
  double distance_to(const Vec2& x) const;

 private:
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> panels_;
  std::vector<Vec2> normals_;
  std::vector<Vec2> tangents_;
  std::vector<double> lengths_;
};

/// Inscribed regular polygon with nodes at angles 2πk/n.
BoundaryMesh circle_boundary(double radius, int n_panels);

/// Rectangle boundary with the corners as nodes and each side split uniformly
/// into panels of length at most h_target.
BoundaryMesh rectangle_boundary(double x_lo, double x_hi, double y_lo, double y_hi,
                                double h_target);

struct BoundaryEdge {
  int triangle;
  int panel;
};

/// Conforming triangulation of the solid.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }
  double signed_area(int t) const;
  double total_area() const;
  double max_edge_length() const;

  /// Attach the boundary curve. Every panel must coincide with a triangle edge;
  /// otherwise InterfaceError is thrown.
  void attach_boundary(const BoundaryMesh& boundary);

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  /// Boundary node index -> mesh vertex index.
  const std::vector<int>& boundary_vertex() const { return boundary_vertex_; }

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<int> boundary_vertex_;
};

/// Structured grid of nx*ny cells, each split into two triangles along the
/// diagonal. The returned boundary mesh is attached to the triangulation.
std::pair<TriMesh, BoundaryMesh> triangulate_rectangle(double x_lo, double x_hi,
                                                       double y_lo, double y_hi, int nx,
                                                       int ny);

/// CSV dump with `nodes`, `panels` and (optionally) `triangles` sections.
///   nodes:     index,x,y
///   panels:    index,start,end,length,normal_x,normal_y
///   triangles: index,v0,v1,v2,area
void write_mesh_csv(std::ostream& os, const BoundaryMesh& boundary,
                    const TriMesh* solid = nullptr);

}  // namespace wavestruct
