#include "wavestruct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

namespace wavestruct {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& x, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

}  // namespace

BoundaryMesh::BoundaryMesh(std::vector<Vec2> nodes, std::vector<std::array<int, 2>> panels)
    : nodes_(std::move(nodes)), panels_(std::move(panels)) {
  const int n = node_count();
  if (panel_count() < 3) throw ParameterError("BoundaryMesh: need at least 3 panels");
  std::vector<int> starts(n, 0), ends(n, 0);
  for (const auto& pn : panels_) {
    for (int v : pn) {
      if (v < 0 || v >= n) throw ParameterError("BoundaryMesh: panel node out of range");
    }
    ++starts[pn[0]];
    ++ends[pn[1]];
  }
  for (int v = 0; v < n; ++v) {
    if (starts[v] != 1 || ends[v] != 1) {
      throw ParameterError("BoundaryMesh: node " + std::to_string(v) +
                           " does not have exactly two incident panels");
    }
  }
  normals_.reserve(panels_.size());
  tangents_.reserve(panels_.size());
  lengths_.reserve(panels_.size());
  for (const auto& pn : panels_) {
    const Vec2 d = nodes_[pn[1]] - nodes_[pn[0]];
    const double len = d.norm();
    if (!(len > 0.0)) throw ParameterError("BoundaryMesh: zero-length panel");
    const Vec2 tau = d / len;
    lengths_.push_back(len);
    tangents_.push_back(tau);
    normals_.emplace_back(tau.y(), -tau.x());
  }
  if (!(signed_area() > 0.0)) {
    throw ParameterError("BoundaryMesh: loop must be counterclockwise");
  }
}

double BoundaryMesh::perimeter() const {
  double sum = 0.0;
  for (double l : lengths_) sum += l;
  return sum;
}

double BoundaryMesh::signed_area() const {
  double a = 0.0;
  for (const auto& pn : panels_) a += 0.5 * cross(nodes_[pn[0]], nodes_[pn[1]]);
  return a;
}

double BoundaryMesh::max_panel_length() const {
  return *std::max_element(lengths_.begin(), lengths_.end());
}

double BoundaryMesh::distance_to(const Vec2& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int p = 0; p < panel_count(); ++p) d = std::min(d, segment_distance(x, start(p), end(p)));
  return d;
}

BoundaryMesh circle_boundary(double radius, int n_panels) {
  if (n_panels < 4) throw ParameterError("circle_boundary: n_panels must be >= 4");
  if (!(radius > 0.0)) throw ParameterError("circle_boundary: radius must be positive");
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 2>> panels;
  for (int k = 0; k < n_panels; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n_panels;
    nodes.emplace_back(radius * std::cos(th), radius * std::sin(th));
    panels.push_back({k, (k + 1) % n_panels});
  }
  return BoundaryMesh(std::move(nodes), std::move(panels));
}

namespace {

BoundaryMesh rectangle_loop(double x_lo, double x_hi, double y_lo, double y_hi, int nx,
                            int ny) {
  std::vector<Vec2> nodes;
  for (int i = 0; i < nx; ++i) nodes.emplace_back(x_lo + (x_hi - x_lo) * i / nx, y_lo);
  for (int j = 0; j < ny; ++j) nodes.emplace_back(x_hi, y_lo + (y_hi - y_lo) * j / ny);
  for (int i = nx; i > 0; --i) nodes.emplace_back(x_lo + (x_hi - x_lo) * i / nx, y_hi);
  for (int j = ny; j > 0; --j) nodes.emplace_back(x_lo, y_lo + (y_hi - y_lo) * j / ny);
  const int n = static_cast<int>(nodes.size());
  std::vector<std::array<int, 2>> panels;
  for (int k = 0; k < n; ++k) panels.push_back({k, (k + 1) % n});
  return BoundaryMesh(std::move(nodes), std::move(panels));
}

void check_rectangle(double x_lo, double x_hi, double y_lo, double y_hi) {
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) {
    throw ParameterError("rectangle: degenerate extents");
  }
}

}  // namespace

BoundaryMesh rectangle_boundary(double x_lo, double x_hi, double y_lo, double y_hi,
                                double h_target) {
  check_rectangle(x_lo, x_hi, y_lo, y_hi);
  if (!(h_target > 0.0)) throw ParameterError("rectangle_boundary: h_target must be positive");
  const int nx = std::max(1, static_cast<int>(std::ceil((x_hi - x_lo) / h_target - 1e-12)));
  const int ny = std::max(1, static_cast<int>(std::ceil((y_hi - y_lo) / h_target - 1e-12)));
  return rectangle_loop(x_lo, x_hi, y_lo, y_hi, nx, ny);
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  for (int t = 0; t < triangle_count(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= vertex_count()) throw ParameterError("TriMesh: vertex out of range");
    }
    if (!(signed_area(t) > 0.0)) {
      throw ParameterError("TriMesh: triangle " + std::to_string(t) +
                           " has non-positive signed area");
    }
  }
}

double TriMesh::signed_area(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * cross(vertices_[tri[1]] - vertices_[tri[0]], vertices_[tri[2]] - vertices_[tri[0]]);
}

double TriMesh::total_area() const {
  double a = 0.0;
  for (int t = 0; t < triangle_count(); ++t) a += signed_area(t);
  return a;
}

double TriMesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      h = std::max(h, (vertices_[tri[e]] - vertices_[tri[(e + 1) % 3]]).norm());
    }
  }
  return h;
}

void TriMesh::attach_boundary(const BoundaryMesh& boundary) {
  double scale = 0.0;
  for (const auto& v : vertices_) scale = std::max(scale, v.cwiseAbs().maxCoeff());
  const double tol = 1e-10 * std::max(scale, 1.0);

  std::vector<int> node_to_vertex(boundary.node_count(), -1);
  for (int b = 0; b < boundary.node_count(); ++b) {
    for (int v = 0; v < vertex_count(); ++v) {
      if ((vertices_[v] - boundary.nodes()[b]).norm() <= tol) {
        node_to_vertex[b] = v;
        break;
      }
    }
    if (node_to_vertex[b] < 0) {
      throw InterfaceError("attach_boundary: boundary node " + std::to_string(b) +
                           " is not a mesh vertex");
    }
  }

  std::unordered_map<long long, int> edge_owner;
  const long long nv = vertex_count();
  auto key = [nv](int a, int b) {
    return static_cast<long long>(std::min(a, b)) * nv + std::max(a, b);
  };
  for (int t = 0; t < triangle_count(); ++t) {
    const auto& tri = triangles_[t];
    for (int e = 0; e < 3; ++e) {
      const long long k = key(tri[e], tri[(e + 1) % 3]);
      auto [it, inserted] = edge_owner.emplace(k, t);
      if (!inserted) it->second = -1;  // interior edge
    }
  }

  std::vector<BoundaryEdge> edges;
  for (int p = 0; p < boundary.panel_count(); ++p) {
    const int a = node_to_vertex[boundary.panels()[p][0]];
    const int b = node_to_vertex[boundary.panels()[p][1]];
    auto it = edge_owner.find(key(a, b));
    if (it == edge_owner.end() || it->second < 0) {
      throw InterfaceError("attach_boundary: panel " + std::to_string(p) +
                           " is not a boundary edge of the triangulation");
    }
    edges.push_back({it->second, p});
  }
  boundary_edges_ = std::move(edges);
  boundary_vertex_ = std::move(node_to_vertex);
}

std::pair<TriMesh, BoundaryMesh> triangulate_rectangle(double x_lo, double x_hi,
                                                       double y_lo, double y_hi, int nx,
                                                       int ny) {
  check_rectangle(x_lo, x_hi, y_lo, y_hi);
  if (nx < 1 || ny < 1) throw ParameterError("triangulate_rectangle: nx, ny must be >= 1");
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      vertices.emplace_back(x_lo + (x_hi - x_lo) * i / nx, y_lo + (y_hi - y_lo) * j / ny);
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  TriMesh mesh(std::move(vertices), std::move(triangles));
  BoundaryMesh boundary = rectangle_loop(x_lo, x_hi, y_lo, y_hi, nx, ny);
  mesh.attach_boundary(boundary);
  return {std::move(mesh), std::move(boundary)};
}

void write_mesh_csv(std::ostream& os, const BoundaryMesh& boundary, const TriMesh* solid) {
  os << std::setprecision(17);
  os << "# nodes\nindex,x,y\n";
  for (int i = 0; i < boundary.node_count(); ++i) {
    os << i << ',' << boundary.nodes()[i].x() << ',' << boundary.nodes()[i].y() << '\n';
  }
  os << "# panels\nindex,start,end,length,normal_x,normal_y\n";
  for (int p = 0; p < boundary.panel_count(); ++p) {
    os << p << ',' << boundary.panels()[p][0] << ',' << boundary.panels()[p][1] << ','
       << boundary.length(p) << ',' << boundary.normal(p).x() << ',' << boundary.normal(p).y()
       << '\n';
  }
  if (solid != nullptr) {
    os << "# triangles\nindex,v0,v1,v2,area\n";
    for (int t = 0; t < solid->triangle_count(); ++t) {
      const auto& tri = solid->triangles()[t];
      os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << ',' << solid->signed_area(t)
         << '\n';
    }
  }
}

}  // namespace wavestruct
