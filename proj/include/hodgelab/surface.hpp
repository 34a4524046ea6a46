#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace hodgelab {

using Vec3 = Eigen::Vector3d;

/// Analytic curvature data of a model surface: lower Ricci bound K
/// (units 1/length^2) and upper dimension bound N.
struct CurvatureConstants {
  double K = 0.0;
  double N = 2.0;
};

/// Oriented triangulated closed 2-manifold.
///
/// Edges are canonical sorted vertex pairs; the global edge orientation is
/// low index -> high index, so incidence signs are reproducible.
/// `face_corners` carries the intrinsic geometry of each triangle as three
/// points in R^3. Generators of periodic models fill it from exact lattice
/// displacements; for everything else it is derived from vertex positions.
struct SimplicialSurface {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<Vec3, 3>> face_corners;
  std::optional<CurvatureConstants> curvature;
  std::string model_name;  // "icosphere", "torus", or "" for loaded meshes

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int face_count() const { return static_cast<int>(triangles.size()); }
  int euler_characteristic() const {
    return vertex_count() - edge_count() + face_count();
  }

  /// Index of the canonical edge {a,b}; -1 if absent.
  int edge_index(int a, int b) const;

  /// Length of edge e, taken from the face-corner geometry.
  double edge_length(int e) const;

  /// Longest edge length (the mesh size h).
  double mesh_size() const;

  /// Rebuild the edge table and the derived geometry. Generators call this;
  /// it must be called again after any manual mutation.
  void finalize(bool derive_corners_from_vertices = true);

 private:
  std::unordered_map<std::int64_t, int> edge_lookup_;
};

/// Geodesic icosphere: subdivided icosahedron projected to the unit sphere.
/// Counts: V = 10*4^s + 2, E = 30*4^s, F = 20*4^s. Carries K = 1, N = 2.
/// Throws std::invalid_argument for subdivisions > 7.
SimplicialSurface make_icosphere(int subdivisions);

/// Flat unit-square torus, n x m periodic grid, every cell split in two.
/// Rows are offset by floor(m/2)/m of a cell ("brick" pattern) so that all
/// cotangent weights stay strictly positive on square-ish grids; the
/// intrinsic metric is the flat one, encoded in face_corners via exact
/// lattice displacements. Counts: V = n*m, E = 3*n*m, F = 2*n*m.
/// Carries K = 0, N = 2. Throws std::invalid_argument for n or m < 3.
SimplicialSurface make_flat_torus(int n, int m);

/// Parse an ASCII OFF file. A sidecar file "<path>.constants" with lines
/// "K = <val>" / "N = <val>" supplies curvature constants if present.
/// Throws std::runtime_error with a line number on malformed input.
SimplicialSurface load_surface(const std::string& path);

/// Write an ASCII OFF file (header "OFF", counts, vertices, faces).
void save_off(const SimplicialSurface& s, const std::string& path);

struct MeshDiagnostics {
  bool manifold = true;
  bool oriented = true;
  bool closed = true;
  int non_delaunay_edges = 0;       // opposite-angle sum > pi
  int degenerate_delaunay_edges = 0;  // opposite-angle sum == pi (zero weight)
  double min_edge_length = 0.0;
  double max_edge_length = 0.0;  // mesh size h
  double min_cot_weight = 0.0;
  std::vector<std::string> findings;

  bool clean() const { return findings.empty(); }
  /// Strict Delaunay: every cotangent weight positive, so mass matrices are
  /// positive definite and hard inequality verdicts are admissible.
  bool strictly_delaunay() const {
    return non_delaunay_edges == 0 && degenerate_delaunay_edges == 0;
  }
};

/// Diagnostics, not failures: manifoldness, orientation consistency,
/// per-edge Delaunay status, edge length range.
MeshDiagnostics validate_surface(const SimplicialSurface& s);

struct DistanceField {
  int source = 0;
  Eigen::VectorXd distance;  // per-vertex shortest-path distance
};

/// Single-source shortest paths along the edge graph weighted by edge
/// lengths; deterministic tie-breaking by vertex index.
/// Throws std::runtime_error if the surface is disconnected.
DistanceField shortest_path_distances(const SimplicialSurface& s, int source);

/// All-pairs matrix of shortest_path_distances (rows = sources); computed in
/// parallel, symmetric by construction of the algorithm.
Eigen::MatrixXd all_pairs_distances(const SimplicialSurface& s);

/// Diameter proxy: max of shortest-path distances over a deterministic
/// sample of source vertices.
double diameter_estimate(const SimplicialSurface& s, int sample_count = 16);

/// FNV-1a hash over vertex coordinates and triangle indices; stable across
/// runs for identical meshes.
std::uint64_t mesh_fingerprint(const SimplicialSurface& s);

}  // namespace hodgelab
