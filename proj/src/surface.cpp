#include "hodgelab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "hodgelab/parallel.hpp"

namespace hodgelab {

namespace {

std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double triangle_area(const std::array<Vec3, 3>& c) {
  return 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
}

}  // namespace

int SimplicialSurface::edge_index(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

double SimplicialSurface::edge_length(int e) const {
  // Every edge borders two faces with matching lengths; take the first hit.
  const auto [a, b] = edges[e];
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    const auto& t = triangles[f];
    for (int k = 0; k < 3; ++k) {
      int u = t[k], v = t[(k + 1) % 3];
      if ((u == a && v == b) || (u == b && v == a))
        return (face_corners[f][(k + 1) % 3] - face_corners[f][k]).norm();
    }
  }
  return (vertices[b] - vertices[a]).norm();
}

double SimplicialSurface::mesh_size() const {
  double h = 0.0;
  for (std::size_t f = 0; f < triangles.size(); ++f)
    for (int k = 0; k < 3; ++k)
      h = std::max(h, (face_corners[f][(k + 1) % 3] - face_corners[f][k]).norm());
  return h;
}

void SimplicialSurface::finalize(bool derive_corners_from_vertices) {
  edges.clear();
  edge_lookup_.clear();
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      std::int64_t key = edge_key(a, b);
      if (edge_lookup_.find(key) == edge_lookup_.end()) {
        edge_lookup_.emplace(key, static_cast<int>(edges.size()));
        edges.push_back({std::min(a, b), std::max(a, b)});
      }
    }
  }
  if (derive_corners_from_vertices) {
    face_corners.resize(triangles.size());
    for (std::size_t f = 0; f < triangles.size(); ++f)
      for (int k = 0; k < 3; ++k) face_corners[f][k] = vertices[triangles[f][k]];
  }
}

SimplicialSurface make_icosphere(int subdivisions) {
  if (subdivisions < 0) throw std::invalid_argument("icosphere: negative subdivision level");
  if (subdivisions > 7) throw std::invalid_argument("icosphere: subdivision cap (7) exceeded");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::unordered_map<std::int64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      std::int64_t key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (verts[a] + verts[b]).normalized();
      int idx = static_cast<int>(verts.size());
      verts.push_back(m);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  SimplicialSurface s;
  s.vertices = std::move(verts);
  s.triangles = std::move(faces);
  s.curvature = CurvatureConstants{1.0, 2.0};
  s.model_name = "icosphere";
  s.finalize();
  return s;
}

SimplicialSurface make_flat_torus(int n, int m) {
  if (n < 3 || m < 3) throw std::invalid_argument("flat torus: need n, m >= 3");

  const int shift = m / 2;  // total x-drift in cells across the m rows
  const double h = 1.0 / n, k = 1.0 / m;

  SimplicialSurface s;
  s.vertices.resize(static_cast<std::size_t>(n) * m);
  auto vid = [&](int i, int j) {
    int jj = ((j % m) + m) % m;
    int drift = (j - jj) / m * shift;  // wrapping rows drifts columns
    int ii = (((i + drift) % n) + n) % n;
    return jj * n + ii;
  };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      double x = std::fmod((i + static_cast<double>(j) * shift / m) / n, 1.0);
      s.vertices[vid(i, j)] = Vec3(x, j * k, 0.0);
    }

  // Exact planar displacement between lattice points (di, dj).
  auto disp = [&](int di, int dj) {
    return Vec3((di + static_cast<double>(dj) * shift / m) * h, dj * k, 0.0);
  };

  s.triangles.reserve(static_cast<std::size_t>(2) * n * m);
  s.face_corners.reserve(s.triangles.capacity());
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      // Cell (i,j), corners A=(i,j) B=(i+1,j) C=(i+1,j+1) D=(i,j+1),
      // split along the short diagonal B-D.
      Vec3 A = Vec3::Zero(), B = disp(1, 0), C = disp(1, 1), D = disp(0, 1);
      s.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
      s.face_corners.push_back({A, B, D});
      s.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
      s.face_corners.push_back({B, C, D});
    }

  s.curvature = CurvatureConstants{0.0, 2.0};
  s.model_name = "torus";
  s.finalize(/*derive_corners_from_vertices=*/false);
  return s;
}

SimplicialSurface load_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);

  int line_no = 0;
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) throw std::runtime_error(path + ":1: empty file");
  {
    std::istringstream ss(line);
    std::string header;
    ss >> header;
    if (header != "OFF")
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected OFF header");
  }
  if (!next_line(line))
    throw std::runtime_error(path + ":" + std::to_string(line_no + 1) + ": missing counts line");
  long nv = -1, nf = -1, ne = -1;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf >> ne) || nv < 0 || nf < 0)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed counts line");
  }

  SimplicialSurface s;
  s.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_line(line))
      throw std::runtime_error(path + ":" + std::to_string(line_no + 1) + ": truncated vertex list");
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed vertex line");
    s.vertices.emplace_back(x, y, z);
  }
  s.triangles.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    if (!next_line(line))
      throw std::runtime_error(path + ":" + std::to_string(line_no + 1) + ": truncated face list");
    std::istringstream ss(line);
    int cnt;
    if (!(ss >> cnt))
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed face line");
    if (cnt != 3)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-triangle face");
    int a, b, c;
    if (!(ss >> a >> b >> c) || a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": face index out of range");
    s.triangles.push_back({a, b, c});
  }
  s.finalize();

  std::ifstream side(path + ".constants");
  if (side) {
    CurvatureConstants cc;
    bool have_k = false, have_n = false;
    std::string key, eq;
    double val;
    while (side >> key >> eq >> val) {
      if (key == "K") { cc.K = val; have_k = true; }
      if (key == "N") { cc.N = val; have_n = true; }
    }
    if (have_k && have_n) s.curvature = cc;
  }

  MeshDiagnostics d = validate_surface(s);
  if (!d.manifold || !d.closed)
    throw std::runtime_error(path + ": non-manifold input: " +
                             (d.findings.empty() ? "unknown defect" : d.findings.front()));
  return s;
}

void save_off(const SimplicialSurface& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << "OFF\n" << s.vertex_count() << ' ' << s.face_count() << ' ' << s.edge_count() << '\n';
  out.precision(17);
  for (const auto& v : s.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : s.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

MeshDiagnostics validate_surface(const SimplicialSurface& s) {
  MeshDiagnostics d;
  d.min_edge_length = std::numeric_limits<double>::infinity();
  d.min_cot_weight = std::numeric_limits<double>::infinity();

  const int E = s.edge_count();
  // Count directed traversals of each canonical edge: a closed oriented
  // manifold has exactly one traversal in each direction.
  std::vector<int> forward(E, 0), backward(E, 0);
  for (std::size_t f = 0; f < s.triangles.size(); ++f) {
    const auto& t = s.triangles[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      d.findings.push_back("degenerate face " + std::to_string(f));
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      int e = s.edge_index(a, b);
      if (a < b) ++forward[e];
      else ++backward[e];
    }
  }
  for (int e = 0; e < E; ++e) {
    int total = forward[e] + backward[e];
    if (total != 2) {
      if (total > 2) d.manifold = false;
      if (total < 2) d.closed = false;
      d.findings.push_back("edge " + std::to_string(e) + " borders " + std::to_string(total) +
                           " faces");
    } else if (forward[e] != 1 || backward[e] != 1) {
      d.oriented = false;
    }
  }
  if (!d.oriented) {
    // Name one offending face for the report.
    std::vector<int> fwd(E, 0);
    for (std::size_t f = 0; f < s.triangles.size(); ++f) {
      const auto& t = s.triangles[f];
      for (int k = 0; k < 3; ++k) {
        int a = t[k], b = t[(k + 1) % 3];
        int e = s.edge_index(a, b);
        int dir = a < b ? 1 : -1;
        if (fwd[e] == dir) {
          d.findings.push_back("orientation inconsistency at face " + std::to_string(f));
          goto oriented_done;
        }
        fwd[e] = dir;
      }
    }
  oriented_done:;
  }

  // Edge lengths, triangle inequality, Delaunay status via cotangent weights.
  std::vector<double> cot_sum(E, 0.0);
  for (std::size_t f = 0; f < s.face_corners.size(); ++f) {
    const auto& c = s.face_corners[f];
    double area = triangle_area(c);
    if (area <= 0.0) d.findings.push_back("zero-area face " + std::to_string(f));
    for (int k = 0; k < 3; ++k) {
      double len = (c[(k + 1) % 3] - c[k]).norm();
      d.min_edge_length = std::min(d.min_edge_length, len);
      d.max_edge_length = std::max(d.max_edge_length, len);
      // angle at corner k is opposite edge (k+1, k+2)
      Vec3 u = c[(k + 1) % 3] - c[k], w = c[(k + 2) % 3] - c[k];
      double cot = u.dot(w) / (2.0 * area);
      int e = s.edge_index(s.triangles[f][(k + 1) % 3], s.triangles[f][(k + 2) % 3]);
      if (e >= 0) cot_sum[e] += 0.5 * cot;
    }
    double l0 = (c[1] - c[0]).norm(), l1 = (c[2] - c[1]).norm(), l2 = (c[0] - c[2]).norm();
    if (l0 + l1 <= l2 || l1 + l2 <= l0 || l2 + l0 <= l1)
      d.findings.push_back("triangle inequality violated at face " + std::to_string(f));
  }
  for (int e = 0; e < E; ++e) {
    d.min_cot_weight = std::min(d.min_cot_weight, cot_sum[e]);
    if (cot_sum[e] < -1e-12)
      ++d.non_delaunay_edges;
    else if (cot_sum[e] <= 1e-12)
      ++d.degenerate_delaunay_edges;
  }
  if (d.non_delaunay_edges > 0)
    d.findings.push_back(std::to_string(d.non_delaunay_edges) + " non-Delaunay edge(s)");
  return d;
}

DistanceField shortest_path_distances(const SimplicialSurface& s, int source) {
  const int V = s.vertex_count();
  if (source < 0 || source >= V) throw std::invalid_argument("distance source out of range");

  // Adjacency with edge lengths from the face geometry.
  std::vector<std::vector<std::pair<int, double>>> adj(V);
  for (std::size_t f = 0; f < s.triangles.size(); ++f) {
    const auto& t = s.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      double len = (s.face_corners[f][(k + 1) % 3] - s.face_corners[f][k]).norm();
      adj[a].emplace_back(b, len);
      adj[b].emplace_back(a, len);
    }
  }

  DistanceField out;
  out.source = source;
  out.distance = Eigen::VectorXd::Constant(V, std::numeric_limits<double>::infinity());
  out.distance[source] = 0.0;
  using Node = std::pair<double, int>;  // (distance, vertex) -- vertex id breaks ties
  std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [dist, v] = heap.top();
    heap.pop();
    if (dist > out.distance[v]) continue;
    for (auto [w, len] : adj[v]) {
      double cand = dist + len;
      if (cand < out.distance[w]) {
        out.distance[w] = cand;
        heap.emplace(cand, w);
      }
    }
  }
  for (int v = 0; v < V; ++v)
    if (!std::isfinite(out.distance[v]))
      throw std::runtime_error("disconnected surface: vertex " + std::to_string(v) +
                               " unreachable from " + std::to_string(source));
  return out;
}

Eigen::MatrixXd all_pairs_distances(const SimplicialSurface& s) {
  const int V = s.vertex_count();
  Eigen::MatrixXd D(V, V);
  parallel_for(V, [&](int v) { D.row(v) = shortest_path_distances(s, v).distance.transpose(); });
  return D;
}

double diameter_estimate(const SimplicialSurface& s, int sample_count) {
  const int V = s.vertex_count();
  int stride = std::max(1, V / std::max(1, sample_count));
  double diam = 0.0;
  for (int v = 0; v < V; v += stride)
    diam = std::max(diam, shortest_path_distances(s, v).distance.maxCoeff());
  return diam;
}

std::uint64_t mesh_fingerprint(const SimplicialSurface& s) {
  std::uint64_t hash = 1469598103934665603ull;
  auto mix = [&hash](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ull;
    }
  };
  for (const auto& v : s.vertices) {
    double coords[3] = {v.x(), v.y(), v.z()};
    mix(coords, sizeof(coords));
  }
  for (const auto& t : s.triangles) mix(t.data(), sizeof(int) * 3);
  return hash;
}

}  // namespace hodgelab
