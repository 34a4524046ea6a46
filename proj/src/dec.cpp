#include "hodgelab/dec.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace hodgelab {

namespace {

void require_degree(const Form& f, int degree, const char* what) {
  if (f.degree != degree)
    throw std::invalid_argument(std::string(what) + ": expected degree " +
                                std::to_string(degree) + ", got " + std::to_string(f.degree));
}

SparseMat sparse_diag(const Eigen::VectorXd& d) {
  SparseMat M(d.size(), d.size());
  M.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (int i = 0; i < d.size(); ++i) M.insert(i, i) = d[i];
  M.makeCompressed();
  return M;
}

}  // namespace

DecOperators build_dec(const SimplicialSurface& s) {
  const int V = s.vertex_count(), E = s.edge_count(), F = s.face_count();
  DecOperators ops;
  ops.surface = &s;
  ops.mesh_h = s.mesh_size();

  std::vector<Eigen::Triplet<double>> t0, t1;
  t0.reserve(2 * E);
  for (int e = 0; e < E; ++e) {
    t0.emplace_back(e, s.edges[e][0], -1.0);
    t0.emplace_back(e, s.edges[e][1], 1.0);
  }
  ops.d0.resize(E, V);
  ops.d0.setFromTriplets(t0.begin(), t0.end());

  t1.reserve(3 * F);
  for (int f = 0; f < F; ++f) {
    const auto& t = s.triangles[f];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      t1.emplace_back(f, s.edge_index(a, b), a < b ? 1.0 : -1.0);
    }
  }
  ops.d1.resize(F, E);
  ops.d1.setFromTriplets(t1.begin(), t1.end());

  ops.m0 = Eigen::VectorXd::Zero(V);
  ops.m1 = Eigen::VectorXd::Zero(E);
  ops.m2 = Eigen::VectorXd::Zero(F);
  ops.face_area.resize(F);
  ops.corner_gradient.resize(F);
  ops.vertex_faces.assign(V, {});

  for (int f = 0; f < F; ++f) {
    const auto& c = s.face_corners[f];
    const auto& t = s.triangles[f];
    Vec3 n = (c[1] - c[0]).cross(c[2] - c[0]);
    double area = 0.5 * n.norm();
    if (area <= 0.0) throw std::runtime_error("degenerate triangle " + std::to_string(f));
    n /= (2.0 * area);
    ops.face_area[f] = area;
    ops.m2[f] = 1.0 / area;
    for (int k = 0; k < 3; ++k) {
      ops.m0[t[k]] += area / 3.0;
      ops.vertex_faces[t[k]].push_back(f);
      // gradient of the barycentric coordinate of corner k
      ops.corner_gradient[f][k] = n.cross(c[(k + 2) % 3] - c[(k + 1) % 3]) / (2.0 * area);
      // cotangent of the angle at corner k, opposite edge (k+1, k+2)
      Vec3 u = c[(k + 1) % 3] - c[k], w = c[(k + 2) % 3] - c[k];
      double cot = u.dot(w) / (2.0 * area);
      ops.m1[s.edge_index(t[(k + 1) % 3], t[(k + 2) % 3])] += 0.5 * cot;
    }
  }
  ops.strictly_positive_m1 = ops.m1.minCoeff() > 0.0;

  SparseMat M1 = sparse_diag(ops.m1);
  SparseMat M2 = sparse_diag(ops.m2);
  ops.stiffness0 = SparseMat(ops.d0.transpose() * M1 * ops.d0);

  // hodge1_weak = M1 d0 M0^-1 d0^T M1 + d1^T M2 d1.
  SparseMat M0inv = sparse_diag(ops.m0.cwiseInverse());
  SparseMat B = SparseMat(M1 * ops.d0);
  SparseMat Bt = SparseMat(B.transpose());
  ops.hodge1_weak = SparseMat(SparseMat(B * M0inv) * Bt) +
                    SparseMat(SparseMat(ops.d1.transpose() * M2) * ops.d1);

  if (ops.strictly_positive_m1) {
    SparseMat M1inv = sparse_diag(ops.m1.cwiseInverse());
    SparseMat d1t = SparseMat(ops.d1.transpose());
    ops.face_pencil = SparseMat(SparseMat(ops.d1 * M1inv) * d1t);
  }

  // Vertex tangent frames from area-weighted face normals.
  ops.vertex_frame.resize(V);
  {
    std::vector<Vec3> normal(V, Vec3::Zero());
    for (int f = 0; f < F; ++f) {
      const auto& c = s.face_corners[f];
      Vec3 an = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]);
      for (int k = 0; k < 3; ++k) normal[s.triangles[f][k]] += an;
    }
    for (int v = 0; v < V; ++v) {
      Vec3 n = normal[v].normalized();
      Vec3 e1 = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
      e1 = (e1 - e1.dot(n) * n).normalized();
      Vec3 e2 = n.cross(e1);
      ops.vertex_frame[v].row(0) = e1.transpose();
      ops.vertex_frame[v].row(1) = e2.transpose();
    }
  }

  // Reconstruction map: mean Whitney vector per face, dual-area averaged to
  // vertices, expressed in the vertex frame.
  {
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(static_cast<std::size_t>(V) * 24);
    for (int v = 0; v < V; ++v) {
      for (int f : ops.vertex_faces[v]) {
        const auto& t = s.triangles[f];
        double w = (ops.face_area[f] / 3.0) / ops.m0[v];
        for (int k = 0; k < 3; ++k) {
          int a = t[k], b = t[(k + 1) % 3];
          int e = s.edge_index(a, b);
          double sign = a < b ? 1.0 : -1.0;
          Vec3 contrib =
              sign * w / 3.0 * (ops.corner_gradient[f][(k + 1) % 3] - ops.corner_gradient[f][k]);
          Eigen::Vector2d fr = ops.vertex_frame[v] * contrib;
          tr.emplace_back(2 * v, e, fr[0]);
          tr.emplace_back(2 * v + 1, e, fr[1]);
        }
      }
    }
    ops.recon.resize(2 * V, E);
    ops.recon.setFromTriplets(tr.begin(), tr.end());
  }
  return ops;
}

Form exterior_derivative(const DecOperators& ops, const Form& f) {
  if (f.degree == 0) return {1, ops.d0 * f.coeffs};
  if (f.degree == 1) return {2, ops.d1 * f.coeffs};
  throw std::invalid_argument("exterior_derivative: degree-2 input");
}

Form codifferential(const DecOperators& ops, const Form& f) {
  if (f.degree == 1)
    return {0, ops.m0.cwiseInverse().asDiagonal() *
                   (ops.d0.transpose() * (ops.m1.asDiagonal() * f.coeffs))};
  if (f.degree == 2) {
    if (!ops.strictly_positive_m1)
      throw std::runtime_error("codifferential on 2-forms needs positive cotangent weights");
    return {1, ops.m1.cwiseInverse().asDiagonal() *
                   (ops.d1.transpose() * (ops.m2.asDiagonal() * f.coeffs))};
  }
  throw std::invalid_argument("codifferential: degree-0 input");
}

Form hodge_laplacian(const DecOperators& ops, const Form& omega) {
  require_degree(omega, 1, "hodge_laplacian");
  if (!ops.strictly_positive_m1)
    throw std::runtime_error("hodge_laplacian needs positive cotangent weights");
  return {1, ops.m1.cwiseInverse().asDiagonal() * (ops.hodge1_weak * omega.coeffs)};
}

double inner(const DecOperators& ops, const Form& a, const Form& b) {
  if (a.degree != b.degree) throw std::invalid_argument("inner: mixed degrees");
  return a.coeffs.dot(ops.mass(a.degree).asDiagonal() * b.coeffs);
}

double norm(const DecOperators& ops, const Form& a) { return std::sqrt(inner(ops, a, a)); }

Vec3 whitney_face_vector(const DecOperators& ops, const Form& omega, int f) {
  require_degree(omega, 1, "whitney_face_vector");
  const auto& t = ops.surface->triangles[f];
  Vec3 u = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    int a = t[k], b = t[(k + 1) % 3];
    int e = ops.surface->edge_index(a, b);
    double coeff = (a < b ? 1.0 : -1.0) * omega.coeffs[e];
    u += coeff / 3.0 * (ops.corner_gradient[f][(k + 1) % 3] - ops.corner_gradient[f][k]);
  }
  return u;
}

Form pointwise_inner(const DecOperators& ops, const Form& a, const Form& b) {
  require_degree(a, 1, "pointwise_inner");
  require_degree(b, 1, "pointwise_inner");
  const int V = ops.n_vertices(), F = ops.n_faces();
  std::vector<Vec3> ua(F), ub(F);
  for (int f = 0; f < F; ++f) {
    ua[f] = whitney_face_vector(ops, a, f);
    ub[f] = whitney_face_vector(ops, b, f);
  }
  Form out{0, Eigen::VectorXd::Zero(V)};
  for (int v = 0; v < V; ++v) {
    double acc = 0.0;
    for (int f : ops.vertex_faces[v]) acc += ops.face_area[f] / 3.0 * ua[f].dot(ub[f]);
    out.coeffs[v] = acc / ops.m0[v];
  }
  return out;
}

Form pointwise_norm(const DecOperators& ops, const Form& omega) {
  Form sq = pointwise_inner(ops, omega, omega);
  sq.coeffs = sq.coeffs.cwiseMax(0.0).cwiseSqrt();
  return sq;
}

double lp_norm(const DecOperators& ops, const Form& f, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p < 1");
  Eigen::VectorXd vals;
  if (f.degree == 0)
    vals = f.coeffs.cwiseAbs();
  else if (f.degree == 1)
    vals = pointwise_norm(ops, f).coeffs;
  else
    throw std::invalid_argument("lp_norm: degree-2 input");
  if (std::isinf(p)) return vals.maxCoeff();
  double acc = 0.0;
  for (int v = 0; v < vals.size(); ++v) acc += std::pow(vals[v], p) * ops.m0[v];
  return std::pow(acc, 1.0 / p);
}

double l2_equivalence_ratio(const DecOperators& ops, const Form& omega) {
  require_degree(omega, 1, "l2_equivalence_ratio");
  double n1 = norm(ops, omega);
  return n1 == 0.0 ? 1.0 : lp_norm(ops, omega, 2.0) / n1;
}

double hodge_energy(const DecOperators& ops, const Form& omega) {
  require_degree(omega, 1, "hodge_energy");
  Form d = exterior_derivative(ops, omega);
  Form del = codifferential(ops, omega);
  return 0.5 * (inner(ops, d, d) + inner(ops, del, del));
}

void save_form_csv(const Form& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write form csv: " + path);
  out << "index,coefficient\n";
  out.precision(17);
  for (int i = 0; i < f.coeffs.size(); ++i) out << i << ',' << f.coeffs[i] << '\n';
}

Form load_form_csv(const std::string& path, int degree) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read form csv: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> vals;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  Form f{degree, Eigen::VectorXd::Zero(static_cast<int>(vals.size()))};
  for (std::size_t i = 0; i < vals.size(); ++i) f.coeffs[static_cast<int>(i)] = vals[i];
  return f;
}

}  // namespace hodgelab
