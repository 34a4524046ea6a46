#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hodgelab/surface.hpp"

namespace hodgelab {

using SparseMat = Eigen::SparseMatrix<double>;

/// Coefficient vector of a discrete k-form: vertex values (k=0), edge
/// integrals against the low->high orientation (k=1), face integrals (k=2).
struct Form {
  int degree = 0;
  Eigen::VectorXd coeffs;
};

/// Discrete exterior calculus package for one surface.
///
/// d0, d1 are the signed incidence matrices; m0/m1/m2 the diagonal masses
/// (barycentric dual areas, cotangent weights, inverse triangle areas).
/// stiffness0 = d0^T M1 d0 is the cotangent Laplacian. hodge1_weak is the
/// M1-weighted Hodge operator M1 d0 M0^-1 d0^T M1 + d1^T M2 d1, i.e. the
/// symmetric matrix of the quadratic form |d.|^2 + |delta.|^2; the pencil
/// (hodge1_weak, diag m1) carries the 1-form spectrum.
struct DecOperators {
  SparseMat d0;  // E x V
  SparseMat d1;  // F x E
  Eigen::VectorXd m0, m1, m2;
  SparseMat stiffness0;   // V x V
  SparseMat hodge1_weak;  // E x E
  SparseMat face_pencil;  // F x F, d1 M1^-1 d1^T (mass = diag area)

  bool strictly_positive_m1 = true;
  double mesh_h = 0.0;

  // Whitney data: per-face barycentric corner gradients and areas.
  std::vector<std::array<Vec3, 3>> corner_gradient;
  std::vector<double> face_area;
  std::vector<std::vector<int>> vertex_faces;
  // Orthonormal tangent frame rows per vertex (2 x 3).
  std::vector<Eigen::Matrix<double, 2, 3>> vertex_frame;
  // Tangent-plane reconstruction: rows (2v, 2v+1) of `recon` map edge
  // coefficients to the frame components of the averaged Whitney vector.
  SparseMat recon;  // 2V x E

  const SimplicialSurface* surface = nullptr;

  int n_vertices() const { return static_cast<int>(m0.size()); }
  int n_edges() const { return static_cast<int>(m1.size()); }
  int n_faces() const { return static_cast<int>(m2.size()); }
  int dof(int degree) const {
    return degree == 0 ? n_vertices() : degree == 1 ? n_edges() : n_faces();
  }
  const Eigen::VectorXd& mass(int degree) const {
    return degree == 0 ? m0 : degree == 1 ? m1 : m2;
  }
};

/// Assemble all operators. Throws on degenerate (zero-area) triangles.
/// A non-Delaunay mesh assembles fine but strictly_positive_m1 is cleared;
/// operations needing M1^-1 then refuse to run.
DecOperators build_dec(const SimplicialSurface& s);

/// d: degree 0 -> 1 or 1 -> 2. dd = 0 exactly.
Form exterior_derivative(const DecOperators& ops, const Form& f);

/// delta: adjoint of d. Degree 1 -> 0 or 2 -> 1; needs positive M1 for
/// degree 2 input.
Form codifferential(const DecOperators& ops, const Form& f);

/// (d delta + delta d) on 1-forms.
Form hodge_laplacian(const DecOperators& ops, const Form& omega);

/// M_k inner product / norm of same-degree forms.
double inner(const DecOperators& ops, const Form& a, const Form& b);
double norm(const DecOperators& ops, const Form& a);

/// Per-face constant tangent vector whose edge line integrals reproduce the
/// 1-form's coefficients in the mean (averaged lowest-order Whitney form;
/// exact for fields that are constant on the face plane).
Vec3 whitney_face_vector(const DecOperators& ops, const Form& omega, int face);

/// Vertex field |omega|: sqrt of the dual-area-weighted mean of squared
/// Whitney face vectors over incident faces. Absolutely homogeneous,
/// satisfies the vertexwise triangle inequality, vanishes when omega does.
Form pointwise_norm(const DecOperators& ops, const Form& omega);

/// Vertex-distributed pointwise pairing <a,b>(v) with the same face
/// averaging as pointwise_norm; pointwise_norm(w)^2 == pointwise_inner(w,w).
Form pointwise_inner(const DecOperators& ops, const Form& a, const Form& b);

/// Vertex-quadrature L^p norm: (sum_v |.|(v)^p m0_v)^{1/p}, max for p=inf.
/// Degree-1 forms go through pointwise_norm first.
double lp_norm(const DecOperators& ops, const Form& f, double p);

/// Ratio lp_norm(omega,2) / M1-norm: the vertex-quadrature vs DEC metric
/// equivalence factor for 1-forms.
double l2_equivalence_ratio(const DecOperators& ops, const Form& omega);

/// E(omega) = (|d omega|^2 + |delta omega|^2) / 2.
double hodge_energy(const DecOperators& ops, const Form& omega);

/// CSV serialization: header "index,coefficient", one row per coefficient.
void save_form_csv(const Form& f, const std::string& path);
Form load_form_csv(const std::string& path, int degree);

}  // namespace hodgelab
