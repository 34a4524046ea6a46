#include "hodgelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace hodgelab {

namespace {

struct Pencil {
  const SparseMat* L = nullptr;
  const Eigen::VectorXd* m = nullptr;
};

Pencil pencil_for(const DecOperators& ops, int degree) {
  if (degree == 0) return {&ops.stiffness0, &ops.m0};
  if (degree == 1) {
    if (!ops.strictly_positive_m1)
      throw std::runtime_error("1-form pencil needs positive cotangent weights");
    return {&ops.hodge1_weak, &ops.m1};
  }
  throw std::invalid_argument("eigensolve: degree must be 0 or 1");
}

double residual_bound_of(const SparseMat& L, const Eigen::VectorXd& m,
                         const Eigen::VectorXd& lam, const Eigen::MatrixXd& X) {
  double worst = 0.0;
  for (int i = 0; i < lam.size(); ++i) {
    Eigen::VectorXd r = L * X.col(i) - lam[i] * m.cwiseProduct(X.col(i));
    worst = std::max(worst, std::sqrt(r.cwiseQuotient(m).dot(r)));
  }
  return worst;
}

SpectralData dense_pencil(const SparseMat& L, const Eigen::VectorXd& m, int count,
                          bool vectors = true) {
  const int n = static_cast<int>(m.size());
  if (m.minCoeff() <= 0.0) throw std::runtime_error("mass matrix not positive");
  Eigen::MatrixXd A = Eigen::MatrixXd(L);
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::MatrixXd B = Eigen::MatrixXd(m.asDiagonal());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      A, B, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");

  int keep = count < 0 ? n : std::min(count, n);
  SpectralData out;
  out.eigenvalues = solver.eigenvalues().head(keep);
  if (vectors) {
    out.eigenvectors = solver.eigenvectors().leftCols(keep);
    out.residual_bound = residual_bound_of(L, m, out.eigenvalues, out.eigenvectors);
  }
  out.full = keep == n;
  return out;
}

/// Shift-invert Lanczos with full reorthogonalization for the lowest `count`
/// eigenpairs of the pencil (L, diag m). The Krylov dimension grows until
/// the Ritz residuals clear the tolerance.
SpectralData lanczos_pencil(const SparseMat& L, const Eigen::VectorXd& m, int count) {
  const int n = static_cast<int>(m.size());
  if (m.minCoeff() <= 0.0) throw std::runtime_error("mass matrix not positive");
  count = std::min(count, n);

  // sigma < 0 keeps L - sigma M positive definite including the kernel.
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale += L.coeff(i, i) / m[i];
  scale /= n;
  const double sigma = -0.02 * scale;

  SparseMat shifted;
  {
    SparseMat Ms(n, n);
    Ms.reserve(Eigen::VectorXi::Constant(n, 1));
    for (int i = 0; i < n; ++i) Ms.insert(i, i) = m[i];
    Ms.makeCompressed();
    shifted = SparseMat(L - sigma * Ms);
  }
  Eigen::SimplicialLDLT<SparseMat> chol(shifted);
  if (chol.info() != Eigen::Success) throw std::runtime_error("shift-invert factorization failed");

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd q0 = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return gauss(rng); });
  q0 /= std::sqrt(q0.dot(m.cwiseProduct(q0)));

  for (int max_dim = std::min(n, std::max(3 * count + 60, 100));;
       max_dim = std::min(n, 2 * max_dim)) {
    Eigen::MatrixXd Q(n, max_dim);
    std::vector<double> alpha, beta;
    Q.col(0) = q0;

    int dim = 0;
    for (int j = 0; j < max_dim; ++j) {
      Eigen::VectorXd w = chol.solve(m.cwiseProduct(Q.col(j)));
      double a = w.dot(m.cwiseProduct(Q.col(j)));
      alpha.push_back(a);
      w -= a * Q.col(j);
      if (j > 0) w -= beta.back() * Q.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd proj = Q.leftCols(j + 1).transpose() * m.cwiseProduct(w);
        w -= Q.leftCols(j + 1) * proj;
      }
      double b = std::sqrt(std::max(0.0, w.dot(m.cwiseProduct(w))));
      dim = j + 1;
      if (dim == max_dim || b < 1e-13) break;
      beta.push_back(b);
      Q.col(j + 1) = w / b;
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < dim) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolver(T);
    const Eigen::VectorXd& theta = tsolver.eigenvalues();
    const Eigen::MatrixXd& S = tsolver.eigenvectors();
    if (dim < count) throw std::runtime_error("Lanczos breakdown before requested count");

    SpectralData out;
    out.eigenvalues.resize(count);
    out.eigenvectors.resize(n, count);
    bool usable = true;
    for (int i = 0; i < count && usable; ++i) {
      int idx = dim - 1 - i;  // largest theta = smallest pencil eigenvalue
      double th = theta[idx];
      if (th <= 0.0) {
        usable = false;
        break;
      }
      out.eigenvalues[i] = sigma + 1.0 / th;
      out.eigenvectors.col(i) = Q.leftCols(dim) * S.col(idx);
    }
    if (usable) {
      for (int i = 0; i < count; ++i) {
        for (int k = 0; k < i; ++k)
          out.eigenvectors.col(i) -=
              out.eigenvectors.col(k).dot(m.cwiseProduct(out.eigenvectors.col(i))) *
              out.eigenvectors.col(k);
        double nm =
            std::sqrt(out.eigenvectors.col(i).dot(m.cwiseProduct(out.eigenvectors.col(i))));
        out.eigenvectors.col(i) /= nm;
      }
      out.full = count == n;
      out.residual_bound = residual_bound_of(L, m, out.eigenvalues, out.eigenvectors);
      double lam_scale = std::max(out.eigenvalues.cwiseAbs().maxCoeff(), std::abs(scale) * 1e-6);
      if (out.residual_bound <= 1e-8 * lam_scale) return out;
    }
    if (max_dim >= n)
      throw std::runtime_error("Lanczos convergence failure at full Krylov dimension");
  }
}

}  // namespace

namespace detail {

// Lowest eigenvalues of an arbitrary pencil up to the threshold `cut`.
// Doubles the request until the top computed eigenvalue clears the
// threshold; `complete` reports whether that happened (it cannot when the
// whole spectrum sits below the cut).
Eigen::VectorXd pencil_eigenvalues_below(const SparseMat& L, const Eigen::VectorXd& m, double cut,
                                         bool* complete) {
  const int n = static_cast<int>(m.size());
  if (n <= kDenseDofCap) {
    SpectralData all = dense_pencil(L, m, -1, /*vectors=*/false);
    if (complete) *complete = true;
    int k = 0;
    while (k < n && all.eigenvalues[k] <= cut) ++k;
    return all.eigenvalues.head(k);
  }
  int request = 64;
  for (;;) {
    SpectralData part = lanczos_pencil(L, m, std::min(request, n));
    if (part.eigenvalues[part.count() - 1] > cut || part.count() == n) {
      if (complete) *complete = part.eigenvalues[part.count() - 1] > cut;
      int k = 0;
      while (k < part.count() && part.eigenvalues[k] <= cut) ++k;
      return part.eigenvalues.head(k);
    }
    if (request >= n) {
      if (complete) *complete = false;
      return part.eigenvalues;
    }
    request *= 2;
  }
}

SpectralData solve_pencil_dense(const SparseMat& L, const Eigen::VectorXd& m, int count,
                                bool vectors) {
  return dense_pencil(L, m, count, vectors);
}

}  // namespace detail

SpectralData eigensolve(const DecOperators& ops, int degree, int count) {
  Pencil p = pencil_for(ops, degree);
  const int n = static_cast<int>(p.m->size());
  if (n > kDenseDofCap)
    throw std::runtime_error("dense eigensolve capped at " + std::to_string(kDenseDofCap) +
                             " DOF (got " + std::to_string(n) + ")");
  SpectralData out = dense_pencil(*p.L, *p.m, count);
  out.degree = degree;
  return out;
}

SpectralData eigensolve_partial(const DecOperators& ops, int degree, int count) {
  Pencil p = pencil_for(ops, degree);
  const int n = static_cast<int>(p.m->size());
  if (n <= 600) {
    SpectralData out = dense_pencil(*p.L, *p.m, count);
    out.degree = degree;
    return out;
  }
  SpectralData out = lanczos_pencil(*p.L, *p.m, count);
  out.degree = degree;
  return out;
}

SpectralData eigensolve_auto(const DecOperators& ops, int degree, int count) {
  int n = ops.dof(degree);
  if (n <= kDenseDofCap) return eigensolve(ops, degree, count);
  if (count < 0) throw std::runtime_error("full spectrum beyond the dense cap");
  return eigensolve_partial(ops, degree, count);
}

Eigen::VectorXd coexact_eigenvalues(const DecOperators& ops) {
  if (!ops.strictly_positive_m1)
    throw std::runtime_error("coexact pencil needs positive cotangent weights");
  const int F = ops.n_faces();
  if (F > kDenseDofCap) throw std::runtime_error("coexact spectrum beyond the dense cap");
  Eigen::VectorXd area = ops.m2.cwiseInverse();
  return dense_pencil(ops.face_pencil, area, -1, /*vectors=*/false).eigenvalues;
}

VerificationRecord spectral_inclusion_check(const SpectralData& spec0,
                                            const std::optional<SpectralData>& spec1,
                                            const DecOperators& ops, double tol) {
  VerificationRecord r;
  r.name = "spectral_inclusion";
  r.mesh_h = ops.mesh_h;
  r.param("tol", tol);

  double lam_max0 = spec0.count() ? spec0.eigenvalues.maxCoeff() : 0.0;
  double zero_cut = std::max(tol, 1e-10) * std::max(lam_max0, 1.0);

  double worst_mismatch = 0.0;
  double worst_residual = 0.0;
  int undecidable = 0;
  for (int i = 0; i < spec0.count(); ++i) {
    double lam = spec0.eigenvalues[i];
    if (lam <= zero_cut) continue;
    // Transferred eigenform: the normalized differential is an exact
    // eigenform of the 1-form operator; its residual certifies inclusion.
    Form df{1, ops.d0 * spec0.eigenvectors.col(i)};
    worst_residual = std::max(worst_residual, weyl_residual(ops, df, lam) / std::max(lam, 1.0));
    if (spec1) {
      if (!spec1->full && lam > spec1->eigenvalues.maxCoeff()) {
        ++undecidable;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < spec1->count(); ++j)
        best = std::min(best, std::abs(spec1->eigenvalues[j] - lam) / lam);
      worst_mismatch = std::max(worst_mismatch, best);
    }
  }
  r.param("undecidable", undecidable);
  r.param("max_relative_mismatch", worst_mismatch);
  r.param("max_transfer_residual", worst_residual);
  r.lhs = std::max(worst_mismatch, worst_residual);
  r.rhs = tol;
  r.slack = r.rhs - r.lhs;
  set_verdict(r, 0.0);
  return r;
}

SpectralGapChain spectral_gap_chain(const SpectralData& spec0, const SpectralData& spec1,
                                    double K, double mesh_h, double first_link_coeff) {
  SpectralGapChain c;
  double lam_max = std::max(spec0.eigenvalues.maxCoeff(), 1.0);
  double zero_cut = 1e-8 * lam_max;

  c.inf_schrodinger = spec0.eigenvalues[0] + K;
  c.inf_hodge = spec1.eigenvalues[0];
  c.inf_hodge_positive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec1.count(); ++i)
    if (spec1.eigenvalues[i] > zero_cut) {
      c.inf_hodge_positive = spec1.eigenvalues[i];
      break;
    }
  c.inf_laplace_positive = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec0.count(); ++i)
    if (spec0.eigenvalues[i] > zero_cut) {
      c.inf_laplace_positive = spec0.eigenvalues[i];
      break;
    }

  double slack1 = c.inf_hodge - c.inf_schrodinger;
  double slack2 = c.inf_hodge_positive - c.inf_hodge;
  double slack3 = c.inf_laplace_positive - c.inf_hodge_positive;

  VerificationRecord r;
  r.name = "spectral_gap_chain";
  r.mesh_h = mesh_h;
  r.param("K", K);
  r.param("slack_schrodinger_link", slack1);
  r.param("slack_middle_link", slack2);
  r.param("slack_exact_link", slack3);
  r.param("tol_coeff", first_link_coeff);
  double tol1 = first_link_coeff * mesh_h;
  bool ok = slack1 >= -tol1 && slack2 >= -1e-12 * lam_max && slack3 >= -1e-8 * lam_max;
  r.lhs = -std::min({slack1 + tol1, slack2, slack3});
  r.rhs = 0.0;
  r.slack = -r.lhs;
  r.verdict = ok ? "pass" : "fail";
  c.record = r;
  return c;
}

int harmonic_dimension(const SpectralData& spec1, double tol) {
  if (spec1.count() == 0) throw std::invalid_argument("harmonic_dimension: empty spectrum");
  double lam_max = spec1.eigenvalues.maxCoeff();
  if (tol < 0.0) tol = 1e-6 * lam_max;
  int count = 0;
  for (int i = 0; i < spec1.count(); ++i)
    if (spec1.eigenvalues[i] < tol) ++count;
  // demand a clean factor-10 spectral gap above the cutoff
  if (count < spec1.count() && spec1.eigenvalues[count] < 10.0 * tol)
    throw std::runtime_error("harmonic_dimension: cutoff lands inside an eigencluster");
  return count;
}

VerificationRecord poincare_check(const SpectralData& spec1, const DecOperators& ops, int samples,
                                  std::uint64_t seed) {
  int b1 = harmonic_dimension(spec1);
  double lam_plus = spec1.eigenvalues[b1];
  double C = 1.0 / lam_plus;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const int E = ops.n_edges();
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < samples; ++trial) {
    Form omega{1, Eigen::VectorXd::NullaryExpr(E, [&](Eigen::Index) { return gauss(rng); })};
    Eigen::VectorXd res = omega.coeffs;
    for (int i = 0; i < b1; ++i) {
      const auto& phi = spec1.eigenvectors.col(i);
      res -= phi.dot(ops.m1.cwiseProduct(omega.coeffs)) * phi;
    }
    double lhs = res.dot(ops.m1.cwiseProduct(res));
    double rhs = 2.0 * C * hodge_energy(ops, omega);
    worst = std::min(worst, rhs - lhs);
  }
  VerificationRecord r;
  r.name = "poincare";
  r.mesh_h = ops.mesh_h;
  r.seed = seed;
  r.param("C", C);
  r.param("samples", samples);
  r.lhs = -worst;
  r.rhs = 0.0;
  r.slack = worst;
  set_verdict(r, 1e-10 * std::max(lam_plus, 1.0));
  return r;
}

VerificationRecord eigenform_growth_check(const SpectralData& spec1, const DecOperators& ops,
                                          const SimplicialSurface& s, double N) {
  double D = diameter_estimate(s);
  double lam_min = 1.0 / (D * D);
  std::vector<double> logs_lam, logs_sup;
  for (int i = 0; i < spec1.count(); ++i) {
    double lam = spec1.eigenvalues[i];
    if (lam < lam_min) continue;
    Form omega{1, spec1.eigenvectors.col(i)};
    double l2 = lp_norm(ops, omega, 2.0);
    double sup = lp_norm(ops, omega, std::numeric_limits<double>::infinity()) / l2;
    logs_lam.push_back(std::log(lam));
    logs_sup.push_back(std::log(sup));
  }
  if (logs_lam.size() < 10)
    throw std::runtime_error("eigenform_growth_check: fewer than 10 usable eigenpairs");

  double n = static_cast<double>(logs_lam.size());
  double mx = 0, my = 0, sxx = 0, sxy = 0;
  for (double x : logs_lam) mx += x;
  for (double y : logs_sup) my += y;
  mx /= n;
  my /= n;
  for (std::size_t i = 0; i < logs_lam.size(); ++i) {
    sxx += (logs_lam[i] - mx) * (logs_lam[i] - mx);
    sxy += (logs_lam[i] - mx) * (logs_sup[i] - my);
  }
  double slope = sxy / sxx;

  VerificationRecord r;
  r.name = "eigenform_growth";
  r.mesh_h = ops.mesh_h;
  r.param("N", N);
  r.param("diameter", D);
  r.param("pairs", static_cast<double>(logs_lam.size()));
  r.param("slope", slope);
  r.lhs = slope;
  r.rhs = N / 4.0 + 0.15;
  r.slack = r.rhs - r.lhs;
  set_verdict(r, 0.0);
  return r;
}

VerificationRecord minmax_check(const SpectralData& spec1, const DecOperators& ops, int trials,
                                std::uint64_t seed) {
  const int E = ops.n_edges();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double lam_scale = std::max(1.0, spec1.eigenvalues.maxCoeff());
  double worst = std::numeric_limits<double>::infinity();

  auto rayleigh_sup = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd A = X.transpose() * (ops.hodge1_weak * X);
    Eigen::MatrixXd B = X.transpose() * ops.m1.asDiagonal() * X;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (A + A.transpose()), B, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
  };

  for (int dim : {1, 2, 3}) {
    if (dim > spec1.count()) continue;
    for (int trial = 0; trial < trials; ++trial) {
      Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(
          E, dim, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
      worst = std::min(worst, rayleigh_sup(X) - spec1.eigenvalues[dim - 1]);
    }
    double achieved = rayleigh_sup(spec1.eigenvectors.leftCols(dim));
    worst =
        std::min(worst, 1e-10 * lam_scale - std::abs(achieved - spec1.eigenvalues[dim - 1]));
  }

  VerificationRecord r;
  r.name = "minmax";
  r.mesh_h = ops.mesh_h;
  r.seed = seed;
  r.param("trials", trials);
  r.lhs = -worst;
  r.rhs = 0.0;
  r.slack = worst;
  set_verdict(r, 1e-8 * lam_scale);
  return r;
}

double weyl_residual(const DecOperators& ops, const Form& omega, double lambda) {
  if (omega.degree != 1) throw std::invalid_argument("weyl_residual: degree-1 form required");
  double nrm = norm(ops, omega);
  if (nrm == 0.0) throw std::invalid_argument("weyl_residual: zero form");
  Form lap = hodge_laplacian(ops, omega);
  Eigen::VectorXd diff = lap.coeffs - lambda * omega.coeffs;
  return std::sqrt(diff.dot(ops.m1.cwiseProduct(diff))) / nrm;
}

}  // namespace hodgelab
