#include "hodgelab/heat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace hodgelab {

namespace {

struct Generator {
  const SparseMat* L = nullptr;
  const Eigen::VectorXd* m = nullptr;  // y = M^-1 L x has spectrum in [0, bound]
  double bound = 0.0;
};

Generator generator_for(const DecOperators& ops, int degree) {
  Generator g;
  if (degree == 0) {
    g.L = &ops.stiffness0;
    g.m = &ops.m0;
  } else if (degree == 1) {
    if (!ops.strictly_positive_m1)
      throw std::runtime_error("1-form heat flow needs positive cotangent weights");
    g.L = &ops.hodge1_weak;
    g.m = &ops.m1;
  } else {
    throw std::invalid_argument("heat flow: degree must be 0 or 1");
  }
  // Gershgorin bound for M^-1 L: rigorous upper bound on the spectrum.
  double worst = 0.0;
  for (int k = 0; k < g.L->outerSize(); ++k) {
    double row = 0.0;
    for (SparseMat::InnerIterator it(*g.L, k); it; ++it) row += std::abs(it.value());
    worst = std::max(worst, row / (*g.m)[k]);
  }
  g.bound = worst;
  return g;
}

/// Chebyshev coefficients of exp(-t * b * (1+x)/2) on x in [-1, 1],
/// computed by interpolation at Chebyshev points; n doubled until the tail
/// drops below tol.
std::vector<double> exp_cheb_coeffs(double tb, double tol) {
  if (tb < 0) throw std::invalid_argument("negative time-operator product");
  if (tb > 2.0e6) throw std::runtime_error("time-operator product too large for expmv");
  int n = 32;
  for (;;) {
    int pts = n + 1;
    std::vector<double> fvals(pts);
    for (int j = 0; j < pts; ++j) {
      double theta = M_PI * j / n;
      fvals[j] = std::exp(-0.5 * tb * (1.0 + std::cos(theta)));
    }
    std::vector<double> c(pts);
    for (int k = 0; k <= n; ++k) {
      double acc = 0.5 * (fvals[0] * 1.0 + fvals[n] * std::cos(M_PI * k));
      for (int j = 1; j < n; ++j) acc += fvals[j] * std::cos(M_PI * k * j / n);
      c[k] = 2.0 / n * acc;
    }
    c[0] *= 0.5;
    // tail estimate over the last eighth of coefficients
    double tail = 0.0;
    for (int k = n - n / 8; k <= n; ++k) tail = std::max(tail, std::abs(c[k]));
    if (tail < tol || n >= (1 << 17)) {
      if (tail >= tol) throw std::runtime_error("expmv Chebyshev expansion did not converge");
      // trim converged tail
      int keep = pts;
      while (keep > 2 && std::abs(c[keep - 1]) < tol / 8) --keep;
      c.resize(keep);
      return c;
    }
    n *= 2;
  }
}

Eigen::VectorXd cheb_apply(const Generator& g, const std::vector<double>& c,
                           const Eigen::VectorXd& x) {
  // Clenshaw on S = (2/b) M^-1 L - I.
  const double b = g.bound;
  auto apply_s = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return (2.0 / b) * ((*g.L * v).cwiseQuotient(*g.m)) - v;
  };
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::VectorXd bk1 = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd bk2 = Eigen::VectorXd::Zero(x.size());
  for (int k = n; k >= 1; --k) {
    Eigen::VectorXd bk = 2.0 * apply_s(bk1) - bk2 + c[k] * x;
    bk2.swap(bk1);
    bk1.swap(bk);
  }
  return apply_s(bk1) - bk2 + c[0] * x;
}

}  // namespace

Form semigroup_apply(const SpectralData& spec, const DecOperators& ops, double t, const Form& f) {
  if (t < 0) throw std::invalid_argument("semigroup_apply: negative time");
  if (f.degree != spec.degree) throw std::invalid_argument("semigroup_apply: degree mismatch");
  const Eigen::VectorXd& m = ops.mass(spec.degree);
  Eigen::VectorXd proj = spec.eigenvectors.transpose() * m.cwiseProduct(f.coeffs);
  Eigen::VectorXd decayed = (-t * spec.eigenvalues.array()).exp() * proj.array();
  return {f.degree, spec.eigenvectors * decayed};
}

Form semigroup_apply_expmv(const DecOperators& ops, double t, const Form& f, double rel_tol) {
  if (t < 0) throw std::invalid_argument("semigroup_apply_expmv: negative time");
  if (t == 0) return f;
  Generator g = generator_for(ops, f.degree);
  std::vector<double> c = exp_cheb_coeffs(t * g.bound, rel_tol);
  return {f.degree, cheb_apply(g, c, f.coeffs)};
}

Eigen::VectorXd HeatContext::apply(int degree, double t, const Eigen::VectorXd& x) const {
  const SpectralData* spec = degree == 0 ? spec0 : spec1;
  if (spec && spec->full) return semigroup_apply(*spec, *ops, t, Form{degree, x}).coeffs;
  return semigroup_apply_expmv(*ops, t, Form{degree, x}).coeffs;
}

std::vector<Eigen::VectorXd> heat_grid(const DecOperators& ops, int degree, double dt, int steps,
                                       const Eigen::VectorXd& x, double rel_tol) {
  Generator g = generator_for(ops, degree);
  std::vector<double> c = exp_cheb_coeffs(dt * g.bound, rel_tol);
  std::vector<Eigen::VectorXd> out;
  out.reserve(steps + 1);
  out.push_back(x);
  for (int j = 0; j < steps; ++j) out.push_back(cheb_apply(g, c, out.back()));
  return out;
}

Eigen::VectorXd heat_weighted_sum(const DecOperators& ops, int degree, double dt,
                                  const std::vector<Eigen::VectorXd>& w,
                                  const std::vector<double>& c, double rel_tol) {
  if (w.size() != c.size() || w.empty()) throw std::invalid_argument("heat_weighted_sum: sizes");
  Generator g = generator_for(ops, degree);
  std::vector<double> cc = exp_cheb_coeffs(dt * g.bound, rel_tol);
  // Horner from the top node: acc <- P_dt acc + c_j w_j gives
  // sum_j c_j P_{j dt} w_j at j = 0.
  Eigen::VectorXd acc = c.back() * w.back();
  for (int j = static_cast<int>(w.size()) - 2; j >= 0; --j)
    acc = cheb_apply(g, cc, acc) + c[j] * w[j];
  return acc;
}

std::vector<double> simpson_weights(int nodes, double len) {
  if (nodes < 3 || nodes % 2 == 0) throw std::invalid_argument("simpson_weights: odd nodes >= 3");
  double dt = len / (nodes - 1);
  std::vector<double> w(nodes, 0.0);
  for (int j = 0; j + 2 < nodes; j += 2) {
    w[j] += dt / 3.0;
    w[j + 1] += 4.0 * dt / 3.0;
    w[j + 2] += dt / 3.0;
  }
  return w;
}

KernelMatrix kernel_matrix(const SpectralData& spec, const DecOperators& ops, double t) {
  if (t <= 0) throw std::invalid_argument("kernel_matrix: t must be positive");
  if (!spec.full) throw std::runtime_error("kernel requires the full spectrum");
  (void)ops;
  KernelMatrix k;
  k.degree = spec.degree;
  k.t = t;
  // modes with e^{-lambda t} below 1e-17 of the slowest mode are invisible
  // at the working tolerances; dropping them makes the rank-update cheap
  double cut = spec.eigenvalues[0] + 39.0 / t;
  int keep = spec.count();
  while (keep > 1 && spec.eigenvalues[keep - 1] > cut) --keep;
  Eigen::VectorXd half = (-0.5 * t * spec.eigenvalues.head(keep).array()).exp();
  Eigen::MatrixXd scaled = spec.eigenvectors.leftCols(keep) * half.asDiagonal();
  const int n = static_cast<int>(spec.eigenvectors.rows());
  k.density = Eigen::MatrixXd::Zero(n, n);
  k.density.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  k.density.triangularView<Eigen::StrictlyUpper>() =
      k.density.triangularView<Eigen::StrictlyLower>().transpose();
  return k;
}

Eigen::MatrixXd kernel_block_norm(const DecOperators& ops, const KernelMatrix& h) {
  if (h.degree != 1) throw std::invalid_argument("kernel_block_norm: degree-1 kernel required");
  const int V = ops.n_vertices();
  // B = R G R^T, 2x2 blocks; sigma_max per block.
  Eigen::MatrixXd GRt = h.density * ops.recon.transpose();  // E x 2V
  Eigen::MatrixXd B = ops.recon * GRt;                      // 2V x 2V
  Eigen::MatrixXd out(V, V);
  for (int x = 0; x < V; ++x)
    for (int y = 0; y < V; ++y) {
      double a = B(2 * x, 2 * y), b = B(2 * x, 2 * y + 1);
      double c = B(2 * x + 1, 2 * y), d = B(2 * x + 1, 2 * y + 1);
      // largest singular value of [[a,b],[c,d]], cancellation-free form
      double q = std::hypot(a + d, b - c);
      double r = std::hypot(a - d, b + c);
      out(x, y) = 0.5 * (q + r);
    }
  return out;
}

double heat_norm_2_to_inf(const DecOperators& ops, const KernelMatrix& h) {
  if (h.degree != 1) throw std::invalid_argument("heat_norm_2_to_inf: degree-1 kernel required");
  const int V = ops.n_vertices();
  Eigen::MatrixXd Q = ops.recon * h.density;  // 2V x E
  double worst = 0.0;
  for (int v = 0; v < V; ++v) {
    Eigen::Matrix2d W;
    Eigen::VectorXd r0 = Q.row(2 * v), r1 = Q.row(2 * v + 1);
    W(0, 0) = r0.dot(ops.m1.cwiseProduct(r0));
    W(0, 1) = r0.dot(ops.m1.cwiseProduct(r1));
    W(1, 0) = W(0, 1);
    W(1, 1) = r1.dot(ops.m1.cwiseProduct(r1));
    double tr = W(0, 0) + W(1, 1);
    double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * (W(0, 0) * W(1, 1) - W(0, 1) * W(1, 0))));
    worst = std::max(worst, 0.5 * (tr + disc));
  }
  return 0.5 * std::log(worst);
}

VerificationRecord commutation_checks(const HeatContext& ctx, double t, const Form& f,
                                      const Form& omega) {
  const DecOperators& ops = *ctx.ops;
  Form df = exterior_derivative(ops, f);
  Form lhs1{1, ctx.apply(1, t, df.coeffs)};
  Form rhs1 = exterior_derivative(ops, Form{0, ctx.apply(0, t, f.coeffs)});
  Eigen::VectorXd diff1 = lhs1.coeffs - rhs1.coeffs;
  // relative to the input scale: at large t both sides decay to nothing
  double scale1 = std::max({norm(ops, lhs1), norm(ops, rhs1), norm(ops, df), 1e-300});
  double rel1 = std::sqrt(diff1.dot(ops.m1.cwiseProduct(diff1))) / scale1;

  Form del = codifferential(ops, omega);
  Form lhs2 = codifferential(ops, Form{1, ctx.apply(1, t, omega.coeffs)});
  Form rhs2{0, ctx.apply(0, t, del.coeffs)};
  Eigen::VectorXd diff2 = lhs2.coeffs - rhs2.coeffs;
  double scale2 = std::max({norm(ops, lhs2), norm(ops, rhs2), norm(ops, omega), 1e-300});
  double rel2 = std::sqrt(diff2.dot(ops.m0.cwiseProduct(diff2))) / scale2;

  VerificationRecord r;
  r.name = "commutation";
  r.mesh_h = ops.mesh_h;
  r.param("t", t);
  r.param("d_side_residual", rel1);
  r.param("delta_side_residual", rel2);
  r.lhs = std::max(rel1, rel2);
  r.rhs = 1e-9;
  r.slack = r.rhs - r.lhs;
  set_verdict(r, 0.0);
  return r;
}

VerificationRecord apriori_checks(const SpectralData& spec1, const DecOperators& ops,
                                  const Form& omega, double t) {
  if (t <= 0) throw std::invalid_argument("apriori_checks: t must be positive");
  double n2 = inner(ops, omega, omega);
  Form ht = semigroup_apply(spec1, ops, t, omega);
  double energy = hodge_energy(ops, ht);
  Form lap = hodge_laplacian(ops, ht);
  double lap2 = inner(ops, lap, lap);

  double slack_energy = n2 / (4.0 * t) - energy;
  double slack_lap = n2 / (2.0 * t * t) - lap2;

  // energy nonincreasing along a dyadic grid up to t
  double prev = hodge_energy(ops, semigroup_apply(spec1, ops, t / 16.0, omega));
  double worst_mono = 0.0;
  for (int j = 2; j <= 16; ++j) {
    double cur = hodge_energy(ops, semigroup_apply(spec1, ops, j * t / 16.0, omega));
    worst_mono = std::max(worst_mono, cur - prev);
    prev = cur;
  }

  VerificationRecord r;
  r.name = "apriori";
  r.mesh_h = ops.mesh_h;
  r.param("t", t);
  r.param("slack_energy", slack_energy);
  r.param("slack_laplacian", slack_lap);
  r.param("monotonicity_violation", worst_mono);
  double scale = std::max(n2 / (4.0 * t), 1e-300);
  r.lhs = std::max({-slack_energy, -slack_lap, worst_mono});
  r.rhs = 0.0;
  r.slack = -r.lhs;
  set_verdict(r, 1e-10 * scale);
  return r;
}

VerificationRecord chapman_kolmogorov_check(const KernelMatrix& gt, const KernelMatrix& gs,
                                            const KernelMatrix& gts, const DecOperators& ops) {
  const Eigen::VectorXd& m = ops.mass(gt.degree);
  Eigen::MatrixXd composed = gt.density * m.asDiagonal() * gs.density;
  double scale = gts.density.cwiseAbs().maxCoeff();
  double err = (composed - gts.density).cwiseAbs().maxCoeff() / std::max(scale, 1e-300);

  VerificationRecord r;
  r.name = "chapman_kolmogorov";
  r.mesh_h = ops.mesh_h;
  r.param("t", gt.t);
  r.param("s", gs.t);
  r.param("degree", gt.degree);
  r.lhs = err;
  r.rhs = 1e-10;
  r.slack = r.rhs - r.lhs;
  set_verdict(r, 0.0);
  return r;
}

VerificationRecord chapman_kolmogorov_check(const SpectralData& spec, const DecOperators& ops,
                                            double t, double s) {
  KernelMatrix gt = kernel_matrix(spec, ops, t);
  KernelMatrix gs = kernel_matrix(spec, ops, s);
  KernelMatrix gts = kernel_matrix(spec, ops, t + s);
  return chapman_kolmogorov_check(gt, gs, gts, ops);
}

TraceValue heat_trace_pencil(const SparseMat& L, const Eigen::VectorXd& m, double t,
                             double tail_tol) {
  const int n = static_cast<int>(m.size());
  // choose the cut so the tail n * e^{-cut t} stays below tail_tol
  double cut = (std::log(static_cast<double>(n)) + std::log(1.0 / tail_tol)) / t;
  bool complete = false;
  Eigen::VectorXd evs = detail::pencil_eigenvalues_below(L, m, cut, &complete);
  double sum = (-t * evs.array()).exp().sum();
  TraceValue out;
  out.lower = sum;
  out.upper = sum + (complete ? (n - evs.size()) * std::exp(-cut * t) : 0.0);
  if (!complete) out.upper = sum + (n - evs.size()) * 1.0;  // no bound established
  return out;
}

VerificationRecord trace_inequality_check(const DecOperators& ops, const TraceCheckInput& in,
                                          double K, int n_dim, double t, bool hard) {
  if (!in.spec0) throw std::invalid_argument("trace check needs the 0-form spectrum");
  double factor = n_dim * std::exp(-K * t);

  // tr P_t from the full 0-form spectrum
  TraceValue trP;
  if (in.spec0->full) {
    double s = (-t * in.spec0->eigenvalues.array()).exp().sum();
    trP = {s, s};
  } else {
    trP = heat_trace_pencil(ops.stiffness0, ops.m0, t);
  }

  // tr H_t: direct when the full 1-form spectrum is present, else the exact
  // splitting b1 + positive 0-form trace + positive coexact trace.
  TraceValue trH;
  if (in.spec1 && in.spec1->full) {
    double s = (-t * in.spec1->eigenvalues.array()).exp().sum();
    trH = {s, s};
  } else {
    int b1 = 2 - ops.surface->euler_characteristic();
    double s0;
    TraceValue tv0;
    if (in.spec0->full) {
      s0 = (-t * in.spec0->eigenvalues.array()).exp().sum() - 1.0;  // drop the constant mode
      tv0 = {s0, s0};
    } else {
      tv0 = heat_trace_pencil(ops.stiffness0, ops.m0, t);
      tv0.lower -= 1.0;
      tv0.upper -= 1.0;
    }
    TraceValue tv2;
    if (in.coexact) {
      double s2 = (-t * in.coexact->array()).exp().sum() - 1.0;  // drop the 2-form kernel
      tv2 = {s2, s2};
    } else {
      Eigen::VectorXd area = ops.m2.cwiseInverse();
      tv2 = heat_trace_pencil(ops.face_pencil, area, t);
      tv2.lower -= 1.0;
      tv2.upper -= 1.0;
    }
    trH.lower = b1 + tv0.lower + tv2.lower;
    trH.upper = b1 + tv0.upper + tv2.upper;
  }

  // worst-case slack: largest possible tr H against smallest possible tr P
  double slack = factor * trP.lower - trH.upper;

  VerificationRecord r;
  r.name = "trace_inequality";
  r.mesh_h = ops.mesh_h;
  r.param("t", t);
  r.param("K", K);
  r.param("dim", n_dim);
  r.param("tr_heat_upper", trH.upper);
  r.param("tr_functional", trP.lower);
  double tol = hard ? 1e-8 * std::max(1.0, trP.lower) : 0.3 * ops.mesh_h;
  r.param("tolerance", tol);
  r.lhs = trH.upper;
  r.rhs = factor * trP.lower;
  r.slack = slack;
  set_verdict(r, tol);
  return r;
}

void save_kernel(const KernelMatrix& k, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write kernel file: " + path);
  std::uint32_t degree = static_cast<std::uint32_t>(k.degree);
  float t = static_cast<float>(k.t);
  out.write(reinterpret_cast<const char*>(&degree), 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  // row-major doubles
  for (Eigen::Index i = 0; i < k.density.rows(); ++i)
    out.write(reinterpret_cast<const char*>(k.density.row(i).eval().data()),
              sizeof(double) * k.density.cols());
}

KernelMatrix load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot read kernel file: " + path);
  std::streamsize bytes = in.tellg();
  if (bytes < 8 || (bytes - 8) % 8 != 0) throw std::runtime_error("malformed kernel file");
  std::streamsize count = (bytes - 8) / 8;
  auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(count))));
  if (n * n != count) throw std::runtime_error("kernel file is not a square matrix");
  in.seekg(0);
  std::uint32_t degree = 0;
  float t = 0;
  in.read(reinterpret_cast<char*>(&degree), 4);
  in.read(reinterpret_cast<char*>(&t), 4);
  KernelMatrix k;
  k.degree = static_cast<int>(degree);
  k.t = t;
  k.density.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd row(n);
    in.read(reinterpret_cast<char*>(row.data()), sizeof(double) * n);
    k.density.row(i) = row.transpose();
  }
  if (!in) throw std::runtime_error("truncated kernel file");
  return k;
}

GaussianFit gaussian_bound_fit(const DecOperators& ops, const SimplicialSurface& s,
                               const Eigen::MatrixXd& distances,
                               const std::vector<KernelMatrix>& kernels, double eps, double K,
                               const std::vector<const Eigen::MatrixXd*>& block_norms) {
  GaussianFit fit;
  const int V = ops.n_vertices();
  const double C2 = K >= 0 ? 0.0 : 1.0;
  for (std::size_t ki = 0; ki < kernels.size(); ++ki) {
    const KernelMatrix& kn = kernels[ki];
    double t = kn.t;
    double rt = std::sqrt(t);
    // ball volumes
    Eigen::VectorXd ball(V);
    for (int x = 0; x < V; ++x) {
      double vol = 0.0;
      int members = 0;
      for (int y = 0; y < V; ++y)
        if (distances(x, y) <= rt) {
          vol += ops.m0[y];
          ++members;
        }
      if (members <= 1) {
        ball[x] = -1.0;  // ball degenerate at this resolution
      } else {
        ball[x] = vol;
      }
    }
    if ((ball.array() < 0).any()) {
      fit.times.push_back(t);
      fit.c1.push_back(0.0);
      fit.skipped.push_back(true);
      continue;
    }
    const Eigen::MatrixXd* values = &kn.density;
    double shift = 0.0;  // degree-1 bound carries an extra e^{-Kt}
    if (kn.degree == 1) {
      if (ki >= block_norms.size() || block_norms[ki] == nullptr)
        throw std::invalid_argument("gaussian_bound_fit: degree-1 kernel needs block norms");
      values = block_norms[ki];
      shift = K * t;
    }
    double c1 = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < V; ++x)
      for (int y = 0; y < V; ++y) {
        double p = (*values)(x, y);
        if (p <= 1e-300) continue;
        double d = distances(x, y);
        double val = std::log(p) + shift + 0.5 * std::log(ball[x]) + 0.5 * std::log(ball[y]) +
                     d * d / ((4.0 + eps) * t);
        c1 = std::max(c1, val / (1.0 + C2 * t));
      }
    fit.times.push_back(t);
    fit.c1.push_back(c1);
    fit.skipped.push_back(false);
  }
  (void)s;
  return fit;
}

}  // namespace hodgelab
