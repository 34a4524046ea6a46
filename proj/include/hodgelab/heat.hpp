#pragma once

#include <optional>
#include <vector>

#include "hodgelab/dec.hpp"
#include "hodgelab/report.hpp"
#include "hodgelab/spectral.hpp"

namespace hodgelab {

/// Heat kernel stored as a density against the measure: the semigroup acts
/// as coeffs -> density * M_k * coeffs. Symmetric; degree-0 rows integrate
/// to one against M0.
struct KernelMatrix {
  int degree = 0;
  double t = 0.0;
  Eigen::MatrixXd density;
};

/// Spectral path: sum_i e^{-lambda_i t} <input, phi_i>_M phi_i.
/// Requires the full spectrum unless the input lies in the computed span.
Form semigroup_apply(const SpectralData& spec, const DecOperators& ops, double t, const Form& f);

/// Routes semigroup applications: spectral when a full spectrum is attached,
/// matrix-exponential otherwise. Checks built on it work at any mesh size.
struct HeatContext {
  const DecOperators* ops = nullptr;
  const SpectralData* spec0 = nullptr;
  const SpectralData* spec1 = nullptr;

  Eigen::VectorXd apply(int degree, double t, const Eigen::VectorXd& x) const;
};

/// Independent matrix-exponential path: Chebyshev polynomial of the sparse
/// generator on [0, lambda_max] with coefficient-tail error control. Never
/// touches the eigendecomposition. Throws when t * |L| is extreme.
Form semigroup_apply_expmv(const DecOperators& ops, double t, const Form& f,
                           double rel_tol = 1e-11);

/// Vertex-function / edge-form semigroup values on the uniform time grid
/// j * dt, j = 0..steps (degree from x). Stepping, so the whole grid costs
/// little more than one application.
std::vector<Eigen::VectorXd> heat_grid(const DecOperators& ops, int degree, double dt, int steps,
                                       const Eigen::VectorXd& x, double rel_tol = 1e-11);

/// sum_j c_j P_{j*dt} w_j accumulated backwards (Horner), one short
/// heat step per node.
Eigen::VectorXd heat_weighted_sum(const DecOperators& ops, int degree, double dt,
                                  const std::vector<Eigen::VectorXd>& w,
                                  const std::vector<double>& c, double rel_tol = 1e-11);

/// Composite Simpson weights on k nodes over [0, len] (k odd).
std::vector<double> simpson_weights(int nodes, double len);

/// G = Phi diag(e^{-lambda t}) Phi^T. Requires the full spectrum.
KernelMatrix kernel_matrix(const SpectralData& spec, const DecOperators& ops, double t);

/// Pointwise operator norm of the degree-1 kernel: per vertex pair the
/// largest singular value of the 2x2 tangent-frame block R_x G R_y^T.
Eigen::MatrixXd kernel_block_norm(const DecOperators& ops, const KernelMatrix& h);

/// log |H_t|_{2->inf} measured as the worst M1-dual norm of kernel rows
/// pushed through the tangent-frame reconstruction.
double heat_norm_2_to_inf(const DecOperators& ops, const KernelMatrix& h);

/// |H_t d f - d P_t f| and |delta H_t w - P_t delta w|, both relative.
VerificationRecord commutation_checks(const HeatContext& ctx, double t, const Form& f,
                                      const Form& omega);

/// Energy dissipation and the a priori bounds E(H_t w) <= |w|^2/4t,
/// |Hodge H_t w|^2 <= |w|^2/2t^2, plus monotonicity on a time grid.
VerificationRecord apriori_checks(const SpectralData& spec1, const DecOperators& ops,
                                  const Form& omega, double t);

VerificationRecord chapman_kolmogorov_check(const SpectralData& spec, const DecOperators& ops,
                                            double t, double s);
VerificationRecord chapman_kolmogorov_check(const KernelMatrix& gt, const KernelMatrix& gs,
                                            const KernelMatrix& gts, const DecOperators& ops);

/// tr H_t <= dim * e^{-Kt} * tr P_t. Traces assembled from the 0-form and
/// coexact spectra plus b1 zeros (the exact discrete splitting of the
/// 1-form spectrum); beyond the dense cap a rigorous tail bracket from a
/// partial solve is used and recorded.
struct TraceCheckInput {
  const SpectralData* spec0 = nullptr;              // full 0-form spectrum if available
  const SpectralData* spec1 = nullptr;              // full 1-form spectrum if available
  const Eigen::VectorXd* coexact = nullptr;         // coexact eigenvalues if available
};
VerificationRecord trace_inequality_check(const DecOperators& ops, const TraceCheckInput& in,
                                          double K, int n_dim, double t, bool hard);

/// Minimal C1 with p_t(x,y) <= m[B_rt(x)]^{-1/2} m[B_rt(y)]^{-1/2}
/// exp(C1 (1 + C2 t) - d^2(x,y)/((4+eps) t)); C2 = 0 on K >= 0 models.
/// For degree-1 kernels the block norm replaces p_t and e^{-Kt} moves into
/// the bound. Returns the fitted C1 per time; skips times whose balls are
/// single points.
struct GaussianFit {
  std::vector<double> times;
  std::vector<double> c1;
  std::vector<bool> skipped;
};
GaussianFit gaussian_bound_fit(const DecOperators& ops, const SimplicialSurface& s,
                               const Eigen::MatrixXd& distances,
                               const std::vector<KernelMatrix>& kernels, double eps, double K,
                               const std::vector<const Eigen::MatrixXd*>& block_norms = {});

/// Heat trace of one pencil with a rigorous [0, tail] bracket when only a
/// partial spectrum is available.
struct TraceValue {
  double lower = 0.0;
  double upper = 0.0;
};
TraceValue heat_trace_pencil(const SparseMat& L, const Eigen::VectorXd& m, double t,
                             double tail_tol = 1e-9);

/// Binary kernel file: 8-byte header (uint32 degree, float32 t), then the
/// square density matrix as row-major float64.
void save_kernel(const KernelMatrix& k, const std::string& path);
KernelMatrix load_kernel(const std::string& path);

}  // namespace hodgelab
