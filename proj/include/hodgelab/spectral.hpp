#pragma once

#include <cstdint>
#include <optional>

#include "hodgelab/dec.hpp"
#include "hodgelab/report.hpp"

namespace hodgelab {

/// Eigenpairs of one generalized pencil (L, M): ascending nonnegative
/// eigenvalues, columns M-orthonormal. `full` marks whether every mode of
/// the pencil is present (kernels and traces require that).
struct SpectralData {
  int degree = 0;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  double residual_bound = 0.0;  // max_i |L x_i - lambda_i M x_i|_{M^-1}
  bool full = false;

  int count() const { return static_cast<int>(eigenvalues.size()); }
};

inline constexpr int kDenseDofCap = 5000;

/// Dense symmetric-pencil solve; the default oracle path. count < 0 means
/// all modes. Throws if the problem exceeds kDenseDofCap degrees of freedom
/// or the mass matrix is not positive.
SpectralData eigensolve(const DecOperators& ops, int degree, int count = -1);

/// Shift-invert Lanczos for the lowest `count` eigenpairs; used beyond the
/// dense cap. Cross-validated against the dense path in the test suite.
/// Throws on convergence failure.
SpectralData eigensolve_partial(const DecOperators& ops, int degree, int count);

/// Convenience: dense when the pencil fits the cap, else partial.
SpectralData eigensolve_auto(const DecOperators& ops, int degree, int count);

/// Eigenvalues of the coexact pencil (d1 M1^-1 d1^T, diag area) on faces.
/// Together with the 0-form spectrum and b1 zeros they assemble the full
/// 1-form Hodge spectrum; validated against the direct dense solve.
Eigen::VectorXd coexact_eigenvalues(const DecOperators& ops);

/// Every positive 0-form eigenvalue must reappear in the 1-form spectrum
/// (relative mismatch <= tol when spec1 has enough modes), and the
/// transferred eigenform |df|^-1 df must be a near-exact eigenform of the
/// 1-form operator (max residual recorded as lhs).
VerificationRecord spectral_inclusion_check(const SpectralData& spec0,
                                            const std::optional<SpectralData>& spec1,
                                            const DecOperators& ops, double tol);

struct SpectralGapChain {
  double inf_schrodinger = 0.0;   // inf sigma(-Delta + K)
  double inf_hodge = 0.0;         // inf sigma of the 1-form operator
  double inf_hodge_positive = 0.0;
  double inf_laplace_positive = 0.0;
  VerificationRecord record;  // overall verdict, slacks in params
};

/// Chain inf(-Delta+K) <= inf Hodge <= inf Hodge\{0} <= inf(-Delta)\{0}.
/// First link asserted with tolerance c*h on model surfaces, last link
/// asserted at 1e-8 (exact discrete identity).
SpectralGapChain spectral_gap_chain(const SpectralData& spec0, const SpectralData& spec1,
                                    double K, double mesh_h, double first_link_coeff = 1.0);

/// Number of eigenvalues below tol (default 1e-6 * lambda_max); throws when
/// the cutoff lands inside an eigencluster instead of a spectral gap.
int harmonic_dimension(const SpectralData& spec1, double tol = -1.0);

/// C = 1/lambda_+; checks |omega - T omega|^2 <= 2 C E(omega) on seeded
/// samples (T = projection onto the harmonic subspace) and lambda >= 1/C.
VerificationRecord poincare_check(const SpectralData& spec1, const DecOperators& ops,
                                  int samples, std::uint64_t seed);

/// Least-squares fit of log |omega|_inf against log lambda over unit-L2
/// eigenforms with lambda >= 1/D^2; passes when the slope stays below
/// N/4 + 0.15. Throws with fewer than 10 usable eigenpairs.
VerificationRecord eigenform_growth_check(const SpectralData& spec1, const DecOperators& ops,
                                          const SimplicialSurface& s, double N);

/// Courant-Fischer sampling: random i-dimensional subspaces give
/// sup 2E >= lambda_i - 1e-8, and the span of the first i eigenvectors
/// achieves lambda_i to 1e-10.
VerificationRecord minmax_check(const SpectralData& spec1, const DecOperators& ops, int trials,
                                std::uint64_t seed);

/// |Hodge omega - lambda omega|_M1 / |omega|_M1; zero iff exact eigenpair.
double weyl_residual(const DecOperators& ops, const Form& omega, double lambda);

namespace detail {

/// Eigenvalues of an arbitrary symmetric pencil up to a threshold; dense
/// under the cap, Lanczos with doubling requests beyond it. `complete`
/// reports whether the threshold was actually cleared.
Eigen::VectorXd pencil_eigenvalues_below(const SparseMat& L, const Eigen::VectorXd& m, double cut,
                                         bool* complete);

SpectralData solve_pencil_dense(const SparseMat& L, const Eigen::VectorXd& m, int count,
                                bool vectors);

}  // namespace detail

}  // namespace hodgelab
