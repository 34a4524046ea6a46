#pragma once

#include <map>
#include <string>
#include <vector>

#include "hodgelab/heat.hpp"
#include "hodgelab/report.hpp"

namespace hodgelab {

/// Grids, corpus sizes and tolerance coefficients for the check suites.
/// Every tolerance is tol(h) = coeff * h with the coefficient fixed here and
/// echoed into each record.
struct SuiteConfig {
  std::vector<double> t_grid{0.1, 0.5, 1.0};
  std::vector<double> p_grid{1.5, 3.0, 4.0};
  std::vector<double> bl_t_grid{0.2};
  int n_eigenfunction_forms = 20;
  int n_eigenform_forms = 20;
  int n_random_forms = 20;
  double mollify_t = 0.05;
  int simpson_nodes = 33;
  std::uint64_t seed = 1;
  double beta = 0.5;   // log-Sobolev constant for K > 0 models ((N-1)/(K N))
  double p0 = 2.0;
  std::map<std::string, double> tol_coeff = {
      {"hsu", 0.5},         {"be2", 1.0},         {"bl_strong", 1.0},
      {"bl_integral", 1.0}, {"bl_nonintegral", 1.0}, {"kato", 1.0},
      {"weak_bochner", 1.0}, {"lsi2", 0.5},       {"flsi", 0.5},
      {"dimensional", 0.5},  {"trace", 0.3},      {"gap_chain", 1.0},
      {"pointwise_hsu", 1.5}};

  double coeff(const std::string& name) const {
    auto it = tol_coeff.find(name);
    return it == tol_coeff.end() ? 1.0 : it->second;
  }

  static SuiteConfig from_file(const std::string& path);
  std::string echo() const;
};

/// One test form with cached fields the checks reuse: exact pencil
/// eigenvalue when known (enables the analytic H_t shortcut), pointwise
/// norm field, codifferential, sup norm.
struct TestForm {
  Form form;  // degree 1, M1-normalized
  double lambda = -1.0;
  std::string label;
  Eigen::VectorXd norm_field;
  Eigen::VectorXd delta;
  double sup_norm = 0.0;
};

/// Corpus: differentials of low eigenfunctions, low eigenforms, harmonic
/// forms, and heat-mollified seeded random edge vectors.
std::vector<TestForm> build_corpus(const HeatContext& ctx, const SpectralData& spec0_low,
                                   const SpectralData& spec1_low, const SuiteConfig& cfg);

TestForm make_test_form(const DecOperators& ops, const Form& omega, double lambda,
                        const std::string& label);

/// H_t on a test form: analytic e^{-lambda t} scaling for eigenforms, the
/// context route otherwise.
Form apply_heat(const HeatContext& ctx, double t, const TestForm& tf);

// --- pointwise semigroup dominations -------------------------------------

VerificationRecord hsu_check(const HeatContext& ctx, const TestForm& tf, double t, double K,
                             const SuiteConfig& cfg, bool hard = true);

VerificationRecord be2_check(const HeatContext& ctx, const TestForm& tf, double t, double K,
                             const SuiteConfig& cfg, bool hard = true);

enum class BakryLedouxVariant { strong, integral_weak, non_integral };

VerificationRecord bakry_ledoux_check(const HeatContext& ctx, const TestForm& tf, double t,
                                      double K, double N, BakryLedouxVariant variant,
                                      const SuiteConfig& cfg, bool hard = true);

/// All three variants plus the pointwise ordering of their left-hand sides
/// (strong >= integral_weak >= non_integral).
std::vector<VerificationRecord> bakry_ledoux_all(const HeatContext& ctx, const TestForm& tf,
                                                 double t, double K, double N,
                                                 const SuiteConfig& cfg, bool hard = true);

// --- quadratic-form and log-Sobolev inequalities --------------------------

VerificationRecord kato_quadratic_check(const DecOperators& ops, const TestForm& tf, double K,
                                        const SuiteConfig& cfg, bool hard = true);

VerificationRecord weak_one_bochner_check(const DecOperators& ops, const TestForm& tf,
                                          const Form& phi, double K, const SuiteConfig& cfg,
                                          bool hard = true);

VerificationRecord lsi2_check(const DecOperators& ops, const TestForm& tf, double beta,
                              double chi, double K, const SuiteConfig& cfg, bool hard = true);

VerificationRecord flsi_check(const DecOperators& ops, const TestForm& tf, double p, double eps,
                              double gamma, const SuiteConfig& cfg, bool hard = true);

VerificationRecord dimensional_energy_check(const DecOperators& ops, const TestForm& tf, double K,
                                            double N, const SuiteConfig& cfg, bool hard = true);

// --- contractivity ---------------------------------------------------------

struct ContractivitySchedule {
  std::vector<double> times;
  std::vector<double> p_closed, a_closed;  // p(t) = 1 + (p0-1) e^{2t/beta}, A = -K t
  std::vector<double> p_ode, a_ode;        // independent RK4 integration
  double max_rel_gap = 0.0;
  bool T_infinite = false;
  double C_value = 0.0;  // +-inf encoded as +-HUGE_VAL
  VerificationRecord record;
};

ContractivitySchedule contractivity_schedule(double p0, double beta, double K, double horizon);

VerificationRecord hypercontractivity_check(const HeatContext& ctx, const TestForm& tf, double t,
                                            double p0, double beta, double K);

/// Eigenform L^q bound |w|_q <= (q-1)^{(lambda-K) beta / 2} |w|_2.
VerificationRecord eigenform_lq_check(const DecOperators& ops, const TestForm& tf, double q,
                                      double beta, double K);

/// Measures c(t) = log |H_t|_{2->inf} from the degree-1 kernel, then runs
/// the induced form 2-log-Sobolev inequality on the sample forms.
VerificationRecord ultracontractivity_converse_check(const HeatContext& ctx,
                                                     const std::vector<TestForm>& forms,
                                                     const std::vector<double>& t_grid, double K,
                                                     const SuiteConfig& cfg);

// --- volume criterion -------------------------------------------------------

VerificationRecord subexponential_check(const DecOperators& ops,
                                        const Eigen::MatrixXd& distances, double eps);

// --- suites and studies ------------------------------------------------------

struct SuiteResult {
  std::vector<VerificationRecord> records;
  bool strictly_delaunay = true;
};

/// suite in {identities, inequalities, spectral, kernel, all}. On meshes
/// with nonpositive cotangent weights every verdict is downgraded to
/// diagnostic. Records come back sorted by (name, params).
SuiteResult run_suite(const SimplicialSurface& s, const std::string& suite,
                      const SuiteConfig& cfg);

struct StudyResult {
  std::vector<double> mesh_h;
  std::vector<double> violation;
  VerificationRecord record;
};

/// Refinement study of one check over icosphere levels: per-level max
/// violation, monotone up to one <= 10% inversion, final level below the
/// check tolerance.
StudyResult convergence_study(const std::string& check, const std::vector<int>& levels,
                              const SuiteConfig& cfg, double final_tolerance);

}  // namespace hodgelab
