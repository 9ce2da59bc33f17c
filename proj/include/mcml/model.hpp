#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcml/errors.hpp"
#include "mcml/rng.hpp"

namespace mcml {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Finite enumeration of the response space, addressed by index so that large
// lattices (up to 2^20 states) can be walked without materializing them.
struct Support {
  std::size_t size = 0;
  std::function<VectorXd(std::size_t)> state;
};

// Exponential-family model f(y|x, theta) = exp(theta' S(y, x)) with norming
// constant C(x, theta). S is the sufficient statistic, of length param_dim.
struct Model {
  int param_dim = 0;
  std::function<VectorXd(const VectorXd& y, const VectorXd& x)> suff_stat_fn;
  std::optional<Support> support;
  std::string label;
};

// n observations (Y_i, X_i). Covariate vectors all share one length, possibly 0.
struct Dataset {
  std::vector<VectorXd> responses;
  std::vector<VectorXd> covariates;

  int n() const { return static_cast<int>(responses.size()); }
};

// C(x, theta) together with its first two derivatives in theta.
struct NormingTriple {
  double value = 0.0;      // C > 0
  double log_value = 0.0;  // log C, finite even when C itself would overflow
  VectorXd grad;           // dC/dtheta
  MatrixXd hess;           // d2C/dtheta2, symmetric
};

// log C(x, theta) and its derivatives; the numerically safe form consumed by
// the likelihood and the covariance plug-ins (the max-shift cancels exactly).
struct LogNormingEval {
  double log_value = 0.0;
  VectorXd grad;  // dC/C
  MatrixXd hess;  // d2C/C - (dC/C)(dC/C)'
};

namespace detail {

// Shared evaluation core: C-like sums of the form
//   value(theta) = sum_k exp(stats_k . theta + offset_k)
// (offset = 0 for exact enumeration, -log h_k - log m for importance samples),
// with gradient and Hessian accumulated in one max-shifted pass over k.
class ExpFamilyAccumulator {
 public:
  ExpFamilyAccumulator() = default;
  ExpFamilyAccumulator(MatrixXd stats, VectorXd offset);

  NormingTriple eval(const VectorXd& theta) const;
  LogNormingEval eval_log(const VectorXd& theta) const;

  const MatrixXd& stats() const { return stats_; }
  int param_dim() const { return static_cast<int>(stats_.cols()); }
  Eigen::Index terms() const { return stats_.rows(); }

 private:
  MatrixXd stats_;   // K x p
  VectorXd offset_;  // K
};

// Accumulator over the full enumerated support (offset 0); the exact oracle.
ExpFamilyAccumulator support_accumulator(const Model& model, const VectorXd& x);

// Distinct covariate values with multiplicities, lexicographic order.
std::vector<std::pair<VectorXd, double>> group_covariates(const Dataset& data);

}  // namespace detail

// --- operations ---------------------------------------------------------

// S(y, x); checks the domain and the declared length.
VectorXd suff_stat(const Model& model, const VectorXd& y, const VectorXd& x);

// log f(y|x, theta) = theta' S(y, x).
double log_unnorm_density(const Model& model, const VectorXd& y, const VectorXd& x,
                          const VectorXd& theta);

// Brute-force C(x, theta) over the enumerated support, with derivatives.
NormingTriple exact_norming(const Model& model, const VectorXd& x, const VectorXd& theta);

// log-domain variant of exact_norming.
LogNormingEval exact_log_norming(const Model& model, const VectorXd& x, const VectorXd& theta);

// Inverse-CDF draw from p(.|x, theta) over the enumerated support.
VectorXd sample_response(const Model& model, const VectorXd& x, const VectorXd& theta,
                         RngStream& rng);

// Closed-form toy estimate logit(ybar_n) + psi - logit(ybar_m).
double toy_closed_form(double ybar_n, double ybar_m, double psi);

// Throws unless the dataset is nonempty with consistent covariate lengths.
void validate_dataset(const Dataset& data);

// --- builtin models ------------------------------------------------------

// Bernoulli exponential family f(y|theta) = exp(theta y) on {0, 1}; ignores x.
Model toy_model();

// Binary autologistic on a rows x cols lattice, 4-neighborhood, no wraparound:
// S(y, x) = (sum_i y_i x_i, sum_{i~j} y_i y_j). The covariate may be empty
// (all-ones main effect), a scalar (broadcast to every site), or per-site.
// The support is enumerated only when the lattice has at most 20 sites.
Model autologistic_model(int rows, int cols);

// Finite-support family given by an explicit state list and per-state
// sufficient statistics; ignores x.
Model generic_model(int param_dim, std::vector<VectorXd> states, std::vector<VectorXd> suff_stats,
                    std::string label = "generic");

}  // namespace mcml
