#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcml/importance.hpp"
#include "mcml/model.hpp"

namespace mcml {

// Plug-in ingredients of the sandwich covariance D^-1 (V/n + W/m) D^-1:
// V from data randomness, W from Monte Carlo randomness, D the curvature.
struct SandwichParts {
  MatrixXd V_hat;  // score variance, PSD
  MatrixXd D_hat;  // expected log-density Hessian, negative definite at the target
  MatrixXd W_hat;  // MC-noise variance, PSD
  int n = 0;
  int m = 0;
};

// Norming evaluation x -> (log C, dlog C, d2log C) at a fixed theta. The two
// factories memoize per distinct covariate, so repeated plug-in estimators
// share one pass per x.
using NormingFn = std::function<LogNormingEval(const VectorXd& x)>;

NormingFn exact_norming_fn(const Model& model, VectorXd theta);
NormingFn mc_norming_fn(const ImportanceSample& sample, const Model& model, VectorXd theta);

// Influence vector of the MC norming error,
//   phi(y|x) = [f(y|x,theta)/h(y)] [S(y,x) - dC/C] / C(x,theta),
// mean zero under Y ~ h for each fixed x.
VectorXd phi(const Model& model, const VectorXd& y, const VectorXd& x, const VectorXd& theta,
             const LogNormingEval& norming, double log_h);

// Empirical covariance (1/n normalization) of the per-observation scores
// S(Y_i, X_i) - dC(X_i)/C(X_i).
MatrixXd estimate_V(const Dataset& data, const Model& model, const NormingFn& norming);

// (1/n) sum_i [-d2C/C + (dC)(dC)'/C^2](X_i); response-free for this family.
MatrixXd estimate_D(const Dataset& data, const Model& model, const NormingFn& norming);

// Empirical covariance over draws of phibar_k = (1/n) sum_i phi(Y^k|X_i).
MatrixXd estimate_W(const Dataset& data, const ImportanceSample& sample, const Model& model,
                    const VectorXd& theta_hat, const NormingFn& norming);

// Empirical second moment (1/(n m)) sum_{i,k} |phi(Y^k|X_i)|^2, the moment
// condition behind W; a diagnostic value, not part of the sandwich.
double estimate_W_tilde(const Dataset& data, const ImportanceSample& sample, const Model& model,
                        const VectorXd& theta_hat, const NormingFn& norming);

// Covariate-free W via the direct route
//   VAR_h[(f/h)(S - dC/C)] / C^2,
// algebraically equal to estimate_W with a constant covariate.
MatrixXd estimate_W_nocov(const ImportanceSample& sample, const Model& model,
                          const VectorXd& theta_hat, const VectorXd& x_ref,
                          const NormingFn& norming);

// All three plug-ins at theta_hat with MC norming (the production path).
SandwichParts estimate_sandwich_parts(const Dataset& data, const ImportanceSample& sample,
                                      const Model& model, const VectorXd& theta_hat);

// Finite-sample D_hat may fail the sign condition that holds at the target;
// reported as warnings rather than errors.
std::vector<std::string> sandwich_diagnostics(const SandwichParts& parts);

// D^-1 (V/n + W/m) D^-1, symmetrized.
MatrixXd sandwich_cov(const SandwichParts& parts);

// (V/n + W/m)^{-1/2} D (theta_hat - theta_ref); approximately standard normal
// when theta_ref is the target.
VectorXd standardize(const VectorXd& theta_hat, const VectorXd& theta_ref,
                     const SandwichParts& parts);

struct ConfidenceRegion {
  VectorXd lower;
  VectorXd upper;
  double ellipsoid_radius = 0.0;  // sqrt of the chi-square quantile, p dof
  double level = 0.0;
};

// Per-coordinate Wald intervals and the joint ellipsoid radius.
ConfidenceRegion confidence_region(const VectorXd& theta_hat, const MatrixXd& cov, double level);

}  // namespace mcml
