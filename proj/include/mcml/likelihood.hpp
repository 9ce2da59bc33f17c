#pragma once

#include <vector>

#include "mcml/importance.hpp"
#include "mcml/model.hpp"

namespace mcml {

// Value, score and Hessian of a log-likelihood surface at one theta.
struct ObjectiveEval {
  double value = 0.0;
  VectorXd score;
  MatrixXd hess;
};

// Log-likelihood assembled once from frozen data (and, for the MC form, a
// frozen instrumental sample); evaluable at any theta. Per-observation norming
// terms are grouped by distinct covariate value, which changes nothing
// mathematically because the shared sample makes log C_m a function of x only.
class Objective {
 public:
  // sum_i log f(Y_i|X_i, theta) - sum_i log C_m(X_i, theta)
  static Objective mc(const Dataset& data, const ImportanceSample& sample, const Model& model);
  // sum_i log f(Y_i|X_i, theta) - sum_i log C(X_i, theta), exact enumeration
  static Objective exact(const Dataset& data, const Model& model);

  ObjectiveEval eval(const VectorXd& theta) const;
  ObjectiveEval eval_scaled(const VectorXd& theta) const;  // divided by n

  int n() const { return n_; }
  int param_dim() const { return param_dim_; }

 private:
  Objective() = default;

  int n_ = 0;
  int param_dim_ = 0;
  VectorXd data_stat_sum_;  // sum_i S(Y_i, X_i)
  std::vector<std::pair<detail::ExpFamilyAccumulator, double>> groups_;  // per distinct x
};

// One-shot MC log-likelihood with score and Hessian.
ObjectiveEval mc_loglik(const Dataset& data, const ImportanceSample& sample, const Model& model,
                        const VectorXd& theta);

// One-shot exact log-likelihood; the oracle for every MC path.
ObjectiveEval exact_loglik(const Dataset& data, const Model& model, const VectorXd& theta);

// Per-observation instrumental samples Y_i^k ~ h_i, all of one size m.
struct ProductSample {
  std::vector<ImportanceSample> per_obs;

  int n_obs() const { return static_cast<int>(per_obs.size()); }
  int m() const { return per_obs.empty() ? 0 : per_obs.front().m(); }
};

// Joint log-weights L_k = sum_i [theta' S(Y_i^k, X_i) - log h_i(Y_i^k)] of the
// product-form scheme; their variance grows linearly in n.
VectorXd product_log_weights(const Dataset& data, const ProductSample& joint, const Model& model,
                           const VectorXd& theta);

// Product-form approximation
//   sum_i log f(Y_i|X_i, theta) - log[(1/m) sum_k exp(L_k)],
// kept as a comparison baseline only; it has no optimizer integration.
double product_loglik(const Dataset& data, const ProductSample& joint, const Model& model,
                    const VectorXd& theta);

}  // namespace mcml
