#include "mcml/likelihood.hpp"

#include <cmath>
#include <utility>

namespace mcml {

Objective Objective::mc(const Dataset& data, const ImportanceSample& sample, const Model& model) {
  validate_dataset(data);
  Objective obj;
  obj.n_ = data.n();
  obj.param_dim_ = model.param_dim;
  obj.data_stat_sum_ = VectorXd::Zero(model.param_dim);
  for (int i = 0; i < data.n(); ++i)
    obj.data_stat_sum_ += suff_stat(model, data.responses[i], data.covariates[i]);
  for (auto& [x, count] : detail::group_covariates(data))
    obj.groups_.emplace_back(McNormingCache(sample, model, x).accumulator(), count);
  return obj;
}

Objective Objective::exact(const Dataset& data, const Model& model) {
  validate_dataset(data);
  Objective obj;
  obj.n_ = data.n();
  obj.param_dim_ = model.param_dim;
  obj.data_stat_sum_ = VectorXd::Zero(model.param_dim);
  for (int i = 0; i < data.n(); ++i)
    obj.data_stat_sum_ += suff_stat(model, data.responses[i], data.covariates[i]);
  for (auto& [x, count] : detail::group_covariates(data))
    obj.groups_.emplace_back(detail::support_accumulator(model, x), count);
  return obj;
}

ObjectiveEval Objective::eval(const VectorXd& theta) const {
  if (theta.size() != param_dim_) throw DimensionError("theta has wrong length");
  if (!theta.allFinite()) throw DomainError("theta has non-finite entries");

  ObjectiveEval out;
  out.value = theta.dot(data_stat_sum_);
  out.score = data_stat_sum_;
  out.hess = MatrixXd::Zero(param_dim_, param_dim_);
  for (const auto& [acc, count] : groups_) {
    const LogNormingEval norming = acc.eval_log(theta);
    out.value -= count * norming.log_value;
    out.score -= count * norming.grad;
    out.hess -= count * norming.hess;
  }
  return out;
}

ObjectiveEval Objective::eval_scaled(const VectorXd& theta) const {
  ObjectiveEval out = eval(theta);
  const double inv_n = 1.0 / n_;
  out.value *= inv_n;
  out.score *= inv_n;
  out.hess *= inv_n;
  return out;
}

ObjectiveEval mc_loglik(const Dataset& data, const ImportanceSample& sample, const Model& model,
                        const VectorXd& theta) {
  return Objective::mc(data, sample, model).eval(theta);
}

ObjectiveEval exact_loglik(const Dataset& data, const Model& model, const VectorXd& theta) {
  return Objective::exact(data, model).eval(theta);
}

VectorXd product_log_weights(const Dataset& data, const ProductSample& joint, const Model& model,
                           const VectorXd& theta) {
  validate_dataset(data);
  if (theta.size() != model.param_dim) throw DimensionError("theta has wrong length");
  if (joint.n_obs() != data.n())
    throw DimensionError("joint sample must hold one instrumental sample per observation");
  const int m = joint.m();
  if (m < 1) throw InsufficientDataError("joint sample is empty");

  VectorXd log_weights = VectorXd::Zero(m);
  for (int i = 0; i < data.n(); ++i) {
    const ImportanceSample& si = joint.per_obs[static_cast<std::size_t>(i)];
    if (si.m() != m) throw DimensionError("per-observation samples differ in size");
    MatrixXd stats(m, model.param_dim);
    for (int k = 0; k < m; ++k)
      stats.row(k) = suff_stat(model, si.draws[static_cast<std::size_t>(k)], data.covariates[i]);
    log_weights += stats * theta - si.log_h;
  }
  return log_weights;
}

double product_loglik(const Dataset& data, const ProductSample& joint, const Model& model,
                    const VectorXd& theta) {
  const VectorXd log_weights = product_log_weights(data, joint, model, theta);
  const double shift = log_weights.maxCoeff();
  const double sum = (log_weights.array() - shift).exp().sum();
  if (!std::isfinite(sum) || !(sum > 0.0))
    throw NumericalUnderflowError("joint importance weights vanished after max-shift");
  const double log_mean_weight = shift + std::log(sum) - std::log(double(joint.m()));

  double data_term = 0.0;
  for (int i = 0; i < data.n(); ++i)
    data_term += theta.dot(suff_stat(model, data.responses[i], data.covariates[i]));
  return data_term - log_mean_weight;
}

}  // namespace mcml
