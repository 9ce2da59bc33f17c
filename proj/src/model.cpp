#include "mcml/model.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <utility>

namespace mcml {

namespace {

void check_theta(const Model& model, const VectorXd& theta) {
  if (theta.size() != model.param_dim)
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", model expects " +
                         std::to_string(model.param_dim));
  if (!theta.allFinite()) throw DomainError("theta has non-finite entries");
}

bool is_binary(double v) { return v == 0.0 || v == 1.0; }

}  // namespace

namespace detail {

ExpFamilyAccumulator::ExpFamilyAccumulator(MatrixXd stats, VectorXd offset)
    : stats_(std::move(stats)), offset_(std::move(offset)) {
  if (stats_.rows() != offset_.size())
    throw DimensionError("accumulator stats/offset row mismatch");
}

NormingTriple ExpFamilyAccumulator::eval(const VectorXd& theta) const {
  VectorXd lw = stats_ * theta + offset_;
  const double shift = lw.maxCoeff();
  VectorXd w = (lw.array() - shift).exp();
  const double sw = w.sum();
  if (!std::isfinite(sw) || !(sw > 0.0))
    throw NumericalUnderflowError("all importance weights vanished after max-shift");

  NormingTriple out;
  out.log_value = shift + std::log(sw);
  const double scale = std::exp(shift);
  out.value = scale * sw;
  out.grad = scale * (stats_.transpose() * w);
  MatrixXd h = stats_.transpose() * w.asDiagonal() * stats_;
  out.hess = scale * 0.5 * (h + h.transpose());
  return out;
}

LogNormingEval ExpFamilyAccumulator::eval_log(const VectorXd& theta) const {
  VectorXd lw = stats_ * theta + offset_;
  const double shift = lw.maxCoeff();
  VectorXd w = (lw.array() - shift).exp();
  const double sw = w.sum();
  if (!std::isfinite(sw) || !(sw > 0.0))
    throw NumericalUnderflowError("all importance weights vanished after max-shift");

  LogNormingEval out;
  out.log_value = shift + std::log(sw);
  out.grad = (stats_.transpose() * w) / sw;
  MatrixXd second = (stats_.transpose() * w.asDiagonal() * stats_) / sw;
  MatrixXd h = second - out.grad * out.grad.transpose();
  out.hess = 0.5 * (h + h.transpose());
  return out;
}

ExpFamilyAccumulator support_accumulator(const Model& model, const VectorXd& x) {
  if (!model.support) throw NoOracleError("model '" + model.label + "' has no enumerable support");
  const auto& support = *model.support;
  MatrixXd stats(static_cast<Eigen::Index>(support.size), model.param_dim);
  for (std::size_t i = 0; i < support.size; ++i)
    stats.row(static_cast<Eigen::Index>(i)) = suff_stat(model, support.state(i), x);
  return ExpFamilyAccumulator(std::move(stats), VectorXd::Zero(support.size));
}

std::vector<std::pair<VectorXd, double>> group_covariates(const Dataset& data) {
  std::map<std::vector<double>, std::pair<VectorXd, double>> groups;
  for (const auto& x : data.covariates) {
    std::vector<double> key(x.begin(), x.end());
    auto [it, inserted] = groups.try_emplace(std::move(key), x, 0.0);
    it->second.second += 1.0;
  }
  std::vector<std::pair<VectorXd, double>> out;
  out.reserve(groups.size());
  for (auto& [key, entry] : groups) out.push_back(std::move(entry));
  return out;
}

}  // namespace detail

VectorXd suff_stat(const Model& model, const VectorXd& y, const VectorXd& x) {
  VectorXd s = model.suff_stat_fn(y, x);
  if (s.size() != model.param_dim)
    throw DimensionError("sufficient statistic has length " + std::to_string(s.size()) +
                         ", expected " + std::to_string(model.param_dim));
  return s;
}

double log_unnorm_density(const Model& model, const VectorXd& y, const VectorXd& x,
                          const VectorXd& theta) {
  check_theta(model, theta);
  return theta.dot(suff_stat(model, y, x));
}

NormingTriple exact_norming(const Model& model, const VectorXd& x, const VectorXd& theta) {
  check_theta(model, theta);
  return detail::support_accumulator(model, x).eval(theta);
}

LogNormingEval exact_log_norming(const Model& model, const VectorXd& x, const VectorXd& theta) {
  check_theta(model, theta);
  return detail::support_accumulator(model, x).eval_log(theta);
}

VectorXd sample_response(const Model& model, const VectorXd& x, const VectorXd& theta,
                         RngStream& rng) {
  check_theta(model, theta);
  if (!model.support) throw NoOracleError("model '" + model.label + "' has no enumerable support");
  const auto& support = *model.support;

  VectorXd exponents(static_cast<Eigen::Index>(support.size));
  for (std::size_t i = 0; i < support.size; ++i)
    exponents[static_cast<Eigen::Index>(i)] = theta.dot(suff_stat(model, support.state(i), x));
  const double shift = exponents.maxCoeff();
  VectorXd w = (exponents.array() - shift).exp();
  const double total = w.sum();

  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  std::size_t idx = support.size - 1;
  for (std::size_t i = 0; i < support.size; ++i) {
    cumulative += w[static_cast<Eigen::Index>(i)];
    if (target < cumulative) {
      idx = i;
      break;
    }
  }
  return support.state(idx);
}

double toy_closed_form(double ybar_n, double ybar_m, double psi) {
  if (!(ybar_n > 0.0 && ybar_n < 1.0) || !(ybar_m > 0.0 && ybar_m < 1.0))
    throw DegenerateDataError("response mean at the boundary, the estimate diverges");
  return std::log(ybar_n / (1.0 - ybar_n)) + psi - std::log(ybar_m / (1.0 - ybar_m));
}

void validate_dataset(const Dataset& data) {
  if (data.responses.size() != data.covariates.size())
    throw DimensionError("dataset has " + std::to_string(data.responses.size()) +
                         " responses but " + std::to_string(data.covariates.size()) +
                         " covariate rows");
  if (data.responses.empty()) throw InsufficientDataError("dataset is empty");
  const Eigen::Index l = data.covariates.front().size();
  for (const auto& x : data.covariates)
    if (x.size() != l) throw DimensionError("covariate rows have inconsistent lengths");
}

Model toy_model() {
  Model model;
  model.param_dim = 1;
  model.label = "toy";
  model.suff_stat_fn = [](const VectorXd& y, const VectorXd&) {
    if (y.size() != 1 || !is_binary(y[0]))
      throw DomainError("toy response must be a single 0/1 value");
    return y;
  };
  model.support = Support{2, [](std::size_t i) { return VectorXd::Constant(1, double(i)); }};
  return model;
}

Model autologistic_model(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ConfigError("autologistic lattice must be at least 1x1");
  const int sites = rows * cols;

  // 4-neighborhood, no wraparound: right and down edges only.
  auto edges = std::make_shared<std::vector<std::pair<int, int>>>();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int s = r * cols + c;
      if (c + 1 < cols) edges->emplace_back(s, s + 1);
      if (r + 1 < rows) edges->emplace_back(s, s + cols);
    }

  Model model;
  model.param_dim = 2;
  model.label = "autologistic_" + std::to_string(rows) + "x" + std::to_string(cols);
  model.suff_stat_fn = [sites, edges](const VectorXd& y, const VectorXd& x) {
    if (y.size() != sites) throw DomainError("autologistic response has wrong number of sites");
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (!is_binary(y[i])) throw DomainError("autologistic sites must be 0/1");
    double main_effect = 0.0;
    if (x.size() == 0) {
      main_effect = y.sum();
    } else if (x.size() == 1) {
      main_effect = y.sum() * x[0];
    } else if (x.size() == sites) {
      main_effect = y.dot(x);
    } else {
      throw DomainError("autologistic covariate must be empty, scalar, or per-site");
    }
    double interaction = 0.0;
    for (const auto& [a, b] : *edges) interaction += y[a] * y[b];
    VectorXd s(2);
    s << main_effect, interaction;
    return s;
  };

  if (sites <= 20) {
    model.support = Support{std::size_t(1) << sites, [sites](std::size_t idx) {
                              VectorXd y(sites);
                              for (int i = 0; i < sites; ++i) y[i] = double((idx >> i) & 1u);
                              return y;
                            }};
  }
  return model;
}

Model generic_model(int param_dim, std::vector<VectorXd> states, std::vector<VectorXd> suff_stats,
                    std::string label) {
  if (param_dim < 1) throw ConfigError("generic model needs param_dim >= 1");
  if (states.empty()) throw ConfigError("generic model needs a nonempty state list");
  if (states.size() != suff_stats.size())
    throw ConfigError("generic model state and suff_stat lists differ in length");
  for (const auto& s : suff_stats)
    if (s.size() != param_dim) throw ConfigError("generic model suff_stat length != param_dim");

  auto key_of = [](const VectorXd& y) { return std::vector<double>(y.begin(), y.end()); };
  auto lookup = std::make_shared<std::map<std::vector<double>, int>>();
  for (std::size_t i = 0; i < states.size(); ++i)
    if (!lookup->emplace(key_of(states[i]), static_cast<int>(i)).second)
      throw ConfigError("generic model state list has duplicates");

  auto shared_states = std::make_shared<std::vector<VectorXd>>(std::move(states));
  auto shared_stats = std::make_shared<std::vector<VectorXd>>(std::move(suff_stats));

  Model model;
  model.param_dim = param_dim;
  model.label = std::move(label);
  model.suff_stat_fn = [lookup, shared_stats, key_of](const VectorXd& y, const VectorXd&) {
    auto it = lookup->find(key_of(y));
    if (it == lookup->end()) throw DomainError("response is not one of the listed states");
    return (*shared_stats)[static_cast<std::size_t>(it->second)];
  };
  model.support = Support{shared_states->size(),
                          [shared_states](std::size_t i) { return (*shared_states)[i]; }};
  return model;
}

}  // namespace mcml
