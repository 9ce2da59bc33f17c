#include "mcml/estimator.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace mcml {

namespace {

// Newton direction from the symmetric factorization of -H; empty on failure.
VectorXd newton_direction(const MatrixXd& hess, const VectorXd& score) {
  Eigen::LDLT<MatrixXd> ldlt(-hess);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return VectorXd();
  VectorXd d = ldlt.solve(score);
  if (!d.allFinite()) return VectorXd();
  return d;
}

// An exponential-family MLE is finite only if the summed data statistic lies
// strictly inside the range attainable over the support. A coordinate pinned
// at its attainable extreme (toy data with all-equal responses, an all-zero
// lattice) sends the maximizer to infinity; catch it before iterating. The
// sup-norm bound in the optimizer remains as a backstop for boundary cases
// this per-coordinate check cannot see.
void check_boundary_degeneracy(const Dataset& data, const Model& model) {
  if (!model.support) return;
  const int p = model.param_dim;

  VectorXd data_sum = VectorXd::Zero(p);
  for (int i = 0; i < data.n(); ++i)
    data_sum += suff_stat(model, data.responses[i], data.covariates[i]);

  VectorXd max_sum = VectorXd::Zero(p), min_sum = VectorXd::Zero(p);
  for (const auto& [x, count] : detail::group_covariates(data)) {
    const auto& support = *model.support;
    VectorXd lo = suff_stat(model, support.state(0), x);
    VectorXd hi = lo;
    for (std::size_t s = 1; s < support.size; ++s) {
      const VectorXd stat = suff_stat(model, support.state(s), x);
      lo = lo.cwiseMin(stat);
      hi = hi.cwiseMax(stat);
    }
    min_sum += count * lo;
    max_sum += count * hi;
  }

  for (int j = 0; j < p; ++j) {
    if (max_sum[j] == min_sum[j]) continue;  // statistic carries no information
    const double slack = 1e-9 * (1.0 + std::abs(max_sum[j]) + std::abs(min_sum[j]));
    if (data_sum[j] >= max_sum[j] - slack || data_sum[j] <= min_sum[j] + slack)
      throw DegenerateDataError("data statistic " + std::to_string(j) +
                                " sits on the boundary of its attainable range, the "
                                "estimate diverges");
  }
}

}  // namespace

FitResult newton_maximize(const std::function<ObjectiveEval(const VectorXd&)>& objective,
                          int param_dim, const FitOptions& opts) {
  if (opts.grad_tol <= 0.0 || opts.max_iter < 1)
    throw ConfigError("fit options need grad_tol > 0 and max_iter >= 1");

  FitResult res;
  res.theta_hat = opts.init.size() > 0 ? opts.init : VectorXd::Zero(param_dim);
  if (res.theta_hat.size() != param_dim) throw DimensionError("init has wrong length");

  ObjectiveEval cur = objective(res.theta_hat);
  res.final_grad_norm = cur.score.lpNorm<Eigen::Infinity>();
  res.trace.push_back({res.theta_hat, cur.value, res.final_grad_norm});

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (res.final_grad_norm <= opts.grad_tol) {
      res.converged = true;
      return res;
    }

    VectorXd direction = newton_direction(cur.hess, cur.score);
    if (direction.size() == 0) direction = cur.score;  // gradient-ascent fallback

    // Step halving until the value stops decreasing (tiny slack absorbs
    // roundoff near the optimum).
    const double slack = 1e-13 * (1.0 + std::abs(cur.value));
    double alpha = 1.0;
    VectorXd candidate;
    ObjectiveEval cand_eval;
    bool accepted = false;
    for (int h = 0; h <= opts.step_halving_max; ++h) {
      candidate = res.theta_hat + alpha * direction;
      cand_eval = objective(candidate);
      if (std::isfinite(cand_eval.value) && cand_eval.value >= cur.value - slack) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.iterations = iter + 1;
      throw NonConvergenceError("step halving exhausted without improving the objective", res);
    }

    res.theta_hat = candidate;
    cur = cand_eval;
    res.iterations = iter + 1;
    res.final_grad_norm = cur.score.lpNorm<Eigen::Infinity>();
    res.trace.push_back({res.theta_hat, cur.value, res.final_grad_norm});

    if (res.theta_hat.lpNorm<Eigen::Infinity>() > opts.divergence_bound)
      throw DegenerateDataError("estimate escaped past the divergence bound, likely degenerate data");
  }

  if (res.final_grad_norm <= opts.grad_tol) {
    res.converged = true;
    return res;
  }
  throw NonConvergenceError("iteration budget exhausted before the score tolerance was met", res);
}

FitResult fit_mcml(const Dataset& data, const ImportanceSample& sample, const Model& model,
                   const FitOptions& opts) {
  check_boundary_degeneracy(data, model);
  const Objective obj = Objective::mc(data, sample, model);
  return newton_maximize([&obj](const VectorXd& theta) { return obj.eval_scaled(theta); },
                         model.param_dim, opts);
}

FitResult fit_exact(const Dataset& data, const Model& model, const FitOptions& opts) {
  check_boundary_degeneracy(data, model);
  const Objective obj = Objective::exact(data, model);
  return newton_maximize([&obj](const VectorXd& theta) { return obj.eval_scaled(theta); },
                         model.param_dim, opts);
}

}  // namespace mcml
