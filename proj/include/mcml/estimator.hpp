#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mcml/likelihood.hpp"

namespace mcml {

struct FitOptions {
  VectorXd init;                  // empty = zero vector
  double grad_tol = 1e-8;         // sup-norm of the 1/n-scaled score
  int max_iter = 100;
  int step_halving_max = 40;
  double divergence_bound = 50.0;  // sup-norm bound catching escape to infinity
};

struct IterationRecord {
  VectorXd theta;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct FitResult {
  VectorXd theta_hat;
  bool converged = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<std::string> warnings;
};

// Thrown when the iteration budget or step-halving budget is exhausted;
// carries the partial fit with its trace.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& msg, FitResult partial)
      : Error(msg), partial_(std::move(partial)) {}

  const FitResult& partial() const { return partial_; }

 private:
  FitResult partial_;
};

// Safeguarded Newton ascent on a concave-ish objective: full Newton step with
// value-monotone step halving, gradient-ascent fallback when -H is not
// positive definite, and a sup-norm divergence guard.
FitResult newton_maximize(const std::function<ObjectiveEval(const VectorXd&)>& objective,
                          int param_dim, const FitOptions& opts = {});

// Maximizer of the MC log-likelihood (evaluated in 1/n-scaled form).
FitResult fit_mcml(const Dataset& data, const ImportanceSample& sample, const Model& model,
                   const FitOptions& opts = {});

// Maximizer of the exact log-likelihood; needs an enumerable support.
FitResult fit_exact(const Dataset& data, const Model& model, const FitOptions& opts = {});

}  // namespace mcml
