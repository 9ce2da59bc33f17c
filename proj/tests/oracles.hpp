#pragma once

// Test-side oracles: brute-force enumerations, closed forms, and finite
// differences, deliberately independent of the library's evaluation paths.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using ScalarFn = std::function<double(const VectorXd&)>;
using VectorFn = std::function<VectorXd(const VectorXd&)>;

inline VectorXd fd_gradient(const ScalarFn& f, const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    VectorXd hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    g[j] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline MatrixXd fd_jacobian(const VectorFn& f, const VectorXd& x, double h) {
  const VectorXd f0 = f(x);
  MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    VectorXd hi = x, lo = x;
    hi[j] += h;
    lo[j] -= h;
    jac.col(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return jac;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double max_rel_err(const MatrixXd& got, const MatrixXd& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.rows(); ++i)
    for (Eigen::Index j = 0; j < got.cols(); ++j)
      worst = std::max(worst, rel_err(got(i, j), want(i, j)));
  return worst;
}

// --- toy closed forms -------------------------------------------------------

inline double toy_norming(double theta) { return 1.0 + std::exp(theta); }

inline double toy_prob_one(double theta) { return std::exp(theta) / (1.0 + std::exp(theta)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// --- independent 2x2 autologistic enumeration -------------------------------

// Hand-coded walk of the 16 binary states of a 2x2 lattice with sites
//   0 1
//   2 3
// and edges (0,1), (2,3), (0,2), (1,3).
struct LatticeTerm {
  double main = 0.0;   // sum_i y_i * x_i
  double inter = 0.0;  // sum over the four edges of y_a * y_b
};

inline std::vector<LatticeTerm> autolog2x2_terms(double x_site) {
  std::vector<LatticeTerm> out;
  for (int y0 = 0; y0 <= 1; ++y0)
    for (int y1 = 0; y1 <= 1; ++y1)
      for (int y2 = 0; y2 <= 1; ++y2)
        for (int y3 = 0; y3 <= 1; ++y3) {
          LatticeTerm term;
          term.main = x_site * (y0 + y1 + y2 + y3);
          term.inter = y0 * y1 + y2 * y3 + y0 * y2 + y1 * y3;
          out.push_back(term);
        }
  return out;
}

inline double autolog2x2_norming(double t_main, double t_inter, double x_site) {
  double total = 0.0;
  for (const auto& term : autolog2x2_terms(x_site))
    total += std::exp(t_main * term.main + t_inter * term.inter);
  return total;
}

}  // namespace oracles
