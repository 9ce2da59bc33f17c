#include "mcml/asymptotics.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <utility>

namespace mcml {

namespace {

constexpr double kEigenvalueFloor = 1e-12;

using NormingMemo = std::map<std::vector<double>, LogNormingEval>;

std::vector<double> covariate_key(const VectorXd& x) {
  return std::vector<double>(x.begin(), x.end());
}

void check_square(const MatrixXd& mat, int p, const char* name) {
  if (mat.rows() != p || mat.cols() != p)
    throw DimensionError(std::string(name) + " has wrong shape");
}

}  // namespace

NormingFn exact_norming_fn(const Model& model, VectorXd theta) {
  auto memo = std::make_shared<NormingMemo>();
  return [model, theta = std::move(theta), memo](const VectorXd& x) {
    auto it = memo->find(covariate_key(x));
    if (it == memo->end())
      it = memo->emplace(covariate_key(x), exact_log_norming(model, x, theta)).first;
    return it->second;
  };
}

NormingFn mc_norming_fn(const ImportanceSample& sample, const Model& model, VectorXd theta) {
  auto memo = std::make_shared<NormingMemo>();
  return [&sample, model, theta = std::move(theta), memo](const VectorXd& x) {
    auto it = memo->find(covariate_key(x));
    if (it == memo->end())
      it = memo->emplace(covariate_key(x), mc_log_norming(sample, model, x, theta)).first;
    return it->second;
  };
}

VectorXd phi(const Model& model, const VectorXd& y, const VectorXd& x, const VectorXd& theta,
             const LogNormingEval& norming, double log_h) {
  const VectorXd s = suff_stat(model, y, x);
  const double ratio = std::exp(theta.dot(s) - log_h - norming.log_value);
  return ratio * (s - norming.grad);
}

MatrixXd estimate_V(const Dataset& data, const Model& model, const NormingFn& norming) {
  validate_dataset(data);
  const int n = data.n();
  if (n < 2) throw InsufficientDataError("score variance needs at least 2 observations");
  const int p = model.param_dim;

  MatrixXd scores(n, p);
  for (int i = 0; i < n; ++i) {
    const LogNormingEval ln = norming(data.covariates[i]);
    scores.row(i) =
        (suff_stat(model, data.responses[i], data.covariates[i]) - ln.grad).transpose();
  }
  const Eigen::RowVectorXd mean = scores.colwise().sum() / double(n);
  scores.rowwise() -= mean;
  MatrixXd v = (scores.transpose() * scores) / double(n);
  return 0.5 * (v + v.transpose());
}

MatrixXd estimate_D(const Dataset& data, const Model& model, const NormingFn& norming) {
  validate_dataset(data);
  const int p = model.param_dim;
  MatrixXd d = MatrixXd::Zero(p, p);
  for (const auto& [x, count] : detail::group_covariates(data))
    d -= count * norming(x).hess;
  d /= double(data.n());
  return 0.5 * (d + d.transpose());
}

MatrixXd estimate_W(const Dataset& data, const ImportanceSample& sample, const Model& model,
                    const VectorXd& theta_hat, const NormingFn& norming) {
  validate_dataset(data);
  const int m = sample.m();
  if (m < 2) throw InsufficientDataError("MC-noise variance needs at least 2 draws");
  const int p = model.param_dim;
  const double n = double(data.n());

  // phibar_k = sum over distinct x of (count/n) phi(Y^k | x), one vectorized
  // pass per covariate group.
  MatrixXd phibar = MatrixXd::Zero(m, p);
  for (const auto& [x, count] : detail::group_covariates(data)) {
    const LogNormingEval ln = norming(x);
    MatrixXd stats(m, p);
    for (int k = 0; k < m; ++k) stats.row(k) = suff_stat(model, sample.draws[k], x);
    const VectorXd ratio =
        (stats * theta_hat - sample.log_h - VectorXd::Constant(m, ln.log_value)).array().exp();
    stats.rowwise() -= ln.grad.transpose();
    phibar += (count / n) * (ratio.asDiagonal() * stats);
  }

  const Eigen::RowVectorXd mean = phibar.colwise().sum() / double(m);
  phibar.rowwise() -= mean;
  MatrixXd w = (phibar.transpose() * phibar) / double(m);
  return 0.5 * (w + w.transpose());
}

double estimate_W_tilde(const Dataset& data, const ImportanceSample& sample, const Model& model,
                        const VectorXd& theta_hat, const NormingFn& norming) {
  validate_dataset(data);
  const int m = sample.m();
  if (m < 1) throw InsufficientDataError("importance sample is empty");
  const double n = double(data.n());

  double total = 0.0;
  for (const auto& [x, count] : detail::group_covariates(data)) {
    const LogNormingEval ln = norming(x);
    double group = 0.0;
    for (int k = 0; k < m; ++k)
      group += phi(model, sample.draws[static_cast<std::size_t>(k)], x, theta_hat, ln,
                   sample.log_h[k])
                   .squaredNorm();
    total += (count / n) * group / double(m);
  }
  return total;
}

MatrixXd estimate_W_nocov(const ImportanceSample& sample, const Model& model,
                          const VectorXd& theta_hat, const VectorXd& x_ref,
                          const NormingFn& norming) {
  const int m = sample.m();
  if (m < 2) throw InsufficientDataError("MC-noise variance needs at least 2 draws");
  const int p = model.param_dim;
  const LogNormingEval ln = norming(x_ref);

  MatrixXd influence(m, p);
  for (int k = 0; k < m; ++k) {
    const VectorXd s = suff_stat(model, sample.draws[k], x_ref);
    const double f_over_h = std::exp(theta_hat.dot(s) - sample.log_h[k]);
    influence.row(k) = (f_over_h * (s - ln.grad)).transpose();
  }
  const Eigen::RowVectorXd mean = influence.colwise().sum() / double(m);
  influence.rowwise() -= mean;
  MatrixXd w = (influence.transpose() * influence) / double(m);
  w /= std::exp(2.0 * ln.log_value);
  return 0.5 * (w + w.transpose());
}

SandwichParts estimate_sandwich_parts(const Dataset& data, const ImportanceSample& sample,
                                      const Model& model, const VectorXd& theta_hat) {
  const NormingFn norming = mc_norming_fn(sample, model, theta_hat);
  SandwichParts parts;
  parts.V_hat = estimate_V(data, model, norming);
  parts.D_hat = estimate_D(data, model, norming);
  parts.W_hat = estimate_W(data, sample, model, theta_hat, norming);
  parts.n = data.n();
  parts.m = sample.m();
  return parts;
}

std::vector<std::string> sandwich_diagnostics(const SandwichParts& parts) {
  std::vector<std::string> warnings;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(parts.D_hat);
  if (es.eigenvalues().maxCoeff() >= 0.0)
    warnings.push_back("plug-in D_hat is not negative definite");
  return warnings;
}

MatrixXd sandwich_cov(const SandwichParts& parts) {
  const int p = static_cast<int>(parts.D_hat.rows());
  check_square(parts.D_hat, p, "D_hat");
  check_square(parts.V_hat, p, "V_hat");
  check_square(parts.W_hat, p, "W_hat");
  if (parts.n < 1 || parts.m < 1) throw ConfigError("sandwich needs n >= 1 and m >= 1");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(parts.D_hat);
  if (es.eigenvalues().cwiseAbs().minCoeff() < kEigenvalueFloor)
    throw SingularHessianError("plug-in D_hat is numerically singular");
  const MatrixXd d_inv = es.eigenvectors() *
                         es.eigenvalues().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose();

  const MatrixXd mid = parts.V_hat / double(parts.n) + parts.W_hat / double(parts.m);
  MatrixXd cov = d_inv * mid * d_inv;
  return 0.5 * (cov + cov.transpose());
}

VectorXd standardize(const VectorXd& theta_hat, const VectorXd& theta_ref,
                     const SandwichParts& parts) {
  if (theta_hat.size() != theta_ref.size()) throw DimensionError("theta_hat/theta_ref mismatch");
  if (parts.n < 1 || parts.m < 1) throw ConfigError("standardization needs n >= 1 and m >= 1");

  MatrixXd mid = parts.V_hat / double(parts.n) + parts.W_hat / double(parts.m);
  mid = 0.5 * (mid + mid.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(mid);
  if (es.eigenvalues().minCoeff() < kEigenvalueFloor)
    throw SingularCovarianceError("V/n + W/m is not positive definite");
  const MatrixXd inv_sqrt = es.eigenvectors() *
                            es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose();
  return inv_sqrt * parts.D_hat * (theta_hat - theta_ref);
}

ConfidenceRegion confidence_region(const VectorXd& theta_hat, const MatrixXd& cov, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  const int p = static_cast<int>(theta_hat.size());
  check_square(cov, p, "cov");

  const boost::math::normal_distribution<double> gauss;
  const double z = boost::math::quantile(gauss, 0.5 * (1.0 + level));
  const boost::math::chi_squared_distribution<double> chi2{double(p)};

  ConfidenceRegion region;
  region.level = level;
  region.lower.resize(p);
  region.upper.resize(p);
  for (int j = 0; j < p; ++j) {
    const double half_width = z * std::sqrt(std::max(0.0, cov(j, j)));
    region.lower[j] = theta_hat[j] - half_width;
    region.upper[j] = theta_hat[j] + half_width;
  }
  region.ellipsoid_radius = std::sqrt(boost::math::quantile(chi2, level));
  return region;
}

}  // namespace mcml
