#include "mcml/importance.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mcml {

Instrumental Instrumental::ModelAt(VectorXd psi, VectorXd x_ref) {
  Instrumental instr;
  instr.kind = InstrumentalKind::model_at;
  instr.psi = std::move(psi);
  instr.x_ref = std::move(x_ref);
  return instr;
}

Instrumental Instrumental::Uniform() {
  Instrumental instr;
  instr.kind = InstrumentalKind::uniform_on_support;
  return instr;
}

double Instrumental::log_density(const Model& model, const VectorXd& y) const {
  if (!model.support) throw NoOracleError("instrumental density needs an enumerable support");
  if (kind == InstrumentalKind::uniform_on_support)
    return -std::log(static_cast<double>(model.support->size));
  const LogNormingEval norming = exact_log_norming(model, x_ref, psi);
  return psi.dot(suff_stat(model, y, x_ref)) - norming.log_value;
}

ImportanceSample draw_instrumental(const Instrumental& instr, const Model& model, int m,
                                   RngStream& rng, std::string seed_tag) {
  if (m < 1) throw InsufficientDataError("instrumental sample size must be at least 1");
  if (!model.support) throw NoOracleError("drawing from h needs an enumerable support");
  const auto& support = *model.support;

  ImportanceSample sample;
  sample.seed_tag = std::move(seed_tag);
  sample.draws.reserve(static_cast<std::size_t>(m));
  sample.log_h.resize(m);

  if (instr.kind == InstrumentalKind::uniform_on_support) {
    const double log_h = -std::log(static_cast<double>(support.size));
    for (int k = 0; k < m; ++k) {
      sample.draws.push_back(support.state(rng.uniform_index(support.size)));
      sample.log_h[k] = log_h;
    }
  } else {
    if (instr.psi.size() != model.param_dim)
      throw DimensionError("instrumental psi has wrong length");
    // Cumulative weights of p(.|x_ref, psi) over the support, then inverse-CDF
    // by binary search per draw.
    VectorXd exponents(static_cast<Eigen::Index>(support.size));
    for (std::size_t i = 0; i < support.size; ++i)
      exponents[static_cast<Eigen::Index>(i)] =
          instr.psi.dot(suff_stat(model, support.state(i), instr.x_ref));
    const double shift = exponents.maxCoeff();
    std::vector<double> cumulative(support.size);
    double total = 0.0;
    for (std::size_t i = 0; i < support.size; ++i) {
      total += std::exp(exponents[static_cast<Eigen::Index>(i)] - shift);
      cumulative[i] = total;
    }
    const double log_norming = shift + std::log(total);

    MatrixXd draw_stats(m, model.param_dim);
    for (int k = 0; k < m; ++k) {
      const double target = rng.uniform01() * total;
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
      const std::size_t idx =
          std::min(static_cast<std::size_t>(it - cumulative.begin()), support.size - 1);
      sample.draws.push_back(support.state(idx));
      draw_stats.row(k) = suff_stat(model, sample.draws.back(), instr.x_ref);
    }
    // log h via the same matrix-vector kernel the norming caches use, so the
    // instrumental exponent cancels bitwise when theta equals psi.
    sample.log_h = draw_stats * instr.psi - VectorXd::Constant(m, log_norming);
  }

  if (!sample.log_h.allFinite())
    throw DominationError("instrumental density vanished on a drawn state");
  return sample;
}

McNormingCache::McNormingCache(const ImportanceSample& sample, const Model& model,
                               const VectorXd& x)
    : m_(sample.m()), param_dim_(model.param_dim) {
  if (m_ < 1) throw InsufficientDataError("importance sample is empty");
  if (sample.log_h.size() != m_)
    throw DimensionError("importance sample draws/log_h length mismatch");
  MatrixXd stats(m_, param_dim_);
  for (int k = 0; k < m_; ++k) stats.row(k) = suff_stat(model, sample.draws[k], x);
  const double log_m = std::log(static_cast<double>(m_));
  acc_ = detail::ExpFamilyAccumulator(std::move(stats),
                                      (-sample.log_h.array() - log_m).matrix());
}

NormingTriple McNormingCache::eval(const VectorXd& theta) const {
  if (theta.size() != param_dim_) throw DimensionError("theta has wrong length");
  if (!theta.allFinite()) throw DomainError("theta has non-finite entries");
  return acc_.eval(theta);
}

LogNormingEval McNormingCache::eval_log(const VectorXd& theta) const {
  if (theta.size() != param_dim_) throw DimensionError("theta has wrong length");
  if (!theta.allFinite()) throw DomainError("theta has non-finite entries");
  return acc_.eval_log(theta);
}

NormingTriple mc_norming(const ImportanceSample& sample, const Model& model, const VectorXd& x,
                         const VectorXd& theta) {
  return McNormingCache(sample, model, x).eval(theta);
}

LogNormingEval mc_log_norming(const ImportanceSample& sample, const Model& model,
                              const VectorXd& x, const VectorXd& theta) {
  return McNormingCache(sample, model, x).eval_log(theta);
}

}  // namespace mcml
