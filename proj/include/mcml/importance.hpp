#pragma once

#include <string>
#include <vector>

#include "mcml/model.hpp"
#include "mcml/rng.hpp"

namespace mcml {

enum class InstrumentalKind {
  model_at,            // h(y) = f(y|x_ref, psi) / C(x_ref, psi)
  uniform_on_support,  // h(y) = 1 / |support|
};

// Importance-sampling proposal over the response space. h must dominate the
// model density on the whole support; both builtin kinds do by construction.
struct Instrumental {
  InstrumentalKind kind = InstrumentalKind::uniform_on_support;
  VectorXd psi;    // model_at only
  VectorXd x_ref;  // covariate the instrumental family is instantiated at

  static Instrumental ModelAt(VectorXd psi, VectorXd x_ref = VectorXd());
  static Instrumental Uniform();

  // log h(y); requires an enumerable support.
  double log_density(const Model& model, const VectorXd& y) const;
};

// Frozen instrumental sample Y^1..Y^m with its log-densities log h(Y^k).
struct ImportanceSample {
  std::vector<VectorXd> draws;
  VectorXd log_h;
  std::string seed_tag;

  int m() const { return static_cast<int>(draws.size()); }
};

// m i.i.d. draws from h, deterministic given the stream state. seed_tag is
// recorded verbatim on the sample.
ImportanceSample draw_instrumental(const Instrumental& instr, const Model& model, int m,
                                   RngStream& rng, std::string seed_tag = "");

// Per-(sample, x) cache of draw statistics; evaluates the importance-sampling
// norming estimate C_m(x, theta) = (1/m) sum_k f(Y^k|x, theta) / h(Y^k) and
// its derivatives at any theta in one max-shifted pass over the draws.
class McNormingCache {
 public:
  McNormingCache(const ImportanceSample& sample, const Model& model, const VectorXd& x);

  NormingTriple eval(const VectorXd& theta) const;
  LogNormingEval eval_log(const VectorXd& theta) const;

  int m() const { return m_; }
  const detail::ExpFamilyAccumulator& accumulator() const { return acc_; }

 private:
  detail::ExpFamilyAccumulator acc_;
  int m_ = 0;
  int param_dim_ = 0;
};

// One-shot C_m(x, theta) with gradient and Hessian.
NormingTriple mc_norming(const ImportanceSample& sample, const Model& model, const VectorXd& x,
                         const VectorXd& theta);

// log-domain variant of mc_norming.
LogNormingEval mc_log_norming(const ImportanceSample& sample, const Model& model,
                              const VectorXd& x, const VectorXd& theta);

}  // namespace mcml
