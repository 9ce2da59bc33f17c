#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mcml/importance.hpp"
#include "oracles.hpp"

using namespace mcml;

namespace {

VectorXd vec(std::initializer_list<double> vals) {
  VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

const VectorXd kNoX = VectorXd();

// Hand-built toy sample from the uniform instrumental (h = 1/2 per state).
ImportanceSample toy_uniform_sample(std::initializer_list<double> draws) {
  ImportanceSample sample;
  for (double y : draws) sample.draws.push_back(vec({y}));
  sample.log_h = VectorXd::Constant(static_cast<Eigen::Index>(draws.size()), -std::log(2.0));
  return sample;
}

}  // namespace

TEST_CASE("uniform instrumental on the toy support") {
  const Model toy = toy_model();
  RngStream rng = derive_stream(42, 0, StreamRole::mc_sampling);
  const ImportanceSample sample =
      draw_instrumental(Instrumental::Uniform(), toy, 500, rng, "tag-a");

  CHECK(sample.m() == 500);
  CHECK(sample.seed_tag == "tag-a");
  for (int k = 0; k < sample.m(); ++k)
    CHECK(sample.log_h[k] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("model_at(0) matches the uniform distribution on the toy support") {
  const Model toy = toy_model();
  RngStream rng = derive_stream(43, 0, StreamRole::mc_sampling);
  const ImportanceSample sample =
      draw_instrumental(Instrumental::ModelAt(vec({0})), toy, 20000, rng);

  double ones = 0.0;
  for (int k = 0; k < sample.m(); ++k) {
    CHECK(sample.log_h[k] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    ones += sample.draws[static_cast<std::size_t>(k)][0];
  }
  CHECK(ones / sample.m() == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("model_at((0,0)) on the 2x2 lattice has log h = -log 16") {
  const Model lattice = autologistic_model(2, 2);
  RngStream rng = derive_stream(44, 0, StreamRole::mc_sampling);
  const ImportanceSample sample =
      draw_instrumental(Instrumental::ModelAt(vec({0, 0}), vec({1})), lattice, 200, rng);
  for (int k = 0; k < sample.m(); ++k)
    CHECK(sample.log_h[k] == doctest::Approx(-std::log(16.0)).epsilon(1e-12));
}

TEST_CASE("mc_norming reproduces the hand-computed two-draw example") {
  // Weights f/h = 2 e^{theta y}: draw y=1 gives 4, draw y=0 gives 2.
  const Model toy = toy_model();
  const ImportanceSample sample = toy_uniform_sample({1, 0});
  const NormingTriple t = mc_norming(sample, toy, kNoX, vec({std::log(2.0)}));

  CHECK(t.value == doctest::Approx(3.0).epsilon(1e-14));  // = C(log 2)
  CHECK(t.grad[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t.hess(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("self-instrument gives the exact norming constant for any m") {
  const Model toy = toy_model();
  const Model lattice = autologistic_model(2, 2);

  for (int m : {1, 7, 100}) {
    RngStream rng = derive_stream(45, std::uint64_t(m), StreamRole::mc_sampling);
    const ImportanceSample sample =
        draw_instrumental(Instrumental::ModelAt(vec({0.7})), toy, m, rng);
    const double exact = exact_norming(toy, kNoX, vec({0.7})).value;
    CHECK(mc_norming(sample, toy, kNoX, vec({0.7})).value ==
          doctest::Approx(exact).epsilon(1e-12));
  }

  for (int m : {1, 64}) {
    RngStream rng = derive_stream(46, std::uint64_t(m), StreamRole::mc_sampling);
    const VectorXd psi = vec({0.3, -0.2});
    const VectorXd x_ref = vec({1.5});
    const ImportanceSample sample =
        draw_instrumental(Instrumental::ModelAt(psi, x_ref), lattice, m, rng);
    const double exact = exact_norming(lattice, x_ref, psi).value;
    CHECK(mc_norming(sample, lattice, x_ref, psi).value ==
          doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("uniform weights at theta = 0 give the norming constant exactly") {
  const Model toy = toy_model();
  RngStream rng = derive_stream(51, 0, StreamRole::mc_sampling);
  for (int m : {1, 10, 1000}) {
    const ImportanceSample sample = draw_instrumental(Instrumental::Uniform(), toy, m, rng);
    CHECK(mc_norming(sample, toy, kNoX, vec({0})).value ==
          doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("mc_norming is unbiased for the toy norming constant") {
  const Model toy = toy_model();
  const VectorXd theta = vec({1.0});
  const double truth = 1.0 + std::exp(1.0);

  const int reps = 2000;
  const int m = 50;
  VectorXd values(reps);
  for (int r = 0; r < reps; ++r) {
    RngStream rng = derive_stream(47, std::uint64_t(r), StreamRole::mc_sampling);
    const ImportanceSample sample = draw_instrumental(Instrumental::Uniform(), toy, m, rng);
    values[r] = mc_norming(sample, toy, kNoX, theta).value;
  }
  const double mean = values.mean();
  const double sd = std::sqrt((values.array() - mean).square().sum() / (reps - 1));
  CHECK(std::abs(mean - truth) <= 3.0 * sd / std::sqrt(double(reps)));
}

TEST_CASE("mc_norming error shrinks at the Monte Carlo rate") {
  const Model toy = toy_model();
  const VectorXd theta = vec({1.0});

  const int reps = 300;
  std::vector<double> sds;
  for (int m : {100, 1000, 10000}) {
    VectorXd values(reps);
    for (int r = 0; r < reps; ++r) {
      RngStream rng =
          derive_stream(48, std::uint64_t(r), StreamRole::mc_sampling, std::uint64_t(m));
      const ImportanceSample sample = draw_instrumental(Instrumental::Uniform(), toy, m, rng);
      values[r] = mc_norming(sample, toy, kNoX, theta).value;
    }
    const double mean = values.mean();
    sds.push_back(std::sqrt((values.array() - mean).square().sum() / (reps - 1)));
  }
  for (std::size_t i = 0; i + 1 < sds.size(); ++i) {
    const double ratio = sds[i] / sds[i + 1];  // expected ~ sqrt(10)
    CHECK(ratio >= std::sqrt(10.0) / 1.3);
    CHECK(ratio <= std::sqrt(10.0) * 1.3);
  }
}

TEST_CASE("mc_norming derivatives match finite differences on a frozen sample") {
  const Model lattice = autologistic_model(2, 2);
  RngStream rng = derive_stream(49, 0, StreamRole::mc_sampling);
  const ImportanceSample sample = draw_instrumental(Instrumental::Uniform(), lattice, 400, rng);
  const VectorXd x = vec({1.0});
  const VectorXd theta = vec({0.4, -0.3});

  const auto value_fn = [&](const VectorXd& th) {
    return mc_norming(sample, lattice, x, th).value;
  };
  const auto grad_fn = [&](const VectorXd& th) { return mc_norming(sample, lattice, x, th).grad; };
  const NormingTriple t = mc_norming(sample, lattice, x, theta);

  CHECK(oracles::max_rel_err(t.grad, oracles::fd_gradient(value_fn, theta, 1e-5)) <= 1e-6);
  CHECK(oracles::max_rel_err(t.hess, oracles::fd_jacobian(grad_fn, theta, 1e-5)) <= 1e-6);
}

TEST_CASE("mc_norming stays positive for extreme parameters") {
  const Model toy = toy_model();
  const ImportanceSample sample = toy_uniform_sample({1, 0, 1, 1, 0});
  for (double theta : {-600.0, -50.0, 0.0, 50.0, 600.0}) {
    const NormingTriple t = mc_norming(sample, toy, kNoX, vec({theta}));
    CHECK(t.value > 0.0);
    CHECK(std::isfinite(t.log_value));
  }
}

TEST_CASE("non-finite instrumental densities raise NumericalUnderflowError") {
  const Model toy = toy_model();
  ImportanceSample broken = toy_uniform_sample({1, 0});
  broken.log_h[0] = std::numeric_limits<double>::infinity();
  broken.log_h[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(mc_norming(broken, toy, kNoX, vec({0.0})), NumericalUnderflowError);
}

TEST_CASE("draws outside the model domain are rejected") {
  const Model toy = toy_model();
  ImportanceSample bad = toy_uniform_sample({1, 0});
  bad.draws[0] = vec({0.25});
  CHECK_THROWS_AS(mc_norming(bad, toy, kNoX, vec({0.0})), DomainError);
}

TEST_CASE("instrumental log-density accessor agrees with recorded values") {
  const Model toy = toy_model();
  const Instrumental instr = Instrumental::ModelAt(vec({0.9}));
  RngStream rng = derive_stream(50, 0, StreamRole::mc_sampling);
  const ImportanceSample sample = draw_instrumental(instr, toy, 50, rng);
  for (int k = 0; k < sample.m(); ++k)
    CHECK(instr.log_density(toy, sample.draws[static_cast<std::size_t>(k)]) ==
          doctest::Approx(sample.log_h[k]).epsilon(1e-12));
}
