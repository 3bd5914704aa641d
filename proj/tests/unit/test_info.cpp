#include <cmath>

#include "doctest.h"
#include "vibgsl/errors.hpp"
#include "vibgsl/info.hpp"

using namespace vibgsl;
using namespace vibgsl::info;

namespace {

DiscreteJoint coin(double p) { return DiscreteJoint({"A"}, {2}, {p, 1.0 - p}); }

// Y and Gn independent; G = (Y, Gn) exactly and G_IB = G.
DiscreteJoint identity_chain() {
  const std::vector<double> py{0.3, 0.7}, pn{0.2, 0.5, 0.3};
  return build_markov_chain(py, pn, Channel::identity(6), Channel::identity(6));
}

}  // namespace

TEST_SUITE("info") {
  TEST_CASE("entropy of a biased coin") {
    CHECK(entropy(coin(0.25), {"A"}) == doctest::Approx(0.5623351446).epsilon(1e-9));
    CHECK(entropy(coin(1.0), {"A"}) == 0.0);
  }

  TEST_CASE("joint validation") {
    CHECK_THROWS_AS(DiscreteJoint({"A"}, {2}, {0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(DiscreteJoint({"A", "A"}, {1, 1}, {1.0}), ContractError);
    CHECK_THROWS_AS((void)coin(0.5).index_of("B"), ParameterError);
  }

  TEST_CASE("mutual information identities") {
    const auto j = identity_chain();
    CHECK(mutual_information(j, {kLabel}, {kNuisance}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mutual_information(j, {kIBGraph}, {kGraph}) == doctest::Approx(entropy(j, {kGraph})).epsilon(1e-12));
    CHECK_THROWS_AS((void)mutual_information(j, {kLabel}, {kLabel, kGraph}), ContractError);
  }

  TEST_CASE("kl divergence edge cases") {
    const std::vector<double> p{0.5, 0.5}, q{1.0, 0.0};
    CHECK(kl_divergence(p, p) == 0.0);
    CHECK(std::isinf(kl_divergence(p, q)));
    CHECK(kl_divergence(q, p) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("channels must be row-stochastic") {
    Channel c{2, 2, {0.5, 0.5, 0.7, 0.2}};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK_NOTHROW(Channel::identity(3).validate());
    CHECK_NOTHROW(Channel::constant(3, {0.1, 0.9}).validate());
  }

  TEST_CASE("nuisance invariance is an equality for identity channels") {
    const auto j = identity_chain();
    const auto r = check_lemma1(j);
    CHECK(r.holds);
    CHECK(r.lhs == doctest::Approx(entropy(j, {kNuisance})).epsilon(1e-12));
    CHECK(std::abs(r.lhs - r.rhs) < kBoundSlack);
  }

  TEST_CASE("bounds are tight at the true posterior and marginal") {
    const std::vector<double> py{0.4, 0.6}, pn{0.5, 0.5};
    Channel graph{4, 3, {0.7, 0.2, 0.1, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4, 0.05, 0.15, 0.8}};
    Channel ib{3, 2, {0.9, 0.1, 0.4, 0.6, 0.2, 0.8}};
    const auto j = build_markov_chain(py, pn, graph, ib);
    const auto pred = check_prop1_bound(j, label_posterior(j));
    CHECK(pred.holds);
    CHECK(pred.tight);
    CHECK(pred.bound - pred.sharp_bound == doctest::Approx(2.0 * entropy(j, {kLabel})));
    const auto comp = check_prop2_bound(j, ib_marginal(j));
    CHECK(comp.holds);
    CHECK(comp.tight);
    const auto comb = check_combined_bound(j, label_posterior(j), ib_marginal(j), 0.3);
    CHECK(comb.holds);
    CHECK_THROWS_AS((void)check_combined_bound(j, label_posterior(j), ib_marginal(j), -1.0), ParameterError);
    CHECK(check_data_processing(j).holds);

    // A uniform variational marginal is still a valid but loose bound.
    const auto loose = check_prop2_bound(j, std::vector<double>{0.5, 0.5});
    CHECK(loose.holds);
  }

  TEST_CASE("quantized Gaussian KL converges to the closed form") {
    const double closed = 0.5 * (0.25 + 0.64 - 1.0 - std::log(0.64));
    CHECK(quantized_gaussian_kl(0.5, 0.8, 512) == doctest::Approx(closed).epsilon(0.02));
    CHECK(std::abs(quantized_gaussian_kl(0.0, 1.0, 512)) < 1e-6);
  }

  TEST_CASE("random suite has no violations") {
    const auto r = verify_bounds(200, 3);
    CHECK(r.instances == 200);
    CHECK(r.failures == 0);
    CHECK(r.max_violation <= kBoundSlack);
    for (const auto& c : r.checks) {
      INFO(c.name);
      CHECK(c.failures == 0);
    }
    CHECK_THROWS_AS((void)verify_bounds(10, 0, 1), ParameterError);
  }
}
