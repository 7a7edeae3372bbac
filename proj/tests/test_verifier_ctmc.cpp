#include "doctest.h"

#include <random>

#include "builders.hpp"
#include "certloop/uuv.hpp"
#include "certloop/verifier.hpp"
#include "oracles.hpp"

using namespace certloop;
using namespace certloop::test;

namespace {

MarkovModel sensor_model(double r, double sp, double kappa = 0.134, double energy = 3.0) {
  SensorSpec spec;
  spec.name = "s";
  spec.rate = r;
  spec.energy = energy;
  spec.energy_on = 10.0;
  spec.energy_off = 2.0;
  spec.p_max = 1.0;
  spec.kappa = kappa;
  return bind_parameters(build_sensor_template(spec, 5.0), {{"r", r}, {"sp", sp}});
}

}  // namespace

TEST_CASE("a transitionless state integrates its reward over the horizon") {
  MarkovModel m = chain(ModelKind::Continuous, {"only"}, {}, {{"r", {{"only", 1.0}}, {}}});
  CHECK(ctmc_cumulative_reward(m, "r", 3.125) == doctest::Approx(3.125).epsilon(1e-12));
}

TEST_CASE("zero reward structure accumulates nothing") {
  MarkovModel m = chain(ModelKind::Continuous, {"a", "b"}, {{"a", "b", 2.0}, {"b", "a", 1.0}},
                        {{"zero", {}, {}}});
  CHECK(ctmc_cumulative_reward(m, "zero", 10.0) == doctest::Approx(0.0));
}

TEST_CASE("sensor measure reward equals accurate-rate times horizon") {
  // Every state carries the same accurate-measurement rate, so the expected
  // count has no transient term at all.
  MarkovModel m = sensor_model(5.0, 3.2);
  double accurate_rate = 5.0 * (1.0 - 0.134 * 3.2);
  double horizon = 10.0 / 3.2;
  double value = ctmc_cumulative_reward(m, "measure", horizon);
  CHECK(value == doctest::Approx(accurate_rate * horizon).epsilon(1e-7));

  McEstimate mc = mc_ctmc_cumulative_reward(m, "measure", horizon, 1000000, 555123);
  CHECK(mc.within_3_sigma(value));
}

TEST_CASE("corpus of small chains agrees with the Monte-Carlo oracle") {
  struct Entry {
    const char* name;
    MarkovModel model;
    const char* reward;
    double horizon;
  };
  std::vector<Entry> corpus;
  corpus.push_back({"two-state toggle, state reward",
                    chain(ModelKind::Continuous, {"a", "b"},
                          {{"a", "b", 1.0}, {"b", "a", 2.0}}, {{"r", {{"a", 1.0}}, {}}}),
                    "r", 4.0});
  corpus.push_back({"two-state toggle, jump reward",
                    chain(ModelKind::Continuous, {"a", "b"},
                          {{"a", "b", 3.0}, {"b", "a", 0.5}},
                          {{"r", {}, {{"a", "b", 2.0}}}}),
                    "r", 2.5});
  corpus.push_back({"three-state cycle",
                    chain(ModelKind::Continuous, {"a", "b", "c"},
                          {{"a", "b", 1.0}, {"b", "c", 2.0}, {"c", "a", 4.0}},
                          {{"r", {{"b", 1.5}}, {{"c", "a", 0.5}}}}),
                    "r", 6.0});
  corpus.push_back({"birth-death",
                    chain(ModelKind::Continuous, {"n0", "n1", "n2", "n3"},
                          {{"n0", "n1", 2.0},
                           {"n1", "n2", 2.0},
                           {"n2", "n3", 2.0},
                           {"n1", "n0", 1.0},
                           {"n2", "n1", 1.0},
                           {"n3", "n2", 1.0}},
                          {{"r", {{"n3", 1.0}}, {{"n0", "n1", 0.25}}}}),
                    "r", 5.0});
  corpus.push_back({"absorbing branch",
                    chain(ModelKind::Continuous, {"a", "b", "sink"},
                          {{"a", "b", 1.0}, {"b", "a", 1.0}, {"a", "sink", 0.5}},
                          {{"r", {{"sink", 2.0}}, {{"a", "sink", 1.0}}}}),
                    "r", 3.0});
  corpus.push_back({"fast-slow pair",
                    chain(ModelKind::Continuous, {"f", "s"},
                          {{"f", "s", 10.0}, {"s", "f", 0.2}}, {{"r", {{"f", 3.0}}, {}}}),
                    "r", 7.5});
  corpus.push_back({"sensor nominal", sensor_model(5.0, 2.8), "energy", 10.0 / 2.8});
  corpus.push_back({"sensor degraded", sensor_model(1.0, 3.2, 0.18, 2.1), "measure", 3.125});
  corpus.push_back({"sensor fast sweep", sensor_model(4.0, 1.0, 0.03, 2.4), "measure", 10.0});
  corpus.push_back({"sensor near clamp", sensor_model(4.0, 5.0, 0.18, 2.1), "measure", 2.0});

  std::uint64_t seed = 90001;
  for (auto& e : corpus) {
    CAPTURE(e.name);
    REQUIRE(validate_model(e.model).empty());
    double value = ctmc_cumulative_reward(e.model, e.reward, e.horizon);
    McEstimate mc = mc_ctmc_cumulative_reward(e.model, e.reward, e.horizon, 1000000, seed++);
    CAPTURE(value);
    CAPTURE(mc.mean);
    CAPTURE(mc.std_error);
    CHECK(mc.within_3_sigma(value));
  }
}

TEST_CASE("cumulative reward is monotone in the horizon") {
  MarkovModel m = chain(ModelKind::Continuous, {"a", "b", "c"},
                        {{"a", "b", 0.7}, {"b", "c", 1.3}, {"c", "a", 2.0}},
                        {{"r", {{"a", 0.5}, {"c", 1.0}}, {{"a", "b", 0.1}}}});
  double previous = 0.0;
  for (double h : {0.1, 0.5, 1.0, 2.0, 5.0, 17.0}) {
    double v = ctmc_cumulative_reward(m, "r", h);
    CHECK(v >= previous - 1e-12);
    previous = v;
  }
}

TEST_CASE("independent sum matches the explicit product chain") {
  MarkovModel a = sensor_model(5.0, 3.2);
  MarkovModel b = sensor_model(4.0, 3.2, 0.03, 2.4);
  const MarkovModel* components[] = {&a, &b};
  IndependentSum sum = build_independent_sum(components, "measure");

  double horizon = 3.125;
  double fast_path = ctmc_cumulative_reward(sum, horizon);
  MarkovModel product = product_ctmc(a, b, "measure");
  REQUIRE(product.state_count() == 9);
  double explicit_value = ctmc_cumulative_reward(product, "measure", horizon);
  CHECK(fast_path ==
        doctest::Approx(explicit_value).epsilon(1e-6));

  SUBCASE("energy structure as well") {
    IndependentSum esum = build_independent_sum(components, "energy");
    MarkovModel eproduct = product_ctmc(a, b, "energy");
    CHECK(ctmc_cumulative_reward(esum, horizon) ==
          doctest::Approx(ctmc_cumulative_reward(eproduct, "energy", horizon)).epsilon(1e-6));
  }
}

TEST_CASE("a single component sums to its own value") {
  MarkovModel a = sensor_model(5.0, 3.2);
  const MarkovModel* components[] = {&a};
  IndependentSum sum = build_independent_sum(components, "measure");
  CHECK(ctmc_cumulative_reward(sum, 2.0) ==
        doctest::Approx(ctmc_cumulative_reward(a, "measure", 2.0)));
}

TEST_CASE("zero-reward components sum to zero") {
  MarkovModel a = chain(ModelKind::Continuous, {"x", "y"}, {{"x", "y", 1.0}, {"y", "x", 1.0}},
                        {{"r", {}, {}}});
  MarkovModel b = a;
  const MarkovModel* components[] = {&a, &b};
  CHECK(ctmc_cumulative_reward(build_independent_sum(components, "r"), 5.0) ==
        doctest::Approx(0.0));
}

TEST_CASE("uniformisation truncation cap raises HorizonOverflow") {
  MarkovModel m = chain(ModelKind::Continuous, {"a", "b"},
                        {{"a", "b", 10000.0}, {"b", "a", 10000.0}}, {{"r", {{"a", 1.0}}, {}}});
  CHECK_THROWS_AS(ctmc_cumulative_reward(m, "r", 200.0), HorizonOverflow);
}

TEST_CASE("deadline expiry interrupts long uniformisations") {
  MarkovModel m = chain(ModelKind::Continuous, {"a", "b"},
                        {{"a", "b", 5000.0}, {"b", "a", 5000.0}}, {{"r", {{"a", 1.0}}, {}}});
  CHECK_THROWS_AS(ctmc_cumulative_reward(m, "r", 150.0, Deadline::after(1e-9)),
                  DeadlineExpired);
}

TEST_CASE("energy bound evaluates satisfied under budget") {
  // energy rate 4 * 7.68 = 30.72 J/s over 3.125 s = 96 J, within the budget
  SensorSpec spec;
  spec.name = "s";
  spec.rate = 4.0;
  spec.energy = 7.68;
  spec.p_max = 1.0;
  spec.kappa = 0.0;
  MarkovModel m =
      bind_parameters(build_sensor_template(spec, 5.0), {{"r", 4.0}, {"sp", 3.2}});
  Property p{"R2", CumulReward{"energy", Bound::AtMost, 120.0, 3.125}};
  VerificationResult r = evaluate(m, p);
  CHECK(r.value == doctest::Approx(96.0).epsilon(1e-7));
  REQUIRE(r.satisfied.has_value());
  CHECK(*r.satisfied);
}
