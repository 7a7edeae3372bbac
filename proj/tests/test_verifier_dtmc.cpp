#include "doctest.h"

#include <random>

#include "builders.hpp"
#include "certloop/fx.hpp"
#include "certloop/verifier.hpp"
#include "oracles.hpp"

using namespace certloop;
using namespace certloop::test;

namespace {
constexpr double kTol = 1e-9;
}

// Frozen corpus: every expected value below is a closed form derived from
// first-step analysis, written out as plain arithmetic.
TEST_CASE("reachability corpus") {
  struct Entry {
    const char* name;
    MarkovModel model;
    double expected;
  };
  std::vector<Entry> corpus;

  corpus.push_back({"single branch",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done", "fail:fail"},
                          {{"s0", "s1", 0.9}, {"s0", "fail", 0.1}, {"s1", "done", 1.0}}),
                    0.9});
  corpus.push_back({"initial is target",
                    chain(ModelKind::Discrete, {"s0:done", "s1"}, {{"s0", "s1", 1.0}}), 1.0});
  corpus.push_back({"geometric retry",
                    chain(ModelKind::Discrete, {"s0", "done:done"},
                          {{"s0", "s0", 0.5}, {"s0", "done", 0.5}}),
                    1.0});
  corpus.push_back({"two-step loop",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done", "fail:fail"},
                          {{"s0", "s1", 1.0},
                           {"s1", "s0", 0.25},
                           {"s1", "done", 0.5},
                           {"s1", "fail", 0.25}}),
                    0.5 / (1.0 - 0.25)});
  corpus.push_back({"three-rung ladder",
                    chain(ModelKind::Discrete, {"s0", "s1", "s2", "done:done", "fail:fail"},
                          {{"s0", "s1", 0.9},
                           {"s0", "fail", 0.1},
                           {"s1", "s2", 0.9},
                           {"s1", "fail", 0.1},
                           {"s2", "done", 0.9},
                           {"s2", "fail", 0.1}}),
                    0.9 * 0.9 * 0.9});
  corpus.push_back({"mixed branch",
                    chain(ModelKind::Discrete, {"s0", "a", "b", "done:done", "fail:fail"},
                          {{"s0", "a", 0.3},
                           {"s0", "b", 0.7},
                           {"a", "done", 1.0},
                           {"b", "done", 0.5},
                           {"b", "fail", 0.5}}),
                    0.3 + 0.7 * 0.5});
  corpus.push_back({"unreachable target",
                    chain(ModelKind::Discrete, {"s0", "trap", "done:done"},
                          {{"s0", "trap", 1.0}, {"trap", "trap", 1.0}, {"done", "done", 1.0}}),
                    0.0});
  corpus.push_back(
      {"double loop",
       chain(ModelKind::Discrete, {"s0", "s1", "done:done", "fail:fail"},
             {{"s0", "s0", 0.2},
              {"s0", "s1", 0.8},
              {"s1", "s1", 0.3},
              {"s1", "done", 0.4},
              {"s1", "fail", 0.3}}),
       // P(s0) = P(s1); P(s1) = 0.4/(1-0.3) after loop elimination
       0.4 / 0.7});
  corpus.push_back({"competing targets",
                    chain(ModelKind::Discrete, {"s0", "done:done", "other", "fail:fail"},
                          {{"s0", "done", 0.35},
                           {"s0", "other", 0.4},
                           {"s0", "fail", 0.25},
                           {"other", "s0", 1.0}}),
                    // g = 0.35 + 0.4 g  =>  g = 0.35 / 0.6
                    0.35 / 0.6});
  corpus.push_back({"six-state funnel",
                    chain(ModelKind::Discrete,
                          {"s0", "s1", "s2", "s3", "done:done", "fail:fail"},
                          {{"s0", "s1", 0.5},
                           {"s0", "s2", 0.5},
                           {"s1", "s3", 0.5},
                           {"s1", "fail", 0.5},
                           {"s2", "s3", 0.25},
                           {"s2", "fail", 0.75},
                           {"s3", "done", 0.8},
                           {"s3", "fail", 0.2}}),
                    (0.5 * 0.5 + 0.5 * 0.25) * 0.8});

  for (auto& e : corpus) {
    CAPTURE(e.name);
    REQUIRE(validate_model(e.model).empty());
    CHECK(dtmc_reach_probability(e.model, "done") == doctest::Approx(e.expected).epsilon(kTol));
  }
}

TEST_CASE("expected reward corpus") {
  struct Entry {
    const char* name;
    MarkovModel model;
    const char* reward;
    double expected;
  };
  std::vector<Entry> corpus;

  corpus.push_back({"single transition reward",
                    chain(ModelKind::Discrete, {"s0", "done:done"}, {{"s0", "done", 1.0}},
                          {{"r", {}, {{"s0", "done", 5.0}}}}),
                    "r", 5.0});
  corpus.push_back({"geometric retry pays per loop",
                    chain(ModelKind::Discrete, {"s0", "done:done"},
                          {{"s0", "s0", 0.5}, {"s0", "done", 0.5}},
                          {{"r", {}, {{"s0", "s0", 1.0}}}}),
                    "r", 1.0});
  corpus.push_back({"state rewards accumulate per visit",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done"},
                          {{"s0", "s1", 1.0}, {"s1", "done", 1.0}},
                          {{"r", {{"s0", 1.0}, {"s1", 2.0}}, {}}}),
                    "r", 3.0});
  corpus.push_back({"expected visits of a sticky state",
                    chain(ModelKind::Discrete, {"s0", "done:done"},
                          {{"s0", "s0", 0.75}, {"s0", "done", 0.25}},
                          {{"r", {{"s0", 1.0}}, {}}}),
                    "r", 4.0});
  corpus.push_back({"mixed state and transition rewards",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done"},
                          {{"s0", "s1", 0.5}, {"s0", "done", 0.5}, {"s1", "done", 1.0}},
                          {{"r", {{"s1", 3.0}}, {{"s0", "s1", 2.0}, {"s0", "done", 4.0}}}}),
                    "r", 0.5 * (2.0 + 3.0) + 0.5 * 4.0});
  corpus.push_back({"expected transition count in a loop",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done"},
                          {{"s0", "s1", 1.0}, {"s1", "s0", 0.5}, {"s1", "done", 0.5}},
                          {{"r",
                            {},
                            {{"s0", "s1", 1.0}, {"s1", "s0", 1.0}, {"s1", "done", 1.0}}}}),
                    // E0 = 1 + E1, E1 = 1 + 0.5 E0  =>  E0 = 4
                    "r", 4.0});
  corpus.push_back({"reward beyond an intermediate target is not counted",
                    chain(ModelKind::Discrete, {"s0", "mid:done", "end"},
                          {{"s0", "mid", 1.0}, {"mid", "end", 1.0}, {"end", "end", 1.0}},
                          {{"r", {{"mid", 7.0}, {"end", 9.0}}, {{"s0", "mid", 1.0}}}}),
                    "r", 1.0});
  corpus.push_back({"two-branch time",
                    chain(ModelKind::Discrete, {"s0", "a", "b", "done:done"},
                          {{"s0", "a", 0.25},
                           {"s0", "b", 0.75},
                           {"a", "done", 1.0},
                           {"b", "done", 1.0}},
                          {{"r", {{"a", 8.0}, {"b", 4.0}}, {}}}),
                    "r", 0.25 * 8.0 + 0.75 * 4.0});
  corpus.push_back({"five-state chain of unit steps",
                    chain(ModelKind::Discrete, {"s0", "s1", "s2", "s3", "done:done"},
                          {{"s0", "s1", 1.0},
                           {"s1", "s2", 1.0},
                           {"s2", "s3", 1.0},
                           {"s3", "done", 1.0}},
                          {{"r",
                            {{"s0", 1.0}, {"s1", 1.0}, {"s2", 1.0}, {"s3", 1.0}},
                            {}}}),
                    "r", 4.0});
  corpus.push_back({"nested loops",
                    chain(ModelKind::Discrete, {"s0", "s1", "done:done"},
                          {{"s0", "s0", 0.5},
                           {"s0", "s1", 0.5},
                           {"s1", "s1", 0.25},
                           {"s1", "done", 0.75}},
                          {{"r", {{"s0", 1.0}, {"s1", 2.0}}, {}}}),
                    // visits(s0) = 2, visits(s1) = 4/3
                    "r", 2.0 + 2.0 * (4.0 / 3.0)});
  corpus.push_back({"reward on an almost sure lasso",
                    chain(ModelKind::Discrete, {"s0", "s1", "s2", "done:done"},
                          {{"s0", "s1", 0.5},
                           {"s0", "s2", 0.5},
                           {"s1", "s2", 1.0},
                           {"s2", "s0", 0.1},
                           {"s2", "done", 0.9}},
                          {{"r", {}, {{"s2", "done", 10.0}}}}),
                    "r", 10.0});

  for (auto& e : corpus) {
    CAPTURE(e.name);
    REQUIRE(validate_model(e.model).empty());
    CHECK(dtmc_expected_reward(e.model, e.reward, "done") ==
          doctest::Approx(e.expected).epsilon(kTol));
  }
}

TEST_CASE("divergent reward is detected") {
  MarkovModel m = chain(ModelKind::Discrete, {"s0", "done:done", "fail:fail"},
                        {{"s0", "done", 0.9}, {"s0", "fail", 0.1}},
                        {{"r", {{"s0", 1.0}}, {}}});
  CHECK_THROWS_AS(dtmc_expected_reward(m, "r", "done"), DivergentReward);
}

TEST_CASE("workflow chain matches the Monte-Carlo oracle") {
  FxRegistry registry = load_fx_registry(std::string(CERTLOOP_DATA_DIR) + "/fx/registry.kv");
  FxApplication app(registry);
  Configuration config = enumerate_fx_configs(registry)[5];
  MarkovModel model = bind_parameters(build_fx_template(registry.params),
                                      fx_bindings(registry, config, app.initial_observations()));

  double reach = dtmc_reach_probability(model, "done");
  McEstimate mc = mc_dtmc_reach(model, "done", 1000000, 20260810);
  CAPTURE(reach);
  CAPTURE(mc.mean);
  CHECK(mc.within_3_sigma(reach));

  double time = dtmc_expected_reward(model, "time", "end");
  McEstimate mc_time = mc_dtmc_reach_reward(model, "time", "end", 1000000, 8102026);
  CHECK(mc_time.within_3_sigma(time));
}

TEST_CASE("probability bounds are inclusive at the threshold") {
  MarkovModel m = chain(ModelKind::Discrete, {"s0", "s1", "done:done", "fail:fail"},
                        {{"s0", "s1", 0.9}, {"s0", "fail", 0.1}, {"s1", "done", 1.0}});
  Property p{"R1", ProbReach{Bound::AtLeast, 0.9, "done"}};
  VerificationResult r = evaluate(m, p);
  CHECK(r.value == doctest::Approx(0.9).epsilon(kTol));
  REQUIRE(r.satisfied.has_value());
  CHECK(*r.satisfied);
}

TEST_CASE("continuous-time property on a discrete model is incompatible") {
  MarkovModel m =
      chain(ModelKind::Discrete, {"s0", "done:done"}, {{"s0", "done", 1.0}});
  Property p{"R", CumulReward{"energy", Bound::AtMost, 120.0, 3.125}};
  CHECK_THROWS_AS(evaluate(m, p), IncompatibleProperty);
}

TEST_CASE("property: shifting mass from a fail trap onto the target never lowers reach") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    double w_target = 0.1 + 0.5 * uniform01(rng);
    double w_fail = 0.1 + 0.3 * uniform01(rng);
    double w_loop = 1.0 - w_target - w_fail;
    MarkovModel m = chain(ModelKind::Discrete, {"s0", "mid", "done:done", "fail:fail"},
                          {{"s0", "mid", w_loop},
                           {"s0", "done", w_target},
                           {"s0", "fail", w_fail},
                           {"mid", "s0", 0.5},
                           {"mid", "fail", 0.5}});
    REQUIRE(validate_model(m).empty());
    double base = dtmc_reach_probability(m, "done");

    double delta = uniform01(rng) * w_fail;
    MarkovModel shifted = m;
    shifted.transitions[1].weight += delta;  // s0 -> done
    shifted.transitions[2].weight -= delta;  // s0 -> fail
    REQUIRE(validate_model(shifted).empty());
    double boosted = dtmc_reach_probability(shifted, "done");
    CHECK(boosted >= base - 1e-12);
  }
}

TEST_CASE("reach probability stays within [0,1]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    double w = uniform01(rng);
    MarkovModel m = chain(ModelKind::Discrete, {"s0", "done:done", "fail:fail"},
                          {{"s0", "done", w}, {"s0", "fail", 1.0 - w}});
    double p = dtmc_reach_probability(m, "done");
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(p == doctest::Approx(w).epsilon(kTol));
  }
}
