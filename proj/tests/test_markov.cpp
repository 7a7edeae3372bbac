#include "doctest.h"

#include <random>

#include "builders.hpp"
#include "certloop/fx.hpp"
#include "certloop/markov.hpp"

using namespace certloop;
using namespace certloop::test;

TEST_CASE("a perturbed row is reported with state and deficit") {
  MarkovModel m = chain(ModelKind::Discrete, {"s0", "s1", "done:done"},
                        {{"s0", "s1", 0.88}, {"s0", "done", 0.1}, {"s1", "done", 1.0}});
  auto report = validate_model(m);
  REQUIRE(report.size() == 1);
  CHECK(report[0].detail.find("s0") != std::string::npos);
  CHECK(report[0].detail.find("0.02") != std::string::npos);
}

TEST_CASE("valid workflow chain from the service table validates cleanly") {
  FxRegistry registry = load_fx_registry(std::string(CERTLOOP_DATA_DIR) + "/fx/registry.kv");
  FxApplication app(registry);
  Configuration config = enumerate_fx_configs(registry)[5];
  MarkovModel model = bind_parameters(build_fx_template(registry.params),
                                      fx_bindings(registry, config, app.initial_observations()));
  CHECK(validate_model(model).empty());
}

TEST_CASE("negative rate names the transition") {
  MarkovModel m = chain(ModelKind::Continuous, {"a", "b"}, {{"a", "b", -1.0}});
  auto report = validate_model(m);
  REQUIRE(!report.empty());
  CHECK(report[0].detail.find("a -> b") != std::string::npos);
}

TEST_CASE("ctmc self-loops are rejected") {
  MarkovModel m = chain(ModelKind::Continuous, {"a"}, {{"a", "a", 2.0}});
  CHECK(!validate_model(m).empty());
}

TEST_CASE("absorbing via self loop of weight one is accepted") {
  MarkovModel m =
      chain(ModelKind::Discrete, {"a", "b:done"}, {{"a", "b", 1.0}, {"b", "b", 1.0}});
  CHECK(validate_model(m).empty());
}

TEST_CASE("negative rewards are violations") {
  MarkovModel m = chain(ModelKind::Discrete, {"a", "b:done"}, {{"a", "b", 1.0}},
                        {{"time", {{"a", -1.0}}, {}}});
  CHECK(!validate_model(m).empty());
}

TEST_CASE("duplicate transitions are violations") {
  MarkovModel m =
      chain(ModelKind::Discrete, {"a", "b:done"}, {{"a", "b", 0.5}, {"a", "b", 0.5}});
  CHECK(!validate_model(m).empty());
}

TEST_CASE("property: any single perturbed row yields exactly one violation") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    // random valid 5-state DTMC with an absorbing target
    const int n = 5;
    MarkovModel m;
    m.kind = ModelKind::Discrete;
    for (int i = 0; i < n; ++i) {
      m.state_names.push_back("s" + std::to_string(i));
      m.state_labels.push_back(i == n - 1 ? std::vector<std::string>{"done"}
                                          : std::vector<std::string>{});
    }
    for (int i = 0; i < n - 1; ++i) {
      // two outgoing edges with weights summing to 1
      double w = 0.1 + 0.8 * static_cast<double>(rng() % 1000) / 1000.0;
      int t1 = (i + 1) % n;
      int t2 = n - 1;
      if (t1 == t2) t1 = (i + 2) % n;
      m.transitions.push_back({i, t1, w});
      m.transitions.push_back({i, t2, 1.0 - w});
    }
    REQUIRE(validate_model(m).empty());

    // perturb exactly one row
    std::size_t victim = rng() % m.transitions.size();
    m.transitions[victim].weight += 0.01;
    auto report = validate_model(m);
    CHECK(report.size() == 1);
  }
}

TEST_CASE("digest is stable and content sensitive") {
  MarkovModel m = chain(ModelKind::Discrete, {"a", "b:done"}, {{"a", "b", 1.0}});
  std::string d1 = model_digest(m);
  CHECK(d1 == model_digest(m));
  MarkovModel other = m;
  other.transitions[0].weight = 0.5;
  other.transitions.push_back({0, 0, 0.5});
  CHECK(model_digest(other) != d1);
}

TEST_CASE("independent sum requires continuous-time components") {
  MarkovModel d = chain(ModelKind::Discrete, {"a", "b:done"}, {{"a", "b", 1.0}});
  const MarkovModel* models[] = {&d};
  CHECK_THROWS_AS(build_independent_sum(models, "energy"), Error);
}
