#include "doctest.h"

#include "certloop/errors.hpp"
#include "certloop/fx.hpp"
#include "certloop/model_io.hpp"
#include "certloop/uuv.hpp"

using namespace certloop;

namespace {

/// Raw sensor-cycle template over independent (r, p) for arithmetic checks.
ModelTemplate raw_sensor_template() {
  ModelTemplate t;
  t.kind = ModelKind::Continuous;
  t.state_names = {"sense", "acc", "alt"};
  t.state_labels = {{}, {}, {}};
  Expr acc = expr_parse("r * p");
  Expr inacc = expr_parse("r * (1 - p)");
  t.transitions = {{0, 1, acc}, {1, 0, acc}, {2, 1, acc},
                   {0, 2, inacc}, {1, 2, inacc}, {2, 0, inacc}};
  TemplateRewards measure;
  measure.state_rewards.assign(3, Expr::num(0.0));
  measure.transition_rewards[{0, 1}] = Expr::num(1.0);
  measure.transition_rewards[{1, 0}] = Expr::num(1.0);
  measure.transition_rewards[{2, 1}] = Expr::num(1.0);
  t.rewards.emplace("measure", measure);
  t.parameters = {{"r", "1/s", 1e-9, 100.0}, {"p", "probability", 0.0, 1.0}};
  return t;
}

double rate_of(const MarkovModel& m, const char* from, const char* to) {
  int f = *m.index_of(from), g = *m.index_of(to);
  for (const auto& t : m.transitions)
    if (t.source == f && t.target == g) return t.weight;
  return 0.0;
}

}  // namespace

TEST_CASE("measurement rate splits into accurate and inaccurate rates") {
  MarkovModel m = bind_parameters(raw_sensor_template(), {{"r", 5.0}, {"p", 0.9}});
  CHECK(rate_of(m, "sense", "acc") == doctest::Approx(4.5));
  CHECK(rate_of(m, "sense", "alt") == doctest::Approx(0.5));
  CHECK(validate_model(m).empty());
}

TEST_CASE("zero free parameters binds to the skeleton itself") {
  ModelTemplate t;
  t.kind = ModelKind::Discrete;
  t.state_names = {"a", "b"};
  t.state_labels = {{}, {"done"}};
  t.transitions = {{0, 1, Expr::num(1.0)}};
  MarkovModel m = bind_parameters(t, {});
  CHECK(m.state_names == t.state_names);
  CHECK(m.transitions.size() == 1);
  CHECK(m.transitions[0].weight == 1.0);
}

TEST_CASE("missing parameter is reported by name") {
  FxRegistry registry = load_fx_registry(std::string(CERTLOOP_DATA_DIR) + "/fx/registry.kv");
  ModelTemplate t = build_fx_template(registry.params);
  Bindings partial;
  for (const auto& p : t.parameters)
    if (p.name != "p_MW") partial[p.name] = p.name.rfind("p_", 0) == 0 ? 0.9 : 1.0;
  try {
    bind_parameters(t, partial);
    FAIL("expected MissingParameter");
  } catch (const MissingParameter& e) {
    CHECK(e.name == "p_MW");
  }
}

TEST_CASE("out of range binding is rejected") {
  try {
    bind_parameters(raw_sensor_template(), {{"r", 5.0}, {"p", 1.5}});
    FAIL("expected OutOfRange");
  } catch (const OutOfRange& e) {
    CHECK(e.name == "p");
    CHECK(e.value == doctest::Approx(1.5));
  }
}

TEST_CASE("binding that breaks stochasticity raises InvariantViolation") {
  ModelTemplate t;
  t.kind = ModelKind::Discrete;
  t.state_names = {"a", "b"};
  t.state_labels = {{}, {"done"}};
  t.transitions = {{0, 1, expr_parse("p")}};  // row sums to p
  t.parameters = {{"p", "probability", 0.0, 1.0}};
  CHECK_THROWS_AS(bind_parameters(t, {{"p", 0.5}}), InvariantViolation);
}

TEST_CASE("binding is deterministic") {
  ModelTemplate t = raw_sensor_template();
  MarkovModel a = bind_parameters(t, {{"r", 3.0}, {"p", 0.25}});
  MarkovModel b = bind_parameters(t, {{"r", 3.0}, {"p", 0.25}});
  CHECK(serialize_model(a) == serialize_model(b));
}

TEST_CASE("zero-weight transitions are dropped, p=0 kills the measure reward") {
  MarkovModel m = bind_parameters(raw_sensor_template(), {{"r", 5.0}, {"p", 0.0}});
  // only inaccurate transitions remain
  for (const auto& t : m.transitions) CHECK(t.weight == doctest::Approx(5.0));
  CHECK(m.rewards.at("measure").transition_rewards.empty());
  CHECK(validate_model(m).empty());
}

TEST_CASE("undeclared parameter in a template is rejected") {
  ModelTemplate t;
  t.kind = ModelKind::Discrete;
  t.state_names = {"a", "b"};
  t.state_labels = {{}, {}};
  t.transitions = {{0, 1, expr_parse("mystery")}};
  CHECK_THROWS_AS(validate_template(t), Error);
}
