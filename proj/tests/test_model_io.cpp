#include "doctest.h"

#include "certloop/fx.hpp"
#include "certloop/model_io.hpp"
#include "certloop/util.hpp"
#include "certloop/uuv.hpp"

using namespace certloop;

static const std::string kData = CERTLOOP_DATA_DIR;

TEST_CASE("shipped sensor template round-trips and matches the builder") {
  ModelTemplate shipped = load_template(kData + "/uuv/sensor_ctmc.kv");
  std::string once = serialize_template(shipped);
  ModelTemplate again = parse_template(once);
  CHECK(serialize_template(again) == once);

  UuvRegistry registry = load_uuv_registry(kData + "/uuv/registry.kv");
  ModelTemplate built = build_sensor_template(registry.sensors[0], registry.max_speed);
  CHECK(serialize_template(built) == once);
}

TEST_CASE("shipped workflow template round-trips and matches the builder") {
  ModelTemplate shipped = load_template(kData + "/fx/workflow_dtmc.kv");
  std::string once = serialize_template(shipped);
  CHECK(serialize_template(parse_template(once)) == once);

  FxRegistry registry = load_fx_registry(kData + "/fx/registry.kv");
  CHECK(serialize_template(build_fx_template(registry.params)) == once);
}

TEST_CASE("concrete bound models round-trip") {
  UuvRegistry registry = load_uuv_registry(kData + "/uuv/registry.kv");
  ModelTemplate t = build_sensor_template(registry.sensors[1], registry.max_speed);
  MarkovModel m = bind_parameters(t, {{"r", 4.0}, {"sp", 2.8}});
  std::string text = serialize_model(m);
  MarkovModel again = parse_model(text);
  CHECK(serialize_model(again) == text);
  CHECK(model_digest(again) == model_digest(m));
}

TEST_CASE("a template with parameters refuses to parse as a concrete model") {
  std::string text = read_file(kData + "/uuv/sensor_ctmc.kv");
  CHECK_THROWS_AS(parse_model(text), Error);
}

TEST_CASE("registry files round-trip") {
  UuvRegistry uuv = load_uuv_registry(kData + "/uuv/registry.kv");
  KvNode uuv_node = uuv_registry_to_kv(uuv);
  UuvRegistry uuv_again = uuv_registry_from_kv(uuv_node);
  CHECK(kv_serialize(uuv_registry_to_kv(uuv_again)) == kv_serialize(uuv_node));

  FxRegistry fx = load_fx_registry(kData + "/fx/registry.kv");
  KvNode fx_node = fx_registry_to_kv(fx);
  FxRegistry fx_again = fx_registry_from_kv(fx_node);
  CHECK(kv_serialize(fx_registry_to_kv(fx_again)) == kv_serialize(fx_node));
}

TEST_CASE("scenario files round-trip") {
  UuvScenario uuv = load_uuv_scenario(kData + "/uuv/scenario_reference.kv");
  CHECK(uuv.events.size() == 8);
  std::string text = kv_serialize([&] {
    KvNode root;
    root.is_block = true;
    root.children.push_back(uuv_scenario_to_kv(uuv));
    return root;
  }());
  UuvScenario again = uuv_scenario_from_kv(*kv_parse(text).find("scenario"));
  CHECK(again.events.size() == uuv.events.size());
  CHECK(again.probes.interval == uuv.probes.interval);

  FxScenario fx = load_fx_scenario(kData + "/fx/scenario_reference.kv");
  CHECK(fx.events.size() == 10);
}
