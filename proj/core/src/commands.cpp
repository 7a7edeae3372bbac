#include "certloop/commands.hpp"

#include <filesystem>
#include <memory>
#include <sstream>

#include "certloop/ctl.hpp"
#include "certloop/errors.hpp"
#include "certloop/fx.hpp"
#include "certloop/util.hpp"
#include "certloop/uuv.hpp"

namespace fs = std::filesystem;

namespace certloop {

namespace {

SuiteReport run_controller_suite(const std::string& automata_path) {
  NetworkFile file = load_network(automata_path);
  StateGraph graph = compose_and_explore(file.network);
  return verify_generic_suite(graph, file.properties);
}

struct AppBundle {
  std::unique_ptr<Application> app;
  std::unique_ptr<EventSource> events;
  Effectors* effectors = nullptr;
  std::function<std::string()> trace_csv;
  double deadline = 2.0;
  std::vector<std::string> config_field_names;
};

AppBundle make_bundle(const RunManifest& manifest) {
  AppBundle bundle;
  if (manifest.application == "uuv") {
    UuvRegistry registry = load_uuv_registry(manifest.registry_path);
    UuvScenario scenario = load_uuv_scenario(manifest.scenario_path);
    if (scenario.w1) registry.w1 = *scenario.w1;
    if (scenario.w2) registry.w2 = *scenario.w2;
    if (manifest.w1) registry.w1 = *manifest.w1;
    if (manifest.w2) registry.w2 = *manifest.w2;
    bundle.deadline = manifest.deadline_seconds.value_or(registry.deadline_seconds);
    auto app = std::make_unique<UuvApplication>(registry);
    for (const auto& [k, v] : app->initial_configuration().fields)
      bundle.config_field_names.push_back(k);
    auto sim = std::make_shared<UuvSimulator>(registry, scenario);
    bundle.effectors = sim.get();
    bundle.trace_csv = [sim] { return sim->trace_csv(); };
    struct Holder : EventSource {
      std::shared_ptr<UuvSimulator> sim;
      std::optional<SensedEvent> next_event() override { return sim->next_event(); }
    };
    auto holder = std::make_unique<Holder>();
    holder->sim = sim;
    bundle.events = std::move(holder);
    bundle.app = std::move(app);
  } else if (manifest.application == "fx") {
    FxRegistry registry = load_fx_registry(manifest.registry_path);
    FxScenario scenario = load_fx_scenario(manifest.scenario_path);
    if (scenario.w1) registry.w1 = *scenario.w1;
    if (scenario.w2) registry.w2 = *scenario.w2;
    if (manifest.w1) registry.w1 = *manifest.w1;
    if (manifest.w2) registry.w2 = *manifest.w2;
    bundle.deadline = manifest.deadline_seconds.value_or(registry.deadline_seconds);
    auto app = std::make_unique<FxApplication>(registry);
    for (const auto& [k, v] : app->initial_configuration().fields)
      bundle.config_field_names.push_back(k);
    auto sim = std::make_shared<FxSimulator>(registry, scenario);
    bundle.effectors = sim.get();
    bundle.trace_csv = [sim] { return sim->trace_csv(); };
    struct Holder : EventSource {
      std::shared_ptr<FxSimulator> sim;
      std::optional<SensedEvent> next_event() override { return sim->next_event(); }
    };
    auto holder = std::make_unique<Holder>();
    holder->sim = sim;
    bundle.events = std::move(holder);
    bundle.app = std::move(app);
  } else {
    throw Error("unknown application: " + manifest.application);
  }
  return bundle;
}

KvNode manifest_to_kv(const RunManifest& manifest, const AppBundle& bundle,
                      const Application& app) {
  KvNode run;
  run.name = "run";
  run.is_block = true;
  run.add("application", manifest.application);
  run.add("registry", manifest.registry_path);
  run.add("scenario", manifest.scenario_path);
  run.add("automata", manifest.automata_path);
  run.add("deadline", bundle.deadline);
  run.add("mode", manifest.wall_clock ? "wall-clock" : "logical-clock");
  run.add("seed", static_cast<double>(manifest.seed));
  run.add("config-fields", static_cast<double>(bundle.config_field_names.size()));
  KvNode& reqs = run.add_block("requirements");
  for (const auto& r : app.requirements()) {
    KvNode& e = reqs.add("req", r.id);
    e.args.push_back(r.value_column.empty() ? "-" : r.value_column);
    e.args.push_back(r.design_time ? "design" : "runtime");
  }
  return run;
}

}  // namespace

int cmd_verify_controller(const RunManifest& manifest, std::ostream& log) {
  try {
    if (manifest.automata_path.empty()) {
      log << "error: no automata network given\n";
      return 2;
    }
    SuiteReport report = run_controller_suite(manifest.automata_path);
    if (!manifest.out_dir.empty()) {
      fs::create_directories(manifest.out_dir);
      write_file(manifest.out_dir + "/controller_report.txt", report.to_text());
    }
    log << report.to_text();
    log << (report.all_hold() ? "all properties hold\n" : "property violations found\n");
    return report.all_hold() ? 0 : 1;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_run_scenario(const RunManifest& manifest, std::ostream& log) {
  try {
    if (manifest.out_dir.empty()) {
      log << "error: no output directory given\n";
      return 2;
    }
    AppBundle bundle = make_bundle(manifest);
    const Application& app = *bundle.app;

    SuiteReport design = run_controller_suite(manifest.automata_path);
    std::string design_text = design.to_text();
    if (!design.all_hold()) {
      log << design_text << "error: controller verification failed, not deploying\n";
      return 1;
    }

    GsnArgument partial = instantiate_partial(load_argument_pattern(), app.requirements(),
                                              design, digest_hex(design_text));
    ArgumentEngine arguments(partial, app.requirements());
    KnowledgeRepository knowledge(app.initial_configuration(), app.initial_observations());

    ArchiveWriter archive(manifest.out_dir);
    archive.write_manifest(manifest_to_kv(manifest, bundle, app));
    archive.write_design_report(design_text);

    LoopOptions options;
    options.deadline_seconds = bundle.deadline;
    options.wall_clock = manifest.wall_clock;
    LoopHooks hooks;
    hooks.on_record = [&](const LoopRecord& record, const ConfigurationSpace* space,
                          const BatchOutcome* batch, const GsnArgument* argument) {
      archive.on_record(record, space, batch, argument);
      log << "t=" << format_double(record.timestamp) << " " << record.decision;
      if (record.decision != "no-action") log << " -> " << record.target.summary();
      log << "\n";
    };

    std::vector<LoopRecord> records =
        run_loop(app, knowledge, *bundle.events, *bundle.effectors, arguments, options, hooks);
    archive.write_trace(bundle.trace_csv());
    archive.finalize();
    log << records.size() << " decisions archived to " << manifest.out_dir << "\n";
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_report(const std::string& archive_dir, std::ostream& log) {
  try {
    AuditReport audit = audit_archive(archive_dir);
    log << audit.summary_text;
    if (fs::exists(archive_dir + "/timing.csv")) {
      log << "\nwall-clock timing (timing.csv)\n" << read_file(archive_dir + "/timing.csv");
    }
    if (!audit.ok) {
      for (const auto& p : audit.problems) log << "problem: " << p << "\n";
      return 1;
    }
    log << "archive is complete and every evidence reference resolves\n";
    return 0;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace certloop
