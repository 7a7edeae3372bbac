#include "certloop/mape.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

double Application::cost_of(const ConfigResult& entry) const { return entry.value_of("cost"); }

KnowledgeRepository::KnowledgeRepository(Configuration initial_config,
                                         Bindings initial_observations)
    : current_(std::move(initial_config)) {
  for (const auto& [name, value] : initial_observations)
    observations_[name] = Observation{value, 0.0};
}

Bindings KnowledgeRepository::observation_values() const {
  Bindings out;
  for (const auto& [name, obs] : observations_) out[name] = obs.value;
  return out;
}

void KnowledgeRepository::record_observation(const std::string& parameter, double value,
                                             double timestamp) {
  observations_[parameter] = Observation{value, timestamp};
}

const LoopRecord& KnowledgeRepository::append_record(LoopRecord record) {
  if (!log_.empty() && record.timestamp < log_.back().timestamp)
    throw StaleTimestamp("evidence log timestamps must be monotonic");
  record.seq = static_cast<int>(log_.size()) + 1;
  log_.push_back(std::move(record));
  return log_.back();
}

MonitorOutcome monitor_step(const Application& app, KnowledgeRepository& knowledge,
                            const SensedEvent& event, double significance) {
  const auto known = app.sensed_parameters();
  if (std::find(known.begin(), known.end(), event.parameter) == known.end())
    throw UnknownParameter(event.parameter);
  auto it = knowledge.observations().find(event.parameter);
  if (it != knowledge.observations().end() && event.timestamp < it->second.timestamp)
    throw StaleTimestamp(event.parameter + " at t=" + format_double(event.timestamp) +
                         " precedes t=" + format_double(it->second.timestamp));

  bool significant;
  if (it == knowledge.observations().end()) {
    significant = true;  // first reading of this parameter
  } else {
    double old = it->second.value;
    double magnitude = std::max(std::abs(old), 1e-12);
    significant = std::abs(event.value - old) >= significance * magnitude;
  }
  knowledge.record_observation(event.parameter, event.value, event.timestamp);
  return significant ? MonitorOutcome::AnalysisTriggered : MonitorOutcome::NoAction;
}

std::string AdaptationDecision::kind_name() const {
  switch (kind) {
    case Kind::Keep:
      return "keep";
    case Kind::Adapt:
      return "adapt";
    case Kind::Failsafe:
      return "failsafe";
  }
  return "?";
}

AnalysisOutcome analyze(const Application& app, const KnowledgeRepository& knowledge,
                        const Deadline& deadline,
                        const std::optional<LatencyInjection>& injected_latency) {
  AnalysisOutcome outcome;
  outcome.space = app.make_space(knowledge.observation_values());

  BatchOptions options;
  options.deadline = deadline;
  options.injected_latency = injected_latency;
  outcome.batch = verify_config_space(*outcome.space, options);

  if (outcome.batch.deadline_exceeded) {
    outcome.decision.kind = AdaptationDecision::Kind::Failsafe;
    outcome.decision.target = app.failsafe_configuration(knowledge.current_configuration());
    outcome.decision.reason = "verification deadline exceeded";
    return outcome;
  }

  const ConfigResult* best = nullptr;
  double best_cost = 0.0;
  for (const auto& entry : outcome.batch.completed) {
    if (!entry.feasible()) continue;
    outcome.feasible_count += 1;
    double cost = app.cost_of(entry);
    if (!best || cost < best_cost) {
      best = &entry;
      best_cost = cost;
    }
  }

  if (!best) {
    outcome.decision.kind = AdaptationDecision::Kind::Failsafe;
    outcome.decision.target = app.failsafe_configuration(knowledge.current_configuration());
    outcome.decision.reason = "no feasible configuration";
    return outcome;
  }

  const Configuration& chosen = outcome.space->configuration(best->index);
  if (chosen == knowledge.current_configuration()) {
    outcome.decision.kind = AdaptationDecision::Kind::Keep;
    outcome.decision.target = chosen;
  } else {
    outcome.decision.kind = AdaptationDecision::Kind::Adapt;
    outcome.decision.target = chosen;
  }
  return outcome;
}

AdaptationPlan plan(const Application& app, const Configuration& current,
                    const Configuration& target) {
  if (current == target) throw SameConfiguration();
  return app.plan_steps(current, target);
}

Configuration execute(const Application& app, const AdaptationPlan& plan, Effectors& effectors,
                      KnowledgeRepository& knowledge) {
  Configuration applied = knowledge.current_configuration();
  for (const auto& step : plan.steps) {
    try {
      effectors.apply(step);
    } catch (const EffectorFailure&) {
      // Partially applied state is the observed truth now.
      knowledge.set_current_configuration(applied);
      throw;
    }
    applied = app.apply_step(applied, step);
    knowledge.set_current_configuration(applied);
  }
  return applied;
}

// ---------------------------------------------------------------------------

std::string evidence_row_digest(const Configuration& config, const std::string& requirement_id,
                                double value) {
  return digest_hex(config.summary() + "|" + requirement_id + "|" + format_double(value));
}

std::string evidence_batch_digest(const std::string& csv_digest,
                                  const std::string& requirement_id) {
  return digest_hex("batch|" + csv_digest + "|" + requirement_id);
}

std::string batch_csv_text(const ConfigurationSpace& space, const BatchOutcome& outcome) {
  std::ostringstream csv;
  write_batch_csv(csv, space, outcome);
  return csv.str();
}

ArgumentEngine::ArgumentEngine(GsnArgument partial,
                               std::vector<RequirementDescriptor> requirements)
    : partial_(std::move(partial)), requirements_(std::move(requirements)) {}

const GsnArgument& ArgumentEngine::emit_full(const AdaptationDecision& decision,
                                             const BatchOutcome& batch,
                                             const ConfigurationSpace& space, double timestamp) {
  std::vector<EvidenceBinding> bindings;
  if (decision.kind == AdaptationDecision::Kind::Failsafe) {
    std::string csv_digest = digest_hex(batch_csv_text(space, batch));
    for (const auto& r : requirements_) {
      if (r.design_time) continue;
      bindings.push_back({r.id, evidence_batch_digest(csv_digest, r.id)});
    }
  } else {
    const ConfigResult* row = nullptr;
    for (const auto& entry : batch.completed) {
      if (space.configuration(entry.index) == decision.target) {
        row = &entry;
        break;
      }
    }
    if (!row || row->error)
      throw EvidenceMismatch("batch evidence has no row for configuration " +
                             decision.target.summary());
    for (const auto& r : requirements_) {
      if (r.design_time) continue;
      double value = row->value_of(r.value_column);
      bindings.push_back({r.id, evidence_row_digest(decision.target, r.id, value)});
    }
  }

  int version = static_cast<int>(versions_.size()) + 1;
  GsnArgument full =
      instantiate_full(partial_, decision.target, bindings, version, timestamp);
  auto problems = validate(full);
  if (!problems.empty())
    throw Error("emitted argument fails validation: " + problems.front());
  versions_.push_back(std::move(full));
  return versions_.back();
}

// ---------------------------------------------------------------------------

namespace {

Deadline make_deadline(const LoopOptions& options) {
  return options.wall_clock ? Deadline::after(options.deadline_seconds)
                            : Deadline::logical(options.deadline_seconds);
}

struct BatchedEvents {
  double timestamp = 0.0;
  std::string summary;
  bool triggered = false;
};

}  // namespace

std::vector<LoopRecord> run_loop(const Application& app, KnowledgeRepository& knowledge,
                                 EventSource& events, Effectors& effectors,
                                 ArgumentEngine& arguments, const LoopOptions& options,
                                 const LoopHooks& hooks) {
  std::vector<LoopRecord> records;

  auto run_analysis_cycle = [&](double timestamp, const std::string& event_summary) {
    std::string summary = event_summary;
    for (int attempt = 0; attempt <= options.effector_retry_cap; ++attempt) {
      if (hooks.on_dispatch) hooks.on_dispatch(timestamp);
      auto wall_start = std::chrono::steady_clock::now();
      AnalysisOutcome outcome = analyze(app, knowledge, make_deadline(options),
                                        options.injected_latency);
      double analysis_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

      LoopRecord record;
      record.timestamp = timestamp;
      record.event_summary = summary;
      record.decision = outcome.decision.kind_name();
      record.target = outcome.decision.target;
      record.feasible_count = outcome.feasible_count;
      record.failsafe_reason = outcome.decision.reason;
      record.analysis_seconds = analysis_seconds;
      record.evidence_digest = digest_hex(batch_csv_text(*outcome.space, outcome.batch));

      const GsnArgument& argument =
          arguments.emit_full(outcome.decision, outcome.batch, *outcome.space, timestamp);
      record.argument_version = argument.version;

      bool effector_failed = false;
      if (!(outcome.decision.target == knowledge.current_configuration())) {
        AdaptationPlan steps = plan(app, knowledge.current_configuration(),
                                    outcome.decision.target);
        try {
          execute(app, steps, effectors, knowledge);
        } catch (const EffectorFailure& failure) {
          effector_failed = true;
          record.failsafe_reason = record.failsafe_reason.empty()
                                       ? std::string("effector failure: ") + failure.step
                                       : record.failsafe_reason;
        }
      }

      const LoopRecord& stored = knowledge.append_record(record);
      records.push_back(stored);
      if (hooks.on_record)
        hooks.on_record(stored, outcome.space.get(), &outcome.batch, &argument);

      if (!effector_failed) return;
      summary = event_summary + " (re-analysis after effector failure)";
    }
  };

  if (options.activation_analysis) run_analysis_cycle(0.0, "activation");

  std::optional<SensedEvent> pending;
  while (true) {
    std::optional<SensedEvent> first = pending ? pending : events.next_event();
    pending.reset();
    if (!first) break;

    // Gather the batch of same-timestamp events.
    BatchedEvents batch;
    batch.timestamp = first->timestamp;
    auto absorb = [&](const SensedEvent& e) {
      if (!batch.summary.empty()) batch.summary += ' ';
      batch.summary += e.parameter + "=" + format_double(e.value);
      try {
        if (monitor_step(app, knowledge, e, options.significance) ==
            MonitorOutcome::AnalysisTriggered)
          batch.triggered = true;
      } catch (const Error& err) {
        batch.summary += " [monitor error: " + std::string(err.what()) + "]";
      }
    };
    absorb(*first);
    while (auto e = events.next_event()) {
      if (e->timestamp != batch.timestamp) {
        pending = e;
        break;
      }
      absorb(*e);
    }

    if (batch.triggered) {
      run_analysis_cycle(batch.timestamp, batch.summary);
    } else {
      LoopRecord record;
      record.timestamp = batch.timestamp;
      record.event_summary = batch.summary;
      record.decision = "no-action";
      record.target = knowledge.current_configuration();
      const LoopRecord& stored = knowledge.append_record(record);
      records.push_back(stored);
      if (hooks.on_record) hooks.on_record(stored, nullptr, nullptr, nullptr);
    }
  }
  return records;
}

}  // namespace certloop
