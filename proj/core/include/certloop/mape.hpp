#ifndef CERTLOOP_MAPE_HPP
#define CERTLOOP_MAPE_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "certloop/configuration.hpp"
#include "certloop/gsn.hpp"
#include "certloop/verifier.hpp"

namespace certloop {

// ---------------------------------------------------------------------------
// Sensing and acting interfaces (implemented by the case-study simulators)

struct SensedEvent {
  double timestamp = 0.0;  // logical seconds
  std::string parameter;
  double value = 0.0;
};

/// Scheduled ground-truth change inside a simulator scenario.
struct TimedChange {
  double time = 0.0;
  std::string parameter;
  double value = 0.0;
};

class EventSource {
 public:
  virtual ~EventSource() = default;
  virtual std::optional<SensedEvent> next_event() = 0;
};

struct PlanStep {
  std::string action;  // sensor-on | sensor-off | set-speed | change-service
  std::string arg1;
  std::string arg2;

  std::string summary() const {
    std::string out = action + "(" + arg1;
    if (!arg2.empty()) out += ", " + arg2;
    return out + ")";
  }
};

struct AdaptationPlan {
  std::vector<PlanStep> steps;
};

class Effectors {
 public:
  virtual ~Effectors() = default;
  /// Applies one step to the controlled system; throws EffectorFailure.
  virtual void apply(const PlanStep& step) = 0;
};

// ---------------------------------------------------------------------------
// Application binding: everything the generic loop needs to know about a
// concrete managed system.

class Application {
 public:
  virtual ~Application() = default;
  virtual std::string name() const = 0;

  virtual std::vector<std::string> sensed_parameters() const = 0;
  virtual Bindings initial_observations() const = 0;
  virtual Configuration initial_configuration() const = 0;

  virtual bool is_failsafe(const Configuration& config) const = 0;
  virtual Configuration failsafe_configuration(const Configuration& current) const = 0;

  /// Binds the up-to-date observations into a verifiable configuration space.
  virtual std::unique_ptr<ConfigurationSpace> make_space(const Bindings& observations) const = 0;

  /// Cost of a feasible entry (lower is better); by convention the space
  /// exposes a `cost` value column.
  virtual double cost_of(const ConfigResult& entry) const;

  virtual AdaptationPlan plan_steps(const Configuration& from, const Configuration& to) const = 0;
  virtual Configuration apply_step(const Configuration& config, const PlanStep& step) const = 0;

  virtual std::vector<RequirementDescriptor> requirements() const = 0;
};

// ---------------------------------------------------------------------------
// Knowledge repository

struct Observation {
  double value = 0.0;
  double timestamp = 0.0;
};

struct LoopRecord {
  int seq = 0;
  double timestamp = 0.0;
  std::string event_summary;
  std::string decision;  // no-action | keep | adapt | failsafe
  Configuration target;
  std::string evidence_digest;
  int argument_version = -1;
  std::size_t feasible_count = 0;
  std::string failsafe_reason;
  double analysis_seconds = 0.0;  // wall time, archived separately
};

class KnowledgeRepository {
 public:
  KnowledgeRepository(Configuration initial_config, Bindings initial_observations);

  const Configuration& current_configuration() const { return current_; }
  void set_current_configuration(Configuration c) { current_ = std::move(c); }

  const std::map<std::string, Observation>& observations() const { return observations_; }
  Bindings observation_values() const;
  void record_observation(const std::string& parameter, double value, double timestamp);

  /// Appends (assigning the next sequence number) and returns the stored
  /// record; timestamps must be monotonic.
  const LoopRecord& append_record(LoopRecord record);
  const std::vector<LoopRecord>& evidence_log() const { return log_; }

 private:
  Configuration current_;
  std::map<std::string, Observation> observations_;
  std::vector<LoopRecord> log_;
};

// ---------------------------------------------------------------------------
// MAPE operations

enum class MonitorOutcome { NoAction, AnalysisTriggered };

/// Updates the observation store; triggers analysis when the relative change
/// reaches `significance` (default 1%).  Throws UnknownParameter /
/// StaleTimestamp.
MonitorOutcome monitor_step(const Application& app, KnowledgeRepository& knowledge,
                            const SensedEvent& event, double significance = 0.01);

struct AdaptationDecision {
  enum class Kind { Keep, Adapt, Failsafe };
  Kind kind = Kind::Keep;
  Configuration target;
  std::string reason;  // failsafe cause

  std::string kind_name() const;
};

struct AnalysisOutcome {
  AdaptationDecision decision;
  BatchOutcome batch;
  std::unique_ptr<ConfigurationSpace> space;
  std::size_t feasible_count = 0;
};

/// Enumerates and verifies the configuration space under the deadline,
/// filters infeasible entries, and selects the cheapest feasible
/// configuration (ties resolve to enumeration order).  Deadline expiry or an
/// empty feasible set yields the failsafe decision.
AnalysisOutcome analyze(const Application& app, const KnowledgeRepository& knowledge,
                        const Deadline& deadline,
                        const std::optional<LatencyInjection>& injected_latency = std::nullopt);

/// Minimal ordered step list turning `current` into `target`; throws
/// SameConfiguration when they already match.
AdaptationPlan plan(const Application& app, const Configuration& current,
                    const Configuration& target);

/// Issues the plan, tracking partial application in the knowledge repository.
/// On EffectorFailure the applied prefix remains in effect and the exception
/// propagates so the loop can schedule re-analysis.
Configuration execute(const Application& app, const AdaptationPlan& plan, Effectors& effectors,
                      KnowledgeRepository& knowledge);

// ---------------------------------------------------------------------------
// Argument engine: produces a fresh full argument per analysed decision.

class ArgumentEngine {
 public:
  ArgumentEngine(GsnArgument partial, std::vector<RequirementDescriptor> requirements);

  const GsnArgument& partial() const { return partial_; }

  /// Binds decision evidence into the partial argument.  Adapt and Keep
  /// decisions cite the batch row of the selected configuration; failsafe
  /// decisions cite the whole batch (the evidence that nothing suitable was
  /// found in time).  Every emitted version is retained.
  const GsnArgument& emit_full(const AdaptationDecision& decision, const BatchOutcome& batch,
                               const ConfigurationSpace& space, double timestamp);

  const std::vector<GsnArgument>& versions() const { return versions_; }

 private:
  GsnArgument partial_;
  std::vector<RequirementDescriptor> requirements_;
  std::vector<GsnArgument> versions_;
};

/// Digest for one requirement row of a batch evidence file.
std::string evidence_row_digest(const Configuration& config, const std::string& requirement_id,
                                double value);
/// Digest for whole-batch (failsafe) evidence.
std::string evidence_batch_digest(const std::string& csv_digest,
                                  const std::string& requirement_id);
std::string batch_csv_text(const ConfigurationSpace& space, const BatchOutcome& outcome);

// ---------------------------------------------------------------------------
// The loop

struct LoopOptions {
  double deadline_seconds = 2.0;
  bool wall_clock = false;
  std::optional<LatencyInjection> injected_latency;
  double significance = 0.01;
  int effector_retry_cap = 3;
  bool activation_analysis = true;  // run one analysis before the first event
};

struct LoopHooks {
  /// Called when an event batch starts being processed (before analysis).
  std::function<void(double timestamp)> on_dispatch;
  /// Called after each record is appended; space/batch/argument may be null
  /// (no-action records carry no analysis artifacts).
  std::function<void(const LoopRecord&, const ConfigurationSpace*, const BatchOutcome*,
                     const GsnArgument*)>
      on_record;
};

/// Event-triggered sequential MAPE loop: drains the event source, processing
/// same-timestamp events as one batch through monitor -> analyze -> plan ->
/// execute.  Individual step errors are logged and the loop continues.
std::vector<LoopRecord> run_loop(const Application& app, KnowledgeRepository& knowledge,
                                 EventSource& events, Effectors& effectors,
                                 ArgumentEngine& arguments, const LoopOptions& options = {},
                                 const LoopHooks& hooks = {});

}  // namespace certloop

#endif
