#ifndef CERTLOOP_FX_HPP
#define CERTLOOP_FX_HPP

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "certloop/mape.hpp"

namespace certloop {

/// Workflow operations in configuration-index order (most significant digit
/// first) with their parameter abbreviations.
inline const std::array<std::pair<const char*, const char*>, 6> kFxOperations{{
    {"MarketWatch", "MW"},
    {"TechnicalAnalysis", "TA"},
    {"FundamentalAnalysis", "FA"},
    {"Alarm", "Al"},
    {"Order", "Or"},
    {"Notification", "No"},
}};

inline constexpr const char* kNoService = "NoSvc";

struct ServiceSpec {
  std::string operation;
  std::string id;            // MW0, TA1, ...
  double response_time = 0;  // seconds
  double reliability = 0;    // success probability
  double price = 0;          // currency units per invocation
};

/// Branch probabilities of the trading workflow.  These are deployment
/// knobs, not service characteristics; the shipped defaults are calibrated
/// against the reference service table (see data/fx/registry.kv).
struct WorkflowParams {
  double expert_share = 0.9;      // probability a run uses the automated loop
  double ta_satisfied = 0.35;     // analysis outcome: trade
  double ta_unsatisfied = 0.55;   // analysis outcome: watch again
  double ta_high_variance = 0.1;  // analysis outcome: alarm the trader
  double fa_proceed = 0.3;        // assessment convinces the trader to order

  void validate() const;  // outcome shares sum to 1, escape probability > 0
};

struct FxRegistry {
  std::vector<ServiceSpec> services;
  WorkflowParams params;
  double w1 = 1.0;
  double w2 = 2.0;
  double deadline_seconds = 2.0;

  std::vector<const ServiceSpec*> implementations_of(const std::string& operation) const;
  const ServiceSpec* find(const std::string& id) const;
};

FxRegistry fx_registry_from_kv(const KvNode& node);
KvNode fx_registry_to_kv(const FxRegistry& registry);
FxRegistry load_fx_registry(const std::string& path);

// ---------------------------------------------------------------------------

/// Parametric workflow DTMC.  One state per operation plus absorbing
/// done/fail states (label "end" covers both, so expected rewards to
/// workflow termination are finite even when some runs fail).  Free
/// parameters: p_X, time_X, price_X per operation abbreviation X.  A bypassed
/// Order binds (1, 0, 0).
ModelTemplate build_fx_template(const WorkflowParams& params);

/// Full cross product of registered implementations, ordered by the base-N
/// configuration index with the MarketWatch digit most significant.
std::vector<Configuration> enumerate_fx_configs(const FxRegistry& registry);

/// Index <-> configuration bijection under the same digit convention.
std::size_t fx_config_index(const FxRegistry& registry, const Configuration& config);

constexpr double kFxReliabilityFloor = 0.9;
constexpr double kFxResponseTimeCap = 5.0;  // seconds

struct FxRequirements {
  Property reliability;    // P >= 0.9 [F done]
  Property response_time;  // time to termination <= 5 s
  Property price;          // expected price per execution (query)
};

FxRequirements fx_requirements();

double fx_cost(double price, double time, double w1, double w2);

/// Template parameter bindings for one configuration under the observed
/// service characteristics (keys p_<id>, time_<id>, price_<id>).
Bindings fx_bindings(const FxRegistry& registry, const Configuration& config,
                     const Bindings& observations);

class FxSpace : public ConfigurationSpace {
 public:
  FxSpace(const FxRegistry& registry, const Bindings& observations, double w1, double w2);

  std::size_t size() const override { return configs_.size(); }
  const Configuration& configuration(std::size_t i) const override { return configs_[i]; }
  std::vector<std::string> value_columns() const override {
    return {"R1", "R2", "price", "cost"};
  }
  std::vector<VerificationResult> evaluate(std::size_t i,
                                           const Deadline& deadline) const override;

 private:
  FxRegistry registry_;
  Bindings observations_;
  ModelTemplate template_;
  std::vector<Configuration> configs_;
  double w1_, w2_;
};

// ---------------------------------------------------------------------------
// Scenario and simulator

struct FxScenario {
  std::vector<TimedChange> events;  // keys p_<id>, time_<id>, price_<id>
  double end_time = 0.0;
  std::optional<double> w1, w2;
};

FxScenario fx_scenario_from_kv(const KvNode& node);
KvNode fx_scenario_to_kv(const FxScenario& scenario);
FxScenario load_fx_scenario(const std::string& path);

/// Service-market stand-in: scheduled characteristic changes are emitted to
/// the monitor (all registered services are watched, selected or not), and
/// ChangeService commands rebind the workflow's ground truth.
class FxSimulator : public EventSource, public Effectors {
 public:
  FxSimulator(const FxRegistry& registry, FxScenario scenario);

  std::optional<SensedEvent> next_event() override;
  void apply(const PlanStep& step) override;

  const Configuration& bound_services() const { return bound_; }
  double characteristic(const std::string& key) const;  // p_MW0, time_TA1, ...
  std::string trace_csv() const;

 private:
  FxRegistry registry_;
  FxScenario scenario_;
  Bindings truth_;
  Configuration bound_;
  std::size_t next_change_ = 0;
  std::vector<SensedEvent> pending_;
  double now_ = 0.0;
  std::vector<std::pair<double, Configuration>> trace_;
};

// ---------------------------------------------------------------------------

class FxApplication : public Application {
 public:
  FxApplication(FxRegistry registry);

  std::string name() const override { return "fx"; }
  std::vector<std::string> sensed_parameters() const override;
  Bindings initial_observations() const override;
  /// First implementation of every operation, with Order bypassed.
  Configuration initial_configuration() const override;
  bool is_failsafe(const Configuration& config) const override;
  Configuration failsafe_configuration(const Configuration& current) const override;
  std::unique_ptr<ConfigurationSpace> make_space(const Bindings& observations) const override;
  AdaptationPlan plan_steps(const Configuration& from, const Configuration& to) const override;
  Configuration apply_step(const Configuration& config, const PlanStep& step) const override;
  std::vector<RequirementDescriptor> requirements() const override;

  const FxRegistry& registry() const { return registry_; }

 private:
  FxRegistry registry_;
};

}  // namespace certloop

#endif
