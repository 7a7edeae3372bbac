#ifndef CERTLOOP_UUV_HPP
#define CERTLOOP_UUV_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "certloop/mape.hpp"

namespace certloop {

/// Static description of one on-board sensor.  Measurement accuracy falls
/// off linearly with vehicle speed: p(sp) = clamp(p_max - kappa * sp, 0, 1);
/// p_max and kappa are calibration constants shipped in the registry file.
struct SensorSpec {
  std::string name;            // sensor1, sensor2, ...
  double rate = 0.0;           // nominal measurements per second
  double energy = 0.0;         // Joules per measurement
  double energy_on = 0.0;      // Joules to switch on
  double energy_off = 0.0;     // Joules to switch off
  double p_max = 1.0;
  double kappa = 0.0;
};

struct SpeedGrid {
  double lo = 1.0;
  double hi = 5.0;
  int count = 21;

  std::vector<double> values() const;
};

struct UuvRegistry {
  std::vector<SensorSpec> sensors;
  SpeedGrid grid;
  double max_speed = 5.0;
  double window_metres = 10.0;  // both throughput and energy are per window
  double w1 = 1.0;
  double w2 = 200.0;
  double deadline_seconds = 2.0;
};

UuvRegistry uuv_registry_from_kv(const KvNode& node);
KvNode uuv_registry_to_kv(const UuvRegistry& registry);
UuvRegistry load_uuv_registry(const std::string& path);

// ---------------------------------------------------------------------------

/// Three-state measurement cycle with competing accurate/inaccurate
/// exponential transitions of rate r*p(sp) and r*(1-p(sp)).  Every state has
/// total exit rate r, every jump is one measurement; the "measure" structure
/// rewards accurate jumps with 1, the "energy" structure rewards every jump
/// with the per-measurement energy.  Template parameters: r, sp.
ModelTemplate build_sensor_template(const SensorSpec& spec, double max_speed = 5.0);

/// All non-empty sensor subsets (bitmask ascending, sensor 1 = lowest bit)
/// crossed with all grid speeds (ascending).
std::vector<Configuration> enumerate_uuv_configs(std::size_t sensor_count,
                                                 const std::vector<double>& speed_grid);

constexpr double kUuvMeasurementsRequired = 20.0;  // per window
constexpr double kUuvEnergyBudget = 120.0;         // Joules per window

struct UuvRequirements {
  Property throughput;  // accurate measurements over the window
  Property energy;      // Joules over the window
  double horizon = 0.0;
};

/// Horizon is window / speed seconds; throws ZeroSpeedHorizon at speed 0
/// (the failsafe configuration is never verified).
UuvRequirements uuv_requirements(double speed, double window_metres = 10.0);

double uuv_cost(double energy, double speed, double w1, double w2);

// ---------------------------------------------------------------------------

/// Configuration space bound to the current sensed rates.  Per-sensor models
/// are verified independently and summed (the components are independent);
/// switch-on/off energy enters the window energy as per-window charges for
/// the sensors switched on/off in the candidate configuration.
class UuvSpace : public ConfigurationSpace {
 public:
  UuvSpace(const UuvRegistry& registry, const Bindings& observed_rates, double w1, double w2);

  std::size_t size() const override { return configs_.size(); }
  const Configuration& configuration(std::size_t i) const override { return configs_[i]; }
  std::vector<std::string> value_columns() const override { return {"R1", "R2", "cost"}; }
  std::vector<VerificationResult> evaluate(std::size_t i,
                                           const Deadline& deadline) const override;

 private:
  UuvRegistry registry_;
  std::vector<double> rates_;
  std::vector<ModelTemplate> templates_;
  std::vector<Configuration> configs_;
  std::vector<std::pair<unsigned, double>> decoded_;  // (mask, speed)
  double w1_, w2_;
};

// ---------------------------------------------------------------------------
// Scenario and simulator

struct ProbeConfig {
  double interval = 600.0;
  double duration = 5.0;
};

struct UuvScenario {
  std::vector<TimedChange> events;  // time-ordered ground-truth rate changes
  ProbeConfig probes;
  double end_time = 0.0;
  std::optional<double> w1, w2;  // optional registry overrides
};

UuvScenario uuv_scenario_from_kv(const KvNode& node);
KvNode uuv_scenario_to_kv(const UuvScenario& scenario);
UuvScenario load_uuv_scenario(const std::string& path);

struct TraceRow {
  double time = 0.0;
  double speed = 0.0;
  std::vector<int> sensors_on;
  bool probe = false;
};

/// Discrete-event stand-in for the vehicle.  Scheduled changes mutate the
/// true rates; changes on switched-on sensors are sensed immediately, while
/// degraded switched-off sensors are re-sensed only during periodic probe
/// windows.  Commands arrive through the Effectors interface; the ground
/// truth is exposed for assertions and the trace for plotting.
class UuvSimulator : public EventSource, public Effectors {
 public:
  UuvSimulator(const UuvRegistry& registry, UuvScenario scenario);

  std::optional<SensedEvent> next_event() override;
  void apply(const PlanStep& step) override;

  double true_rate(std::size_t sensor_index) const;  // 0-based
  bool sensor_on(std::size_t sensor_index) const;
  double speed() const { return speed_; }
  Configuration ground_truth() const;

  const std::vector<TraceRow>& trace() const { return trace_; }
  std::string trace_csv() const;

 private:
  void push_trace(double time, bool probe);

  UuvRegistry registry_;
  UuvScenario scenario_;
  std::vector<double> true_rates_;
  std::vector<double> nominal_rates_;
  std::vector<double> last_sensed_;  // drives the degraded-sensor probing set
  std::vector<bool> on_;
  double speed_ = 0.0;
  double now_ = 0.0;

  std::size_t next_change_ = 0;
  double next_probe_ = 0.0;
  std::vector<SensedEvent> pending_;
  std::vector<TraceRow> trace_;
};

// ---------------------------------------------------------------------------

class UuvApplication : public Application {
 public:
  UuvApplication(UuvRegistry registry);

  std::string name() const override { return "uuv"; }
  std::vector<std::string> sensed_parameters() const override;
  Bindings initial_observations() const override;
  Configuration initial_configuration() const override;  // all off, speed 0
  bool is_failsafe(const Configuration& config) const override;
  Configuration failsafe_configuration(const Configuration& current) const override;
  std::unique_ptr<ConfigurationSpace> make_space(const Bindings& observations) const override;
  AdaptationPlan plan_steps(const Configuration& from, const Configuration& to) const override;
  Configuration apply_step(const Configuration& config, const PlanStep& step) const override;
  std::vector<RequirementDescriptor> requirements() const override;

  const UuvRegistry& registry() const { return registry_; }

 private:
  UuvRegistry registry_;
};

}  // namespace certloop

#endif
