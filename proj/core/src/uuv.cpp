#include "certloop/uuv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

std::vector<double> SpeedGrid::values() const {
  std::vector<double> out;
  if (count <= 1) {
    out.push_back(lo);
    return out;
  }
  double step = (hi - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) {
    // Round to a tidy decimal so 3.2 is 3.2, not 3.2000000000000002.
    double v = lo + step * static_cast<double>(i);
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

UuvRegistry uuv_registry_from_kv(const KvNode& node) {
  UuvRegistry r;
  if (const KvNode* w = node.find("weights")) {
    r.w1 = w->num(0);
    r.w2 = w->num(1);
  }
  r.deadline_seconds = node.num_of("deadline", r.deadline_seconds);
  r.window_metres = node.num_of("window", r.window_metres);
  r.max_speed = node.num_of("max-speed", r.max_speed);
  if (const KvNode* g = node.find("speed-grid")) {
    r.grid.lo = g->num_of("min", r.grid.lo);
    r.grid.hi = g->num_of("max", r.grid.hi);
    r.grid.count = static_cast<int>(g->num_of("count", r.grid.count));
  }
  for (const KvNode* s : node.all("sensor")) {
    SensorSpec spec;
    spec.name = s->arg(0);
    spec.rate = s->num_of("rate");
    spec.energy = s->num_of("energy");
    spec.energy_on = s->num_of("energy-on");
    spec.energy_off = s->num_of("energy-off");
    spec.p_max = s->num_of("p-max", 1.0);
    spec.kappa = s->num_of("kappa", 0.0);
    if (spec.rate < 0 || spec.energy < 0 || spec.energy_on < 0 || spec.energy_off < 0)
      throw Error("sensor " + spec.name + " has negative characteristics");
    if (!(spec.p_max > 0.0 && spec.p_max <= 1.0))
      throw Error("sensor " + spec.name + " p-max outside (0,1]");
    r.sensors.push_back(std::move(spec));
  }
  if (r.sensors.empty()) throw Error("registry declares no sensors");
  return r;
}

KvNode uuv_registry_to_kv(const UuvRegistry& r) {
  KvNode node;
  node.name = "uuv-registry";
  node.is_block = true;
  {
    KvNode& w = node.add("weights", r.w1);
    w.args.push_back(format_double(r.w2));
  }
  node.add("deadline", r.deadline_seconds);
  node.add("window", r.window_metres);
  node.add("max-speed", r.max_speed);
  KvNode& g = node.add_block("speed-grid");
  g.add("min", r.grid.lo);
  g.add("max", r.grid.hi);
  g.add("count", static_cast<double>(r.grid.count));
  for (const auto& s : r.sensors) {
    KvNode& b = node.add_block("sensor");
    b.args.push_back(s.name);
    b.add("rate", s.rate);
    b.add("energy", s.energy);
    b.add("energy-on", s.energy_on);
    b.add("energy-off", s.energy_off);
    b.add("p-max", s.p_max);
    b.add("kappa", s.kappa);
  }
  return node;
}

UuvRegistry load_uuv_registry(const std::string& path) {
  KvNode doc = kv_load(path);
  const KvNode* n = doc.find("uuv-registry");
  if (!n) throw Error(path + ": no uuv-registry block");
  return uuv_registry_from_kv(*n);
}

ModelTemplate build_sensor_template(const SensorSpec& spec, double max_speed) {
  if (spec.rate < 0) throw Error("sensor rate must be non-negative");
  ModelTemplate t;
  t.kind = ModelKind::Continuous;
  t.state_names = {"sense", "acc", "alt"};
  t.state_labels = {{"on"}, {"on"}, {"on"}};
  t.initial = 0;

  const std::string accuracy =
      "clamp(" + format_double(spec.p_max) + " - " + format_double(spec.kappa) + " * sp, 0, 1)";
  Expr accurate_rate = expr_parse("r * (" + accuracy + ")");
  Expr inaccurate_rate = expr_parse("r * (1 - (" + accuracy + "))");

  auto edge = [&](int from, int to, const Expr& weight) {
    t.transitions.push_back({from, to, weight});
  };
  // Accurate jumps: sense->acc, acc->sense, alt->acc.  Inaccurate jumps fill
  // the remaining ordered pairs so no two transitions share an edge.
  edge(0, 1, accurate_rate);
  edge(1, 0, accurate_rate);
  edge(2, 1, accurate_rate);
  edge(0, 2, inaccurate_rate);
  edge(1, 2, inaccurate_rate);
  edge(2, 0, inaccurate_rate);

  TemplateRewards measure;
  measure.state_rewards.assign(3, Expr::num(0.0));
  measure.transition_rewards[{0, 1}] = Expr::num(1.0);
  measure.transition_rewards[{1, 0}] = Expr::num(1.0);
  measure.transition_rewards[{2, 1}] = Expr::num(1.0);
  t.rewards.emplace("measure", std::move(measure));

  TemplateRewards energy;
  energy.state_rewards.assign(3, Expr::num(0.0));
  for (const auto& tr : t.transitions)
    energy.transition_rewards[{tr.source, tr.target}] = Expr::num(spec.energy);
  t.rewards.emplace("energy", std::move(energy));

  t.parameters.push_back({"r", "1/s", 1e-9, 10000.0});
  t.parameters.push_back({"sp", "m/s", 0.0, max_speed});
  validate_template(t);
  return t;
}

std::vector<Configuration> enumerate_uuv_configs(std::size_t sensor_count,
                                                 const std::vector<double>& speed_grid) {
  if (sensor_count == 0) throw Error("need at least one sensor");
  if (speed_grid.empty()) throw Error("speed grid is empty");
  std::vector<Configuration> out;
  for (unsigned mask = 1; mask < (1u << sensor_count); ++mask) {
    for (double sp : speed_grid) {
      Configuration c;
      for (std::size_t i = 0; i < sensor_count; ++i)
        c.fields.emplace_back("x" + std::to_string(i + 1), (mask >> i) & 1u ? "1" : "0");
      c.fields.emplace_back("sp", format_double(sp));
      out.push_back(std::move(c));
    }
  }
  return out;
}

UuvRequirements uuv_requirements(double speed, double window_metres) {
  if (!(speed > 0.0)) throw ZeroSpeedHorizon();
  UuvRequirements reqs;
  reqs.horizon = window_metres / speed;
  reqs.throughput = {"R1", CumulReward{"measure", Bound::AtLeast, kUuvMeasurementsRequired,
                                       reqs.horizon}};
  reqs.energy = {"R2", CumulReward{"energy", Bound::AtMost, kUuvEnergyBudget, reqs.horizon}};
  return reqs;
}

double uuv_cost(double energy, double speed, double w1, double w2) {
  return w1 * energy + w2 / speed;
}

// ---------------------------------------------------------------------------

UuvSpace::UuvSpace(const UuvRegistry& registry, const Bindings& observed_rates, double w1,
                   double w2)
    : registry_(registry), w1_(w1), w2_(w2) {
  for (std::size_t i = 0; i < registry_.sensors.size(); ++i) {
    auto it = observed_rates.find("r" + std::to_string(i + 1));
    if (it == observed_rates.end())
      throw MissingParameter("r" + std::to_string(i + 1));
    rates_.push_back(it->second);
    templates_.push_back(build_sensor_template(registry_.sensors[i], registry_.max_speed));
  }
  std::vector<double> grid = registry_.grid.values();
  configs_ = enumerate_uuv_configs(registry_.sensors.size(), grid);
  for (unsigned mask = 1; mask < (1u << registry_.sensors.size()); ++mask)
    for (double sp : grid) decoded_.emplace_back(mask, sp);
}

std::vector<VerificationResult> UuvSpace::evaluate(std::size_t i,
                                                   const Deadline& deadline) const {
  const auto [mask, speed] = decoded_[i];
  UuvRequirements reqs = uuv_requirements(speed, registry_.window_metres);

  double measured = 0.0;
  double energy = 0.0;
  std::string digest_input;
  for (std::size_t s = 0; s < registry_.sensors.size(); ++s) {
    if (mask >> s & 1u) {
      MarkovModel model = bind_parameters(templates_[s], {{"r", rates_[s]}, {"sp", speed}});
      measured += ctmc_cumulative_reward(model, "measure", reqs.horizon, deadline);
      energy += ctmc_cumulative_reward(model, "energy", reqs.horizon, deadline);
      energy += registry_.sensors[s].energy_on;
      digest_input += model_digest(model);
    } else {
      energy += registry_.sensors[s].energy_off;
    }
  }
  digest_input += "|h=" + format_double(reqs.horizon);
  std::string digest = digest_hex(digest_input);

  VerificationResult r1;
  r1.property_id = "R1";
  r1.value = measured;
  r1.satisfied = measured >= kUuvMeasurementsRequired;
  r1.model_digest = digest;
  VerificationResult r2;
  r2.property_id = "R2";
  r2.value = energy;
  r2.satisfied = energy <= kUuvEnergyBudget;
  r2.model_digest = digest;
  VerificationResult cost;
  cost.property_id = "cost";
  cost.value = uuv_cost(energy, speed, w1_, w2_);
  cost.model_digest = digest;
  return {r1, r2, cost};
}

// ---------------------------------------------------------------------------

UuvScenario uuv_scenario_from_kv(const KvNode& node) {
  UuvScenario s;
  s.end_time = node.num_of("end");
  if (const KvNode* p = node.find("probes")) {
    s.probes.interval = p->num_of("interval", s.probes.interval);
    s.probes.duration = p->num_of("duration", s.probes.duration);
  }
  if (const KvNode* w = node.find("weights")) {
    s.w1 = w->num(0);
    s.w2 = w->num(1);
  }
  for (const KvNode* e : node.all("event")) {
    TimedChange c;
    c.time = e->num(0);
    c.parameter = e->arg(1);
    c.value = e->num(2);
    if (!s.events.empty() && c.time < s.events.back().time)
      throw Error("scenario events must be time-ordered");
    s.events.push_back(std::move(c));
  }
  return s;
}

KvNode uuv_scenario_to_kv(const UuvScenario& s) {
  KvNode node;
  node.name = "scenario";
  node.is_block = true;
  node.add("end", s.end_time);
  KvNode& p = node.add_block("probes");
  p.add("interval", s.probes.interval);
  p.add("duration", s.probes.duration);
  if (s.w1 && s.w2) {
    KvNode& w = node.add("weights", *s.w1);
    w.args.push_back(format_double(*s.w2));
  }
  for (const auto& e : s.events) {
    KvNode& ev = node.add("event", e.time);
    ev.args.push_back(e.parameter);
    ev.args.push_back(format_double(e.value));
  }
  return node;
}

UuvScenario load_uuv_scenario(const std::string& path) {
  KvNode doc = kv_load(path);
  const KvNode* n = doc.find("scenario");
  if (!n) throw Error(path + ": no scenario block");
  return uuv_scenario_from_kv(*n);
}

// ---------------------------------------------------------------------------

UuvSimulator::UuvSimulator(const UuvRegistry& registry, UuvScenario scenario)
    : registry_(registry), scenario_(std::move(scenario)) {
  for (const auto& s : registry_.sensors) {
    true_rates_.push_back(s.rate);
    nominal_rates_.push_back(s.rate);
    last_sensed_.push_back(s.rate);
    on_.push_back(false);
  }
  next_probe_ = scenario_.probes.interval;
  push_trace(0.0, false);
}

double UuvSimulator::true_rate(std::size_t sensor_index) const {
  return true_rates_.at(sensor_index);
}

bool UuvSimulator::sensor_on(std::size_t sensor_index) const { return on_.at(sensor_index); }

Configuration UuvSimulator::ground_truth() const {
  Configuration c;
  for (std::size_t i = 0; i < on_.size(); ++i)
    c.fields.emplace_back("x" + std::to_string(i + 1), on_[i] ? "1" : "0");
  c.fields.emplace_back("sp", format_double(speed_));
  return c;
}

void UuvSimulator::push_trace(double time, bool probe) {
  TraceRow row;
  row.time = time;
  row.speed = speed_;
  for (bool b : on_) row.sensors_on.push_back(b ? 1 : 0);
  row.probe = probe;
  trace_.push_back(std::move(row));
}

std::string UuvSimulator::trace_csv() const {
  std::ostringstream out;
  out << "time,speed";
  for (std::size_t i = 0; i < on_.size(); ++i) out << ",x" << i + 1;
  out << ",probe\n";
  for (const auto& row : trace_) {
    out << format_double(row.time) << ',' << format_double(row.speed);
    for (int v : row.sensors_on) out << ',' << v;
    out << ',' << (row.probe ? 1 : 0) << '\n';
  }
  return out.str();
}

std::optional<SensedEvent> UuvSimulator::next_event() {
  while (true) {
    if (!pending_.empty()) {
      SensedEvent e = pending_.front();
      pending_.erase(pending_.begin());
      return e;
    }
    double change_time = next_change_ < scenario_.events.size()
                             ? scenario_.events[next_change_].time
                             : std::numeric_limits<double>::infinity();
    double probe_time = next_probe_ <= scenario_.end_time
                            ? next_probe_
                            : std::numeric_limits<double>::infinity();
    if (!std::isfinite(change_time) && !std::isfinite(probe_time)) return std::nullopt;

    if (change_time <= probe_time) {
      // Apply every ground-truth change scheduled at this instant.
      now_ = change_time;
      while (next_change_ < scenario_.events.size() &&
             scenario_.events[next_change_].time == change_time) {
        const TimedChange& c = scenario_.events[next_change_++];
        if (c.parameter.size() < 2 || c.parameter[0] != 'r')
          throw Error("unknown scenario parameter: " + c.parameter);
        std::size_t idx = static_cast<std::size_t>(std::stoi(c.parameter.substr(1))) - 1;
        if (idx >= true_rates_.size())
          throw Error("scenario parameter out of range: " + c.parameter);
        true_rates_[idx] = c.value;
        if (on_[idx]) {
          pending_.push_back({change_time, c.parameter, c.value});
          last_sensed_[idx] = c.value;
        }
      }
      push_trace(change_time, false);
    } else {
      // Probe window: briefly re-sense switched-off sensors that went quiet
      // while degraded (last sensed value off nominal).  Healthy spares are
      // left alone; once a probe reports the nominal rate the sensor drops
      // out of the probing set again.
      now_ = probe_time;
      for (std::size_t i = 0; i < on_.size(); ++i) {
        if (on_[i]) continue;
        if (last_sensed_[i] == nominal_rates_[i]) continue;
        pending_.push_back({probe_time, "r" + std::to_string(i + 1), true_rates_[i]});
        last_sensed_[i] = true_rates_[i];
      }
      push_trace(probe_time, true);
      next_probe_ += scenario_.probes.interval;
    }
  }
}

void UuvSimulator::apply(const PlanStep& step) {
  if (step.action == "sensor-on" || step.action == "sensor-off") {
    int idx = std::stoi(step.arg1) - 1;
    if (idx < 0 || idx >= static_cast<int>(on_.size())) throw CommandOnUnknownSensor(idx + 1);
    on_[static_cast<std::size_t>(idx)] = step.action == "sensor-on";
  } else if (step.action == "set-speed") {
    speed_ = std::stod(step.arg1);
  } else {
    throw EffectorFailure("unsupported step " + step.summary());
  }
  push_trace(now_, false);
}

// ---------------------------------------------------------------------------

UuvApplication::UuvApplication(UuvRegistry registry) : registry_(std::move(registry)) {}

std::vector<std::string> UuvApplication::sensed_parameters() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < registry_.sensors.size(); ++i)
    out.push_back("r" + std::to_string(i + 1));
  return out;
}

Bindings UuvApplication::initial_observations() const {
  Bindings out;
  for (std::size_t i = 0; i < registry_.sensors.size(); ++i)
    out["r" + std::to_string(i + 1)] = registry_.sensors[i].rate;
  return out;
}

Configuration UuvApplication::initial_configuration() const {
  Configuration c;
  for (std::size_t i = 0; i < registry_.sensors.size(); ++i)
    c.fields.emplace_back("x" + std::to_string(i + 1), "0");
  c.fields.emplace_back("sp", "0");
  return c;
}

bool UuvApplication::is_failsafe(const Configuration& config) const {
  const std::string* sp = config.get("sp");
  return sp && std::stod(*sp) == 0.0;
}

Configuration UuvApplication::failsafe_configuration(const Configuration& current) const {
  Configuration c = current;
  c.set("sp", "0");
  return c;
}

std::unique_ptr<ConfigurationSpace> UuvApplication::make_space(
    const Bindings& observations) const {
  return std::make_unique<UuvSpace>(registry_, observations, registry_.w1, registry_.w2);
}

AdaptationPlan UuvApplication::plan_steps(const Configuration& from,
                                          const Configuration& to) const {
  AdaptationPlan plan;
  const std::size_t n = registry_.sensors.size();
  // Switch sensors on first, then off, then adjust the speed.
  for (std::size_t i = 0; i < n; ++i) {
    std::string key = "x" + std::to_string(i + 1);
    if (*from.get(key) == "0" && *to.get(key) == "1")
      plan.steps.push_back({"sensor-on", std::to_string(i + 1), ""});
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::string key = "x" + std::to_string(i + 1);
    if (*from.get(key) == "1" && *to.get(key) == "0")
      plan.steps.push_back({"sensor-off", std::to_string(i + 1), ""});
  }
  if (*from.get("sp") != *to.get("sp"))
    plan.steps.push_back({"set-speed", *to.get("sp"), ""});
  return plan;
}

Configuration UuvApplication::apply_step(const Configuration& config,
                                         const PlanStep& step) const {
  Configuration out = config;
  if (step.action == "sensor-on")
    out.set("x" + step.arg1, "1");
  else if (step.action == "sensor-off")
    out.set("x" + step.arg1, "0");
  else if (step.action == "set-speed")
    out.set("sp", step.arg1);
  else
    throw Error("unknown plan step: " + step.summary());
  return out;
}

std::vector<RequirementDescriptor> UuvApplication::requirements() const {
  return {
      {"R1", "at least 20 accurate measurements per 10 m window", false, "R1"},
      {"R2", "sensor energy at most 120 J per 10 m window", false, "R2"},
      {"R3", "minimal weighted energy/speed cost among feasible configurations", false, "cost"},
      {"R4", "speed drops to zero when analysis cannot certify a configuration in time", true,
       ""},
  };
}

}  // namespace certloop
