#include "certloop/fx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

void WorkflowParams::validate() const {
  double outcome_sum = ta_satisfied + ta_unsatisfied + ta_high_variance;
  if (std::abs(outcome_sum - 1.0) > 1e-12)
    throw Error("analysis outcome probabilities sum to " + format_double(outcome_sum));
  if (!(ta_satisfied > 0.0))
    throw Error("the watch loop needs a positive escape probability");
  for (double v : {expert_share, ta_satisfied, ta_unsatisfied, ta_high_variance, fa_proceed})
    if (v < 0.0 || v > 1.0) throw Error("workflow probability outside [0,1]");
}

std::vector<const ServiceSpec*> FxRegistry::implementations_of(
    const std::string& operation) const {
  std::vector<const ServiceSpec*> out;
  for (const auto& s : services)
    if (s.operation == operation) out.push_back(&s);
  return out;
}

const ServiceSpec* FxRegistry::find(const std::string& id) const {
  for (const auto& s : services)
    if (s.id == id) return &s;
  return nullptr;
}

FxRegistry fx_registry_from_kv(const KvNode& node) {
  FxRegistry r;
  if (const KvNode* w = node.find("weights")) {
    r.w1 = w->num(0);
    r.w2 = w->num(1);
  }
  r.deadline_seconds = node.num_of("deadline", r.deadline_seconds);
  if (const KvNode* p = node.find("workflow")) {
    r.params.expert_share = p->num_of("expert-share", r.params.expert_share);
    r.params.ta_satisfied = p->num_of("ta-satisfied", r.params.ta_satisfied);
    r.params.ta_unsatisfied = p->num_of("ta-unsatisfied", r.params.ta_unsatisfied);
    r.params.ta_high_variance = p->num_of("ta-high-variance", r.params.ta_high_variance);
    r.params.fa_proceed = p->num_of("fa-proceed", r.params.fa_proceed);
  }
  r.params.validate();
  for (const KvNode* s : node.all("service")) {
    ServiceSpec spec;
    spec.operation = s->arg(0);
    spec.id = s->arg(1);
    spec.response_time = s->num_of("time");
    spec.reliability = s->num_of("reliability");
    spec.price = s->num_of("price");
    bool known = false;
    for (const auto& [op, abbrev] : kFxOperations) known = known || spec.operation == op;
    if (!known) throw Error("unknown operation: " + spec.operation);
    if (spec.reliability < 0.0 || spec.reliability > 1.0)
      throw Error("service " + spec.id + " reliability outside [0,1]");
    if (spec.response_time < 0.0 || spec.price < 0.0)
      throw Error("service " + spec.id + " has negative characteristics");
    r.services.push_back(std::move(spec));
  }
  for (const auto& [op, abbrev] : kFxOperations)
    if (r.implementations_of(op).empty())
      throw Error(std::string("no implementation registered for ") + op);
  return r;
}

KvNode fx_registry_to_kv(const FxRegistry& r) {
  KvNode node;
  node.name = "fx-registry";
  node.is_block = true;
  {
    KvNode& w = node.add("weights", r.w1);
    w.args.push_back(format_double(r.w2));
  }
  node.add("deadline", r.deadline_seconds);
  KvNode& p = node.add_block("workflow");
  p.add("expert-share", r.params.expert_share);
  p.add("ta-satisfied", r.params.ta_satisfied);
  p.add("ta-unsatisfied", r.params.ta_unsatisfied);
  p.add("ta-high-variance", r.params.ta_high_variance);
  p.add("fa-proceed", r.params.fa_proceed);
  for (const auto& s : r.services) {
    KvNode& b = node.add_block("service");
    b.args.push_back(s.operation);
    b.args.push_back(s.id);
    b.add("time", s.response_time);
    b.add("reliability", s.reliability);
    b.add("price", s.price);
  }
  return node;
}

FxRegistry load_fx_registry(const std::string& path) {
  KvNode doc = kv_load(path);
  const KvNode* n = doc.find("fx-registry");
  if (!n) throw Error(path + ": no fx-registry block");
  return fx_registry_from_kv(*n);
}

// ---------------------------------------------------------------------------

ModelTemplate build_fx_template(const WorkflowParams& params) {
  params.validate();
  ModelTemplate t;
  t.kind = ModelKind::Discrete;
  t.state_names = {"start", "mw", "ta", "fa", "alarm", "order", "notif", "done", "fail"};
  t.state_labels = {{}, {}, {}, {}, {}, {}, {}, {"done", "end"}, {"fail", "end"}};
  t.initial = 0;

  auto num = [](double v) { return Expr::num(v); };
  auto parse = [](const std::string& s) { return expr_parse(s); };
  // Tidy decimal complement; the row-sum tolerance is 1e-9 anyway.
  auto complement = [](double v) { return std::round((1.0 - v) * 1e12) / 1e12; };
  auto edge = [&](const char* from, const char* to, Expr weight) {
    ModelTemplate& m = t;
    int f = -1, g = -1;
    for (int i = 0; i < m.state_count(); ++i) {
      if (m.state_names[static_cast<std::size_t>(i)] == from) f = i;
      if (m.state_names[static_cast<std::size_t>(i)] == to) g = i;
    }
    m.transitions.push_back({f, g, std::move(weight)});
  };

  const std::string x = format_double(params.expert_share);
  const std::string s = format_double(params.ta_satisfied);
  const std::string u = format_double(params.ta_unsatisfied);
  const std::string hv = format_double(params.ta_high_variance);
  const std::string fa = format_double(params.fa_proceed);

  edge("start", "mw", num(params.expert_share));
  if (params.expert_share < 1.0) edge("start", "fa", num(complement(params.expert_share)));
  edge("mw", "ta", parse("p_MW"));
  edge("mw", "fail", parse("1 - p_MW"));
  edge("ta", "order", parse("p_TA * " + s));
  if (params.ta_unsatisfied > 0.0) edge("ta", "mw", parse("p_TA * " + u));
  if (params.ta_high_variance > 0.0) edge("ta", "alarm", parse("p_TA * " + hv));
  edge("ta", "fail", parse("1 - p_TA"));
  edge("alarm", "mw", parse("p_Al"));
  edge("alarm", "fail", parse("1 - p_Al"));
  edge("fa", "order", parse("p_FA * " + fa));
  if (params.fa_proceed < 1.0) edge("fa", "done", parse("p_FA * (1 - " + fa + ")"));
  edge("fa", "fail", parse("1 - p_FA"));
  edge("order", "notif", parse("p_Or"));
  edge("order", "fail", parse("1 - p_Or"));
  edge("notif", "done", parse("p_No"));
  edge("notif", "fail", parse("1 - p_No"));

  // Per-visit response time and price of the service bound to each state.
  TemplateRewards time;
  TemplateRewards price;
  time.state_rewards.assign(t.state_names.size(), Expr::num(0.0));
  price.state_rewards.assign(t.state_names.size(), Expr::num(0.0));
  const std::array<std::pair<const char*, const char*>, 6> stateOf{{
      {"mw", "MW"},
      {"ta", "TA"},
      {"fa", "FA"},
      {"alarm", "Al"},
      {"order", "Or"},
      {"notif", "No"},
  }};
  for (const auto& [state, abbrev] : stateOf) {
    int idx = -1;
    for (int i = 0; i < t.state_count(); ++i)
      if (t.state_names[static_cast<std::size_t>(i)] == state) idx = i;
    time.state_rewards[static_cast<std::size_t>(idx)] =
        expr_parse(std::string("time_") + abbrev);
    price.state_rewards[static_cast<std::size_t>(idx)] =
        expr_parse(std::string("price_") + abbrev);
  }
  t.rewards.emplace("time", std::move(time));
  t.rewards.emplace("price", std::move(price));

  for (const auto& [op, abbrev] : kFxOperations) {
    t.parameters.push_back({std::string("p_") + abbrev, "probability", 0.0, 1.0});
    t.parameters.push_back({std::string("time_") + abbrev, "s", 0.0, 1e6});
    t.parameters.push_back({std::string("price_") + abbrev, "currency", 0.0, 1e6});
  }
  validate_template(t);
  return t;
}

std::vector<Configuration> enumerate_fx_configs(const FxRegistry& registry) {
  std::vector<std::vector<const ServiceSpec*>> impls;
  std::size_t total = 1;
  for (const auto& [op, abbrev] : kFxOperations) {
    impls.push_back(registry.implementations_of(op));
    total *= impls.back().size();
  }
  std::vector<Configuration> out;
  out.reserve(total);
  for (std::size_t index = 0; index < total; ++index) {
    // Mixed-radix decomposition, MarketWatch digit most significant.
    Configuration c;
    std::size_t rest = index;
    std::size_t scale = total;
    for (std::size_t k = 0; k < impls.size(); ++k) {
      scale /= impls[k].size();
      std::size_t digit = rest / scale;
      rest %= scale;
      c.fields.emplace_back(kFxOperations[k].first, impls[k][digit]->id);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::size_t fx_config_index(const FxRegistry& registry, const Configuration& config) {
  std::size_t index = 0;
  for (const auto& [op, abbrev] : kFxOperations) {
    auto impls = registry.implementations_of(op);
    const std::string* id = config.get(op);
    if (!id) throw Error(std::string("configuration lacks operation ") + op);
    std::size_t digit = impls.size();
    for (std::size_t i = 0; i < impls.size(); ++i)
      if (impls[i]->id == *id) digit = i;
    if (digit == impls.size()) throw UnknownService(*id);
    index = index * impls.size() + digit;
  }
  return index;
}

FxRequirements fx_requirements() {
  FxRequirements reqs;
  reqs.reliability = {"R1", ProbReach{Bound::AtLeast, kFxReliabilityFloor, "done"}};
  reqs.response_time = {"R2", ReachReward{"time", Bound::AtMost, kFxResponseTimeCap, "end"}};
  reqs.price = {"price", ReachReward{"price", Bound::Query, 0.0, "end"}};
  return reqs;
}

double fx_cost(double price, double time, double w1, double w2) {
  return w1 * price + w2 * time;
}

Bindings fx_bindings(const FxRegistry& registry, const Configuration& config,
                     const Bindings& observations) {
  Bindings b;
  for (const auto& [op, abbrev] : kFxOperations) {
    const std::string* id = config.get(op);
    if (!id) throw Error(std::string("configuration lacks operation ") + op);
    if (*id == kNoService) {
      // Bypass edge: certain success, no time, no price.
      b[std::string("p_") + abbrev] = 1.0;
      b[std::string("time_") + abbrev] = 0.0;
      b[std::string("price_") + abbrev] = 0.0;
      continue;
    }
    if (!registry.find(*id)) throw UnknownService(*id);
    for (const char* field : {"p_", "time_", "price_"}) {
      auto it = observations.find(field + *id);
      if (it == observations.end()) throw MissingParameter(field + *id);
      b[field + std::string(abbrev)] = it->second;
    }
  }
  return b;
}

FxSpace::FxSpace(const FxRegistry& registry, const Bindings& observations, double w1, double w2)
    : registry_(registry),
      observations_(observations),
      template_(build_fx_template(registry.params)),
      configs_(enumerate_fx_configs(registry)),
      w1_(w1),
      w2_(w2) {}

std::vector<VerificationResult> FxSpace::evaluate(std::size_t i,
                                                  const Deadline& deadline) const {
  MarkovModel model =
      bind_parameters(template_, fx_bindings(registry_, configs_[i], observations_));
  FxRequirements reqs = fx_requirements();
  VerificationResult r1 = certloop::evaluate(model, reqs.reliability, deadline);
  VerificationResult r2 = certloop::evaluate(model, reqs.response_time, deadline);
  VerificationResult price = certloop::evaluate(model, reqs.price, deadline);
  VerificationResult cost;
  cost.property_id = "cost";
  cost.value = fx_cost(price.value, r2.value, w1_, w2_);
  cost.model_digest = r1.model_digest;
  return {r1, r2, price, cost};
}

// ---------------------------------------------------------------------------

FxScenario fx_scenario_from_kv(const KvNode& node) {
  FxScenario s;
  s.end_time = node.num_of("end");
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

KvNode fx_scenario_to_kv(const FxScenario& s) {
  KvNode node;
  node.name = "scenario";
  node.is_block = true;
  node.add("end", s.end_time);
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

FxScenario load_fx_scenario(const std::string& path) {
  KvNode doc = kv_load(path);
  const KvNode* n = doc.find("scenario");
  if (!n) throw Error(path + ": no scenario block");
  return fx_scenario_from_kv(*n);
}

// ---------------------------------------------------------------------------

FxSimulator::FxSimulator(const FxRegistry& registry, FxScenario scenario)
    : registry_(registry), scenario_(std::move(scenario)) {
  for (const auto& s : registry_.services) {
    truth_["p_" + s.id] = s.reliability;
    truth_["time_" + s.id] = s.response_time;
    truth_["price_" + s.id] = s.price;
  }
  for (const auto& [op, abbrev] : kFxOperations) {
    auto impls = registry_.implementations_of(op);
    bound_.fields.emplace_back(op, std::string(op) == "Order" ? kNoService : impls[0]->id);
  }
  trace_.emplace_back(0.0, bound_);
}

double FxSimulator::characteristic(const std::string& key) const {
  auto it = truth_.find(key);
  if (it == truth_.end()) throw Error("unknown characteristic: " + key);
  return it->second;
}

std::optional<SensedEvent> FxSimulator::next_event() {
  while (true) {
    if (!pending_.empty()) {
      SensedEvent e = pending_.front();
      pending_.erase(pending_.begin());
      return e;
    }
    if (next_change_ >= scenario_.events.size()) return std::nullopt;
    double t = scenario_.events[next_change_].time;
    if (t > scenario_.end_time) return std::nullopt;
    now_ = t;
    while (next_change_ < scenario_.events.size() &&
           scenario_.events[next_change_].time == t) {
      const TimedChange& c = scenario_.events[next_change_++];
      if (!truth_.count(c.parameter)) throw Error("unknown scenario parameter: " + c.parameter);
      truth_[c.parameter] = c.value;
      pending_.push_back({t, c.parameter, c.value});
    }
  }
}

void FxSimulator::apply(const PlanStep& step) {
  if (step.action != "change-service") throw EffectorFailure("unsupported step " + step.summary());
  bool known_op = false;
  for (const auto& [op, abbrev] : kFxOperations) known_op = known_op || step.arg1 == op;
  if (!known_op) throw UnknownService(step.arg1);
  if (step.arg2 != kNoService && !registry_.find(step.arg2)) throw UnknownService(step.arg2);
  if (step.arg2 == kNoService && step.arg1 != "Order")
    throw EffectorFailure("only the Order operation may be bypassed");
  bound_.set(step.arg1, step.arg2);
  trace_.emplace_back(now_, bound_);
}

std::string FxSimulator::trace_csv() const {
  std::ostringstream out;
  out << "time";
  for (const auto& [op, abbrev] : kFxOperations) out << ',' << op;
  out << '\n';
  for (const auto& [t, config] : trace_) {
    out << format_double(t);
    for (const auto& [k, v] : config.fields) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

FxApplication::FxApplication(FxRegistry registry) : registry_(std::move(registry)) {}

std::vector<std::string> FxApplication::sensed_parameters() const {
  std::vector<std::string> out;
  for (const auto& s : registry_.services) {
    out.push_back("p_" + s.id);
    out.push_back("time_" + s.id);
    out.push_back("price_" + s.id);
  }
  return out;
}

Bindings FxApplication::initial_observations() const {
  Bindings out;
  for (const auto& s : registry_.services) {
    out["p_" + s.id] = s.reliability;
    out["time_" + s.id] = s.response_time;
    out["price_" + s.id] = s.price;
  }
  return out;
}

Configuration FxApplication::initial_configuration() const {
  Configuration c;
  for (const auto& [op, abbrev] : kFxOperations) {
    auto impls = registry_.implementations_of(op);
    c.fields.emplace_back(op, std::string(op) == "Order" ? kNoService : impls[0]->id);
  }
  return c;
}

bool FxApplication::is_failsafe(const Configuration& config) const {
  const std::string* order = config.get("Order");
  return order && *order == kNoService;
}

Configuration FxApplication::failsafe_configuration(const Configuration& current) const {
  Configuration c = current;
  c.set("Order", kNoService);
  return c;
}

std::unique_ptr<ConfigurationSpace> FxApplication::make_space(
    const Bindings& observations) const {
  return std::make_unique<FxSpace>(registry_, observations, registry_.w1, registry_.w2);
}

AdaptationPlan FxApplication::plan_steps(const Configuration& from,
                                         const Configuration& to) const {
  AdaptationPlan plan;
  for (const auto& [op, abbrev] : kFxOperations) {
    const std::string* a = from.get(op);
    const std::string* b = to.get(op);
    if (a && b && *a != *b) plan.steps.push_back({"change-service", op, *b});
  }
  return plan;
}

Configuration FxApplication::apply_step(const Configuration& config,
                                        const PlanStep& step) const {
  if (step.action != "change-service") throw Error("unknown plan step: " + step.summary());
  Configuration out = config;
  out.set(step.arg1, step.arg2);
  return out;
}

std::vector<RequirementDescriptor> FxApplication::requirements() const {
  return {
      {"R1", "workflow executions complete successfully with probability at least 0.9", false,
       "R1"},
      {"R2", "total service response time per execution at most 5 s", false, "R2"},
      {"R3", "minimal weighted price/time cost among feasible configurations", false, "cost"},
      {"R4", "the Order invocation is bypassed when analysis cannot certify a configuration in "
             "time",
       true, ""},
  };
}

}  // namespace certloop
