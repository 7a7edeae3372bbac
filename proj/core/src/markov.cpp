#include "certloop/markov.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "certloop/errors.hpp"
#include "certloop/model_io.hpp"
#include "certloop/util.hpp"

namespace certloop {

namespace {
constexpr double kRowSumTolerance = 1e-9;
}

std::optional<int> MarkovModel::index_of(std::string_view state_name) const {
  for (int i = 0; i < state_count(); ++i)
    if (state_names[static_cast<std::size_t>(i)] == state_name) return i;
  return std::nullopt;
}

bool MarkovModel::has_label(int state, std::string_view label) const {
  const auto& labels = state_labels[static_cast<std::size_t>(state)];
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::vector<int> MarkovModel::states_with_label(std::string_view label) const {
  std::vector<int> out;
  for (int i = 0; i < state_count(); ++i)
    if (has_label(i, label)) out.push_back(i);
  return out;
}

std::vector<std::vector<int>> MarkovModel::adjacency() const {
  std::vector<std::vector<int>> out(state_names.size());
  for (std::size_t i = 0; i < transitions.size(); ++i)
    out[static_cast<std::size_t>(transitions[i].source)].push_back(static_cast<int>(i));
  return out;
}

std::vector<ModelViolation> validate_model(const MarkovModel& model) {
  std::vector<ModelViolation> report;
  auto flag = [&](std::string detail) { report.push_back({std::move(detail)}); };

  const int n = model.state_count();
  if (n == 0) {
    flag("model has no states");
    return report;
  }
  if (model.state_labels.size() != model.state_names.size())
    flag("label table size does not match state count");
  if (model.initial < 0 || model.initial >= n) flag("initial state index out of range");

  {
    std::set<std::string> seen;
    for (const auto& name : model.state_names)
      if (!seen.insert(name).second) flag("duplicate state name '" + name + "'");
  }

  std::set<std::pair<int, int>> edges;
  std::vector<double> row_sum(static_cast<std::size_t>(n), 0.0);
  std::vector<int> out_degree(static_cast<std::size_t>(n), 0);
  std::vector<bool> pure_self_loop(static_cast<std::size_t>(n), true);
  for (const auto& t : model.transitions) {
    if (t.source < 0 || t.source >= n || t.target < 0 || t.target >= n) {
      flag("transition references nonexistent state (" + std::to_string(t.source) + " -> " +
           std::to_string(t.target) + ")");
      continue;
    }
    const std::string id = model.state_names[static_cast<std::size_t>(t.source)] + " -> " +
                           model.state_names[static_cast<std::size_t>(t.target)];
    if (!edges.insert({t.source, t.target}).second) flag("duplicate transition " + id);
    if (!std::isfinite(t.weight)) flag("non-finite weight on " + id);
    if (model.kind == ModelKind::Continuous) {
      if (t.source == t.target) flag("self-loop rate on state " + id);
      if (!(t.weight > 0.0)) flag("non-positive rate on " + id);
    } else {
      if (t.weight < 0.0 || t.weight > 1.0) flag("probability outside [0,1] on " + id);
    }
    row_sum[static_cast<std::size_t>(t.source)] += t.weight;
    out_degree[static_cast<std::size_t>(t.source)] += 1;
    if (t.source != t.target) pure_self_loop[static_cast<std::size_t>(t.source)] = false;
  }

  if (model.kind == ModelKind::Discrete) {
    for (int s = 0; s < n; ++s) {
      const auto us = static_cast<std::size_t>(s);
      if (out_degree[us] == 0) continue;  // absorbing, no outgoing
      if (pure_self_loop[us]) {
        if (std::abs(row_sum[us] - 1.0) > kRowSumTolerance)
          flag("absorbing self-loop on state " + model.state_names[us] + " has weight " +
               format_double(row_sum[us]));
        continue;
      }
      double deficit = row_sum[us] - 1.0;
      if (std::abs(deficit) > kRowSumTolerance)
        flag("outgoing probabilities of state " + model.state_names[us] + " sum to " +
             format_double(row_sum[us]) + " (off by " + format_double(deficit) + ")");
    }
  }

  for (const auto& [name, rs] : model.rewards) {
    if (rs.state_rewards.size() > static_cast<std::size_t>(n))
      flag("reward structure '" + name + "' has more state rewards than states");
    for (std::size_t s = 0; s < rs.state_rewards.size(); ++s) {
      double v = rs.state_rewards[s];
      if (!std::isfinite(v) || v < 0.0)
        flag("reward '" + name + "' on state " + model.state_names[s] +
             " is negative or non-finite");
    }
    for (const auto& [edge, v] : rs.transition_rewards) {
      if (!edges.count(edge))
        flag("reward '" + name + "' attached to missing transition (" +
             std::to_string(edge.first) + " -> " + std::to_string(edge.second) + ")");
      if (!std::isfinite(v) || v < 0.0)
        flag("reward '" + name + "' on transition (" + std::to_string(edge.first) + " -> " +
             std::to_string(edge.second) + ") is negative or non-finite");
    }
  }

  return report;
}

std::string model_digest(const MarkovModel& model) {
  return digest_hex(serialize_model(model));
}

const ParamSpec* ModelTemplate::find_parameter(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return &p;
  return nullptr;
}

void validate_template(const ModelTemplate& tmpl) {
  std::set<std::string> used;
  for (const auto& t : tmpl.transitions) expr_symbols(t.weight, used);
  for (const auto& [name, rw] : tmpl.rewards) {
    for (const auto& e : rw.state_rewards) expr_symbols(e, used);
    for (const auto& [edge, e] : rw.transition_rewards) expr_symbols(e, used);
  }
  for (const auto& sym : used)
    if (!tmpl.find_parameter(sym)) throw Error("template references undeclared parameter: " + sym);
}

MarkovModel bind_parameters(const ModelTemplate& tmpl, const Bindings& bindings) {
  for (const auto& p : tmpl.parameters) {
    auto it = bindings.find(p.name);
    if (it == bindings.end()) throw MissingParameter(p.name);
    if (it->second < p.lo || it->second > p.hi) throw OutOfRange(p.name, it->second);
  }
  SymbolLookup lookup = [&](const std::string& name) -> double {
    auto it = bindings.find(name);
    if (it == bindings.end()) throw MissingParameter(name);
    return it->second;
  };

  MarkovModel model;
  model.kind = tmpl.kind;
  model.state_names = tmpl.state_names;
  model.state_labels = tmpl.state_labels;
  model.initial = tmpl.initial;
  std::set<std::pair<int, int>> kept;
  for (const auto& t : tmpl.transitions) {
    double w = expr_eval(t.weight, lookup);
    if (w == 0.0) continue;  // bound-away edge
    model.transitions.push_back({t.source, t.target, w});
    kept.insert({t.source, t.target});
  }
  for (const auto& [name, rw] : tmpl.rewards) {
    RewardStructure rs;
    rs.state_rewards.reserve(rw.state_rewards.size());
    for (const auto& e : rw.state_rewards) rs.state_rewards.push_back(expr_eval(e, lookup));
    for (const auto& [edge, e] : rw.transition_rewards) {
      if (!kept.count(edge)) continue;
      double v = expr_eval(e, lookup);
      if (v != 0.0) rs.transition_rewards[edge] = v;
    }
    model.rewards.emplace(name, std::move(rs));
  }

  auto report = validate_model(model);
  if (!report.empty()) throw InvariantViolation(report.front().detail);
  return model;
}

bool bound_satisfied(Bound bound, double threshold, double value) {
  switch (bound) {
    case Bound::AtLeast:
      return value >= threshold;
    case Bound::AtMost:
      return value <= threshold;
    case Bound::Query:
      return true;
  }
  return false;
}

IndependentSum build_independent_sum(std::span<const MarkovModel* const> models,
                                     std::string reward) {
  IndependentSum sum;
  sum.reward = std::move(reward);
  for (const MarkovModel* m : models) {
    if (!m) throw Error("null component in independent sum");
    if (m->kind != ModelKind::Continuous)
      throw Error("independent sum requires continuous-time components");
    sum.components.push_back(m);
  }
  return sum;
}

}  // namespace certloop
