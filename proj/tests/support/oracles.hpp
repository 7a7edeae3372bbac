#ifndef CERTLOOP_TESTS_ORACLES_HPP
#define CERTLOOP_TESTS_ORACLES_HPP

// Test-side oracles, independent of the solver paths they cross-check:
// Monte-Carlo chain simulation, explicit product-chain construction,
// configuration-by-configuration argmin selection, and exhaustive path
// enumeration for leads-to verdicts on small graphs.

#include <cmath>
#include <functional>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "certloop/ctl.hpp"
#include "certloop/markov.hpp"
#include "certloop/verifier.hpp"

namespace certloop::test {

/// Uniform in (0,1); fixed mapping from the mt19937_64 stream so results are
/// identical across platforms (std::*_distribution would not be).
inline double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double sample_exponential(std::mt19937_64& rng, double rate) {
  return -std::log(uniform01(rng)) / rate;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;

  bool within_3_sigma(double value) const {
    return std::abs(value - mean) <= 3.0 * std_error + 1e-12;
  }
};

/// Accumulated reward over [0, horizon] by direct CTMC simulation.
inline McEstimate mc_ctmc_cumulative_reward(const MarkovModel& model,
                                            const std::string& reward, double horizon,
                                            std::size_t runs, std::uint64_t seed) {
  const RewardStructure& rs = model.rewards.at(reward);
  auto adjacency = model.adjacency();
  std::mt19937_64 rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t run = 0; run < runs; ++run) {
    double t = 0.0, total = 0.0;
    int state = model.initial;
    while (true) {
      double exit_rate = 0.0;
      for (int e : adjacency[static_cast<std::size_t>(state)])
        exit_rate += model.transitions[static_cast<std::size_t>(e)].weight;
      if (exit_rate == 0.0) {
        total += rs.state_reward(state) * (horizon - t);
        break;
      }
      double sojourn = sample_exponential(rng, exit_rate);
      if (t + sojourn >= horizon) {
        total += rs.state_reward(state) * (horizon - t);
        break;
      }
      total += rs.state_reward(state) * sojourn;
      t += sojourn;
      double pick = uniform01(rng) * exit_rate;
      int chosen = -1;
      for (int e : adjacency[static_cast<std::size_t>(state)]) {
        pick -= model.transitions[static_cast<std::size_t>(e)].weight;
        chosen = e;
        if (pick <= 0.0) break;
      }
      const Transition& tr = model.transitions[static_cast<std::size_t>(chosen)];
      total += rs.transition_reward(tr.source, tr.target);
      state = tr.target;
    }
    sum += total;
    sum_sq += total * total;
  }
  McEstimate est;
  est.mean = sum / static_cast<double>(runs);
  double var = sum_sq / static_cast<double>(runs) - est.mean * est.mean;
  est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(runs));
  return est;
}

/// Probability of hitting the target label by random walk.
inline McEstimate mc_dtmc_reach(const MarkovModel& model, const std::string& target,
                                std::size_t runs, std::uint64_t seed,
                                std::size_t step_cap = 100000) {
  auto adjacency = model.adjacency();
  std::mt19937_64 rng(seed);
  double hits = 0.0;
  for (std::size_t run = 0; run < runs; ++run) {
    int state = model.initial;
    for (std::size_t step = 0; step < step_cap; ++step) {
      if (model.has_label(state, target)) {
        hits += 1.0;
        break;
      }
      const auto& outs = adjacency[static_cast<std::size_t>(state)];
      if (outs.empty()) break;
      double pick = uniform01(rng);
      int next = state;
      for (int e : outs) {
        pick -= model.transitions[static_cast<std::size_t>(e)].weight;
        next = model.transitions[static_cast<std::size_t>(e)].target;
        if (pick <= 0.0) break;
      }
      if (next == state && outs.size() == 1 &&
          model.transitions[static_cast<std::size_t>(outs[0])].target == state)
        break;  // absorbing self-loop
      state = next;
    }
  }
  McEstimate est;
  double p = hits / static_cast<double>(runs);
  est.mean = p;
  est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(runs));
  return est;
}

/// Expected accumulated reward until first hitting the target label.
inline McEstimate mc_dtmc_reach_reward(const MarkovModel& model, const std::string& reward,
                                       const std::string& target, std::size_t runs,
                                       std::uint64_t seed, std::size_t step_cap = 100000) {
  const RewardStructure& rs = model.rewards.at(reward);
  auto adjacency = model.adjacency();
  std::mt19937_64 rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t run = 0; run < runs; ++run) {
    int state = model.initial;
    double total = 0.0;
    for (std::size_t step = 0; step < step_cap; ++step) {
      if (model.has_label(state, target)) break;
      total += rs.state_reward(state);
      const auto& outs = adjacency[static_cast<std::size_t>(state)];
      if (outs.empty()) break;
      double pick = uniform01(rng);
      int chosen = outs.back();
      for (int e : outs) {
        pick -= model.transitions[static_cast<std::size_t>(e)].weight;
        chosen = e;
        if (pick <= 0.0) break;
      }
      const Transition& tr = model.transitions[static_cast<std::size_t>(chosen)];
      total += rs.transition_reward(tr.source, tr.target);
      state = tr.target;
    }
    sum += total;
    sum_sq += total * total;
  }
  McEstimate est;
  est.mean = sum / static_cast<double>(runs);
  double var = sum_sq / static_cast<double>(runs) - est.mean * est.mean;
  est.std_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(runs));
  return est;
}

/// Explicit product of two independent CTMCs carrying the same reward
/// structure name; used to cross-check the independent-sum fast path.
inline MarkovModel product_ctmc(const MarkovModel& a, const MarkovModel& b,
                                const std::string& reward) {
  MarkovModel p;
  p.kind = ModelKind::Continuous;
  const int nb = b.state_count();
  auto index = [nb](int i, int j) { return i * nb + j; };
  for (int i = 0; i < a.state_count(); ++i) {
    for (int j = 0; j < nb; ++j) {
      p.state_names.push_back(a.state_names[static_cast<std::size_t>(i)] + "|" +
                              b.state_names[static_cast<std::size_t>(j)]);
      p.state_labels.push_back({});
    }
  }
  p.initial = index(a.initial, b.initial);
  RewardStructure rs;
  rs.state_rewards.assign(p.state_names.size(), 0.0);
  const RewardStructure& ra = a.rewards.at(reward);
  const RewardStructure& rb = b.rewards.at(reward);
  for (int i = 0; i < a.state_count(); ++i)
    for (int j = 0; j < nb; ++j)
      rs.state_rewards[static_cast<std::size_t>(index(i, j))] =
          ra.state_reward(i) + rb.state_reward(j);
  for (const auto& t : a.transitions) {
    for (int j = 0; j < nb; ++j) {
      p.transitions.push_back({index(t.source, j), index(t.target, j), t.weight});
      double r = ra.transition_reward(t.source, t.target);
      if (r != 0.0) rs.transition_rewards[{index(t.source, j), index(t.target, j)}] = r;
    }
  }
  for (const auto& t : b.transitions) {
    for (int i = 0; i < a.state_count(); ++i) {
      p.transitions.push_back({index(i, t.source), index(i, t.target), t.weight});
      double r = rb.transition_reward(t.source, t.target);
      if (r != 0.0) rs.transition_rewards[{index(i, t.source), index(i, t.target)}] = r;
    }
  }
  p.rewards.emplace(reward, std::move(rs));
  return p;
}

// ---------------------------------------------------------------------------

struct OracleChoice {
  bool feasible_exists = false;
  std::size_t best_index = 0;
  double best_cost = 0.0;
  std::size_t feasible_count = 0;
};

/// Configuration-by-configuration selection without the batch path: evaluate
/// each entry individually, filter by the bounded verdicts, take the argmin
/// of the cost column with ties resolved to enumeration order.
inline OracleChoice oracle_select(const ConfigurationSpace& space,
                                  const std::string& cost_column = "cost") {
  OracleChoice choice;
  for (std::size_t i = 0; i < space.size(); ++i) {
    std::vector<VerificationResult> results;
    try {
      results = space.evaluate(i, Deadline::unlimited());
    } catch (const Error&) {
      continue;  // per-entry failure counts as infeasible
    }
    bool feasible = true;
    double cost = 0.0;
    bool have_cost = false;
    for (const auto& r : results) {
      if (r.satisfied.has_value() && !*r.satisfied) feasible = false;
      if (r.property_id == cost_column) {
        cost = r.value;
        have_cost = true;
      }
    }
    if (!feasible || !have_cost) continue;
    choice.feasible_count += 1;
    if (!choice.feasible_exists || cost < choice.best_cost) {
      choice.feasible_exists = true;
      choice.best_index = i;
      choice.best_cost = cost;
    }
  }
  return choice;
}

// ---------------------------------------------------------------------------

/// Exhaustive AG(p -> AF q) by path enumeration with cycle closure: from
/// every reachable (p and not q) state, walk all paths; a path that revisits
/// a state or dies before any q-state witnesses a violation.
inline bool brute_force_leads_to(const StateGraph& graph, const Expr& p, const Expr& q) {
  const std::size_t n = graph.states.size();
  std::vector<bool> q_sat(n), p_sat(n);
  for (std::size_t s = 0; s < n; ++s) {
    q_sat[s] = graph.eval_predicate(q, static_cast<int>(s));
    p_sat[s] = graph.eval_predicate(p, static_cast<int>(s));
  }

  // returns true when every maximal path from s reaches q
  std::function<bool(int, std::set<int>&)> all_paths_reach = [&](int s,
                                                                 std::set<int>& on_path) {
    if (q_sat[static_cast<std::size_t>(s)]) return true;
    if (on_path.count(s)) return false;  // closed a q-free cycle
    if (graph.out[static_cast<std::size_t>(s)].empty()) return false;
    on_path.insert(s);
    for (int e : graph.out[static_cast<std::size_t>(s)]) {
      if (!all_paths_reach(graph.edges[static_cast<std::size_t>(e)].to, on_path)) {
        on_path.erase(s);
        return false;
      }
    }
    on_path.erase(s);
    return true;
  };

  for (std::size_t s = 0; s < n; ++s) {
    if (!p_sat[s] || q_sat[s]) continue;
    std::set<int> on_path;
    if (!all_paths_reach(static_cast<int>(s), on_path)) return false;
  }
  return true;
}

}  // namespace certloop::test

#endif
