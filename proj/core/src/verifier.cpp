#include "certloop/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <thread>

#include "certloop/util.hpp"

namespace certloop {

bool cooperative_sleep(double seconds, const Deadline& deadline) {
  using namespace std::chrono;
  auto end = steady_clock::now() + duration_cast<steady_clock::duration>(
                                       duration<double>(seconds));
  while (steady_clock::now() < end) {
    if (deadline.expired()) return false;
    auto left = end - steady_clock::now();
    auto slice = std::min<steady_clock::duration>(left, milliseconds(5));
    if (slice.count() > 0) std::this_thread::sleep_for(slice);
  }
  return !deadline.expired();
}

namespace {

constexpr double kEpsilon = 1e-9;
constexpr int kIterationCap = 100000;
constexpr std::size_t kDirectSolveLimit = 2000;
constexpr double kUniformisationPadding = 1.02;
constexpr double kPoissonMassTarget = 1.0 - 1e-6;
constexpr std::size_t kUniformisationTermCap = 1000000;
constexpr int kDeadlinePollStride = 64;

void poll_deadline(const Deadline& d, int& counter) {
  if (++counter % kDeadlinePollStride == 0 && d.expired()) throw DeadlineExpired();
}

std::vector<int> require_target(const MarkovModel& model, const std::string& label) {
  std::vector<int> targets = model.states_with_label(label);
  if (targets.empty()) throw Error("no state carries label '" + label + "'");
  return targets;
}

/// States from which some target state is reachable (targets included).
std::vector<bool> backward_reachable(const MarkovModel& model,
                                     const std::vector<int>& targets) {
  const int n = model.state_count();
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  for (const auto& t : model.transitions)
    preds[static_cast<std::size_t>(t.target)].push_back(t.source);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<int> queue;
  for (int t : targets) {
    seen[static_cast<std::size_t>(t)] = true;
    queue.push_back(t);
  }
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int p : preds[static_cast<std::size_t>(s)]) {
      if (!seen[static_cast<std::size_t>(p)]) {
        seen[static_cast<std::size_t>(p)] = true;
        queue.push_back(p);
      }
    }
  }
  return seen;
}

/// Forward reachability that treats `absorbing` states as path ends (used so
/// the reward system never includes states that lie beyond the target).
std::vector<bool> forward_reachable(const MarkovModel& model,
                                    const std::vector<bool>& absorbing) {
  const int n = model.state_count();
  auto adj = model.adjacency();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<int> queue{model.initial};
  seen[static_cast<std::size_t>(model.initial)] = true;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    if (absorbing[static_cast<std::size_t>(s)]) continue;
    for (int e : adj[static_cast<std::size_t>(s)]) {
      int t = model.transitions[static_cast<std::size_t>(e)].target;
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        queue.push_back(t);
      }
    }
  }
  return seen;
}

struct SparseRow {
  std::vector<std::pair<int, double>> coeffs;  // column (unknown index), value
  double constant = 0.0;
};

/// Solves x = A x + b for the given rows.  Direct elimination for small
/// systems, Gauss-Seidel with eps 1e-9 beyond kDirectSolveLimit unknowns.
std::vector<double> solve_linear(std::vector<SparseRow> rows, const Deadline& deadline) {
  const std::size_t n = rows.size();
  if (n == 0) return {};
  if (n <= kDirectSolveLimit) {
    // Dense (I - A) x = b with partial pivoting.
    std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      m[i][i] = 1.0;
      for (const auto& [j, v] : rows[i].coeffs) m[i][static_cast<std::size_t>(j)] -= v;
      m[i][n] = rows[i].constant;
    }
    int poll = 0;
    for (std::size_t col = 0; col < n; ++col) {
      poll_deadline(deadline, poll);
      std::size_t pivot = col;
      for (std::size_t r = col + 1; r < n; ++r)
        if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
      if (std::abs(m[pivot][col]) < 1e-14)
        throw NonConvergence("singular linear system at column " + std::to_string(col));
      std::swap(m[col], m[pivot]);
      for (std::size_t r = 0; r < n; ++r) {
        if (r == col) continue;
        double f = m[r][col] / m[col][col];
        if (f == 0.0) continue;
        for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
      }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return x;
  }

  std::vector<double> x(n, 0.0);
  int poll = 0;
  for (int iter = 0; iter < kIterationCap; ++iter) {
    poll_deadline(deadline, poll);
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = rows[i].constant;
      double self = 0.0;
      for (const auto& [j, v] : rows[i].coeffs) {
        if (static_cast<std::size_t>(j) == i)
          self = v;
        else
          sum += v * x[static_cast<std::size_t>(j)];
      }
      double next = sum / (1.0 - self);
      delta = std::max(delta, std::abs(next - x[i]));
      x[i] = next;
    }
    if (delta <= kEpsilon) return x;
  }
  throw NonConvergence("Gauss-Seidel exceeded iteration cap");
}

void require_kind(const MarkovModel& model, ModelKind kind, const char* what) {
  if (model.kind != kind)
    throw IncompatibleProperty(std::string(what) + " needs a " +
                               (kind == ModelKind::Discrete ? "discrete" : "continuous") +
                               "-time model");
}

const RewardStructure& require_reward(const MarkovModel& model, const std::string& name) {
  auto it = model.rewards.find(name);
  if (it == model.rewards.end()) throw Error("model has no reward structure '" + name + "'");
  return it->second;
}

}  // namespace

double dtmc_reach_probability(const MarkovModel& model, const std::string& target_label,
                              const Deadline& deadline) {
  require_kind(model, ModelKind::Discrete, "reachability probability");
  std::vector<int> targets = require_target(model, target_label);
  std::vector<bool> is_target(static_cast<std::size_t>(model.state_count()), false);
  for (int t : targets) is_target[static_cast<std::size_t>(t)] = true;
  if (is_target[static_cast<std::size_t>(model.initial)]) return 1.0;

  std::vector<bool> can_reach = backward_reachable(model, targets);
  if (!can_reach[static_cast<std::size_t>(model.initial)]) return 0.0;

  const int n = model.state_count();
  std::vector<int> unknown_index(static_cast<std::size_t>(n), -1);
  std::vector<int> unknowns;
  for (int s = 0; s < n; ++s) {
    if (can_reach[static_cast<std::size_t>(s)] && !is_target[static_cast<std::size_t>(s)]) {
      unknown_index[static_cast<std::size_t>(s)] = static_cast<int>(unknowns.size());
      unknowns.push_back(s);
    }
  }

  std::vector<SparseRow> rows(unknowns.size());
  auto adj = model.adjacency();
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    int s = unknowns[i];
    for (int e : adj[static_cast<std::size_t>(s)]) {
      const Transition& t = model.transitions[static_cast<std::size_t>(e)];
      if (is_target[static_cast<std::size_t>(t.target)]) {
        rows[i].constant += t.weight;
      } else if (int j = unknown_index[static_cast<std::size_t>(t.target)]; j >= 0) {
        rows[i].coeffs.emplace_back(j, t.weight);
      }
      // transitions into states that cannot reach the target contribute 0
    }
  }
  std::vector<double> x = solve_linear(std::move(rows), deadline);
  double p = x[static_cast<std::size_t>(unknown_index[static_cast<std::size_t>(model.initial)])];
  return std::clamp(p, 0.0, 1.0);
}

double dtmc_expected_reward(const MarkovModel& model, const std::string& reward,
                            const std::string& target_label, const Deadline& deadline) {
  require_kind(model, ModelKind::Discrete, "reachability reward");
  const RewardStructure& rs = require_reward(model, reward);
  double reach = dtmc_reach_probability(model, target_label, deadline);
  if (reach < 1.0 - kEpsilon)
    throw DivergentReward("target '" + target_label + "' reached with probability " +
                          format_double(reach));

  std::vector<int> targets = require_target(model, target_label);
  std::vector<bool> is_target(static_cast<std::size_t>(model.state_count()), false);
  for (int t : targets) is_target[static_cast<std::size_t>(t)] = true;
  if (is_target[static_cast<std::size_t>(model.initial)]) return 0.0;

  std::vector<bool> reachable = forward_reachable(model, is_target);
  const int n = model.state_count();
  std::vector<int> unknown_index(static_cast<std::size_t>(n), -1);
  std::vector<int> unknowns;
  for (int s = 0; s < n; ++s) {
    if (reachable[static_cast<std::size_t>(s)] && !is_target[static_cast<std::size_t>(s)]) {
      unknown_index[static_cast<std::size_t>(s)] = static_cast<int>(unknowns.size());
      unknowns.push_back(s);
    }
  }

  std::vector<SparseRow> rows(unknowns.size());
  auto adj = model.adjacency();
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    int s = unknowns[i];
    rows[i].constant = rs.state_reward(s);
    for (int e : adj[static_cast<std::size_t>(s)]) {
      const Transition& t = model.transitions[static_cast<std::size_t>(e)];
      rows[i].constant += t.weight * rs.transition_reward(t.source, t.target);
      if (!is_target[static_cast<std::size_t>(t.target)]) {
        int j = unknown_index[static_cast<std::size_t>(t.target)];
        if (j < 0)
          throw DivergentReward("state escapes the almost-sure reachability region");
        rows[i].coeffs.emplace_back(j, t.weight);
      }
    }
  }
  std::vector<double> x = solve_linear(std::move(rows), deadline);
  return x[static_cast<std::size_t>(unknown_index[static_cast<std::size_t>(model.initial)])];
}

double ctmc_cumulative_reward(const MarkovModel& model, const std::string& reward,
                              double horizon, const Deadline& deadline) {
  require_kind(model, ModelKind::Continuous, "cumulative reward");
  if (!(horizon > 0.0)) throw Error("horizon must be positive");
  const RewardStructure& rs = require_reward(model, reward);

  const int n = model.state_count();
  // Effective state reward: state rate plus rate-weighted transition rewards.
  std::vector<double> eff(static_cast<std::size_t>(n), 0.0);
  std::vector<double> exit(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) eff[static_cast<std::size_t>(s)] = rs.state_reward(s);
  for (const auto& t : model.transitions) {
    exit[static_cast<std::size_t>(t.source)] += t.weight;
    eff[static_cast<std::size_t>(t.source)] +=
        t.weight * rs.transition_reward(t.source, t.target);
  }

  double max_exit = *std::max_element(exit.begin(), exit.end());
  if (max_exit == 0.0) {
    // No transitions anywhere: the chain sits in the initial state.
    return eff[static_cast<std::size_t>(model.initial)] * horizon;
  }

  const double rate = kUniformisationPadding * max_exit;
  const double lt = rate * horizon;

  // Uniformised jump matrix P = I + Q/rate, stored sparsely per state.
  auto adj = model.adjacency();
  std::vector<double> pi(static_cast<std::size_t>(n), 0.0);
  pi[static_cast<std::size_t>(model.initial)] = 1.0;
  std::vector<double> next(static_cast<std::size_t>(n), 0.0);

  const double log_lt = std::log(lt);
  double pmf = std::exp(-lt);  // may underflow for large lt; recovered below
  double cdf = pmf;
  double value = 0.0;
  int poll = 0;
  for (std::size_t k = 0;; ++k) {
    if (k > 0) {
      if (pmf > 0.0) {
        pmf *= lt / static_cast<double>(k);
      } else {
        double logp = -lt + static_cast<double>(k) * log_lt -
                      std::lgamma(static_cast<double>(k) + 1.0);
        pmf = logp > -740.0 ? std::exp(logp) : 0.0;
      }
      cdf += pmf;
    }
    double weight = (1.0 - std::min(cdf, 1.0)) / rate;
    double dot = 0.0;
    for (int s = 0; s < n; ++s)
      dot += pi[static_cast<std::size_t>(s)] * eff[static_cast<std::size_t>(s)];
    value += weight * dot;

    if (cdf >= kPoissonMassTarget) break;
    if (k + 1 > kUniformisationTermCap)
      throw HorizonOverflow("needed more than " + std::to_string(kUniformisationTermCap) +
                            " terms (rate*t = " + format_double(lt) + ")");
    poll_deadline(deadline, poll);

    // pi <- pi * P
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      double mass = pi[static_cast<std::size_t>(s)];
      if (mass == 0.0) continue;
      next[static_cast<std::size_t>(s)] += mass * (1.0 - exit[static_cast<std::size_t>(s)] / rate);
      for (int e : adj[static_cast<std::size_t>(s)]) {
        const Transition& t = model.transitions[static_cast<std::size_t>(e)];
        next[static_cast<std::size_t>(t.target)] += mass * (t.weight / rate);
      }
    }
    pi.swap(next);
  }
  return value;
}

double ctmc_cumulative_reward(const IndependentSum& sum, double horizon,
                              const Deadline& deadline) {
  double total = 0.0;
  for (const MarkovModel* m : sum.components)
    total += ctmc_cumulative_reward(*m, sum.reward, horizon, deadline);
  return total;
}

VerificationResult evaluate(const MarkovModel& model, const Property& property,
                            const Deadline& deadline) {
  auto start = std::chrono::steady_clock::now();
  VerificationResult r;
  r.property_id = property.id;
  r.model_digest = model_digest(model);

  if (const auto* p = std::get_if<ProbReach>(&property.spec)) {
    r.value = dtmc_reach_probability(model, p->target_label, deadline);
    if (p->bound != Bound::Query) r.satisfied = bound_satisfied(p->bound, p->threshold, r.value);
  } else if (const auto* p = std::get_if<CumulReward>(&property.spec)) {
    r.value = ctmc_cumulative_reward(model, p->reward, p->horizon, deadline);
    if (p->bound != Bound::Query) r.satisfied = bound_satisfied(p->bound, p->threshold, r.value);
  } else if (const auto* p = std::get_if<ReachReward>(&property.spec)) {
    r.value = dtmc_expected_reward(model, p->reward, p->target_label, deadline);
    if (p->bound != Bound::Query) r.satisfied = bound_satisfied(p->bound, p->threshold, r.value);
  } else {
    throw IncompatibleProperty("unhandled property variant");
  }

  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

bool ConfigResult::feasible() const {
  if (error) return false;
  for (const auto& r : results)
    if (r.satisfied.has_value() && !*r.satisfied) return false;
  return true;
}

double ConfigResult::value_of(const std::string& property_id) const {
  for (const auto& r : results)
    if (r.property_id == property_id) return r.value;
  throw Error("batch entry has no value for property '" + property_id + "'");
}

const ConfigResult* BatchOutcome::find(std::size_t index) const {
  for (const auto& e : completed)
    if (e.index == index) return &e;
  return nullptr;
}

BatchOutcome verify_config_space(const ConfigurationSpace& space, const BatchOptions& options) {
  auto start = std::chrono::steady_clock::now();
  BatchOutcome outcome;
  const std::size_t n = space.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (options.deadline.expired()) {
      outcome.deadline_exceeded = true;
      break;
    }
    if (options.injected_latency && options.injected_latency->config_index == i) {
      if (!cooperative_sleep(options.injected_latency->seconds, options.deadline)) {
        outcome.deadline_exceeded = true;
        break;
      }
    }
    ConfigResult entry;
    entry.index = i;
    try {
      entry.results = space.evaluate(i, options.deadline);
    } catch (const DeadlineExpired&) {
      outcome.deadline_exceeded = true;
      break;
    } catch (const Error& e) {
      entry.error = e.what();
    }
    outcome.completed.push_back(std::move(entry));
  }
  outcome.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

void write_batch_csv(std::ostream& out, const ConfigurationSpace& space,
                     const BatchOutcome& outcome) {
  if (space.size() == 0) return;
  const Configuration& first = space.configuration(0);
  for (const auto& [k, v] : first.fields) out << k << ',';
  for (const auto& col : space.value_columns()) out << col << ',';
  out << "feasible\n";
  for (const auto& entry : outcome.completed) {
    const Configuration& c = space.configuration(entry.index);
    for (const auto& [k, v] : c.fields) out << v << ',';
    if (entry.error) {
      for (std::size_t i = 0; i < space.value_columns().size(); ++i) out << "NA,";
    } else {
      for (const auto& r : entry.results) out << format_double(r.value) << ',';
    }
    out << (entry.feasible() ? "true" : "false") << '\n';
  }
}

}  // namespace certloop
