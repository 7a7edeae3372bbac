#ifndef CERTLOOP_MARKOV_HPP
#define CERTLOOP_MARKOV_HPP

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "certloop/expr.hpp"

namespace certloop {

enum class ModelKind { Discrete, Continuous };

/// Sparse transition: probability for discrete-time models, exponential rate
/// (1/seconds) for continuous-time models.  At most one transition per
/// (source, target) pair so transition rewards are unambiguous.
struct Transition {
  int source = 0;
  int target = 0;
  double weight = 0.0;
};

struct RewardStructure {
  std::vector<double> state_rewards;  // indexed by state; empty means all zero
  std::map<std::pair<int, int>, double> transition_rewards;

  double state_reward(int s) const {
    return s < static_cast<int>(state_rewards.size()) ? state_rewards[s] : 0.0;
  }
  double transition_reward(int s, int t) const {
    auto it = transition_rewards.find({s, t});
    return it == transition_rewards.end() ? 0.0 : it->second;
  }
};

/// Labelled Markov chain (DTMC or CTMC) with named reward structures.
/// Immutable after construction by convention; all analysis code takes
/// const references and the type is freely copyable.
struct MarkovModel {
  ModelKind kind = ModelKind::Discrete;
  std::vector<std::string> state_names;
  std::vector<std::vector<std::string>> state_labels;  // per state, sorted
  int initial = 0;
  std::vector<Transition> transitions;
  std::map<std::string, RewardStructure> rewards;

  int state_count() const { return static_cast<int>(state_names.size()); }
  std::optional<int> index_of(std::string_view state_name) const;
  bool has_label(int state, std::string_view label) const;
  std::vector<int> states_with_label(std::string_view label) const;

  /// Outgoing transition indices per state.
  std::vector<std::vector<int>> adjacency() const;
};

struct ModelViolation {
  std::string detail;
};

/// Checks every structural invariant; an empty report means the model is
/// valid.  Violations are data, not exceptions.
std::vector<ModelViolation> validate_model(const MarkovModel& model);

/// Canonical serialization digest; stable across runs and platforms.
std::string model_digest(const MarkovModel& model);

// ---------------------------------------------------------------------------
// Parametric templates

struct ParamSpec {
  std::string name;
  std::string unit;
  double lo = 0.0;
  double hi = 0.0;
};

struct TemplateTransition {
  int source = 0;
  int target = 0;
  Expr weight;
};

struct TemplateRewards {
  std::vector<Expr> state_rewards;
  std::map<std::pair<int, int>, Expr> transition_rewards;
};

/// Markov model skeleton whose weights and rewards may be expressions over
/// the declared parameters.  Binding every parameter yields a MarkovModel.
struct ModelTemplate {
  ModelKind kind = ModelKind::Discrete;
  std::vector<std::string> state_names;
  std::vector<std::vector<std::string>> state_labels;
  int initial = 0;
  std::vector<TemplateTransition> transitions;
  std::map<std::string, TemplateRewards> rewards;
  std::vector<ParamSpec> parameters;

  int state_count() const { return static_cast<int>(state_names.size()); }
  const ParamSpec* find_parameter(std::string_view name) const;
};

/// Throws Error if any expression references an undeclared parameter.
void validate_template(const ModelTemplate& tmpl);

using Bindings = std::map<std::string, double>;

/// Instantiates the template.  Transitions whose bound weight is exactly zero
/// are dropped (a zero-probability edge and a zero-rate edge are both
/// non-edges).  Throws MissingParameter, OutOfRange, or InvariantViolation.
MarkovModel bind_parameters(const ModelTemplate& tmpl, const Bindings& bindings);

// ---------------------------------------------------------------------------
// Properties

enum class Bound { AtLeast, AtMost, Query };

/// P bound [F target_label]
struct ProbReach {
  Bound bound = Bound::Query;
  double threshold = 0.0;
  std::string target_label;
};

/// R{reward} bound [C <= horizon]   (continuous-time only)
struct CumulReward {
  std::string reward;
  Bound bound = Bound::Query;
  double threshold = 0.0;
  double horizon = 0.0;  // seconds
};

/// R{reward} bound [F target_label]   (discrete-time only)
struct ReachReward {
  std::string reward;
  Bound bound = Bound::Query;
  double threshold = 0.0;
  std::string target_label;
};

using PropertySpec = std::variant<ProbReach, CumulReward, ReachReward>;

struct Property {
  std::string id;
  PropertySpec spec;
};

/// True when `value` satisfies the bound; comparisons are inclusive.
bool bound_satisfied(Bound bound, double threshold, double value);

// ---------------------------------------------------------------------------
// Independent parallel composition (fast path)

/// Handle over pairwise-independent continuous-time components under which
/// the expected cumulative reward of the parallel composition is the sum of
/// the per-component values.  Components must outlive the handle.
struct IndependentSum {
  std::vector<const MarkovModel*> components;
  std::string reward;
};

IndependentSum build_independent_sum(std::span<const MarkovModel* const> models,
                                     std::string reward);

}  // namespace certloop

#endif
