#ifndef CERTLOOP_CTL_HPP
#define CERTLOOP_CTL_HPP

#include <optional>
#include <string>
#include <vector>

#include "certloop/explore.hpp"

namespace certloop {

/// Concrete violation witness.  `edge_path` is a legal transition sequence
/// from the initial state.  For LeadsTo cycle violations `loop_entry` is the
/// position (state index within the path) the final transition returns to;
/// for all other violations the path simply ends in the offending state.
struct Counterexample {
  std::vector<int> edge_path;  // indices into StateGraph::edges
  std::optional<std::size_t> loop_entry;
  std::string note;

  /// States visited, starting with the initial state.
  std::vector<int> state_path(const StateGraph& graph) const;
  std::string to_text(const StateGraph& graph) const;
};

struct CheckResult {
  bool holds = false;
  std::optional<Counterexample> counterexample;
};

/// DeadlockFree: every reachable state that is not terminal-by-design has a
/// successor.  LeadsTo(p, q): from every reachable p-state, every maximal
/// path reaches a q-state (p-states that satisfy q are immediately
/// discharged).  Invariant(pred): pred holds in every reachable state.
CheckResult check(const StateGraph& graph, const CtlQuery& query);

/// Re-executes the counterexample from the initial state through the network
/// semantics and confirms it witnesses the violation.
bool replay_counterexample(const StateGraph& graph, const CtlQuery& query,
                           const Counterexample& cex);

// ---------------------------------------------------------------------------
// Property suite

/// The nine generic controller properties (deadlock freedom, the MAPE
/// leads-to chain, and the adapt-implies-different-configuration invariant).
/// They reference the standard automaton names Monitor, Analyzer, Planner,
/// Executor and the variables currentConfig / newConfig.
std::vector<NamedQuery> generic_controller_properties();

struct PropertyVerdict {
  std::string id;
  std::string description;
  bool holds = false;
  std::optional<Counterexample> counterexample;
  std::string counterexample_text;
};

struct SuiteReport {
  std::vector<PropertyVerdict> verdicts;
  std::size_t state_count = 0;
  std::size_t edge_count = 0;
  double wall_seconds = 0.0;

  bool all_hold() const;
  const PropertyVerdict* find(const std::string& id) const;
  std::string to_text() const;
};

/// Runs the generic suite plus application properties on the composed graph.
SuiteReport verify_generic_suite(const StateGraph& graph,
                                 const std::vector<NamedQuery>& app_properties);

}  // namespace certloop

#endif
