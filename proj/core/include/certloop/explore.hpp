#ifndef CERTLOOP_EXPLORE_HPP
#define CERTLOOP_EXPLORE_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "certloop/automaton.hpp"

namespace certloop {

/// Global state of a network: one location per automaton plus the shared
/// variable valuation.
struct NetworkState {
  std::vector<int> locations;
  std::vector<int> values;

  bool operator==(const NetworkState&) const = default;
};

/// What fired: an internal edge of one automaton, or a send/receive handshake
/// pair (sender assignments apply first).
struct TransitionLabel {
  SyncKind kind = SyncKind::Internal;
  std::string channel;
  int automaton = -1;
  int edge = -1;
  int partner_automaton = -1;
  int partner_edge = -1;

  std::string describe(const Network& net) const;
};

struct GraphEdge {
  int from = 0;
  int to = 0;
  TransitionLabel label;
};

/// Exhaustive breadth-first reachable graph.  State 0 is the initial state;
/// indices follow discovery order, so two explorations of the same network
/// are identical.
struct StateGraph {
  Network network;
  std::vector<NetworkState> states;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> out;  // per state, edge indices in firing order

  bool state_terminal_by_design(int state) const;

  /// Evaluates a predicate over variables and `Automaton.Location` atoms.
  bool eval_predicate(const Expr& pred, int state) const;
};

struct ExploreOptions {
  std::size_t state_cap = 10000000;
};

/// Deterministic successor enumeration used by both exploration and
/// counterexample replay: internal edges in automaton/declaration order,
/// then handshakes in channel/sender/receiver order.
std::vector<std::pair<NetworkState, TransitionLabel>> successors(const Network& net,
                                                                 const NetworkState& s);

NetworkState initial_state(const Network& net);

/// Throws StateSpaceExceeded or UnmatchedChannel.
StateGraph compose_and_explore(const Network& net, const ExploreOptions& options = {});

}  // namespace certloop

#endif
