#ifndef CERTLOOP_AUTOMATON_HPP
#define CERTLOOP_AUTOMATON_HPP

#include <optional>
#include <string>
#include <vector>

#include "certloop/expr.hpp"
#include "certloop/kv.hpp"

namespace certloop {

/// Bounded integer variable shared by the whole network (booleans are 0..1).
struct VarDecl {
  std::string name;
  int lo = 0;
  int hi = 0;
  int init = 0;
};

enum class SyncKind { Internal, Send, Receive };

struct AutomatonEdge {
  int source = 0;
  int target = 0;
  SyncKind sync = SyncKind::Internal;
  std::string channel;                              // for send/receive
  std::optional<Expr> guard;                        // over variables; absent = true
  std::vector<std::pair<std::string, Expr>> assignments;  // applied in order
};

/// Finite automaton with handshake channels.  Locations carry atomic
/// propositions through their names (`Analyzer.Analyse`); a location may be
/// flagged terminal-by-design, which exempts it from deadlock detection.
struct Automaton {
  std::string name;
  std::vector<std::string> locations;
  std::vector<bool> terminal;
  int initial = 0;
  std::vector<AutomatonEdge> edges;

  int location_index(std::string_view loc) const;  // throws when unknown
};

struct Network {
  std::vector<std::string> channels;
  std::vector<VarDecl> variables;
  std::vector<Automaton> automata;

  int automaton_index(std::string_view name) const;  // -1 when unknown
  int variable_index(std::string_view name) const;   // -1 when unknown

  /// Structural checks: channel matching (every channel has at least one
  /// sender and one receiver), declared variables, edge indices.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Temporal queries (the three shapes used by the controller property suite)

struct CtlQuery {
  enum class Kind { DeadlockFree, LeadsTo, Invariant };
  Kind kind = Kind::DeadlockFree;
  Expr p;  // LeadsTo premise / Invariant predicate
  Expr q;  // LeadsTo goal
};

struct NamedQuery {
  std::string id;
  std::string description;
  CtlQuery query;
};

// ---------------------------------------------------------------------------
// File format

struct NetworkFile {
  Network network;
  std::vector<NamedQuery> properties;  // application-specific queries
};

KvNode network_to_kv(const NetworkFile& file);
NetworkFile network_from_kv(const KvNode& node);
NetworkFile load_network(const std::string& path);
std::string serialize_network(const NetworkFile& file);

}  // namespace certloop

#endif
