#include "certloop/explore.hpp"

#include <cmath>
#include <deque>
#include <unordered_map>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

namespace {

struct StateHash {
  std::size_t operator()(const NetworkState& s) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](int v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 0x100000001b3ull;
    };
    for (int v : s.locations) mix(v);
    mix(-1);
    for (int v : s.values) mix(v);
    return static_cast<std::size_t>(h);
  }
};

int eval_int(const Network& net, const NetworkState& s, const Expr& e) {
  double v = expr_eval(e, [&](const std::string& name) -> double {
    int idx = net.variable_index(name);
    if (idx < 0) throw Error("guard references unknown variable: " + name);
    return static_cast<double>(s.values[static_cast<std::size_t>(idx)]);
  });
  return static_cast<int>(std::llround(v));
}

bool guard_holds(const Network& net, const NetworkState& s, const AutomatonEdge& e) {
  if (!e.guard) return true;
  return eval_int(net, s, *e.guard) != 0;
}

void apply_assignments(const Network& net, const AutomatonEdge& e, NetworkState& s) {
  for (const auto& [var, expr] : e.assignments) {
    int idx = net.variable_index(var);
    if (idx < 0) throw Error("assignment to unknown variable: " + var);
    int v = eval_int(net, s, expr);
    const VarDecl& d = net.variables[static_cast<std::size_t>(idx)];
    if (v < d.lo || v > d.hi)
      throw Error("assignment drives " + var + " to " + std::to_string(v) +
                  ", outside [" + std::to_string(d.lo) + "," + std::to_string(d.hi) + "]");
    s.values[static_cast<std::size_t>(idx)] = v;
  }
}

}  // namespace

std::string TransitionLabel::describe(const Network& net) const {
  const Automaton& a = net.automata[static_cast<std::size_t>(automaton)];
  const AutomatonEdge& e = a.edges[static_cast<std::size_t>(edge)];
  std::string out = a.name + ": " + a.locations[static_cast<std::size_t>(e.source)] + " -> " +
                    a.locations[static_cast<std::size_t>(e.target)];
  if (kind == SyncKind::Send) {
    const Automaton& b = net.automata[static_cast<std::size_t>(partner_automaton)];
    const AutomatonEdge& f = b.edges[static_cast<std::size_t>(partner_edge)];
    out += " " + channel + "! / " + b.name + ": " +
           b.locations[static_cast<std::size_t>(f.source)] + " -> " +
           b.locations[static_cast<std::size_t>(f.target)] + " " + channel + "?";
  }
  return out;
}

bool StateGraph::state_terminal_by_design(int state) const {
  const NetworkState& s = states[static_cast<std::size_t>(state)];
  for (std::size_t a = 0; a < network.automata.size(); ++a) {
    int loc = s.locations[a];
    if (!network.automata[a].terminal[static_cast<std::size_t>(loc)]) return false;
  }
  return true;
}

bool StateGraph::eval_predicate(const Expr& pred, int state) const {
  const NetworkState& s = states[static_cast<std::size_t>(state)];
  double v = expr_eval(pred, [&](const std::string& name) -> double {
    auto dot = name.find('.');
    if (dot != std::string::npos) {
      std::string automaton_name = name.substr(0, dot);
      int a = network.automaton_index(automaton_name);
      if (a < 0) throw Error("predicate references unknown automaton: " + name);
      int loc = network.automata[static_cast<std::size_t>(a)].location_index(name.substr(dot + 1));
      return s.locations[static_cast<std::size_t>(a)] == loc ? 1.0 : 0.0;
    }
    int idx = network.variable_index(name);
    if (idx < 0) throw Error("predicate references unknown variable: " + name);
    return static_cast<double>(s.values[static_cast<std::size_t>(idx)]);
  });
  return v != 0.0;
}

NetworkState initial_state(const Network& net) {
  NetworkState s;
  for (const auto& a : net.automata) s.locations.push_back(a.initial);
  for (const auto& v : net.variables) s.values.push_back(v.init);
  return s;
}

std::vector<std::pair<NetworkState, TransitionLabel>> successors(const Network& net,
                                                                 const NetworkState& s) {
  std::vector<std::pair<NetworkState, TransitionLabel>> out;

  // Internal edges, automaton order then declaration order.
  for (std::size_t a = 0; a < net.automata.size(); ++a) {
    const Automaton& aut = net.automata[a];
    int loc = s.locations[a];
    for (std::size_t e = 0; e < aut.edges.size(); ++e) {
      const AutomatonEdge& edge = aut.edges[e];
      if (edge.source != loc || edge.sync != SyncKind::Internal) continue;
      if (!guard_holds(net, s, edge)) continue;
      NetworkState next = s;
      next.locations[a] = edge.target;
      apply_assignments(net, edge, next);
      TransitionLabel label;
      label.kind = SyncKind::Internal;
      label.automaton = static_cast<int>(a);
      label.edge = static_cast<int>(e);
      out.emplace_back(std::move(next), std::move(label));
    }
  }

  // Handshakes: channel order, sender order, receiver order.
  for (const auto& channel : net.channels) {
    for (std::size_t a1 = 0; a1 < net.automata.size(); ++a1) {
      const Automaton& sender = net.automata[a1];
      for (std::size_t e1 = 0; e1 < sender.edges.size(); ++e1) {
        const AutomatonEdge& send = sender.edges[e1];
        if (send.sync != SyncKind::Send || send.channel != channel) continue;
        if (send.source != s.locations[a1] || !guard_holds(net, s, send)) continue;
        for (std::size_t a2 = 0; a2 < net.automata.size(); ++a2) {
          if (a2 == a1) continue;
          const Automaton& receiver = net.automata[a2];
          for (std::size_t e2 = 0; e2 < receiver.edges.size(); ++e2) {
            const AutomatonEdge& recv = receiver.edges[e2];
            if (recv.sync != SyncKind::Receive || recv.channel != channel) continue;
            if (recv.source != s.locations[a2] || !guard_holds(net, s, recv)) continue;
            NetworkState next = s;
            next.locations[a1] = send.target;
            next.locations[a2] = recv.target;
            apply_assignments(net, send, next);
            apply_assignments(net, recv, next);
            TransitionLabel label;
            label.kind = SyncKind::Send;
            label.channel = channel;
            label.automaton = static_cast<int>(a1);
            label.edge = static_cast<int>(e1);
            label.partner_automaton = static_cast<int>(a2);
            label.partner_edge = static_cast<int>(e2);
            out.emplace_back(std::move(next), std::move(label));
          }
        }
      }
    }
  }
  return out;
}

StateGraph compose_and_explore(const Network& net, const ExploreOptions& options) {
  net.validate();
  StateGraph graph;
  graph.network = net;

  std::unordered_map<NetworkState, int, StateHash> index;
  std::deque<int> frontier;

  graph.states.push_back(initial_state(net));
  index.emplace(graph.states[0], 0);
  graph.out.emplace_back();
  frontier.push_back(0);

  while (!frontier.empty()) {
    int si = frontier.front();
    frontier.pop_front();
    NetworkState current = graph.states[static_cast<std::size_t>(si)];
    for (auto& [next, label] : successors(net, current)) {
      int ti;
      auto it = index.find(next);
      if (it == index.end()) {
        ti = static_cast<int>(graph.states.size());
        if (graph.states.size() >= options.state_cap) throw StateSpaceExceeded(options.state_cap);
        graph.states.push_back(next);
        graph.out.emplace_back();
        index.emplace(std::move(next), ti);
        frontier.push_back(ti);
      } else {
        ti = it->second;
      }
      int ei = static_cast<int>(graph.edges.size());
      graph.edges.push_back({si, ti, std::move(label)});
      graph.out[static_cast<std::size_t>(si)].push_back(ei);
    }
  }
  return graph;
}

}  // namespace certloop
