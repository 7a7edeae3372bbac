#include "certloop/ctl.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <sstream>

#include "certloop/errors.hpp"

namespace certloop {

namespace {

/// Parent edge of each state under BFS from the initial state (-1 for the
/// initial state itself).  Every state in a StateGraph is reachable.
std::vector<int> bfs_parent_edges(const StateGraph& graph) {
  std::vector<int> parent(graph.states.size(), -2);
  std::deque<int> queue{0};
  parent[0] = -1;
  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int e : graph.out[static_cast<std::size_t>(s)]) {
      int t = graph.edges[static_cast<std::size_t>(e)].to;
      if (parent[static_cast<std::size_t>(t)] == -2) {
        parent[static_cast<std::size_t>(t)] = e;
        queue.push_back(t);
      }
    }
  }
  return parent;
}

std::vector<int> path_from_initial(const StateGraph& graph, const std::vector<int>& parent,
                                   int state) {
  std::vector<int> edges;
  int s = state;
  while (parent[static_cast<std::size_t>(s)] >= 0) {
    int e = parent[static_cast<std::size_t>(s)];
    edges.push_back(e);
    s = graph.edges[static_cast<std::size_t>(e)].from;
  }
  std::reverse(edges.begin(), edges.end());
  return edges;
}

CheckResult violation(Counterexample cex) {
  CheckResult r;
  r.holds = false;
  r.counterexample = std::move(cex);
  return r;
}

CheckResult check_deadlock_free(const StateGraph& graph) {
  for (std::size_t s = 0; s < graph.states.size(); ++s) {
    if (graph.out[s].empty() && !graph.state_terminal_by_design(static_cast<int>(s))) {
      Counterexample cex;
      cex.edge_path = path_from_initial(graph, bfs_parent_edges(graph), static_cast<int>(s));
      cex.note = "deadlocked state " + std::to_string(s);
      return violation(std::move(cex));
    }
  }
  return {true, std::nullopt};
}

CheckResult check_invariant(const StateGraph& graph, const Expr& pred) {
  for (std::size_t s = 0; s < graph.states.size(); ++s) {
    if (!graph.eval_predicate(pred, static_cast<int>(s))) {
      Counterexample cex;
      cex.edge_path = path_from_initial(graph, bfs_parent_edges(graph), static_cast<int>(s));
      cex.note = "state " + std::to_string(s) + " violates the invariant";
      return violation(std::move(cex));
    }
  }
  return {true, std::nullopt};
}

/// AG(p -> AF q) by the region construction: explore forward from every
/// reachable (p and not q) state without expanding q-states; the property
/// fails iff that region contains a dead end or a cycle.
CheckResult check_leads_to(const StateGraph& graph, const Expr& p, const Expr& q) {
  const std::size_t n = graph.states.size();
  std::vector<bool> q_sat(n);
  for (std::size_t s = 0; s < n; ++s) q_sat[s] = graph.eval_predicate(q, static_cast<int>(s));

  std::vector<bool> in_region(n, false);
  std::vector<int> region_parent(n, -1);  // edge that discovered the state
  std::vector<int> origin(n, -1);         // p-state the region search started from
  std::deque<int> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (q_sat[s] || !graph.eval_predicate(p, static_cast<int>(s))) continue;
    in_region[s] = true;
    origin[s] = static_cast<int>(s);
    queue.push_back(static_cast<int>(s));
  }
  if (queue.empty()) return {true, std::nullopt};

  while (!queue.empty()) {
    int s = queue.front();
    queue.pop_front();
    for (int e : graph.out[static_cast<std::size_t>(s)]) {
      int t = graph.edges[static_cast<std::size_t>(e)].to;
      if (q_sat[static_cast<std::size_t>(t)] || in_region[static_cast<std::size_t>(t)]) continue;
      in_region[static_cast<std::size_t>(t)] = true;
      region_parent[static_cast<std::size_t>(t)] = e;
      origin[static_cast<std::size_t>(t)] = origin[static_cast<std::size_t>(s)];
      queue.push_back(t);
    }
  }

  auto region_path = [&](int state) {
    std::vector<int> edges;
    int s = state;
    while (region_parent[static_cast<std::size_t>(s)] >= 0) {
      int e = region_parent[static_cast<std::size_t>(s)];
      edges.push_back(e);
      s = graph.edges[static_cast<std::size_t>(e)].from;
    }
    std::reverse(edges.begin(), edges.end());
    return std::pair<int, std::vector<int>>{s, std::move(edges)};  // (p-state, edges)
  };

  std::vector<int> parent;  // lazy BFS parents of the full graph

  auto stem_to = [&](int p_state) {
    if (parent.empty()) parent = bfs_parent_edges(graph);
    return path_from_initial(graph, parent, p_state);
  };

  // Dead ends first: cheaper to report and easier to read.
  for (std::size_t s = 0; s < n; ++s) {
    if (!in_region[s] || !graph.out[s].empty()) continue;
    auto [p_state, mid] = region_path(static_cast<int>(s));
    Counterexample cex;
    cex.edge_path = stem_to(p_state);
    cex.edge_path.insert(cex.edge_path.end(), mid.begin(), mid.end());
    cex.note = "maximal path ends in state " + std::to_string(s) + " without reaching the goal";
    return violation(std::move(cex));
  }

  // Cycle detection over region edges (edges between region states).
  // Iterative DFS with tricolor marking; the stack remembers the edge taken.
  enum Color : unsigned char { White, Grey, Black };
  std::vector<Color> color(n, White);
  std::vector<int> stack_edge(n, -1);
  for (std::size_t root = 0; root < n; ++root) {
    if (!in_region[root] || color[root] != White) continue;
    std::vector<std::pair<int, std::size_t>> stack{{static_cast<int>(root), 0}};
    color[root] = Grey;
    while (!stack.empty()) {
      auto& [s, next_idx] = stack.back();
      const auto& outs = graph.out[static_cast<std::size_t>(s)];
      bool descended = false;
      while (next_idx < outs.size()) {
        int e = outs[next_idx++];
        int t = graph.edges[static_cast<std::size_t>(e)].to;
        if (!in_region[static_cast<std::size_t>(t)]) continue;
        if (color[static_cast<std::size_t>(t)] == Grey) {
          // Cycle: t ... s on the DFS stack, closed by e.
          std::vector<int> cycle_edges{e};
          for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            if (it->first == t) break;
            cycle_edges.push_back(stack_edge[static_cast<std::size_t>(it->first)]);
          }
          std::reverse(cycle_edges.begin(), cycle_edges.end());
          auto [p_state, mid] = region_path(t);
          Counterexample cex;
          cex.edge_path = stem_to(p_state);
          cex.edge_path.insert(cex.edge_path.end(), mid.begin(), mid.end());
          cex.loop_entry = cex.edge_path.size();  // position of t in the state path
          cex.edge_path.insert(cex.edge_path.end(), cycle_edges.begin(), cycle_edges.end());
          cex.note = "cycle through state " + std::to_string(t) + " avoids the goal";
          return violation(std::move(cex));
        }
        if (color[static_cast<std::size_t>(t)] == White) {
          color[static_cast<std::size_t>(t)] = Grey;
          stack_edge[static_cast<std::size_t>(t)] = e;
          stack.emplace_back(t, 0);
          descended = true;
          break;
        }
      }
      if (!descended && (stack.empty() || stack.back().first == s)) {
        color[static_cast<std::size_t>(s)] = Black;
        stack.pop_back();
      }
    }
  }
  return {true, std::nullopt};
}

}  // namespace

std::vector<int> Counterexample::state_path(const StateGraph& graph) const {
  std::vector<int> states{0};
  for (int e : edge_path) states.push_back(graph.edges[static_cast<std::size_t>(e)].to);
  return states;
}

std::string Counterexample::to_text(const StateGraph& graph) const {
  std::ostringstream out;
  out << note << "\n";
  int current = 0;
  for (std::size_t i = 0; i < edge_path.size(); ++i) {
    const GraphEdge& e = graph.edges[static_cast<std::size_t>(edge_path[i])];
    if (loop_entry && *loop_entry == i) out << "  -- loop from here --\n";
    out << "  [" << e.from << " -> " << e.to << "] " << e.label.describe(graph.network) << "\n";
    current = e.to;
  }
  out << "  ends in state " << current << "\n";
  return out.str();
}

CheckResult check(const StateGraph& graph, const CtlQuery& query) {
  switch (query.kind) {
    case CtlQuery::Kind::DeadlockFree:
      return check_deadlock_free(graph);
    case CtlQuery::Kind::Invariant:
      return check_invariant(graph, query.p);
    case CtlQuery::Kind::LeadsTo:
      return check_leads_to(graph, query.p, query.q);
  }
  throw Error("corrupt query");
}

bool replay_counterexample(const StateGraph& graph, const CtlQuery& query,
                           const Counterexample& cex) {
  // Re-execute the edge sequence through the network semantics.
  NetworkState current = initial_state(graph.network);
  if (!(current == graph.states[0])) return false;
  int current_index = 0;
  for (int ei : cex.edge_path) {
    const GraphEdge& e = graph.edges[static_cast<std::size_t>(ei)];
    if (e.from != current_index) return false;
    bool fired = false;
    for (const auto& [next, label] : successors(graph.network, current)) {
      if (label.kind == e.label.kind && label.automaton == e.label.automaton &&
          label.edge == e.label.edge && label.partner_automaton == e.label.partner_automaton &&
          label.partner_edge == e.label.partner_edge) {
        if (!(next == graph.states[static_cast<std::size_t>(e.to)])) return false;
        current = next;
        current_index = e.to;
        fired = true;
        break;
      }
    }
    if (!fired) return false;
  }

  std::vector<int> states = cex.state_path(graph);
  switch (query.kind) {
    case CtlQuery::Kind::DeadlockFree:
      return successors(graph.network, current).empty() &&
             !graph.state_terminal_by_design(current_index);
    case CtlQuery::Kind::Invariant:
      return !graph.eval_predicate(query.p, current_index);
    case CtlQuery::Kind::LeadsTo: {
      // A premise state must occur with no goal state from there onward, and
      // the path must end in a dead end or close the recorded loop.
      std::optional<std::size_t> premise;
      for (std::size_t i = 0; i < states.size(); ++i) {
        if (graph.eval_predicate(query.p, states[i]) &&
            !graph.eval_predicate(query.q, states[i]))
          premise = i;
      }
      if (!premise) return false;
      std::size_t start = *premise;
      if (cex.loop_entry) start = std::min(start, *cex.loop_entry);
      for (std::size_t i = *premise; i < states.size(); ++i)
        if (graph.eval_predicate(query.q, states[i])) return false;
      if (cex.loop_entry) {
        if (*cex.loop_entry >= states.size()) return false;
        if (!(graph.states[static_cast<std::size_t>(states.back())] ==
              graph.states[static_cast<std::size_t>(states[*cex.loop_entry])]))
          return false;
        for (std::size_t i = *cex.loop_entry; i < states.size(); ++i)
          if (graph.eval_predicate(query.q, states[i])) return false;
        return true;
      }
      return successors(graph.network, current).empty();
    }
  }
  return false;
}

std::vector<NamedQuery> generic_controller_properties() {
  auto leads_to = [](std::string id, std::string desc, const char* p, const char* q) {
    NamedQuery nq;
    nq.id = std::move(id);
    nq.description = std::move(desc);
    nq.query.kind = CtlQuery::Kind::LeadsTo;
    nq.query.p = expr_parse(p);
    nq.query.q = expr_parse(q);
    return nq;
  };
  std::vector<NamedQuery> props;
  {
    NamedQuery p1;
    p1.id = "P1";
    p1.description = "controller network is deadlock free";
    p1.query.kind = CtlQuery::Kind::DeadlockFree;
    props.push_back(std::move(p1));
  }
  props.push_back(leads_to("P2", "requested analyses are eventually performed",
                           "Monitor.StartAnalysis", "Analyzer.Analyse"));
  props.push_back(leads_to("P3", "required adaptations eventually yield a plan",
                           "Analyzer.Adapt", "Planner.PlanCreated"));
  props.push_back(leads_to("P4", "created plans are eventually executed",
                           "Planner.PlanCreated", "Executor.PlanExecuted"));
  props.push_back(leads_to("P5", "monitor processing terminates",
                           "Monitor.ProcessSensorData", "Monitor.Finished"));
  props.push_back(leads_to("P6", "analysis terminates", "Analyzer.Analyse",
                           "Analyzer.AnalysisFinished"));
  props.push_back(leads_to("P7", "planning terminates", "Planner.Plan", "Planner.PlanCreated"));
  props.push_back(leads_to("P8", "plan execution terminates", "Executor.Execute",
                           "Executor.PlanExecuted"));
  {
    NamedQuery p9;
    p9.id = "P9";
    p9.description = "adaptation implies the selected configuration differs";
    p9.query.kind = CtlQuery::Kind::Invariant;
    p9.query.p = expr_parse("not Analyzer.Adapt or currentConfig != newConfig");
    props.push_back(std::move(p9));
  }
  return props;
}

bool SuiteReport::all_hold() const {
  for (const auto& v : verdicts)
    if (!v.holds) return false;
  return true;
}

const PropertyVerdict* SuiteReport::find(const std::string& id) const {
  for (const auto& v : verdicts)
    if (v.id == id) return &v;
  return nullptr;
}

std::string SuiteReport::to_text() const {
  std::ostringstream out;
  out << "controller verification report\n";
  out << "states " << state_count << "\n";
  out << "edges " << edge_count << "\n";
  for (const auto& v : verdicts) {
    out << v.id << " " << (v.holds ? "holds" : "FAILS") << "  # " << v.description << "\n";
    if (!v.holds && !v.counterexample_text.empty()) {
      std::istringstream lines(v.counterexample_text);
      std::string line;
      while (std::getline(lines, line)) out << "    " << line << "\n";
    }
  }
  return out.str();
}

SuiteReport verify_generic_suite(const StateGraph& graph,
                                 const std::vector<NamedQuery>& app_properties) {
  auto start = std::chrono::steady_clock::now();
  SuiteReport report;
  report.state_count = graph.states.size();
  report.edge_count = graph.edges.size();

  std::vector<NamedQuery> all = generic_controller_properties();
  all.insert(all.end(), app_properties.begin(), app_properties.end());
  for (const auto& nq : all) {
    PropertyVerdict verdict;
    verdict.id = nq.id;
    verdict.description = nq.description;
    CheckResult result = check(graph, nq.query);
    verdict.holds = result.holds;
    if (result.counterexample) {
      verdict.counterexample_text = result.counterexample->to_text(graph);
      verdict.counterexample = std::move(result.counterexample);
    }
    report.verdicts.push_back(std::move(verdict));
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace certloop
