#include "doctest.h"

#include "certloop/ctl.hpp"

using namespace certloop;

static const std::string kData = CERTLOOP_DATA_DIR;

namespace {

struct Loaded {
  NetworkFile file;
  StateGraph graph;
};

Loaded load(const std::string& name) {
  Loaded l;
  l.file = load_network(kData + "/automata/" + name);
  l.graph = compose_and_explore(l.file.network);
  return l;
}

/// Removes the first edge of `automaton` matching the predicate.
template <typename Pred>
Network drop_edge(Network net, const std::string& automaton, Pred pred) {
  int a = net.automaton_index(automaton);
  REQUIRE(a >= 0);
  auto& edges = net.automata[static_cast<std::size_t>(a)].edges;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (pred(edges[i])) {
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i));
      return net;
    }
  }
  FAIL("no matching edge to drop");
  return net;
}

void expect_failure(const Network& mutated, const std::vector<NamedQuery>& app_properties,
                    const std::string& property_id) {
  StateGraph graph = compose_and_explore(mutated);
  SuiteReport report = verify_generic_suite(graph, app_properties);
  const PropertyVerdict* verdict = report.find(property_id);
  REQUIRE(verdict != nullptr);
  CHECK(!verdict->holds);
  REQUIRE(verdict->counterexample.has_value());
  // the counterexample replays from the initial state
  std::vector<NamedQuery> all = generic_controller_properties();
  all.insert(all.end(), app_properties.begin(), app_properties.end());
  const NamedQuery* query = nullptr;
  for (const auto& nq : all)
    if (nq.id == property_id) query = &nq;
  REQUIRE(query != nullptr);
  CHECK(replay_counterexample(graph, query->query, *verdict->counterexample));
}

}  // namespace

TEST_CASE("both controller networks satisfy the full property suite") {
  for (const char* name : {"uuv_mape.kv", "fx_mape.kv"}) {
    CAPTURE(name);
    Loaded l = load(name);
    SuiteReport report = verify_generic_suite(l.graph, l.file.properties);
    REQUIRE(report.verdicts.size() == 10);  // P1..P9 plus the failsafe property
    for (const auto& v : report.verdicts) {
      CAPTURE(v.id);
      CAPTURE(v.counterexample_text);
      CHECK(v.holds);
    }
  }
}

TEST_CASE("verification without application properties yields the nine generic verdicts") {
  Loaded l = load("uuv_mape.kv");
  SuiteReport report = verify_generic_suite(l.graph, {});
  CHECK(report.verdicts.size() == 9);
}

TEST_CASE("suite reports are deterministic") {
  Loaded l = load("uuv_mape.kv");
  SuiteReport a = verify_generic_suite(l.graph, l.file.properties);
  SuiteReport b = verify_generic_suite(l.graph, l.file.properties);
  CHECK(a.to_text() == b.to_text());
}

TEST_CASE("mutation: planner that never hands over to the executor breaks P4") {
  Loaded l = load("uuv_mape.kv");
  Network mutated = drop_edge(l.file.network, "Planner", [](const AutomatonEdge& e) {
    return e.sync == SyncKind::Send && e.channel == "startExecuting";
  });
  expect_failure(mutated, l.file.properties, "P4");
}

TEST_CASE("mutation: monitor that never requests analysis breaks P2") {
  Loaded l = load("uuv_mape.kv");
  Network mutated = drop_edge(l.file.network, "Monitor", [](const AutomatonEdge& e) {
    return e.sync == SyncKind::Send && e.channel == "startAnalysis";
  });
  expect_failure(mutated, l.file.properties, "P2");
}

TEST_CASE("mutation: executor that cannot finish a plan breaks P8") {
  Loaded l = load("uuv_mape.kv");
  Network mutated = drop_edge(l.file.network, "Executor", [](const AutomatonEdge& e) {
    return e.sync == SyncKind::Internal;  // the all-steps-done exit edge
  });
  expect_failure(mutated, l.file.properties, "P8");
}

TEST_CASE("mutation: adapt branch that tolerates equal configurations breaks P9") {
  Loaded l = load("uuv_mape.kv");
  Network net = l.file.network;
  int a = net.automaton_index("Analyzer");
  for (auto& e : net.automata[static_cast<std::size_t>(a)].edges) {
    if (e.guard && expr_print(*e.guard).find("newConfig != currentConfig") != std::string::npos)
      e.guard = expr_parse("expired == 0 and feasible == 1");
  }
  expect_failure(net, l.file.properties, "P9");
}

TEST_CASE("mutation: failsafe branch that picks a live configuration breaks R4") {
  Loaded l = load("uuv_mape.kv");
  Network net = l.file.network;
  int a = net.automaton_index("Analyzer");
  for (auto& e : net.automata[static_cast<std::size_t>(a)].edges) {
    if (e.guard && expr_print(*e.guard) == "expired == 1") {
      e.assignments.clear();
      e.assignments.emplace_back("newConfig", expr_parse("2"));
    }
  }
  expect_failure(net, l.file.properties, "R4");
}

TEST_CASE("mutation: analyzer without the expired branch deadlocks") {
  Loaded l = load("uuv_mape.kv");
  Network mutated = drop_edge(l.file.network, "Analyzer", [](const AutomatonEdge& e) {
    return e.guard && expr_print(*e.guard) == "expired == 1";
  });
  expect_failure(mutated, l.file.properties, "P1");
}

TEST_CASE("mutation: fx planner stuck before handover breaks P4 on the fx network") {
  Loaded l = load("fx_mape.kv");
  Network mutated = drop_edge(l.file.network, "Planner", [](const AutomatonEdge& e) {
    return e.sync == SyncKind::Send && e.channel == "startExecuting";
  });
  expect_failure(mutated, l.file.properties, "P4");
}

TEST_CASE("mutation: fx failsafe rerouted to a live configuration breaks R4") {
  Loaded l = load("fx_mape.kv");
  Network net = l.file.network;
  int a = net.automaton_index("Analyzer");
  for (auto& e : net.automata[static_cast<std::size_t>(a)].edges) {
    if (e.guard && expr_print(*e.guard) == "expired == 1") {
      e.assignments.clear();
      e.assignments.emplace_back("newConfig", expr_parse("1"));
    }
  }
  expect_failure(net, l.file.properties, "R4");
}

TEST_CASE("the shipped broken fixture fails verification") {
  Loaded l = load("uuv_mape_broken.kv");
  SuiteReport report = verify_generic_suite(l.graph, l.file.properties);
  CHECK(!report.all_hold());
}
