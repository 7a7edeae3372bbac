#include "certloop/automaton.hpp"

#include <algorithm>
#include <set>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

int Automaton::location_index(std::string_view loc) const {
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (locations[i] == loc) return static_cast<int>(i);
  throw Error("automaton " + name + " has no location '" + std::string(loc) + "'");
}

int Network::automaton_index(std::string_view n) const {
  for (std::size_t i = 0; i < automata.size(); ++i)
    if (automata[i].name == n) return static_cast<int>(i);
  return -1;
}

int Network::variable_index(std::string_view n) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == n) return static_cast<int>(i);
  return -1;
}

void Network::validate() const {
  std::set<std::string> senders, receivers;
  for (const auto& a : automata) {
    for (const auto& e : a.edges) {
      if (e.source < 0 || e.source >= static_cast<int>(a.locations.size()) || e.target < 0 ||
          e.target >= static_cast<int>(a.locations.size()))
        throw Error("edge location index out of range in automaton " + a.name);
      if (e.sync != SyncKind::Internal) {
        if (std::find(channels.begin(), channels.end(), e.channel) == channels.end())
          throw Error("undeclared channel '" + e.channel + "' in automaton " + a.name);
        (e.sync == SyncKind::Send ? senders : receivers).insert(e.channel);
      }
      std::set<std::string> syms;
      if (e.guard) expr_symbols(*e.guard, syms);
      for (const auto& [var, expr] : e.assignments) {
        syms.insert(var);
        expr_symbols(expr, syms);
      }
      for (const auto& s : syms)
        if (variable_index(s) < 0)
          throw Error("edge in automaton " + a.name + " references undeclared variable '" + s +
                      "'");
    }
  }
  for (const auto& c : channels) {
    if (!senders.count(c) || !receivers.count(c)) throw UnmatchedChannel(c);
  }
}

namespace {

void emit_automaton(const Automaton& a, KvNode& parent) {
  KvNode& node = parent.add_block("automaton");
  node.args.push_back(a.name);
  node.add("initial", a.locations[static_cast<std::size_t>(a.initial)]);
  for (std::size_t i = 0; i < a.locations.size(); ++i) {
    KvNode& l = node.add("location", a.locations[i]);
    if (a.terminal[i]) l.args.emplace_back("terminal");
  }
  for (const auto& e : a.edges) {
    KvNode& edge = node.add_block("edge");
    edge.args.push_back(a.locations[static_cast<std::size_t>(e.source)]);
    edge.args.push_back(a.locations[static_cast<std::size_t>(e.target)]);
    if (e.sync == SyncKind::Send) edge.add("send", e.channel);
    if (e.sync == SyncKind::Receive) edge.add("receive", e.channel);
    if (e.guard) edge.add("guard", expr_print(*e.guard));
    for (const auto& [var, expr] : e.assignments)
      edge.add("assign", var + " = " + expr_print(expr));
  }
}

Automaton parse_automaton(const KvNode& node) {
  Automaton a;
  a.name = node.arg(0);
  for (const KvNode* l : node.all("location")) {
    a.locations.push_back(l->arg(0));
    bool term = l->args.size() > 1 && l->args[1] == "terminal";
    a.terminal.push_back(term);
  }
  if (a.locations.empty()) throw Error("automaton " + a.name + " has no locations");
  a.initial = a.location_index(node.at("initial").arg(0));
  for (const KvNode* e : node.all("edge")) {
    AutomatonEdge edge;
    edge.source = a.location_index(e->arg(0));
    edge.target = a.location_index(e->arg(1));
    if (const KvNode* s = e->find("send")) {
      edge.sync = SyncKind::Send;
      edge.channel = s->arg(0);
    }
    if (const KvNode* r = e->find("receive")) {
      if (edge.sync != SyncKind::Internal)
        throw Error("edge in " + a.name + " both sends and receives");
      edge.sync = SyncKind::Receive;
      edge.channel = r->arg(0);
    }
    if (const KvNode* g = e->find("guard")) edge.guard = expr_parse(g->arg(0));
    for (const KvNode* as : e->all("assign")) {
      const std::string& text = as->arg(0);
      auto pos = text.find('=');
      if (pos == std::string::npos) throw Error("malformed assignment: " + text);
      std::string var = text.substr(0, pos);
      var.erase(std::remove_if(var.begin(), var.end(), ::isspace), var.end());
      edge.assignments.emplace_back(var, expr_parse(text.substr(pos + 1)));
    }
    a.edges.push_back(std::move(edge));
  }
  return a;
}

CtlQuery parse_query(const KvNode& q) {
  CtlQuery query;
  const std::string& kind = q.arg(1);
  if (kind == "deadlockfree") {
    query.kind = CtlQuery::Kind::DeadlockFree;
  } else if (kind == "leadsto") {
    query.kind = CtlQuery::Kind::LeadsTo;
    query.p = expr_parse(q.arg(2));
    query.q = expr_parse(q.arg(3));
  } else if (kind == "invariant") {
    query.kind = CtlQuery::Kind::Invariant;
    query.p = expr_parse(q.arg(2));
  } else {
    throw Error("unknown query kind: " + kind);
  }
  return query;
}

}  // namespace

KvNode network_to_kv(const NetworkFile& file) {
  KvNode node;
  node.name = "network";
  node.is_block = true;
  KvNode& chans = node.add_block("channels");
  for (const auto& c : file.network.channels) chans.add("c", c);
  KvNode& vars = node.add_block("variables");
  for (const auto& v : file.network.variables) {
    KvNode& e = vars.add("v", v.name);
    e.args.push_back(std::to_string(v.lo));
    e.args.push_back(std::to_string(v.hi));
    e.args.push_back(std::to_string(v.init));
  }
  for (const auto& a : file.network.automata) emit_automaton(a, node);
  if (!file.properties.empty()) {
    KvNode& props = node.add_block("properties");
    for (const auto& p : file.properties) {
      KvNode& q = props.add("query", p.id);
      switch (p.query.kind) {
        case CtlQuery::Kind::DeadlockFree:
          q.args.emplace_back("deadlockfree");
          break;
        case CtlQuery::Kind::LeadsTo:
          q.args.emplace_back("leadsto");
          q.args.push_back(expr_print(p.query.p));
          q.args.push_back(expr_print(p.query.q));
          break;
        case CtlQuery::Kind::Invariant:
          q.args.emplace_back("invariant");
          q.args.push_back(expr_print(p.query.p));
          break;
      }
      if (!p.description.empty()) q.args.push_back(p.description);
    }
  }
  return node;
}

NetworkFile network_from_kv(const KvNode& node) {
  NetworkFile file;
  for (const KvNode* c : node.at("channels").all("c"))
    file.network.channels.push_back(c->arg(0));
  if (const KvNode* vars = node.find("variables")) {
    for (const KvNode* v : vars->all("v")) {
      VarDecl d;
      d.name = v->arg(0);
      d.lo = static_cast<int>(v->num(1));
      d.hi = static_cast<int>(v->num(2));
      d.init = static_cast<int>(v->num(3));
      if (d.init < d.lo || d.init > d.hi)
        throw Error("initial value of " + d.name + " outside its range");
      file.network.variables.push_back(std::move(d));
    }
  }
  for (const KvNode* a : node.all("automaton"))
    file.network.automata.push_back(parse_automaton(*a));
  if (const KvNode* props = node.find("properties")) {
    for (const KvNode* q : props->all("query")) {
      NamedQuery nq;
      nq.id = q->arg(0);
      nq.query = parse_query(*q);
      std::size_t desc_index = nq.query.kind == CtlQuery::Kind::DeadlockFree ? 2
                               : nq.query.kind == CtlQuery::Kind::LeadsTo    ? 4
                                                                             : 3;
      if (auto d = q->opt_arg(desc_index)) nq.description = *d;
      file.properties.push_back(std::move(nq));
    }
  }
  file.network.validate();
  return file;
}

NetworkFile load_network(const std::string& path) {
  KvNode doc = kv_load(path);
  const KvNode* n = doc.find("network");
  if (!n) throw Error(path + ": no network block");
  return network_from_kv(*n);
}

std::string serialize_network(const NetworkFile& file) {
  KvNode root;
  root.is_block = true;
  root.children.push_back(network_to_kv(file));
  return kv_serialize(root);
}

}  // namespace certloop
