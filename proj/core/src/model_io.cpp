#include "certloop/model_io.hpp"

#include <map>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

namespace {

std::string weight_text(const Expr& e) {
  return expr_print(e);
}

void emit_states(const std::vector<std::string>& names,
                 const std::vector<std::vector<std::string>>& labels, KvNode& out) {
  KvNode& states = out.add_block("states");
  for (std::size_t i = 0; i < names.size(); ++i) {
    KvNode& s = states.add("s", names[i]);
    for (const auto& l : labels[i]) s.args.push_back(l);
  }
}

template <typename TransT, typename WeightFn>
void emit_transitions(const std::vector<std::string>& names, const std::vector<TransT>& ts,
                      WeightFn weight, KvNode& out) {
  KvNode& block = out.add_block("transitions");
  for (const auto& t : ts) {
    KvNode& e = block.add("t", names[static_cast<std::size_t>(t.source)]);
    e.args.push_back(names[static_cast<std::size_t>(t.target)]);
    e.args.push_back(weight(t));
  }
}

int state_index(const std::vector<std::string>& names, const std::string& name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  throw Error("unknown state in model file: " + name);
}

}  // namespace

KvNode template_to_kv(const ModelTemplate& tmpl) {
  KvNode node;
  node.name = tmpl.parameters.empty() ? "model" : "model-template";
  node.is_block = true;
  node.add("kind", tmpl.kind == ModelKind::Continuous ? "ctmc" : "dtmc");
  node.add("initial", tmpl.state_names[static_cast<std::size_t>(tmpl.initial)]);
  emit_states(tmpl.state_names, tmpl.state_labels, node);
  emit_transitions(tmpl.state_names, tmpl.transitions,
                   [](const TemplateTransition& t) { return weight_text(t.weight); }, node);
  for (const auto& [name, rw] : tmpl.rewards) {
    KvNode& block = node.add_block("rewards");
    block.args.push_back(name);
    for (std::size_t s = 0; s < rw.state_rewards.size(); ++s) {
      if (rw.state_rewards[s].is_number() && rw.state_rewards[s].number == 0.0) continue;
      KvNode& e = block.add("state", tmpl.state_names[s]);
      e.args.push_back(weight_text(rw.state_rewards[s]));
    }
    for (const auto& [edge, expr] : rw.transition_rewards) {
      if (expr.is_number() && expr.number == 0.0) continue;
      KvNode& e = block.add("trans", tmpl.state_names[static_cast<std::size_t>(edge.first)]);
      e.args.push_back(tmpl.state_names[static_cast<std::size_t>(edge.second)]);
      e.args.push_back(weight_text(expr));
    }
  }
  if (!tmpl.parameters.empty()) {
    KvNode& block = node.add_block("parameters");
    for (const auto& p : tmpl.parameters) {
      KvNode& e = block.add("p", p.name);
      e.args.push_back(p.unit);
      e.args.push_back(format_double(p.lo));
      e.args.push_back(format_double(p.hi));
    }
  }
  return node;
}

ModelTemplate template_from_kv(const KvNode& node) {
  ModelTemplate tmpl;
  const std::string kind = node.at("kind").arg(0);
  if (kind == "ctmc")
    tmpl.kind = ModelKind::Continuous;
  else if (kind == "dtmc")
    tmpl.kind = ModelKind::Discrete;
  else
    throw Error("unknown model kind: " + kind);

  for (const KvNode* s : node.at("states").all("s")) {
    tmpl.state_names.push_back(s->arg(0));
    std::vector<std::string> labels(s->args.begin() + 1, s->args.end());
    tmpl.state_labels.push_back(std::move(labels));
  }
  if (tmpl.state_names.empty()) throw Error("model file declares no states");
  tmpl.initial = state_index(tmpl.state_names, node.at("initial").arg(0));

  if (const KvNode* ts = node.find("transitions")) {
    for (const KvNode* t : ts->all("t")) {
      TemplateTransition tt;
      tt.source = state_index(tmpl.state_names, t->arg(0));
      tt.target = state_index(tmpl.state_names, t->arg(1));
      tt.weight = expr_parse(t->arg(2));
      tmpl.transitions.push_back(std::move(tt));
    }
  }

  for (const KvNode* block : node.all("rewards")) {
    TemplateRewards rw;
    rw.state_rewards.assign(tmpl.state_names.size(), Expr::num(0.0));
    for (const KvNode* e : block->all("state")) {
      int s = state_index(tmpl.state_names, e->arg(0));
      rw.state_rewards[static_cast<std::size_t>(s)] = expr_parse(e->arg(1));
    }
    for (const KvNode* e : block->all("trans")) {
      int s = state_index(tmpl.state_names, e->arg(0));
      int t = state_index(tmpl.state_names, e->arg(1));
      rw.transition_rewards[{s, t}] = expr_parse(e->arg(2));
    }
    tmpl.rewards.emplace(block->arg(0), std::move(rw));
  }

  if (const KvNode* params = node.find("parameters")) {
    for (const KvNode* p : params->all("p")) {
      ParamSpec spec;
      spec.name = p->arg(0);
      spec.unit = p->arg(1);
      spec.lo = p->num(2);
      spec.hi = p->num(3);
      tmpl.parameters.push_back(std::move(spec));
    }
  }

  validate_template(tmpl);
  return tmpl;
}

KvNode model_to_kv(const MarkovModel& model) {
  ModelTemplate tmpl;
  tmpl.kind = model.kind;
  tmpl.state_names = model.state_names;
  tmpl.state_labels = model.state_labels;
  tmpl.initial = model.initial;
  for (const auto& t : model.transitions)
    tmpl.transitions.push_back({t.source, t.target, Expr::num(t.weight)});
  for (const auto& [name, rs] : model.rewards) {
    TemplateRewards rw;
    for (double v : rs.state_rewards) rw.state_rewards.push_back(Expr::num(v));
    for (const auto& [edge, v] : rs.transition_rewards)
      rw.transition_rewards[edge] = Expr::num(v);
    tmpl.rewards.emplace(name, std::move(rw));
  }
  return template_to_kv(tmpl);
}

MarkovModel model_from_kv(const KvNode& node) {
  ModelTemplate tmpl = template_from_kv(node);
  if (!tmpl.parameters.empty())
    throw Error("expected a concrete model but file declares parameters");
  return bind_parameters(tmpl, {});
}

namespace {
const KvNode& model_root(const KvNode& doc) {
  if (const KvNode* n = doc.find("model")) return *n;
  if (const KvNode* n = doc.find("model-template")) return *n;
  throw Error("file contains no model block");
}
}  // namespace

std::string serialize_template(const ModelTemplate& tmpl) {
  KvNode root;
  root.is_block = true;
  root.children.push_back(template_to_kv(tmpl));
  return kv_serialize(root);
}

ModelTemplate parse_template(std::string_view text) {
  return template_from_kv(model_root(kv_parse(text)));
}

std::string serialize_model(const MarkovModel& model) {
  KvNode root;
  root.is_block = true;
  root.children.push_back(model_to_kv(model));
  return kv_serialize(root);
}

MarkovModel parse_model(std::string_view text) {
  return model_from_kv(model_root(kv_parse(text)));
}

ModelTemplate load_template(const std::string& path) { return parse_template(read_file(path)); }

MarkovModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace certloop
