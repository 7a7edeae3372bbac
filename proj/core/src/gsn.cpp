#include "certloop/gsn.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "certloop/errors.hpp"
#include "certloop/kv.hpp"
#include "certloop/util.hpp"

namespace certloop {

namespace {

const char* kKindNames[] = {"goal",    "strategy",      "solution", "context",
                            "assumption", "justification", "awaygoal"};

std::string replace_placeholder(std::string text, const std::string& key,
                                const std::string& value) {
  const std::string token = "{" + key + "}";
  std::size_t pos;
  while ((pos = text.find(token)) != std::string::npos)
    text.replace(pos, token.size(), value);
  return text;
}

}  // namespace

std::string gsn_kind_name(GsnKind kind) { return kKindNames[static_cast<int>(kind)]; }

GsnKind gsn_kind_from(const std::string& name) {
  for (int i = 0; i < 7; ++i)
    if (name == kKindNames[i]) return static_cast<GsnKind>(i);
  throw Error("unknown GSN node kind: " + name);
}

bool GsnNode::has_placeholder() const {
  auto open = text.find('{');
  return open != std::string::npos && text.find('}', open) != std::string::npos;
}

const GsnNode* GsnArgument::find(const std::string& id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

GsnNode* GsnArgument::find(const std::string& id) {
  for (auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<const GsnEdge*> GsnArgument::edges_from(const std::string& parent) const {
  std::vector<const GsnEdge*> out;
  for (const auto& e : edges)
    if (e.parent == parent) out.push_back(&e);
  return out;
}

std::string gsn_stage_name(GsnStage stage) {
  switch (stage) {
    case GsnStage::Pattern:
      return "pattern";
    case GsnStage::Partial:
      return "partial";
    case GsnStage::Full:
      return "full";
  }
  return "?";
}

std::string platform_evidence_digest() {
  return digest_hex("controller-platform-test-suite-v1");
}

GsnArgument load_argument_pattern() {
  GsnArgument a;
  a.stage = GsnStage::Pattern;

  auto node = [&](std::string id, GsnKind kind, std::string text, bool uninst = false,
                  bool undev = false) {
    GsnNode n;
    n.id = std::move(id);
    n.kind = kind;
    n.text = std::move(text);
    n.uninstantiated = uninst;
    n.undeveloped = undev;
    a.nodes.push_back(std::move(n));
  };
  auto support = [&](std::string parent, std::string child, std::string annotation = "") {
    a.edges.push_back({std::move(parent), std::move(child), GsnEdgeKind::SupportedBy,
                       std::move(annotation)});
  };
  auto context = [&](std::string parent, std::string child) {
    a.edges.push_back({std::move(parent), std::move(child), GsnEdgeKind::InContextOf, ""});
  };

  node("ReqsSatisfied", GsnKind::Goal,
       "System requirements {requirements} are satisfied at all times", true);
  node("ReqsConfiguration", GsnKind::Context, "Active configuration: {configuration}", true);
  node("Reconfig", GsnKind::Goal,
       "The controller replans and reconfigures the system whenever an observed change "
       "requires it");
  node("MapeLogicVerified", GsnKind::Goal,
       "The monitor-analyse-plan-execute controller logic satisfies its generic correctness "
       "properties and the failsafe requirement");
  node("CtrlVerificationEvidence", GsnKind::Solution,
       "Controller network model-checking report {design_evidence}", true);
  node("RxAchieved", GsnKind::Goal, "Requirement {Rx} is achieved in the active configuration",
       true, true);
  node("RxVerified", GsnKind::Goal,
       "Requirement {Rx} holds for the active configuration per the up-to-date system and "
       "environment models",
       true);
  node("RxResult", GsnKind::Solution, "Verification result for {Rx}: {evidence}", true);
  node("ReqsPreservedByPlatform", GsnKind::AwayGoal,
       "The controlled platform applies reconfiguration commands without violating "
       "requirements (assured externally)");
  node("NoErroneousBehaviour", GsnKind::AwayGoal,
       "Reconfiguration introduces no erroneous behaviour");
  node("FMsManaged", GsnKind::Goal,
       "Failure modes relevant to reconfiguration are identified and addressed");
  node("FMsIdentified", GsnKind::Goal, "Relevant failure modes are identified", false, true);
  node("ResDerived", GsnKind::Goal,
       "The system requirements fully address the identified failure modes", false, true);
  node("EngErrorsAbsent", GsnKind::Goal,
       "Engineering of the adaptation layer introduces no errors");
  node("NoProcessError", GsnKind::Goal,
       "The engineering process avoids methodological errors");
  node("SuitableSoftEngProcess", GsnKind::AwayGoal,
       "A suitable software engineering process was followed (assured externally)");
  node("NoControllerSystemError", GsnKind::Goal,
       "Neither the controller nor the controlled system introduces errors");
  {
    GsnNode n;
    n.id = "PlatformEvidence";
    n.kind = GsnKind::Solution;
    n.text = "Reusable controller platform test-suite evidence";
    n.evidence_ref = platform_evidence_digest();
    a.nodes.push_back(std::move(n));
  }
  node("ControlledSystem", GsnKind::AwayGoal,
       "The controlled system is free of errors (assured externally)");

  context("ReqsSatisfied", "ReqsConfiguration");
  support("ReqsSatisfied", "Reconfig");
  support("ReqsSatisfied", "RxAchieved", "one per requirement");
  support("ReqsSatisfied", "NoErroneousBehaviour");
  support("Reconfig", "MapeLogicVerified");
  support("MapeLogicVerified", "CtrlVerificationEvidence");
  support("RxAchieved", "RxVerified");
  support("RxVerified", "RxResult");
  support("RxAchieved", "ReqsPreservedByPlatform");
  support("NoErroneousBehaviour", "FMsManaged");
  support("NoErroneousBehaviour", "EngErrorsAbsent");
  support("FMsManaged", "FMsIdentified");
  support("FMsManaged", "ResDerived");
  support("EngErrorsAbsent", "NoProcessError");
  support("EngErrorsAbsent", "NoControllerSystemError");
  support("NoProcessError", "SuitableSoftEngProcess");
  support("NoControllerSystemError", "CtrlVerificationEvidence");
  support("NoControllerSystemError", "PlatformEvidence");
  support("NoControllerSystemError", "ControlledSystem");
  return a;
}

GsnArgument instantiate_partial(const GsnArgument& pattern,
                                const std::vector<RequirementDescriptor>& requirements,
                                const SuiteReport& design_evidence,
                                const std::string& design_evidence_digest) {
  // Everything the design stage relies on must be present and passing.
  std::vector<std::string> needed{"P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9"};
  for (const auto& r : requirements)
    if (r.design_time) needed.push_back(r.id);
  for (const auto& id : needed) {
    const PropertyVerdict* v = design_evidence.find(id);
    if (!v) throw MissingDesignEvidence(id);
    if (!v->holds)
      throw Error("design evidence reports a failing property: " + id);
  }

  GsnArgument out;
  out.stage = GsnStage::Partial;
  out.version = 0;
  out.timestamp = 0.0;

  std::string req_list;
  for (const auto& r : requirements) {
    if (!req_list.empty()) req_list += ", ";
    req_list += r.id;
  }

  for (const auto& n : pattern.nodes) {
    if (n.id == "RxAchieved" || n.id == "RxVerified" || n.id == "RxResult")
      continue;  // expanded per requirement below
    GsnNode copy = n;
    if (copy.id == "ReqsSatisfied") {
      copy.text = replace_placeholder(copy.text, "requirements", req_list);
      copy.uninstantiated = copy.has_placeholder();
    }
    if (copy.id == "CtrlVerificationEvidence") {
      copy.text = replace_placeholder(copy.text, "design_evidence", design_evidence_digest);
      copy.evidence_ref = design_evidence_digest;
      copy.uninstantiated = false;
    }
    out.nodes.push_back(std::move(copy));
  }

  const GsnNode& achieved_tpl = *pattern.find("RxAchieved");
  const GsnNode& verified_tpl = *pattern.find("RxVerified");
  const GsnNode& result_tpl = *pattern.find("RxResult");
  for (const auto& r : requirements) {
    const std::string described = r.id + " (" + r.text + ")";
    GsnNode achieved = achieved_tpl;
    achieved.id = r.id + "Achieved";
    achieved.text = replace_placeholder(achieved.text, "Rx", described);
    achieved.uninstantiated = false;
    achieved.undeveloped = false;
    GsnNode verified = verified_tpl;
    verified.id = r.id + "Verified";
    verified.text = replace_placeholder(verified.text, "Rx", r.id);
    verified.uninstantiated = false;
    GsnNode result = result_tpl;
    result.id = r.id + "Result";
    result.text = replace_placeholder(result.text, "Rx", r.id);
    if (r.design_time) {
      result.text = replace_placeholder(result.text, "evidence", design_evidence_digest);
      result.evidence_ref = design_evidence_digest;
      result.uninstantiated = false;
    }
    out.nodes.push_back(std::move(achieved));
    out.nodes.push_back(std::move(verified));
    out.nodes.push_back(std::move(result));
  }

  for (const auto& e : pattern.edges) {
    if (e.parent == "ReqsSatisfied" && e.child == "RxAchieved") {
      for (const auto& r : requirements)
        out.edges.push_back({e.parent, r.id + "Achieved", e.kind, ""});
      continue;
    }
    if (e.parent == "RxAchieved" || e.parent == "RxVerified") {
      for (const auto& r : requirements) {
        std::string child = e.child;
        if (child == "RxVerified" || child == "RxResult") child = r.id + child.substr(2);
        out.edges.push_back({r.id + e.parent.substr(2), child, e.kind, e.annotation});
      }
      continue;
    }
    out.edges.push_back(e);
  }
  return out;
}

GsnArgument instantiate_full(const GsnArgument& partial, const Configuration& config,
                             const std::vector<EvidenceBinding>& evidence, int version,
                             double timestamp) {
  GsnArgument out = partial;
  out.stage = GsnStage::Full;
  out.version = version;
  out.timestamp = timestamp;

  if (GsnNode* ctx = out.find("ReqsConfiguration")) {
    ctx->text = replace_placeholder(ctx->text, "configuration", config.summary());
    ctx->uninstantiated = false;
  }

  for (auto& n : out.nodes) {
    if (n.kind != GsnKind::Solution || !n.uninstantiated) continue;
    // node id Rx...Result -> requirement id
    if (n.id.size() < 7 || n.id.substr(n.id.size() - 6) != "Result")
      throw EvidenceMismatch("uninstantiated solution " + n.id + " is not a requirement result");
    std::string req = n.id.substr(0, n.id.size() - 6);
    const EvidenceBinding* binding = nullptr;
    for (const auto& b : evidence)
      if (b.requirement_id == req) binding = &b;
    if (!binding)
      throw EvidenceMismatch("no evidence row binds requirement " + req + " for configuration " +
                             config.summary());
    n.text = replace_placeholder(n.text, "evidence", binding->digest);
    n.evidence_ref = binding->digest;
    n.uninstantiated = false;
  }
  return out;
}

namespace {

std::vector<std::string> requirement_branch_nodes(const GsnArgument& a) {
  std::vector<std::string> result;
  std::set<std::string> seen;
  std::vector<std::string> frontier;
  for (const auto& n : a.nodes) {
    if (n.id.size() > 8 && n.id.substr(n.id.size() - 8) == "Achieved" && n.id[0] == 'R')
      frontier.push_back(n.id);
  }
  while (!frontier.empty()) {
    std::string id = frontier.back();
    frontier.pop_back();
    if (!seen.insert(id).second) continue;
    result.push_back(id);
    for (const auto& e : a.edges)
      if (e.parent == id && e.kind == GsnEdgeKind::SupportedBy) frontier.push_back(e.child);
  }
  return result;
}

}  // namespace

std::vector<std::string> validate(const GsnArgument& a) {
  std::vector<std::string> report;
  auto flag = [&](std::string s) { report.push_back(std::move(s)); };

  std::map<std::string, const GsnNode*> by_id;
  for (const auto& n : a.nodes) {
    if (!by_id.emplace(n.id, &n).second) flag("duplicate node id " + n.id);
  }
  for (const auto& e : a.edges) {
    auto pit = by_id.find(e.parent);
    auto cit = by_id.find(e.child);
    if (pit == by_id.end() || cit == by_id.end()) {
      flag("edge references unknown node " + e.parent + " -> " + e.child);
      continue;
    }
    GsnKind pk = pit->second->kind;
    GsnKind ck = cit->second->kind;
    if (pk != GsnKind::Goal && pk != GsnKind::Strategy && pk != GsnKind::AwayGoal)
      flag("edge parent " + e.parent + " is not a goal or strategy");
    if (e.kind == GsnEdgeKind::InContextOf) {
      if (ck != GsnKind::Context && ck != GsnKind::Assumption && ck != GsnKind::Justification)
        flag("in-context-of child " + e.child + " has kind " + gsn_kind_name(ck));
    } else {
      if (ck == GsnKind::Context || ck == GsnKind::Assumption || ck == GsnKind::Justification)
        flag("supported-by child " + e.child + " has contextual kind");
    }
  }

  // Acyclicity via Kahn's algorithm over both edge kinds.
  {
    std::map<std::string, int> indegree;
    for (const auto& n : a.nodes) indegree[n.id] = 0;
    for (const auto& e : a.edges)
      if (indegree.count(e.child)) indegree[e.child] += 1;
    std::vector<std::string> queue;
    for (const auto& [id, d] : indegree)
      if (d == 0) queue.push_back(id);
    std::size_t visited = 0;
    while (!queue.empty()) {
      std::string id = queue.back();
      queue.pop_back();
      ++visited;
      for (const auto& e : a.edges) {
        if (e.parent != id || !indegree.count(e.child)) continue;
        if (--indegree[e.child] == 0) queue.push_back(e.child);
      }
    }
    if (visited != a.nodes.size()) flag("argument graph contains a cycle");
  }

  for (const auto& n : a.nodes) {
    if (n.has_placeholder() && !n.uninstantiated)
      flag("node " + n.id + " has an unresolved placeholder but no uninstantiated flag");
    if (n.undeveloped && n.kind != GsnKind::Goal && n.kind != GsnKind::Strategy &&
        n.kind != GsnKind::AwayGoal)
      flag("undeveloped flag on non-goal node " + n.id);
    if (n.evidence_ref && n.kind != GsnKind::Solution)
      flag("evidence reference on non-solution node " + n.id);
  }

  if (a.stage == GsnStage::Full) {
    for (const auto& n : a.nodes) {
      if (n.uninstantiated) flag("full argument contains uninstantiated node " + n.id);
      if (n.kind == GsnKind::Solution && !n.evidence_ref)
        flag("solution " + n.id + " lacks an evidence reference in a full argument");
    }
    for (const auto& id : requirement_branch_nodes(a)) {
      const GsnNode* n = a.find(id);
      if (n && n->undeveloped) flag("undeveloped goal " + id + " on a requirement branch");
    }
  }
  return report;
}

namespace {

std::string escape_dot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string render_dot(const GsnArgument& a) {
  std::ostringstream out;
  out << "digraph assurance_argument {\n";
  out << "  graph [rankdir=TB, label=\"stage: " << gsn_stage_name(a.stage) << ", version "
      << a.version << "\", labelloc=t];\n";
  out << "  node [fontname=\"Helvetica\", fontsize=10];\n";
  for (const auto& n : a.nodes) {
    std::string shape = "box";
    std::string extra;
    switch (n.kind) {
      case GsnKind::Goal:
        shape = "box";
        break;
      case GsnKind::Strategy:
        shape = "parallelogram";
        break;
      case GsnKind::Solution:
        shape = "ellipse";
        break;
      case GsnKind::Context:
        shape = "box";
        extra = ", style=rounded";
        break;
      case GsnKind::Assumption:
      case GsnKind::Justification:
        shape = "ellipse";
        extra = ", style=dashed";
        break;
      case GsnKind::AwayGoal:
        shape = "box";
        extra = ", peripheries=2";
        break;
    }
    std::string label = n.id + "\\n" + escape_dot(n.text);
    if (n.evidence_ref) label += "\\nevidence: " + *n.evidence_ref;
    if (n.uninstantiated) label += "\\n<uninstantiated>";
    if (n.undeveloped) label += "\\n<undeveloped>";
    std::string style_extra = extra;
    if (n.uninstantiated) {
      if (style_extra.find("style=") == std::string::npos)
        style_extra += ", style=dashed";
    }
    out << "  \"" << n.id << "\" [shape=" << shape << style_extra << ", label=\"" << label
        << "\"];\n";
  }
  for (const auto& e : a.edges) {
    out << "  \"" << e.parent << "\" -> \"" << e.child << "\" [arrowhead="
        << (e.kind == GsnEdgeKind::SupportedBy ? "normal" : "empty");
    if (!e.annotation.empty()) out << ", label=\"" << escape_dot(e.annotation) << "\"";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

void render_outline_node(const GsnArgument& a, const std::string& id, int depth, bool contextual,
                         const std::string& annotation, std::set<std::string>& emitted,
                         std::ostream& out) {
  const GsnNode* n = a.find(id);
  if (!n) throw Error("outline render: unknown node " + id);
  out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
  if (contextual) out << "[ctx] ";
  if (emitted.count(id)) {
    out << "ref " << id << "\n";
    return;
  }
  emitted.insert(id);
  out << gsn_kind_name(n->kind) << " " << n->id << " \"" << n->text << "\"";
  if (n->uninstantiated) out << " uninstantiated";
  if (n->undeveloped) out << " undeveloped";
  if (n->evidence_ref) out << " evidence=" << *n->evidence_ref;
  if (!annotation.empty()) out << " note=\"" << annotation << "\"";
  out << "\n";
  for (const GsnEdge* e : a.edges_from(id))
    render_outline_node(a, e->child, depth + 1, e->kind == GsnEdgeKind::InContextOf,
                        e->annotation, emitted, out);
}

std::string render_outline(const GsnArgument& a) {
  std::ostringstream out;
  out << "argument stage=" << gsn_stage_name(a.stage) << " version=" << a.version
      << " timestamp=" << format_double(a.timestamp) << "\n";
  // Roots: nodes that never appear as a child.
  std::set<std::string> children;
  for (const auto& e : a.edges) children.insert(e.child);
  std::set<std::string> emitted;
  for (const auto& n : a.nodes)
    if (!children.count(n.id)) render_outline_node(a, n.id, 0, false, "", emitted, out);
  return out.str();
}

}  // namespace

std::string render(const GsnArgument& a, const std::string& format) {
  if (format == "dot") return render_dot(a);
  if (format == "text-outline") return render_outline(a);
  throw UnknownFormat(format);
}

GsnArgument parse_outline(const std::string& text) {
  GsnArgument a;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> stack;  // node id per depth
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t indent = 0;
    while (indent < line.size() && line[indent] == ' ') ++indent;
    std::string body = line.substr(indent);
    if (!header_seen) {
      if (body.rfind("argument ", 0) != 0) throw Error("outline must start with header line");
      std::istringstream hs(body);
      std::string word;
      hs >> word;
      while (hs >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos) continue;
        std::string key = word.substr(0, eq), value = word.substr(eq + 1);
        if (key == "stage") {
          if (value == "pattern")
            a.stage = GsnStage::Pattern;
          else if (value == "partial")
            a.stage = GsnStage::Partial;
          else if (value == "full")
            a.stage = GsnStage::Full;
          else
            throw Error("unknown stage: " + value);
        } else if (key == "version") {
          a.version = std::stoi(value);
        } else if (key == "timestamp") {
          a.timestamp = std::stod(value);
        }
      }
      header_seen = true;
      continue;
    }
    if (indent % 2 != 0) throw Error("odd indentation in outline");
    std::size_t depth = indent / 2;
    bool contextual = false;
    if (body.rfind("[ctx] ", 0) == 0) {
      contextual = true;
      body = body.substr(6);
    }

    std::string node_id;
    if (body.rfind("ref ", 0) == 0) {
      node_id = body.substr(4);
    } else {
      std::istringstream ls(body);
      std::string kind_word, id;
      ls >> kind_word >> id;
      auto q1 = body.find('"');
      auto q2 = body.find('"', q1 + 1);
      if (q1 == std::string::npos || q2 == std::string::npos)
        throw Error("outline node lacks quoted text: " + body);
      GsnNode n;
      n.kind = gsn_kind_from(kind_word);
      n.id = id;
      n.text = body.substr(q1 + 1, q2 - q1 - 1);
      std::istringstream rest(body.substr(q2 + 1));
      std::string flag;
      while (rest >> flag) {
        if (flag == "uninstantiated")
          n.uninstantiated = true;
        else if (flag == "undeveloped")
          n.undeveloped = true;
        else if (flag.rfind("evidence=", 0) == 0)
          n.evidence_ref = flag.substr(9);
        // note="..." annotations are re-attached through the edge below
      }
      a.nodes.push_back(n);
      node_id = id;
    }

    if (depth > stack.size()) throw Error("outline indentation jumps by more than one level");
    stack.resize(depth);
    if (depth > 0) {
      GsnEdge e;
      e.parent = stack[depth - 1];
      e.child = node_id;
      e.kind = contextual ? GsnEdgeKind::InContextOf : GsnEdgeKind::SupportedBy;
      auto note_pos = body.find("note=\"");
      if (note_pos != std::string::npos) {
        auto end = body.find('"', note_pos + 6);
        e.annotation = body.substr(note_pos + 6, end - note_pos - 6);
      }
      a.edges.push_back(std::move(e));
    }
    stack.push_back(node_id);
  }
  return a;
}

}  // namespace certloop
