#include "certloop/kv.hpp"

#include <cctype>
#include <cstdlib>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

const KvNode* KvNode::find(std::string_view child_name) const {
  for (const auto& c : children)
    if (c.name == child_name) return &c;
  return nullptr;
}

const KvNode& KvNode::at(std::string_view child_name) const {
  const KvNode* c = find(child_name);
  if (!c) throw Error("missing key '" + std::string(child_name) + "' in '" + name + "'");
  return *c;
}

std::vector<const KvNode*> KvNode::all(std::string_view child_name) const {
  std::vector<const KvNode*> out;
  for (const auto& c : children)
    if (c.name == child_name) out.push_back(&c);
  return out;
}

const std::string& KvNode::arg(std::size_t i) const {
  if (i >= args.size())
    throw Error("missing value " + std::to_string(i) + " of '" + name + "'");
  return args[i];
}

double KvNode::num(std::size_t i) const {
  const std::string& s = arg(i);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw Error("value of '" + name + "' is not a number: " + s);
  return v;
}

std::optional<std::string> KvNode::opt_arg(std::size_t i) const {
  if (i >= args.size()) return std::nullopt;
  return args[i];
}

std::optional<std::string> KvNode::value_of(std::string_view child_name) const {
  const KvNode* c = find(child_name);
  if (!c || c->args.empty()) return std::nullopt;
  return c->args[0];
}

double KvNode::num_of(std::string_view child_name) const { return at(child_name).num(0); }

double KvNode::num_of(std::string_view child_name, double fallback) const {
  const KvNode* c = find(child_name);
  return c ? c->num(0) : fallback;
}

KvNode& KvNode::add(std::string_view child_name) {
  children.push_back(KvNode{std::string(child_name), {}, {}, false});
  return children.back();
}

KvNode& KvNode::add(std::string_view child_name, std::string_view v) {
  KvNode& c = add(child_name);
  c.args.emplace_back(v);
  return c;
}

KvNode& KvNode::add(std::string_view child_name, double v) {
  return add(child_name, format_double(v));
}

KvNode& KvNode::add_block(std::string_view child_name) {
  KvNode& c = add(child_name);
  c.is_block = true;
  return c;
}

namespace {

struct Line {
  std::vector<std::string> tokens;
  bool opens = false;   // trailing '{'
  bool closes = false;  // sole '}'
};

bool tokenize_line(std::string_view text, std::size_t& pos, int line_no, Line& out) {
  out = Line{};
  bool any = false;
  while (pos < text.size() && text[pos] != '\n') {
    char c = text[pos];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++pos;
      continue;
    }
    if (c == '#') {
      while (pos < text.size() && text[pos] != '\n') ++pos;
      break;
    }
    any = true;
    if (c == '"') {
      std::string tok;
      ++pos;
      while (pos < text.size() && text[pos] != '"') {
        if (text[pos] == '\n') throw ParseError("unterminated string", line_no);
        if (text[pos] == '\\' && pos + 1 < text.size()) {
          ++pos;
          char e = text[pos];
          if (e == 'n')
            tok += '\n';
          else if (e == 't')
            tok += '\t';
          else
            tok += e;
        } else {
          tok += text[pos];
        }
        ++pos;
      }
      if (pos >= text.size()) throw ParseError("unterminated string", line_no);
      ++pos;  // closing quote
      out.tokens.push_back(std::move(tok));
    } else if (c == '{' || c == '}') {
      out.tokens.push_back(std::string(1, c));
      ++pos;
    } else {
      std::string tok;
      while (pos < text.size()) {
        char d = text[pos];
        if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '{' || d == '}' ||
            d == '#' || d == '"')
          break;
        tok += d;
        ++pos;
      }
      out.tokens.push_back(std::move(tok));
    }
  }
  if (pos < text.size()) ++pos;  // consume newline
  if (!any) return false;
  if (out.tokens.size() == 1 && out.tokens[0] == "}") {
    out.closes = true;
    out.tokens.clear();
    return true;
  }
  if (!out.tokens.empty() && out.tokens.back() == "{") {
    out.opens = true;
    out.tokens.pop_back();
  }
  for (const auto& t : out.tokens)
    if (t == "{" || t == "}") throw ParseError("brace inside line", line_no);
  if (out.tokens.empty()) throw ParseError("empty declaration", line_no);
  return true;
}

bool needs_quoting(const std::string& s) {
  if (s.empty()) return true;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '"' || c == '{' || c == '}' || c == '#')
      return true;
  return false;
}

void write_token(std::string& out, const std::string& tok) {
  if (!needs_quoting(tok)) {
    out += tok;
    return;
  }
  out += '"';
  for (char c : tok) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
}

void serialize_node(const KvNode& node, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  write_token(out, node.name);
  for (const auto& a : node.args) {
    out += ' ';
    write_token(out, a);
  }
  if (node.is_block) {
    out += " {\n";
    for (const auto& c : node.children) serialize_node(c, depth + 1, out);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "}\n";
  } else {
    out += '\n';
  }
}

}  // namespace

KvNode kv_parse(std::string_view text) {
  KvNode root;
  root.is_block = true;
  std::vector<KvNode*> stack{&root};
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    Line line;
    if (!tokenize_line(text, pos, line_no, line)) continue;
    if (line.closes) {
      if (stack.size() == 1) throw ParseError("unmatched '}'", line_no);
      stack.pop_back();
      continue;
    }
    KvNode node;
    node.name = line.tokens[0];
    node.args.assign(line.tokens.begin() + 1, line.tokens.end());
    node.is_block = line.opens;
    stack.back()->children.push_back(std::move(node));
    if (line.opens) stack.push_back(&stack.back()->children.back());
  }
  if (stack.size() != 1) throw ParseError("unclosed block at end of input", line_no);
  return root;
}

std::string kv_serialize(const KvNode& root) {
  std::string out;
  for (const auto& c : root.children) serialize_node(c, 0, out);
  return out;
}

KvNode kv_load(const std::string& path) {
  try {
    return kv_parse(read_file(path));
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

void kv_store(const std::string& path, const KvNode& root) {
  write_file(path, kv_serialize(root));
}

}  // namespace certloop
