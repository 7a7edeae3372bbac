#include "certloop/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "certloop/errors.hpp"
#include "certloop/util.hpp"

namespace certloop {

Expr Expr::num(double v) {
  Expr e;
  e.kind = Kind::Number;
  e.number = v;
  return e;
}

Expr Expr::sym(std::string name) {
  Expr e;
  e.kind = Kind::Symbol;
  e.op = std::move(name);
  return e;
}

bool Expr::operator==(const Expr& other) const {
  if (kind != other.kind || op != other.op) return false;
  if (kind == Kind::Number) return number == other.number;
  return operands == other.operands;
}

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (text.substr(pos, tok.size()) != tok) return false;
    // keywords must not swallow identifier prefixes
    if (std::isalpha(static_cast<unsigned char>(tok[0]))) {
      std::size_t after = pos + tok.size();
      if (after < text.size()) {
        char c = text[after];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') return false;
      }
    }
    pos += tok.size();
    return true;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw Error("expression parse error at offset " + std::to_string(pos) + ": " + what +
                " in '" + std::string(text) + "'");
  }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (eat("or")) {
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.op = "or";
      e.operands = {std::move(lhs), parse_and()};
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (eat("and")) {
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.op = "and";
      e.operands = {std::move(lhs), parse_not()};
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr parse_not() {
    if (eat("not")) {
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.op = "not";
      e.operands = {parse_not()};
      return e;
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr lhs = parse_add();
    skip_ws();
    for (std::string_view op : {"==", "!=", "<=", ">=", "<", ">"}) {
      if (eat(op)) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = std::string(op);
        e.operands = {std::move(lhs), parse_add()};
        return e;
      }
    }
    return lhs;
  }

  Expr parse_add() {
    Expr lhs = parse_mul();
    while (true) {
      if (eat("+")) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = "+";
        e.operands = {std::move(lhs), parse_mul()};
        lhs = std::move(e);
      } else if (eat("-")) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = "-";
        e.operands = {std::move(lhs), parse_mul()};
        lhs = std::move(e);
      } else {
        return lhs;
      }
    }
  }

  Expr parse_mul() {
    Expr lhs = parse_unary();
    while (true) {
      if (eat("*")) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = "*";
        e.operands = {std::move(lhs), parse_unary()};
        lhs = std::move(e);
      } else if (eat("/")) {
        Expr e;
        e.kind = Expr::Kind::Binary;
        e.op = "/";
        e.operands = {std::move(lhs), parse_unary()};
        lhs = std::move(e);
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (eat("-")) {
      Expr inner = parse_unary();
      if (inner.is_number()) return Expr::num(-inner.number);
      Expr e;
      e.kind = Expr::Kind::Unary;
      e.op = "-";
      e.operands = {std::move(inner)};
      return e;
    }
    return parse_primary();
  }

  Expr parse_primary() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_or();
      skip_ws();
      if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
      ++pos;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      double v = std::strtod(text.data() + pos, &end);
      if (end == text.data() + pos) fail("bad number");
      pos = static_cast<std::size_t>(end - text.data());
      return Expr::num(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      bool seen_dot = false;
      while (pos < text.size()) {
        char d = text[pos];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
          ++pos;
        } else if (d == '.' && !seen_dot) {
          seen_dot = true;
          ++pos;
        } else {
          break;
        }
      }
      std::string name(text.substr(start, pos - start));
      skip_ws();
      if (pos < text.size() && text[pos] == '(') {
        ++pos;
        Expr call;
        call.kind = Expr::Kind::Call;
        call.op = name;
        skip_ws();
        if (pos < text.size() && text[pos] == ')') {
          ++pos;
          return call;
        }
        while (true) {
          call.operands.push_back(parse_or());
          skip_ws();
          if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
          }
          if (pos < text.size() && text[pos] == ')') {
            ++pos;
            break;
          }
          fail("expected ',' or ')'");
        }
        return call;
      }
      return Expr::sym(std::move(name));
    }
    fail("unexpected character");
  }
};

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::Binary) {
    if (e.op == "or") return 1;
    if (e.op == "and") return 2;
    if (e.op == "==" || e.op == "!=" || e.op == "<" || e.op == "<=" || e.op == ">" ||
        e.op == ">=")
      return 4;
    if (e.op == "+" || e.op == "-") return 5;
    return 6;
  }
  if (e.kind == Expr::Kind::Unary) return e.op == "not" ? 3 : 7;
  return 8;
}

void print_rec(const Expr& e, int parent_prec, std::string& out) {
  int prec = precedence(e);
  bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (e.kind) {
    case Expr::Kind::Number:
      out += format_double(e.number);
      break;
    case Expr::Kind::Symbol:
      out += e.op;
      break;
    case Expr::Kind::Unary:
      out += e.op == "not" ? "not " : "-";
      print_rec(e.operands[0], prec + 1, out);
      break;
    case Expr::Kind::Binary:
      print_rec(e.operands[0], prec, out);
      out += ' ';
      out += e.op;
      out += ' ';
      print_rec(e.operands[1], prec + 1, out);
      break;
    case Expr::Kind::Call:
      out += e.op;
      out += '(';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        print_rec(e.operands[i], 0, out);
      }
      out += ')';
      break;
  }
  if (paren) out += ')';
}

}  // namespace

Expr expr_parse(std::string_view text) {
  Parser p{text};
  Expr e = p.parse_or();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

std::string expr_print(const Expr& e) {
  std::string out;
  print_rec(e, 0, out);
  return out;
}

double expr_eval(const Expr& e, const SymbolLookup& lookup) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return e.number;
    case Expr::Kind::Symbol:
      return lookup(e.op);
    case Expr::Kind::Unary: {
      double v = expr_eval(e.operands[0], lookup);
      return e.op == "not" ? (v == 0.0 ? 1.0 : 0.0) : -v;
    }
    case Expr::Kind::Binary: {
      if (e.op == "and") {
        return expr_eval(e.operands[0], lookup) != 0.0 &&
                       expr_eval(e.operands[1], lookup) != 0.0
                   ? 1.0
                   : 0.0;
      }
      if (e.op == "or") {
        return expr_eval(e.operands[0], lookup) != 0.0 ||
                       expr_eval(e.operands[1], lookup) != 0.0
                   ? 1.0
                   : 0.0;
      }
      double a = expr_eval(e.operands[0], lookup);
      double b = expr_eval(e.operands[1], lookup);
      if (e.op == "+") return a + b;
      if (e.op == "-") return a - b;
      if (e.op == "*") return a * b;
      if (e.op == "/") return a / b;
      if (e.op == "==") return a == b ? 1.0 : 0.0;
      if (e.op == "!=") return a != b ? 1.0 : 0.0;
      if (e.op == "<") return a < b ? 1.0 : 0.0;
      if (e.op == "<=") return a <= b ? 1.0 : 0.0;
      if (e.op == ">") return a > b ? 1.0 : 0.0;
      if (e.op == ">=") return a >= b ? 1.0 : 0.0;
      throw Error("unknown operator: " + e.op);
    }
    case Expr::Kind::Call: {
      std::vector<double> args;
      args.reserve(e.operands.size());
      for (const auto& a : e.operands) args.push_back(expr_eval(a, lookup));
      if (e.op == "clamp" && args.size() == 3)
        return std::min(std::max(args[0], args[1]), args[2]);
      if (e.op == "min" && args.size() == 2) return std::min(args[0], args[1]);
      if (e.op == "max" && args.size() == 2) return std::max(args[0], args[1]);
      throw Error("unknown function or arity: " + e.op);
    }
  }
  throw Error("corrupt expression");
}

void expr_symbols(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Symbol) out.insert(e.op);
  for (const auto& o : e.operands) expr_symbols(o, out);
}

Expr expr_substitute(const Expr& e,
                     const std::function<const Expr*(const std::string&)>& lookup) {
  if (e.kind == Expr::Kind::Symbol) {
    if (const Expr* repl = lookup(e.op)) return *repl;
    return e;
  }
  Expr out = e;
  out.operands.clear();
  bool all_const = e.kind != Expr::Kind::Number;
  for (const auto& o : e.operands) {
    out.operands.push_back(expr_substitute(o, lookup));
    all_const = all_const && out.operands.back().is_number();
  }
  if (all_const && (e.kind == Expr::Kind::Unary || e.kind == Expr::Kind::Binary ||
                    e.kind == Expr::Kind::Call)) {
    double v = expr_eval(out, [](const std::string& s) -> double {
      throw Error("unbound symbol: " + s);
    });
    return Expr::num(v);
  }
  return out;
}

}  // namespace certloop
