#ifndef CERTLOOP_EXPR_HPP
#define CERTLOOP_EXPR_HPP

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace certloop {

/// Small arithmetic/boolean expression over named symbols.
///
/// Grammar (loosest to tightest): `or`, `and`, `not`, comparisons
/// (`== != < <= > >=`), `+ -`, `* /`, unary `-`, primaries (numbers, symbols,
/// calls `clamp(x,lo,hi)` / `min` / `max`, parentheses).  Symbols may contain
/// one dot (`Analyzer.Analyse`), which predicate evaluators resolve as
/// location atoms.  Booleans evaluate to 0/1.
struct Expr {
  enum class Kind { Number, Symbol, Unary, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0.0;
  std::string op;  // operator or call name
  std::vector<Expr> operands;

  static Expr num(double v);
  static Expr sym(std::string name);

  bool is_number() const { return kind == Kind::Number; }

  bool operator==(const Expr& other) const;
};

using SymbolLookup = std::function<double(const std::string&)>;

Expr expr_parse(std::string_view text);
std::string expr_print(const Expr& e);
double expr_eval(const Expr& e, const SymbolLookup& lookup);
void expr_symbols(const Expr& e, std::set<std::string>& out);

/// Partially evaluates: replaces every symbol via `lookup` and folds
/// constants.  Used when baking calibration constants into templates.
Expr expr_substitute(const Expr& e, const std::function<const Expr*(const std::string&)>& lookup);

}  // namespace certloop

#endif
