#pragma once

// Arithmetic expression language for coefficient, initial, boundary and
// source data.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | 'x' | 't' | 'pi' | 'e' | '(' expr ')'
//            | name '(' expr (',' expr)* ')'
//
// Functions: sin cos exp log sqrt abs (1 argument), pow(a, b), and
// ml(a, b, z) = E_{a,b}(z), the two-parameter Mittag-Leffler function.
// '^' binds tighter than unary minus, so -2^2 = -4 and 2^-1 = 0.5.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fracdiff {

enum class Op : std::uint8_t { number, var_x, var_t, const_pi, const_e, neg, add, sub, mul, div, pow, call };
enum class Func : std::uint8_t { sin, cos, exp, log, sqrt, abs, pow, ml };

std::string_view func_name(Func f) noexcept;
int func_arity(Func f) noexcept;

struct Node {
  Op op = Op::number;
  Func func = Func::sin;  // meaningful for Op::call only
  double value = 0.0;     // meaningful for Op::number only
  bool uses_x = false;
  bool uses_t = false;
  std::vector<std::shared_ptr<const Node>> args;
};

class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> root, std::string source = {});

  const Node& root() const noexcept { return *root_; }
  std::shared_ptr<const Node> root_ptr() const noexcept { return root_; }
  bool uses_x() const noexcept { return root_->uses_x; }
  bool uses_t() const noexcept { return root_->uses_t; }
  // Text the expression was parsed from (empty when built programmatically).
  const std::string& source() const noexcept { return source_; }

  // Throws DomainError (log of non-positive, sqrt of negative, fractional
  // power of a negative base, invalid ml parameters) or NonFiniteError.
  double operator()(double x, double t) const;

  // out[j] = (*this)(xs[j], t); subtrees independent of x are evaluated once.
  void eval_x(std::span<const double> xs, double t, std::span<double> out) const;

  // True if the expression uses no variable and evaluates to exactly 0.
  bool is_zero() const;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

// Throws ParseError (with byte offset and expected tokens) or
// UnknownIdentifierError.
Expr parse(std::string_view src);

double eval(const Expr& e, double x, double t);

// Fully parenthesized text that reparses to a structurally identical tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Node& a, const Node& b) noexcept;

// Nodes for programmatic construction.
std::shared_ptr<const Node> make_number(double v);
std::shared_ptr<const Node> make_leaf(Op op);
std::shared_ptr<const Node> make_unary(Op op, std::shared_ptr<const Node> a);
std::shared_ptr<const Node> make_binary(Op op, std::shared_ptr<const Node> a, std::shared_ptr<const Node> b);
std::shared_ptr<const Node> make_call(Func f, std::vector<std::shared_ptr<const Node>> args);

}  // namespace fracdiff
