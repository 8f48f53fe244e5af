#include "fracdiff/expression.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracdiff/error.hpp"
#include "fracdiff/format.hpp"
#include "fracdiff/mittag_leffler.hpp"

namespace fracdiff {

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 8> kFunctions = {{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"exp", Func::exp},
    {"log", Func::log},
    {"sqrt", Func::sqrt},
    {"abs", Func::abs},
    {"pow", Func::pow},
    {"ml", Func::ml},
}};

constexpr int kMaxDepth = 200;

std::shared_ptr<Node> fresh(Op op) {
  auto n = std::make_shared<Node>();
  n->op = op;
  return n;
}

void inherit_flags(Node& n) {
  for (const auto& a : n.args) {
    n.uses_x = n.uses_x || a->uses_x;
    n.uses_t = n.uses_t || a->uses_t;
  }
}

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end, bad };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double value = 0.0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  std::shared_ptr<const Node> parse_all() {
    auto e = expression(0, 0);
    if (tok_.kind != Tok::end) fail("unexpected " + describe(tok_), {"operator", "end of input"});
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_{Tok::end, 0, {}};

  static std::string describe(const Token& t) {
    if (t.kind == Tok::end) return "end of input";
    return "'" + std::string(t.text) + "'";
  }

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) const {
    std::ostringstream os;
    os << "syntax error at byte " << tok_.offset << ": " << what;
    if (!expected.empty()) {
      os << "; expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) os << (i ? ", " : "") << expected[i];
    }
    throw ParseError(os.str(), tok_.offset, std::move(expected));
  }

  void advance() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::end, start, {}};
      return;
    }
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      ++pos_;
      tok_ = {k, start, src_.substr(start, 1)};
    };
    switch (c) {
      case '+': return single(Tok::plus);
      case '-': return single(Tok::minus);
      case '*': return single(Tok::star);
      case '/': return single(Tok::slash);
      case '^': return single(Tok::caret);
      case '(': return single(Tok::lparen);
      case ')': return single(Tok::rparen);
      case ',': return single(Tok::comma);
      default: break;
    }
    const auto is_digit = [](char ch) { return ch >= '0' && ch <= '9'; };
    const auto is_alpha = [](char ch) { return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_'; };
    if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t q = pos_ + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && is_digit(src_[q])) {
          pos_ = q;
          while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
        }
      }
      tok_ = {Tok::number, start, src_.substr(start, pos_ - start)};
      const auto res = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.value);
      if (res.ec != std::errc() || !std::isfinite(tok_.value)) fail("number out of range", {});
      return;
    }
    if (is_alpha(c)) {
      while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
      tok_ = {Tok::ident, start, src_.substr(start, pos_ - start)};
      return;
    }
    // One byte, or a whole UTF-8 sequence so the message stays readable.
    std::size_t len = 1;
    const auto uc = static_cast<unsigned char>(c);
    if (uc >= 0xC0) len = uc >= 0xF0 ? 4 : uc >= 0xE0 ? 3 : 2;
    len = std::min(len, src_.size() - pos_);
    pos_ += len;
    tok_ = {Tok::bad, start, src_.substr(start, len)};
  }

  void expect(Tok k, const char* what) {
    if (tok_.kind != k) fail("unexpected " + describe(tok_), {what});
    advance();
  }

  static std::pair<int, int> infix_power(Tok k) {
    switch (k) {
      case Tok::plus:
      case Tok::minus: return {1, 2};
      case Tok::star:
      case Tok::slash: return {3, 4};
      case Tok::caret: return {8, 7};
      default: return {-1, -1};
    }
  }

  static Op infix_op(Tok k) {
    switch (k) {
      case Tok::plus: return Op::add;
      case Tok::minus: return Op::sub;
      case Tok::star: return Op::mul;
      case Tok::slash: return Op::div;
      default: return Op::pow;
    }
  }

  std::shared_ptr<const Node> expression(int min_bp, int depth) {
    if (depth > kMaxDepth) fail("expression nested too deeply", {});
    auto lhs = prefix(depth);
    for (;;) {
      const auto [lbp, rbp] = infix_power(tok_.kind);
      if (lbp < 0 || lbp < min_bp) break;
      const Op op = infix_op(tok_.kind);
      advance();
      auto rhs = expression(rbp, depth + 1);
      lhs = make_binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  std::shared_ptr<const Node> prefix(int depth) {
    static const std::vector<std::string> operand = {"number", "identifier", "'('", "'-'"};
    switch (tok_.kind) {
      case Tok::number: {
        auto n = make_number(tok_.value);
        advance();
        return n;
      }
      case Tok::minus: {
        advance();
        // Unary minus binds looser than '^' and tighter than '*'.
        return make_unary(Op::neg, expression(5, depth + 1));
      }
      case Tok::lparen: {
        advance();
        auto e = expression(0, depth + 1);
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::ident: return identifier(depth);
      case Tok::end: fail("unexpected end of input", operand);
      default: fail("unexpected " + describe(tok_), operand);
    }
  }

  std::shared_ptr<const Node> identifier(int depth) {
    const Token name = tok_;
    advance();
    if (name.text == "x") return make_leaf(Op::var_x);
    if (name.text == "t") return make_leaf(Op::var_t);
    if (name.text == "pi") return make_leaf(Op::const_pi);
    if (name.text == "e") return make_leaf(Op::const_e);
    for (const auto& [fname, f] : kFunctions) {
      if (fname != name.text) continue;
      expect(Tok::lparen, "'('");
      std::vector<std::shared_ptr<const Node>> args;
      args.push_back(expression(0, depth + 1));
      while (tok_.kind == Tok::comma) {
        advance();
        args.push_back(expression(0, depth + 1));
      }
      if (tok_.kind != Tok::rparen) fail("unexpected " + describe(tok_), {"','", "')'"});
      if (static_cast<int>(args.size()) != func_arity(f)) {
        std::ostringstream os;
        os << "syntax error at byte " << name.offset << ": " << fname << " takes " << func_arity(f)
           << " argument(s), got " << args.size();
        throw ParseError(os.str(), name.offset, {});
      }
      advance();
      return make_call(f, std::move(args));
    }
    std::ostringstream os;
    os << "unknown identifier '" << name.text << "' at byte " << name.offset
       << "; known names are x, t, pi, e, sin, cos, exp, log, sqrt, abs, pow, ml";
    throw UnknownIdentifierError(os.str(), name.offset, {"x", "t", "pi", "e", "function name"});
  }
};

[[noreturn]] void non_finite(const char* what, double x, double t) {
  std::ostringstream os;
  os << what << " at x = " << format_double(x) << ", t = " << format_double(t);
  throw NonFiniteError(os.str());
}

[[noreturn]] void domain(const char* what, double x, double t) {
  std::ostringstream os;
  os << what << " at x = " << format_double(x) << ", t = " << format_double(t);
  throw DomainError(os.str());
}

double checked(double v, double x, double t) {
  if (!std::isfinite(v)) non_finite("non-finite result", x, t);
  return v;
}

double apply_pow(double a, double b, double x, double t) {
  if (a < 0.0 && b != std::trunc(b)) domain("fractional power of a negative number", x, t);
  return checked(std::pow(a, b), x, t);
}

double apply_call(Func f, const double* a, double x, double t) {
  switch (f) {
    case Func::sin: return checked(std::sin(a[0]), x, t);
    case Func::cos: return checked(std::cos(a[0]), x, t);
    case Func::exp: return checked(std::exp(a[0]), x, t);
    case Func::log:
      if (!(a[0] > 0.0)) domain("log of a non-positive number", x, t);
      return checked(std::log(a[0]), x, t);
    case Func::sqrt:
      if (a[0] < 0.0) domain("sqrt of a negative number", x, t);
      return std::sqrt(a[0]);
    case Func::abs: return std::abs(a[0]);
    case Func::pow: return apply_pow(a[0], a[1], x, t);
    case Func::ml: {
      if (!(a[0] > 0.0 && a[0] <= 1.0) || !(a[1] > 0.0)) {
        domain("ml(a, b, z) needs 0 < a <= 1 and b > 0", x, t);
      }
      try {
        return checked(ml({a[0], a[1], a[2]}).value, x, t);
      } catch (const OverflowError&) {
        non_finite("Mittag-Leffler overflow", x, t);
      }
    }
  }
  return 0.0;
}

double apply_binary(Op op, double a, double b, double x, double t) {
  switch (op) {
    case Op::add: return checked(a + b, x, t);
    case Op::sub: return checked(a - b, x, t);
    case Op::mul: return checked(a * b, x, t);
    case Op::div: return checked(a / b, x, t);
    default: return apply_pow(a, b, x, t);
  }
}

double eval_node(const Node& n, double x, double t) {
  switch (n.op) {
    case Op::number: return n.value;
    case Op::var_x: return x;
    case Op::var_t: return t;
    case Op::const_pi: return std::numbers::pi;
    case Op::const_e: return std::numbers::e;
    case Op::neg: return -eval_node(*n.args[0], x, t);
    case Op::call: {
      double a[3] = {0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < n.args.size(); ++i) a[i] = eval_node(*n.args[i], x, t);
      return apply_call(n.func, a, x, t);
    }
    default: {
      const double a = eval_node(*n.args[0], x, t);
      const double b = eval_node(*n.args[1], x, t);
      return apply_binary(n.op, a, b, x, t);
    }
  }
}

// Value over a batch of x: either a single scalar or one value per x.
struct Batch {
  bool varies = false;
  double scalar = 0.0;
  std::vector<double> v;
  double at(std::size_t j) const { return varies ? v[j] : scalar; }
};

Batch eval_batch(const Node& n, std::span<const double> xs, double t) {
  Batch out;
  if (!n.uses_x) {
    out.scalar = eval_node(n, xs.empty() ? 0.0 : xs[0], t);
    return out;
  }
  out.varies = true;
  out.v.resize(xs.size());
  switch (n.op) {
    case Op::var_x:
      std::copy(xs.begin(), xs.end(), out.v.begin());
      return out;
    case Op::neg: {
      const auto a = eval_batch(*n.args[0], xs, t);
      for (std::size_t j = 0; j < xs.size(); ++j) out.v[j] = -a.at(j);
      return out;
    }
    case Op::call: {
      std::vector<Batch> args;
      for (const auto& a : n.args) args.push_back(eval_batch(*a, xs, t));
      double a[3] = {0.0, 0.0, 0.0};
      for (std::size_t j = 0; j < xs.size(); ++j) {
        for (std::size_t i = 0; i < args.size(); ++i) a[i] = args[i].at(j);
        out.v[j] = apply_call(n.func, a, xs[j], t);
      }
      return out;
    }
    default: {
      const auto a = eval_batch(*n.args[0], xs, t);
      const auto b = eval_batch(*n.args[1], xs, t);
      for (std::size_t j = 0; j < xs.size(); ++j) out.v[j] = apply_binary(n.op, a.at(j), b.at(j), xs[j], t);
      return out;
    }
  }
}

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::number:
      if (std::signbit(n.value)) {
        out += "(-" + format_double(-n.value) + ")";
      } else {
        out += format_double(n.value);
      }
      return;
    case Op::var_x: out += 'x'; return;
    case Op::var_t: out += 't'; return;
    case Op::const_pi: out += "pi"; return;
    case Op::const_e: out += 'e'; return;
    case Op::neg:
      out += "(-";
      print(*n.args[0], out);
      out += ')';
      return;
    case Op::call:
      out += func_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], out);
      }
      out += ')';
      return;
    default: {
      static constexpr const char* sym[] = {" + ", " - ", " * ", " / ", " ^ "};
      const int k = static_cast<int>(n.op) - static_cast<int>(Op::add);
      out += '(';
      print(*n.args[0], out);
      out += sym[k];
      print(*n.args[1], out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string_view func_name(Func f) noexcept {
  for (const auto& [name, g] : kFunctions) {
    if (g == f) return name;
  }
  return "?";
}

int func_arity(Func f) noexcept {
  switch (f) {
    case Func::pow: return 2;
    case Func::ml: return 3;
    default: return 1;
  }
}

std::shared_ptr<const Node> make_number(double v) {
  auto n = fresh(Op::number);
  n->value = v;
  return n;
}

std::shared_ptr<const Node> make_leaf(Op op) {
  auto n = fresh(op);
  n->uses_x = op == Op::var_x;
  n->uses_t = op == Op::var_t;
  return n;
}

std::shared_ptr<const Node> make_unary(Op op, std::shared_ptr<const Node> a) {
  auto n = fresh(op);
  n->args.push_back(std::move(a));
  inherit_flags(*n);
  return n;
}

std::shared_ptr<const Node> make_binary(Op op, std::shared_ptr<const Node> a, std::shared_ptr<const Node> b) {
  auto n = fresh(op);
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  inherit_flags(*n);
  return n;
}

std::shared_ptr<const Node> make_call(Func f, std::vector<std::shared_ptr<const Node>> args) {
  auto n = fresh(Op::call);
  n->func = f;
  n->args = std::move(args);
  inherit_flags(*n);
  return n;
}

Expr::Expr() : root_(make_number(0.0)), source_("0") {}

Expr::Expr(std::shared_ptr<const Node> root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {}

double Expr::operator()(double x, double t) const { return eval_node(*root_, x, t); }

void Expr::eval_x(std::span<const double> xs, double t, std::span<double> out) const {
  if (out.size() != xs.size()) throw InputError("eval_x output length mismatch");
  const auto b = eval_batch(*root_, xs, t);
  for (std::size_t j = 0; j < xs.size(); ++j) out[j] = b.at(j);
}

bool Expr::is_zero() const {
  if (uses_x() || uses_t()) return false;
  try {
    return (*this)(0.0, 0.0) == 0.0;
  } catch (const Error&) {
    return false;
  }
}

Expr parse(std::string_view src) {
  Parser p(src);
  return Expr(p.parse_all(), std::string(src));
}

double eval(const Expr& e, double x, double t) { return e(x, t); }

std::string to_string(const Expr& e) {
  std::string out;
  print(e.root(), out);
  return out;
}

bool structurally_equal(const Node& a, const Node& b) noexcept {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::number && !(a.value == b.value && std::signbit(a.value) == std::signbit(b.value))) return false;
  if (a.op == Op::call && a.func != b.func) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

}  // namespace fracdiff
