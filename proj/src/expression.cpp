#include "fdelay/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>

#include "fdelay/error.hpp"

namespace fdelay {

namespace detail {

enum class Kind { Const, Time, Delay, Sup, Neg, Add, Sub, Mul, Div, Pow, Func, Sing, Native };
enum class Func { Sin, Cos, Exp, Log, Abs };

struct Node {
  Kind kind = Kind::Const;
  double value = 0.0;  // constant, delay tau, or singular point eta
  double exponent = 0.0;  // sing exponent a
  Func func = Func::Sin;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
  std::string name;
  NativeRhs native;
};

}  // namespace detail

namespace {

using detail::Func;
using detail::Kind;
using detail::Node;
using NodePtr = std::shared_ptr<const Node>;

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}
std::map<std::string, NativeRhs>& registry() {
  static std::map<std::string, NativeRhs> r;
  return r;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = v;
  return n;
}
NodePtr make_leaf(Kind k, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->value = value;
  return n;
}
NodePtr make_unary(Kind k, NodePtr x) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(x);
  return n;
}
NodePtr make_func(Func f, NodePtr x) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Func;
  n->func = f;
  n->lhs = std::move(x);
  return n;
}
NodePtr make_binary(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
NodePtr make_sing(double eta, double a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sing;
  n->value = eta;
  n->exponent = a;
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->kind == Kind::Const && n->value == v; }

// Builders with light algebraic simplification, used by derivative().
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == Kind::Const && b->kind == Kind::Const) return make_const(a->value + b->value);
  return make_binary(Kind::Add, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
  if (a->kind == Kind::Const) return make_const(-a->value);
  return make_unary(Kind::Neg, std::move(a));
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  if (a->kind == Kind::Const && b->kind == Kind::Const) return make_const(a->value - b->value);
  return make_binary(Kind::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == Kind::Const && b->kind == Kind::Const) return make_const(a->value * b->value);
  return make_binary(Kind::Mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return make_binary(Kind::Div, std::move(a), std::move(b));
}

bool depends_on_time(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const: return false;
    case Kind::Time:
    case Kind::Sing:
    case Kind::Native: return true;
    case Kind::Delay:
    case Kind::Sup: return true;  // the segment moves with t
    default: break;
  }
  return (n->lhs && depends_on_time(n->lhs)) || (n->rhs && depends_on_time(n->rhs));
}

bool reads_state(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Delay:
    case Kind::Sup:
    case Kind::Native: return true;
    default: break;
  }
  return (n->lhs && reads_state(n->lhs)) || (n->rhs && reads_state(n->rhs));
}

bool is_integer(double p) { return std::isfinite(p) && p == std::round(p); }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct EvalContext {
  double t;
  const Segment* seg;
  mutable std::optional<double> sup;
};

[[noreturn]] void throw_domain(const std::string& what, double t) {
  std::ostringstream msg;
  msg << what << " at t=" << t;
  throw DomainError(msg.str());
}

double eval_node(const Node& n, const EvalContext& ctx) {
  switch (n.kind) {
    case Kind::Const: return n.value;
    case Kind::Time: return ctx.t;
    case Kind::Delay:
      if (!ctx.seg) throw_domain("expression reads U(tau) but no state segment was given", ctx.t);
      return ctx.seg->at(-n.value);
    case Kind::Sup:
      if (!ctx.seg) throw_domain("expression reads SUP but no state segment was given", ctx.t);
      if (!ctx.sup) ctx.sup = segment_sup(*ctx.seg);
      return *ctx.sup;
    case Kind::Native:
      if (!ctx.seg) throw_domain("native right-hand side @" + n.name + " needs a state segment", ctx.t);
      return n.native(ctx.t, *ctx.seg);
    case Kind::Neg: return -eval_node(*n.lhs, ctx);
    case Kind::Add: return eval_node(*n.lhs, ctx) + eval_node(*n.rhs, ctx);
    case Kind::Sub: return eval_node(*n.lhs, ctx) - eval_node(*n.rhs, ctx);
    case Kind::Mul: return eval_node(*n.lhs, ctx) * eval_node(*n.rhs, ctx);
    case Kind::Div: {
      const double den = eval_node(*n.rhs, ctx);
      if (den == 0.0) throw_domain("division by zero", ctx.t);
      return eval_node(*n.lhs, ctx) / den;
    }
    case Kind::Pow: {
      const double base = eval_node(*n.lhs, ctx);
      const double p = eval_node(*n.rhs, ctx);
      const double r = is_integer(p) ? std::pow(base, p) : std::pow(std::abs(base), p);
      if (!std::isfinite(r)) throw_domain("power of zero with negative exponent or overflow", ctx.t);
      return r;
    }
    case Kind::Func: {
      const double x = eval_node(*n.lhs, ctx);
      switch (n.func) {
        case Func::Sin: return std::sin(x);
        case Func::Cos: return std::cos(x);
        case Func::Exp: return std::exp(x);
        case Func::Abs: return std::abs(x);
        case Func::Log:
          if (!(x > 0.0)) throw_domain("log of a non-positive value", ctx.t);
          return std::log(x);
      }
      break;
    }
    case Kind::Sing: {
      if (n.exponent == 0.0) return 1.0;
      const double dist = std::abs(ctx.t - n.value);
      if (dist == 0.0) {
        std::ostringstream msg;
        msg << "singular factor sing(" << n.value << "," << n.exponent << ") evaluated at its singular point";
        throw SingularityError(msg.str());
      }
      return std::pow(dist, -n.exponent);
    }
  }
  throw Error("expression: corrupt node");
}

void to_string_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case Kind::Const:
      if (n.value < 0.0 || (n.value == 0.0 && std::signbit(n.value))) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case Kind::Time: out += "t"; return;
    case Kind::Delay: out += "U(" + format_number(n.value) + ")"; return;
    case Kind::Sup: out += "SUP"; return;
    case Kind::Native: out += "@" + n.name; return;
    case Kind::Sing: out += "sing(" + format_number(n.value) + "," + format_number(n.exponent) + ")"; return;
    case Kind::Neg:
      out += "(-";
      to_string_node(*n.lhs, out);
      out += ")";
      return;
    case Kind::Func: {
      static constexpr const char* names[] = {"sin", "cos", "exp", "log", "abs"};
      out += names[static_cast<int>(n.func)];
      out += "(";
      to_string_node(*n.lhs, out);
      out += ")";
      return;
    }
    default: break;
  }
  const char* op = n.kind == Kind::Add ? " + " : n.kind == Kind::Sub ? " - " : n.kind == Kind::Mul ? " * "
                 : n.kind == Kind::Div ? " / " : "^";
  out += "(";
  to_string_node(*n.lhs, out);
  out += op;
  to_string_node(*n.rhs, out);
  out += ")";
}

NodePtr derive(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Const: return make_const(0.0);
    case Kind::Time: return make_const(1.0);
    case Kind::Delay:
    case Kind::Sup:
    case Kind::Native:
      throw DomainError("derivative: expressions that read the state cannot be differentiated");
    case Kind::Sing:
      if (n->exponent == 0.0) return make_const(0.0);
      // d/dt |t - eta|^(-a) = -a (t - eta) |t - eta|^(-a-2)
      return mul(make_const(-n->exponent),
                 mul(sub(make_leaf(Kind::Time), make_const(n->value)), make_sing(n->value, n->exponent + 2.0)));
    case Kind::Neg: return neg(derive(n->lhs));
    case Kind::Add: return add(derive(n->lhs), derive(n->rhs));
    case Kind::Sub: return sub(derive(n->lhs), derive(n->rhs));
    case Kind::Mul: return add(mul(derive(n->lhs), n->rhs), mul(n->lhs, derive(n->rhs)));
    case Kind::Div:
      return div(sub(mul(derive(n->lhs), n->rhs), mul(n->lhs, derive(n->rhs))), mul(n->rhs, n->rhs));
    case Kind::Pow: {
      const NodePtr& x = n->lhs;
      const NodePtr& p = n->rhs;
      const NodePtr dx = derive(x);
      if (!depends_on_time(p)) {
        const double pv = eval_node(*p, EvalContext{0.0, nullptr, {}});
        if (is_integer(pv)) {
          return mul(mul(make_const(pv), make_binary(Kind::Pow, x, make_const(pv - 1.0))), dx);
        }
        // d|x|^p = p x |x|^(p-2) x'
        return mul(mul(make_const(pv), mul(x, make_binary(Kind::Pow, x, make_const(pv - 2.0)))), dx);
      }
      // x^p (p' log|x| + p x'/x)
      return mul(n, add(mul(derive(p), make_func(Func::Log, make_func(Func::Abs, x))), div(mul(p, dx), x)));
    }
    case Kind::Func: {
      const NodePtr& x = n->lhs;
      const NodePtr dx = derive(x);
      switch (n->func) {
        case Func::Sin: return mul(make_func(Func::Cos, x), dx);
        case Func::Cos: return neg(mul(make_func(Func::Sin, x), dx));
        case Func::Exp: return mul(n, dx);
        case Func::Log: return div(dx, x);
        case Func::Abs: return mul(dx, div(x, make_func(Func::Abs, x)));
      }
      break;
    }
  }
  throw Error("derivative: corrupt node");
}

void collect(const NodePtr& n, Kind kind, std::vector<double>& out) {
  if (n->kind == kind && (kind != Kind::Sing || n->exponent > 0.0)) out.push_back(n->value);
  if (n->lhs) collect(n->lhs, kind, out);
  if (n->rhs) collect(n->rhs, kind, out);
}

bool contains(const NodePtr& n, Kind kind) {
  if (n->kind == kind) return true;
  return (n->lhs && contains(n->lhs, kind)) || (n->rhs && contains(n->rhs, kind));
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream msg;
    msg << "expression \"" << src_ << "\" column " << pos_ + 1 << ": " << what;
    throw ParseError(msg.str());
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make_binary(Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Kind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_binary(Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_unary(Kind::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(Kind::Pow, base, unary());
    return base;
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(src_.substr(start, pos_ - start));
  }

  double constant_argument() {
    const std::size_t start = pos_;
    NodePtr e = expr();
    if (depends_on_time(e)) {
      pos_ = start;
      fail("argument must be a constant");
    }
    return eval_node(*e, EvalContext{0.0, nullptr, {}});
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
      if (res.ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - src_.data());
      return make_const(v);
    }
    if (c == '@') {
      ++pos_;
      const std::string name = identifier();
      if (name.empty()) fail("expected native function name after '@'");
      std::lock_guard<std::mutex> lock(registry_mutex());
      auto it = registry().find(name);
      if (it == registry().end()) fail("unknown native right-hand side @" + name);
      auto n = std::make_shared<Node>();
      n->kind = Kind::Native;
      n->name = name;
      n->native = it->second;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      const std::string id = identifier();
      if (id == "t") return make_leaf(Kind::Time);
      if (id == "SUP") return make_leaf(Kind::Sup);
      if (id == "pi") return make_const(std::numbers::pi);
      if (id == "U") {
        expect('(');
        const double tau = constant_argument();
        expect(')');
        if (!(tau >= 0.0)) {
          pos_ = start;
          fail("delay tau in U(tau) must be non-negative");
        }
        return make_leaf(Kind::Delay, tau);
      }
      if (id == "sing") {
        expect('(');
        const double eta = constant_argument();
        expect(',');
        const double a = constant_argument();
        expect(')');
        if (!(a >= 0.0)) {
          pos_ = start;
          fail("singular exponent a in sing(eta, a) must be non-negative");
        }
        return make_sing(eta, a);
      }
      static const std::map<std::string, Func> funcs = {
          {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp}, {"log", Func::Log}, {"abs", Func::Abs}};
      auto it = funcs.find(id);
      if (it == funcs.end()) {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make_func(it->second, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

double segment_sup(const Segment& seg) {
  double sup = 0.0;
  for (int i = 0; i < kSupGridPoints; ++i) {
    const double theta = -seg.h * (1.0 - static_cast<double>(i) / (kSupGridPoints - 1));
    sup = std::max(sup, std::abs(seg.at(theta)));
  }
  return sup;
}

void register_native_rhs(const std::string& name, NativeRhs fn) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry()[name] = std::move(fn);
}

Expression::Expression() : root_(make_const(0.0)) {}

Expression Expression::parse(std::string_view source) { return Expression(Parser(source).parse()); }
Expression Expression::constant(double value) { return Expression(make_const(value)); }
Expression Expression::time() { return Expression(make_leaf(Kind::Time)); }

double Expression::eval(double t, const Segment& seg) const {
  return eval_node(*root_, EvalContext{t, &seg, {}});
}

double Expression::eval(double t) const { return eval_node(*root_, EvalContext{t, nullptr, {}}); }

Expression Expression::derivative() const { return Expression(derive(root_)); }

std::string Expression::to_string() const {
  std::string out;
  to_string_node(*root_, out);
  return out;
}

bool Expression::reads_state() const { return fdelay::reads_state(root_); }
bool Expression::uses_sup() const { return contains(root_, Kind::Sup); }

std::vector<double> Expression::delays() const {
  std::vector<double> out;
  collect(root_, Kind::Delay, out);
  return out;
}

std::vector<double> Expression::singular_points() const {
  std::vector<double> out;
  collect(root_, Kind::Sing, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression(make_binary(Kind::Add, a.root_, b.root_));
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression(make_binary(Kind::Sub, a.root_, b.root_));
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression(make_binary(Kind::Mul, a.root_, b.root_));
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression(make_binary(Kind::Div, a.root_, b.root_));
}

}  // namespace fdelay
