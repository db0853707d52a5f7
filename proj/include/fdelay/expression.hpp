#pragma once

// Right-hand sides f(t, u_t) and time-only functions (history, forcing terms)
// as a small expression language. Grammar: docs/grammar.md.

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fdelay/function_ref.hpp"

namespace fdelay {

/// Number of equispaced points used for the sup norm of a segment.
inline constexpr int kSupGridPoints = 256;

/// The state segment u_t as a function of theta in [-h, 0].
struct Segment {
  FunctionRef<double(double)> at;
  double h;
};

/// max |seg(theta)| over kSupGridPoints equispaced points of [-h, 0].
[[nodiscard]] double segment_sup(const Segment& seg);

using NativeRhs = std::function<double(double t, const Segment& seg)>;

/// Makes `@name` resolvable in expressions parsed afterwards. Native functions
/// are opaque to validation: they must only read the segment on [-h, 0].
void register_native_rhs(const std::string& name, NativeRhs fn);

namespace detail {
struct Node;
}

class Expression {
 public:
  /// The constant 0.
  Expression();
  /// Parses `source`; throws ParseError with the column of the problem.
  static Expression parse(std::string_view source);
  static Expression constant(double value);
  static Expression time();

  /// f(t, u_t). Throws SingularityError at a declared singular point and
  /// DomainError for log of non-positive values or division by zero.
  [[nodiscard]] double eval(double t, const Segment& seg) const;
  /// Evaluation of an expression that does not read the state.
  [[nodiscard]] double eval(double t) const;

  /// Symbolic d/dt. Only defined for expressions that do not read the state.
  [[nodiscard]] Expression derivative() const;

  /// Canonical fully parenthesized text; parse(to_string()) reproduces it.
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] bool reads_state() const;
  [[nodiscard]] bool uses_sup() const;
  /// Point delays tau of every U(tau).
  [[nodiscard]] std::vector<double> delays() const;
  /// eta of every sing(eta, a) with a > 0.
  [[nodiscard]] std::vector<double> singular_points() const;

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);

  friend bool operator==(const Expression& a, const Expression& b) {
    return a.to_string() == b.to_string();
  }

  explicit Expression(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}

 private:
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace fdelay
