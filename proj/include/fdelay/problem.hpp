#pragma once

// Problem instances ^C D^alpha u(t) = f(t, u_t) with history u = phi on [-h, 0],
// and sampling-based falsifiers for the growth and Lipschitz conditions.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdelay/expression.hpp"

namespace fdelay {

/// History phi on [-h, 0] plus phi^(i)(0), i = 0..ceil(alpha)-1.
class HistorySpec {
 public:
  /// phi = 0 for ceil(alpha) = 1.
  HistorySpec();
  /// Derivatives at zero are taken from `derivs` when given, otherwise computed
  /// symbolically from `phi`.
  static HistorySpec from_expression(Expression phi, int order,
                                     std::optional<std::vector<double>> derivs = std::nullopt);
  /// Natural cubic spline through (t, u); t must run from -h to 0. Derivatives
  /// at zero are mandatory: splines are never differentiated numerically.
  static HistorySpec from_samples(std::vector<double> t, std::vector<double> u,
                                  std::vector<double> derivs);

  [[nodiscard]] double at(double t) const;
  [[nodiscard]] const std::vector<double>& derivatives_at_zero() const;
  /// max |phi| over `points` equispaced points of [-h, 0].
  [[nodiscard]] double sup_norm(double h, int points = 1024) const;

  [[nodiscard]] bool is_expression() const;
  [[nodiscard]] const Expression& expression() const;  // requires is_expression()
  [[nodiscard]] const std::vector<double>& sample_nodes() const;
  [[nodiscard]] const std::vector<double>& sample_values() const;

  struct Impl;

 private:
  explicit HistorySpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

struct DelayIVP {
  double alpha = 0.5;
  double h = 1.0;
  double T = 1.0;
  HistorySpec phi;
  Expression f;

  [[nodiscard]] int ceil_alpha() const;
  /// Throws ValidationError naming the violated invariant.
  void validate() const;
};

/// One piece of the growth condition
///   |f(t,u)| <= b / |t - eta|^a * ||u||^p + m(t)  on [t_begin, t_end],
/// with eta = 0 on the first piece and eta interior on the others.
struct GrowthPiece {
  double t_end = 0.0;
  std::optional<double> eta;
  double a = 0.0;
  double p = 1.0;
  double b = 1.0;
  double q = 0.0;
  Expression m = Expression::constant(0.0);
};

struct GrowthSpec {
  std::vector<GrowthPiece> pieces;

  [[nodiscard]] double t_begin(std::size_t i) const { return i == 0 ? 0.0 : pieces[i - 1].t_end; }
  [[nodiscard]] double eta(std::size_t i) const { return i == 0 ? 0.0 : *pieces[i].eta; }
  void validate(const DelayIVP& ivp) const;
};

/// |f(t,u) - f(t,v)| <= b / |t - eta|^a * ||u - v|| on each piece.
struct LipschitzPiece {
  double t_end = 0.0;
  std::optional<double> eta;
  double a = 0.0;
  double b = 1.0;
};

struct LipschitzSpec {
  std::vector<LipschitzPiece> pieces;

  [[nodiscard]] double t_begin(std::size_t i) const { return i == 0 ? 0.0 : pieces[i - 1].t_end; }
  [[nodiscard]] double eta(std::size_t i) const { return i == 0 ? 0.0 : *pieces[i].eta; }
  void validate(const DelayIVP& ivp) const;
};

/// f(t, u_t) with U(tau) = seg(-tau) and SUP = segment_sup(seg).
[[nodiscard]] double eval_rhs(const Expression& f, double t, const Segment& seg);

struct Counterexample {
  double t = 0.0;
  double norm_u = 0.0;
  double norm_v = 0.0;  // Lipschitz checks only
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ConditionReport {
  bool passed = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::uint64_t seed = 0;
  std::vector<Counterexample> counterexamples;  // first few violations
};

inline constexpr std::uint64_t kDefaultSamplerSeed = 20240917;

/// Random (t, u) samples, u a random cubic segment with sup norm in [0, 10];
/// reports every sample violating the growth bound. A falsifier, not a proof.
[[nodiscard]] ConditionReport check_growth(const DelayIVP& ivp, const GrowthSpec& spec,
                                           std::size_t samples,
                                           std::uint64_t seed = kDefaultSamplerSeed);
[[nodiscard]] ConditionReport check_lipschitz(const DelayIVP& ivp, const LipschitzSpec& spec,
                                              std::size_t samples,
                                              std::uint64_t seed = kDefaultSamplerSeed);

struct ProblemBundle {
  DelayIVP ivp;
  std::optional<GrowthSpec> growth;
  std::optional<LipschitzSpec> lipschitz;
};

/// Parses and validates a JSON problem document (schema in docs/config.md).
[[nodiscard]] ProblemBundle parse_problem(std::string_view text);
[[nodiscard]] ProblemBundle load_problem(const std::string& path);
[[nodiscard]] std::string serialize(const ProblemBundle& bundle);

}  // namespace fdelay
