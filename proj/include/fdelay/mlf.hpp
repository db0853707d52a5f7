#pragma once

// Two-parameter Mittag-Leffler function E_{c,d}(t) = sum_i t^i / Gamma(c*i + d)
// and a constructive search for rates lambda satisfying
//
//   (1/Gamma(beta)) int_0^t (t-s)^(beta-1) E_{c,1-d}(lambda s^c) s^(-d) ds
//       < r * E_{c,1-d}(lambda t^c),     t in (0, horizon].

#include <optional>
#include <vector>

#include "fdelay/error.hpp"
#include "fdelay/parallel.hpp"

namespace fdelay {

struct MLParams {
  double c = 1.0;
  double d = 1.0;

  void validate() const;
};

/// E_{c,d}(t). Summed term by term with the ratio recurrence; switches to scaled
/// accumulation once the partial sum passes 1e280. Throws OverflowError if the
/// result is not representable and DomainError for c <= 0 or d <= 0.
/// For t < 0 the alternating series is summed directly; accuracy degrades for
/// t well below -1 (no asymptotic expansion is attempted).
[[nodiscard]] double ml_eval(const MLParams& p, double t);

/// log E_{c,d}(t) for t >= 0, finite for arguments whose value overflows. For
/// c = 1 and large t it uses the incomplete-gamma closed form instead of the series.
[[nodiscard]] double ml_eval_log(const MLParams& p, double t);

/// Relative slack applied to the quadrature estimate before comparison.
inline constexpr double kLambdaQuadratureMargin = 1e-6;

struct LambdaSearchSpec {
  double c = 1.0;
  double d = 0.0;  // singularity exponent, 0 <= d < min(beta, 1)
  double beta = 1.0;
  double r = 1.0;
  double horizon = 1.0;
  int grid_points = 64;
  double lambda_max = 1024.0;
  // Quadrature cells per graded segment of each check-point integral.
  int quadrature_cells = 256;
  // Bisection refinement after the doubling search (off: return the first
  // passing power of two).
  bool refine = false;

  void validate() const;
};

struct LambdaCertificate {
  double lambda = 0.0;
  // max over the grid of (1 + margin) * LHS / RHS
  double max_ratio = 0.0;
  std::vector<double> grid;
  std::vector<double> ratios;
  bool passed = false;
  // First grid point where the ratio reached 1, if any.
  std::optional<double> first_failure;
};

/// Grid check of the inequality for one lambda. passed <=> max_ratio < 1.
[[nodiscard]] LambdaCertificate verify_ml_inequality(const LambdaSearchSpec& spec, double lambda,
                                                     Execution exec = Execution::Parallel);

/// Certificate re-check of an existing lambda on a grid `factor` times finer.
[[nodiscard]] LambdaCertificate reverify(const LambdaSearchSpec& spec, const LambdaCertificate& cert,
                                         int factor = 2, Execution exec = Execution::Parallel);

class LambdaSearchExhausted : public Error {
 public:
  LambdaSearchExhausted(const std::string& what, LambdaCertificate last)
      : Error(what), last_(std::move(last)) {}
  [[nodiscard]] const LambdaCertificate& last_certificate() const noexcept { return last_; }

 private:
  LambdaCertificate last_;
};

/// Doubling search from lambda = 1: returns the first 2^k <= lambda_max whose
/// certificate passes on the search grid and on its 2x refinement. With
/// spec.refine the bracket is bisected (20 steps) and the result rounded up to
/// three significant digits. Throws LambdaSearchExhausted otherwise.
[[nodiscard]] LambdaCertificate find_lambda(const LambdaSearchSpec& spec,
                                            Execution exec = Execution::Parallel);

}  // namespace fdelay
