#include "fdelay/mlf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fdelay/fracops.hpp"

namespace fdelay {

namespace {

constexpr int kMaxTerms = 10000;
constexpr double kRelStop = 1e-16;
constexpr double kRescaleAbove = 1e280;
const double kLogRescale = 280.0 * std::log(10.0);
// ml_eval_log switches to the incomplete-gamma form for c = 1 beyond this.
constexpr double kClosedFormAbove = 30.0;

bool is_small_integer(double c) { return c == std::floor(c) && c <= 16.0; }

// Gamma(c*i + d) / Gamma(c*(i+1) + d)
double gamma_ratio(double c, double d, int i) {
  const double x = c * i + d;
  if (is_small_integer(c)) {
    double prod = 1.0;
    for (int k = 0; k < static_cast<int>(c); ++k) prod *= x + k;
    return 1.0 / prod;
  }
  return std::exp(std::lgamma(x) - std::lgamma(x + c));
}

// Sum of the series as sum * exp(log_scale). Rescaling only for t >= 0.
struct ScaledSum {
  double sum;
  double log_scale;
};

ScaledSum sum_series(const MLParams& p, double t) {
  double term;
  double log_scale = 0.0;
  if (p.d < 170.0) {
    term = 1.0 / std::tgamma(p.d);
  } else {
    term = 1.0;
    log_scale = -std::lgamma(p.d);
  }
  double sum = term;
  if (t == 0.0) return {sum, log_scale};

  for (int i = 0; i < kMaxTerms; ++i) {
    const double next = term * t * gamma_ratio(p.c, p.d, i);
    if (!std::isfinite(next)) {
      std::ostringstream msg;
      msg << "ml_eval: term overflow at t=" << t;
      throw OverflowError(msg.str());
    }
    sum += next;
    term = next;
    if (std::abs(sum) > kRescaleAbove) {
      if (t < 0.0) {
        std::ostringstream msg;
        msg << "ml_eval: alternating series exceeds range at t=" << t;
        throw OverflowError(msg.str());
      }
      sum /= 1e280;
      term /= 1e280;
      log_scale += kLogRescale;
    }
    // Terms decrease geometrically once the ratio drops below 1; the tail is
    // then bounded by |term| * q / (1 - q).
    const double q = std::abs(t) * gamma_ratio(p.c, p.d, i + 1);
    if (q < 1.0 && p.c * (i + 1) + p.d > 2.0 &&
        std::abs(term) * q / (1.0 - q) <= kRelStop * std::abs(sum)) {
      return {sum, log_scale};
    }
  }
  std::ostringstream msg;
  msg << "ml_eval: series not converged after " << kMaxTerms << " terms (c=" << p.c
      << ", d=" << p.d << ", t=" << t << ")";
  throw OverflowError(msg.str());
}

}  // namespace

void MLParams::validate() const {
  if (!(c > 0.0) || !(d > 0.0) || !std::isfinite(c) || !std::isfinite(d)) {
    std::ostringstream msg;
    msg << "Mittag-Leffler parameters must be positive (c=" << c << ", d=" << d << ")";
    throw DomainError(msg.str());
  }
}

double ml_eval(const MLParams& p, double t) {
  p.validate();
  if (!std::isfinite(t)) throw DomainError("ml_eval: non-finite argument");
  const auto [sum, log_scale] = sum_series(p, t);
  if (log_scale == 0.0) return sum;
  const double log_value = std::log(sum) + log_scale;
  if (log_value >= std::log(std::numeric_limits<double>::max())) {
    std::ostringstream msg;
    msg << "ml_eval: E_{" << p.c << "," << p.d << "}(" << t << ") exceeds double range";
    throw OverflowError(msg.str());
  }
  return std::exp(log_value);
}

double ml_eval_log(const MLParams& p, double t) {
  p.validate();
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("ml_eval_log: argument must be finite and non-negative");
  }
  if (p.c == 1.0 && t > kClosedFormAbove) {
    // E_{1,d}(t) = 1/Gamma(d) + t^(1-d) e^t P(d, t), P the regularized lower
    // incomplete gamma; the series would need about t terms.
    const double P = boost::math::gamma_p(p.d, t);
    return t + std::log(std::pow(t, 1.0 - p.d) * P + std::exp(-t - std::lgamma(p.d)));
  }
  const auto [sum, log_scale] = sum_series(p, t);
  return std::log(sum) + log_scale;
}

void LambdaSearchSpec::validate() const {
  std::ostringstream msg;
  if (!(c > 0.0)) msg << "c must be positive; ";
  if (!(beta > 0.0)) msg << "beta must be positive; ";
  if (!(d >= 0.0) || !(d < std::min(beta, 1.0))) msg << "hypothesis d < min{beta, 1} violated (d=" << d << "); ";
  if (!(r > 0.0)) msg << "r must be positive; ";
  if (!(horizon > 0.0)) msg << "horizon must be positive; ";
  if (grid_points < 2) msg << "grid_points must be >= 2; ";
  if (!(lambda_max > 0.0)) msg << "lambda_max must be positive; ";
  if (quadrature_cells < 1) msg << "quadrature_cells must be >= 1; ";
  const std::string text = msg.str();
  if (!text.empty()) throw DomainError("lambda search: " + text.substr(0, text.size() - 2));
}

LambdaCertificate verify_ml_inequality(const LambdaSearchSpec& spec, double lambda, Execution exec) {
  spec.validate();
  if (!(lambda > 0.0)) throw DomainError("verify_ml_inequality: lambda must be positive");
  const MLParams ml{spec.c, 1.0 - spec.d};

  LambdaCertificate cert;
  cert.lambda = lambda;
  cert.grid.resize(static_cast<std::size_t>(spec.grid_points));
  cert.ratios.resize(cert.grid.size());
  for (std::size_t j = 0; j < cert.grid.size(); ++j) {
    cert.grid[j] = spec.horizon * static_cast<double>(j + 1) / spec.grid_points;
  }

  // Both sides are divided by E(lambda t^c) so the integrand stays <= 1.
  parallel_for(static_cast<std::ptrdiff_t>(cert.grid.size()), exec, [&](std::ptrdiff_t j) {
    const double t = cert.grid[static_cast<std::size_t>(j)];
    const double log_rhs = ml_eval_log(ml, lambda * std::pow(t, spec.c));
    auto scaled = [&](double s) {
      return std::exp(ml_eval_log(ml, lambda * std::pow(s, spec.c)) - log_rhs);
    };
    const GradedMesh mesh(0.0, t, spec.quadrature_cells);
    const double lhs = rl_weighted_integral(spec.beta, spec.d, 0.0, scaled, t, mesh);
    cert.ratios[static_cast<std::size_t>(j)] = (1.0 + kLambdaQuadratureMargin) * lhs / spec.r;
  });

  cert.max_ratio = *std::max_element(cert.ratios.begin(), cert.ratios.end());
  cert.passed = cert.max_ratio < 1.0;
  for (std::size_t j = 0; j < cert.grid.size(); ++j) {
    if (!(cert.ratios[j] < 1.0)) {
      cert.first_failure = cert.grid[j];
      break;
    }
  }
  return cert;
}

LambdaCertificate reverify(const LambdaSearchSpec& spec, const LambdaCertificate& cert, int factor, Execution exec) {
  LambdaSearchSpec finer = spec;
  finer.grid_points = spec.grid_points * factor;
  return verify_ml_inequality(finer, cert.lambda, exec);
}

namespace {

double round_up_3_significant(double x) {
  const double scale = std::pow(10.0, std::floor(std::log10(x)) - 2.0);
  return std::ceil(x / scale) * scale;
}

}  // namespace

LambdaCertificate find_lambda(const LambdaSearchSpec& spec, Execution exec) {
  spec.validate();
  // A candidate is accepted only if it also passes on the 2x refined grid: the
  // ratio can peak between nodes (near t ~ 1/lambda when d > 0), and every
  // returned certificate is meant to survive re-verification at twice the
  // resolution.
  LambdaCertificate rejected;
  auto accepts = [&](double lambda, LambdaCertificate& out) {
    out = verify_ml_inequality(spec, lambda, exec);
    if (!out.passed) {
      rejected = out;
      return false;
    }
    LambdaSearchSpec finer = spec;
    finer.grid_points = 2 * spec.grid_points;
    LambdaCertificate fine = verify_ml_inequality(finer, lambda, exec);
    if (!fine.passed) {
      rejected = std::move(fine);
      return false;
    }
    return true;
  };

  bool bracketed = false;
  for (double lambda = 1.0; lambda <= spec.lambda_max; lambda *= 2.0) {
    LambdaCertificate cert;
    if (!accepts(lambda, cert)) {
      bracketed = true;
      continue;
    }
    if (!spec.refine || !bracketed) return cert;
    double lo = lambda / 2.0;
    LambdaCertificate best = std::move(cert);
    for (int step = 0; step < 20; ++step) {
      const double mid = 0.5 * (lo + best.lambda);
      LambdaCertificate trial;
      if (accepts(mid, trial)) {
        best = std::move(trial);
      } else {
        lo = mid;
      }
    }
    const double rounded = round_up_3_significant(best.lambda);
    if (rounded != best.lambda) {
      LambdaCertificate trial;
      if (accepts(rounded, trial)) return trial;
    }
    return best;
  }
  std::ostringstream msg;
  msg << "lambda search exhausted: no lambda <= " << spec.lambda_max << " passes (c=" << spec.c
      << ", d=" << spec.d << ", beta=" << spec.beta << ", r=" << spec.r << ", horizon=" << spec.horizon
      << "); last max_ratio " << rejected.max_ratio << " at lambda " << rejected.lambda << " on "
      << rejected.grid.size() << " points";
  throw LambdaSearchExhausted(msg.str(), rejected);
}

}  // namespace fdelay
