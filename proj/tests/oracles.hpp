#pragma once

// Reference values computed independently of the library: 50-digit series,
// closed forms of fractional integrals, and tanh-sinh quadrature.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

/// E_{c,d}(x) summed in 50-digit arithmetic until terms drop below 1e-45 of
/// the partial sum (and at least `min_terms` terms).
inline Real ml_series(double c, double d, double x, int min_terms = 200) {
  Real sum = 0;
  Real power = 1;
  const Real X = x;
  for (int i = 0; i < 20000; ++i) {
    const Real term = power / boost::math::tgamma(Real(c) * i + Real(d));
    sum += term;
    if (i >= min_terms && abs(term) < Real("1e-45") * abs(sum)) break;
    power *= X;
  }
  return sum;
}

inline double ml(double c, double d, double x) { return static_cast<double>(ml_series(c, d, x)); }
inline double ml_log(double c, double d, double x) { return static_cast<double>(log(ml_series(c, d, x))); }

/// Coefficients 1/Gamma(c i + d) for repeated evaluation on a grid.
class MLTable {
 public:
  MLTable(double c, double d, int terms = 400) {
    for (int i = 0; i < terms; ++i) coeff_.push_back(1 / boost::math::tgamma(Real(c) * i + Real(d)));
  }
  double operator()(double x) const {
    Real sum = 0;
    Real power = 1;
    for (const auto& a : coeff_) {
      sum += a * power;
      power *= x;
    }
    return static_cast<double>(sum);
  }

 private:
  std::vector<Real> coeff_;
};

/// I^beta s^k (t) = Gamma(k+1) t^(k+beta) / Gamma(k+1+beta).
inline double rl_power(double beta, double k, double t) {
  const Real r = boost::math::tgamma(Real(k) + 1) * pow(Real(t), Real(k) + Real(beta)) /
                 boost::math::tgamma(Real(k) + 1 + Real(beta));
  return static_cast<double>(r);
}

/// I^beta s^(-d) (t) = t^(beta-d) Gamma(1-d) / Gamma(1+beta-d).
inline double rl_weight(double beta, double d, double t) { return rl_power(beta, -d, t); }

/// (1/Gamma(beta)) int_lo^t (t-s)^(beta-1) |s-eta|^(-d) g(s) ds by tanh-sinh,
/// split at eta when it is interior.
inline double weighted_integral(double beta, double d, double eta, const std::function<double(double)>& g,
                                double lo, double t) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  // xc is the signed distance to the nearer endpoint (negative near a), which
  // keeps the endpoint singularities resolved to full precision.
  auto segment = [&](double a, double b) {
    auto f = [&](double s, double xc) {
      const double to_t = (b == t && xc > 0.0) ? xc : t - s;
      double to_eta = std::abs(s - eta);
      if (eta == a && xc < 0.0) to_eta = -xc;
      if (eta == b && xc > 0.0) to_eta = xc;
      return std::pow(to_t, beta - 1.0) * std::pow(to_eta, -d) * g(s);
    };
    return integrator.integrate(f, a, b);
  };
  const double total = (eta > lo && eta < t) ? segment(lo, eta) + segment(eta, t) : segment(lo, t);
  return total / std::tgamma(beta);
}

/// Semi-analytic solution of D^a u = u(t-1), phi = 1, on [0, 2].
inline double method_of_steps(double alpha, double t) {
  double u = 1.0 + std::pow(t, alpha) / std::tgamma(alpha + 1.0);
  if (t > 1.0) u += std::pow(t - 1.0, 2.0 * alpha) / std::tgamma(2.0 * alpha + 1.0);
  return u;
}

/// log E_{1,b}(x) for x >= 0 from the incomplete-gamma closed form
/// E_{1,b}(x) = 1/Gamma(b) + x^(1-b) e^x P(b, x).
inline double ml1_log(double b, double x) {
  if (x == 0.0) return -std::lgamma(b);
  return x + std::log(std::pow(x, 1.0 - b) * boost::math::gamma_p(b, x) + std::exp(-x - std::lgamma(b)));
}

/// LHS / RHS of the Mittag-Leffler integral inequality at t (c = 1), with the
/// integrand scaled by the right-hand side to stay finite.
inline double ml_inequality_ratio(double d, double beta, double r, double lambda, double t) {
  const double log_rhs = ml1_log(1.0 - d, lambda * t);
  auto g = [&](double s) { return std::exp(ml1_log(1.0 - d, lambda * s) - log_rhs); };
  return weighted_integral(beta, d, 0.0, g, 0.0, t) / r;
}

}  // namespace oracle
