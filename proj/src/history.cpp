#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdelay/error.hpp"
#include "fdelay/problem.hpp"

namespace fdelay {

struct HistorySpec::Impl {
  std::optional<Expression> expr;
  // natural cubic spline through (nodes, values); m holds second derivatives
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<double> m;
  std::vector<double> derivs;
};

namespace {

std::vector<double> natural_spline_moments(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n < 3) return m;
  // tridiagonal system for interior moments (Thomas algorithm)
  std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1];
    const double h1 = x[i + 1] - x[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
  }
  for (std::size_t i = 2; i + 1 < n; ++i) {
    const double lower = x[i] - x[i - 1];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    if (i == 1) break;
  }
  return m;
}

}  // namespace

HistorySpec::HistorySpec() : HistorySpec(from_expression(Expression::constant(0.0), 1)) {}

HistorySpec HistorySpec::from_expression(Expression phi, int order, std::optional<std::vector<double>> derivs) {
  if (order < 1) throw ValidationError("phi: derivative order must be >= 1");
  if (phi.reads_state()) throw ValidationError("phi: history may not read the state (U, SUP, @native)");
  auto impl = std::make_shared<Impl>();
  if (derivs) {
    if (static_cast<int>(derivs->size()) != order) {
      std::ostringstream msg;
      msg << "phi.derivs: expected " << order << " values (ceil(alpha)), got " << derivs->size();
      throw ValidationError(msg.str());
    }
    impl->derivs = std::move(*derivs);
  } else {
    Expression e = phi;
    for (int i = 0; i < order; ++i) {
      try {
        impl->derivs.push_back(e.eval(0.0));
      } catch (const Error& err) {
        throw ValidationError(std::string("phi: derivative at 0 not evaluable: ") + err.what());
      }
      if (i + 1 < order) e = e.derivative();
    }
  }
  impl->expr = std::move(phi);
  return HistorySpec(std::move(impl));
}

HistorySpec HistorySpec::from_samples(std::vector<double> t, std::vector<double> u, std::vector<double> derivs) {
  if (t.size() != u.size()) throw ValidationError("phi.samples: t and u differ in length");
  if (t.size() < 2) throw ValidationError("phi.samples: need at least two samples");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ValidationError("phi.samples.t: must be strictly increasing");
  }
  if (std::abs(t.back()) > 1e-12) throw ValidationError("phi.samples.t: last sample must be at t = 0");
  t.back() = 0.0;
  if (derivs.empty()) {
    throw ValidationError("phi.derivs: required for sampled history (derivatives are never estimated from samples)");
  }
  if (std::abs(derivs[0] - u.back()) > 1e-9 * std::max(1.0, std::abs(u.back()))) {
    throw ValidationError("phi.derivs[0]: must equal the sample at t = 0");
  }
  auto impl = std::make_shared<Impl>();
  impl->m = natural_spline_moments(t, u);
  impl->nodes = std::move(t);
  impl->values = std::move(u);
  impl->derivs = std::move(derivs);
  return HistorySpec(std::move(impl));
}

double HistorySpec::at(double t) const {
  if (impl_->expr) return impl_->expr->eval(t);
  const auto& x = impl_->nodes;
  const auto& y = impl_->values;
  const auto& m = impl_->m;
  const double tol = 1e-12 * std::max(1.0, std::abs(x.front()));
  if (t < x.front() - tol || t > tol) {
    std::ostringstream msg;
    msg << "history: t=" << t << " outside sampled range [" << x.front() << ", 0]";
    throw DomainError(msg.str());
  }
  t = std::clamp(t, x.front(), 0.0);
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t j = static_cast<std::size_t>(std::distance(x.begin(), it));
  j = std::clamp<std::size_t>(j, 1, x.size() - 1);
  const double h = x[j] - x[j - 1];
  const double a = (x[j] - t) / h;
  const double b = (t - x[j - 1]) / h;
  return a * y[j - 1] + b * y[j] + ((a * a * a - a) * m[j - 1] + (b * b * b - b) * m[j]) * h * h / 6.0;
}

const std::vector<double>& HistorySpec::derivatives_at_zero() const { return impl_->derivs; }

double HistorySpec::sup_norm(double h, int points) const {
  double sup = 0.0;
  for (int i = 0; i < points; ++i) {
    const double t = -h * (1.0 - static_cast<double>(i) / (points - 1));
    sup = std::max(sup, std::abs(at(t)));
  }
  return sup;
}

bool HistorySpec::is_expression() const { return impl_->expr.has_value(); }
const Expression& HistorySpec::expression() const { return *impl_->expr; }
const std::vector<double>& HistorySpec::sample_nodes() const { return impl_->nodes; }
const std::vector<double>& HistorySpec::sample_values() const { return impl_->values; }

}  // namespace fdelay
