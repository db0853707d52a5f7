#include "fdelay/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#include "fdelay/error.hpp"
#include "fdelay/expression.hpp"

namespace fdelay {

namespace {

bool close_to(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

// A^e - B^e for A > B >= 0 without cancellation.
double pow_diff(double A, double B, double e) {
  if (B <= 0.0) return std::pow(A, e);
  return -std::pow(A, e) * std::expm1(e * std::log(B / A));
}

}  // namespace

SampledFunction::SampledFunction(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.size()) throw DomainError("SampledFunction: nodes and values differ in length");
  if (nodes_.empty()) throw DomainError("SampledFunction: no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(values_[i]) || !std::isfinite(nodes_[i])) {
      throw DomainError("SampledFunction: non-finite sample");
    }
    if (i > 0 && !(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("SampledFunction: nodes must be strictly increasing");
    }
  }
}

SampledFunction SampledFunction::uniform(double lo, double hi, int n, FunctionRef<double(double)> fn) {
  if (n < 1 || !(hi > lo)) throw DomainError("SampledFunction::uniform: need n >= 1 and hi > lo");
  std::vector<double> x(static_cast<std::size_t>(n) + 1);
  std::vector<double> y(x.size());
  for (int k = 0; k <= n; ++k) {
    x[k] = k == n ? hi : lo + (hi - lo) * k / n;
    y[k] = fn(x[k]);
  }
  return {std::move(x), std::move(y)};
}

double SampledFunction::at(double t) const {
  const double lo = nodes_.front();
  const double hi = nodes_.back();
  const double scale = std::max(std::abs(lo), std::abs(hi));
  if (t < lo) {
    if (!close_to(t, lo, scale)) throw DomainError("SampledFunction::at: t below sampled range");
    return values_.front();
  }
  if (t > hi) {
    if (!close_to(t, hi, scale)) throw DomainError("SampledFunction::at: t above sampled range");
    return values_.back();
  }
  if (nodes_.size() == 1) return values_.front();
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t j = static_cast<std::size_t>(std::distance(nodes_.begin(), it));
  if (j == 0) j = 1;
  if (j >= nodes_.size()) j = nodes_.size() - 1;
  const double x0 = nodes_[j - 1];
  const double x1 = nodes_[j];
  const double w = (t - x0) / (x1 - x0);
  return (1.0 - w) * values_[j - 1] + w * values_[j];
}

GradedMesh::GradedMesh(double lo, double hi, int n, double grading, SingularEnd end)
    : lo_(lo), hi_(hi), n_(n), grading_(grading), end_(end) {
  if (n < 1) throw DomainError("GradedMesh: n must be >= 1");
  if (!(grading >= 1.0)) throw DomainError("GradedMesh: grading must be >= 1");
  if (!(hi >= lo)) throw DomainError("GradedMesh: interval reversed");
}

std::vector<double> GradedMesh::nodes() const {
  std::vector<double> x(static_cast<std::size_t>(n_) + 1);
  const double len = hi_ - lo_;
  for (int k = 0; k <= n_; ++k) {
    const double u = static_cast<double>(k) / n_;
    switch (end_) {
      case SingularEnd::Lo: x[k] = lo_ + len * std::pow(u, grading_); break;
      case SingularEnd::Hi: x[k] = hi_ - len * std::pow(1.0 - u, grading_); break;
      case SingularEnd::None: x[k] = lo_ + len * u; break;
    }
  }
  x.front() = lo_;
  x.back() = hi_;
  return x;
}

double rl_integral(double beta, const SampledFunction& f, double t) {
  if (!(beta > 0.0)) throw DomainError("rl_integral: beta must be positive");
  const auto x = f.nodes();
  const auto v = f.values();
  const double scale = std::max(std::abs(x.front()), std::abs(x.back()));
  if (t < x.front() || t > x.back()) {
    if (!(close_to(t, x.front(), scale) || close_to(t, x.back(), scale))) {
      std::ostringstream msg;
      msg << "rl_integral: t=" << t << " outside sampled range [" << x.front() << ", " << x.back() << "]";
      throw DomainError(msg.str());
    }
    t = std::clamp(t, x.front(), x.back());
  }
  const long double b = beta;
  long double sum = 0.0L;
  for (std::size_t j = 0; j + 1 < x.size() && x[j] < t; ++j) {
    const double right = std::min(x[j + 1], t);
    const long double A = static_cast<long double>(t) - x[j];
    const long double B = static_cast<long double>(t) - right;
    const long double L = A - B;
    const double f_left = v[j];
    const double f_right = right == x[j + 1] ? v[j + 1] : f.at(right);
    const long double i0 = (std::pow(A, b) - std::pow(B, b)) / b;
    const long double i1 = (std::pow(A, b + 1) - std::pow(B, b + 1)) / (b + 1);
    sum += (i1 - B * i0) / L * f_left + (A * i0 - i1) / L * f_right;
  }
  return static_cast<double>(sum / std::tgamma(b));
}

SampledFunction rl_integral_all(double beta, const SampledFunction& f) {
  std::vector<double> out(f.size());
  const auto x = f.nodes();
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = rl_integral(beta, f, x[k]);
  return {std::vector<double>(x.begin(), x.end()), std::move(out)};
}

ProductWeights::ProductWeights(double beta, double step, int cells) {
  if (!(beta > 0.0) || !(step > 0.0) || cells < 1) {
    throw DomainError("ProductWeights: need beta > 0, step > 0, cells >= 1");
  }
  const auto n = static_cast<std::size_t>(cells);
  left.resize(n);
  right.resize(n);
  mid.resize(n);
  const long double b = beta;
  const long double factor = std::pow(static_cast<long double>(step), b) / std::tgamma(b);
  for (std::size_t m = 0; m < n; ++m) {
    const long double lm = static_cast<long double>(m);
    const long double p0 = std::pow(lm + 1, b) - std::pow(lm, b);
    const long double p1 = std::pow(lm + 1, b + 1) - std::pow(lm, b + 1);
    left[m] = static_cast<double>(factor * (p1 / (b + 1) - lm * p0 / b));
    right[m] = static_cast<double>(factor * ((lm + 1) * p0 / b - p1 / (b + 1)));
    mid[m] = static_cast<double>(factor * p0 / b);
  }
}

std::vector<double> starting_exponents(double alpha) {
  if (!(alpha > 0.0) || alpha >= 1.0) return {};
  std::vector<double> out{0.0};
  for (int j = 1; j <= 3 && j * alpha < 0.95; ++j) out.push_back(j * alpha);
  out.push_back(1.0);
  return out;
}

namespace {

std::shared_ptr<const StartingWeights> build_starting_weights(double alpha, int cells) {
  auto sw = std::make_shared<StartingWeights>();
  sw->exponents = starting_exponents(alpha);
  sw->nodes = static_cast<int>(sw->exponents.size());
  const int m = sw->nodes;
  const ProductWeights w(alpha, 1.0, cells);
  using Matrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Matrix A(m, m);
  for (int l = 0; l < m; ++l) {
    for (int j = 0; j < m; ++j) A(l, j) = j == 0 && sw->exponents[l] == 0.0 ? 1.0L : std::pow(static_cast<long double>(j), static_cast<long double>(sw->exponents[l]));
  }
  const auto lu = A.fullPivLu();

  // powers[l][j] = j^gamma_l on the unit grid
  std::vector<std::vector<long double>> powers(m, std::vector<long double>(static_cast<std::size_t>(cells) + 1));
  std::vector<long double> exact_coeff(m);
  for (int l = 0; l < m; ++l) {
    const long double g = sw->exponents[l];
    for (int j = 0; j <= cells; ++j) powers[l][j] = j == 0 ? (g == 0.0L ? 1.0L : 0.0L) : std::pow(static_cast<long double>(j), g);
    exact_coeff[l] = std::exp(std::lgamma(g + 1) - std::lgamma(g + 1 + alpha));
  }

  sw->sigma.assign(static_cast<std::size_t>(cells + 1) * m, 0.0);
  Vector rhs(m);
  for (int k = 1; k <= cells; ++k) {
    for (int l = 0; l < m; ++l) {
      long double trap = 0.0L;
      for (int j = 0; j < k; ++j) {
        const std::size_t d = static_cast<std::size_t>(k - 1 - j);
        trap += w.left[d] * powers[l][j] + w.right[d] * powers[l][j + 1];
      }
      const long double exact = exact_coeff[l] * std::pow(static_cast<long double>(k), sw->exponents[l] + alpha);
      rhs(l) = exact - trap;
    }
    const Vector sol = lu.solve(rhs);
    for (int j = 0; j < m; ++j) sw->sigma[static_cast<std::size_t>(k * m + j)] = static_cast<double>(sol(j));
  }
  return sw;
}

}  // namespace

std::shared_ptr<const StartingWeights> starting_weights(double alpha, int cells) {
  const auto exps = starting_exponents(alpha);
  if (exps.empty() || cells + 1 < static_cast<int>(exps.size())) return nullptr;
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::shared_ptr<const StartingWeights>> memo;
  const std::lock_guard<std::mutex> lock(mutex);
  const auto key = std::make_pair(alpha, cells);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  if (memo.size() >= 16) memo.clear();
  return memo[key] = build_starting_weights(alpha, cells);
}

namespace {

enum class ExactFactor { Kernel, Weight, Combined };

struct WeightedProblem {
  double beta;
  double d;
  double eta;
  double t;
  FunctionRef<double(double)> g;
};

constexpr double kGaussNode = 0.77459666924148337704;  // sqrt(3/5)

// Split of the integrand on a cell: |s - sigma|^(e-1) is integrated exactly,
// rest(s) carries everything else.
struct Split {
  double sigma;
  double e;
};

Split split_of(const WeightedProblem& p, ExactFactor which, SingularEnd end, double a, double b) {
  const double sigma = end == SingularEnd::Lo ? a : b;
  switch (which) {
    case ExactFactor::Kernel: return {sigma, p.beta};
    case ExactFactor::Weight: return {sigma, 1.0 - p.d};
    case ExactFactor::Combined: return {sigma, p.beta - p.d};
  }
  return {sigma, 1.0};
}

double rest(const WeightedProblem& p, ExactFactor which, double s) {
  switch (which) {
    case ExactFactor::Kernel:
      return (p.d == 0.0 ? 1.0 : std::pow(std::abs(s - p.eta), -p.d)) * p.g(s);
    case ExactFactor::Weight:
      return std::pow(p.t - s, p.beta - 1.0) * p.g(s);
    case ExactFactor::Combined:
      return p.g(s);
  }
  return 0.0;
}

// int_{v0}^{v1} v^(a-1) dv
double power_integral(double v0, double v1, double a) { return pow_diff(v1, v0, a) / a; }

// Product rule on [x0, x1]: the singular factor |s - sigma|^(e-1) times the
// quadratic interpolant of rest() through the three Gauss-Legendre points.
double product_cell(const WeightedProblem& p, ExactFactor which, Split sp, double x0, double x1) {
  const double half = 0.5 * (x1 - x0);
  const double xm = 0.5 * (x0 + x1);
  const bool lo_side = sp.sigma <= x0;
  const double v0 = lo_side ? x0 - sp.sigma : sp.sigma - x1;
  const double v1 = lo_side ? x1 - sp.sigma : sp.sigma - x0;
  const double vm = 0.5 * (v0 + v1);
  const double P0 = power_integral(v0, v1, sp.e);
  const double P1 = power_integral(v0, v1, sp.e + 1.0);
  const double P2 = power_integral(v0, v1, sp.e + 2.0);
  // moments of y^k, y = (s - xm) / half; s - xm = +-(v - vm)
  const double sign = lo_side ? 1.0 : -1.0;
  const double m0 = P0;
  const double m1 = sign * (P1 - vm * P0) / half;
  const double m2 = (P2 - 2.0 * vm * P1 + vm * vm * P0) / (half * half);
  const double q = kGaussNode;
  const double w_minus = (m2 - q * m1) / (2.0 * q * q);
  const double w_centre = m0 - m2 / (q * q);
  const double w_plus = (m2 + q * m1) / (2.0 * q * q);
  return w_minus * rest(p, which, xm - half * q) + w_centre * rest(p, which, xm) +
         w_plus * rest(p, which, xm + half * q);
}

// 3-point Gauss-Legendre on the full integrand, for cells where the singular
// factor is smooth.
double gauss_cell(const WeightedProblem& p, double x0, double x1) {
  static constexpr double kOuter = 5.0 / 9.0;
  static constexpr double kCentre = 8.0 / 9.0;
  const double half = 0.5 * (x1 - x0);
  const double xm = 0.5 * (x0 + x1);
  auto integrand = [&](double s) {
    const double weight = p.d == 0.0 ? 1.0 : std::pow(std::abs(s - p.eta), -p.d);
    return std::pow(p.t - s, p.beta - 1.0) * weight * p.g(s);
  };
  return half * (kOuter * integrand(xm - half * kGaussNode) + kCentre * integrand(xm) +
                 kOuter * integrand(xm + half * kGaussNode));
}

// Cells closer to the singular end than this many cell widths use the product rule.
constexpr double kNearSingular = 8.0;

double integrate_segment(const WeightedProblem& p, ExactFactor which, double a, double b,
                         SingularEnd end, int cells, double grading, bool top_level = true) {
  if (!(b > a)) return 0.0;
  const auto x = GradedMesh(a, b, cells, grading, end).nodes();
  const Split sp = split_of(p, which, end, a, b);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const bool adjacent = (end == SingularEnd::Lo && k == 0) ||
                          (end == SingularEnd::Hi && k + 2 == x.size());
    const double width = x[k + 1] - x[k];
    const double distance = end == SingularEnd::Lo ? x[k] - a : b - x[k + 1];
    if (adjacent && top_level) {
      sum += integrate_segment(p, which, x[k], x[k + 1], end, kSingularSubcells, grading, false);
    } else if (end != SingularEnd::None && distance < kNearSingular * width) {
      sum += product_cell(p, which, sp, x[k], x[k + 1]);
    } else {
      sum += gauss_cell(p, x[k], x[k + 1]);
    }
  }
  return sum;
}

}  // namespace

double rl_weighted_integral(double beta, double d, double singular_point, FunctionRef<double(double)> g,
                            double t, const GradedMesh& mesh) {
  if (!(beta > 0.0)) throw DomainError("rl_weighted_integral: beta must be positive");
  if (!(d >= 0.0) || !(d < 1.0)) {
    std::ostringstream msg;
    msg << "rl_weighted_integral: weight exponent d=" << d << " must lie in [0, 1)";
    throw DomainError(msg.str());
  }
  const double lo = mesh.lo();
  if (t < lo) throw DomainError("rl_weighted_integral: upper limit below lower limit");
  if (t == lo) return 0.0;

  const int n = mesh.cells();
  const double grading = mesh.grading();
  const WeightedProblem p{beta, d, singular_point, t, g};
  const double eta = singular_point;
  double sum = 0.0;

  if (d == 0.0 || eta > t) {
    sum = integrate_segment(p, ExactFactor::Kernel, lo, t, SingularEnd::Hi, n, grading);
  } else if (eta == t) {
    if (beta <= d) {
      throw SingularityError("rl_weighted_integral: upper limit coincides with the singular point and beta <= d");
    }
    sum = integrate_segment(p, ExactFactor::Combined, lo, t, SingularEnd::Hi, n, grading);
  } else if (eta <= lo) {
    const double mid = 0.5 * (lo + t);
    const SingularEnd first_end = eta == lo ? SingularEnd::Lo : SingularEnd::None;
    sum = integrate_segment(p, ExactFactor::Weight, lo, mid, first_end, n, grading) +
          integrate_segment(p, ExactFactor::Kernel, mid, t, SingularEnd::Hi, n, grading);
  } else {
    const double mid = 0.5 * (eta + t);
    sum = integrate_segment(p, ExactFactor::Weight, lo, eta, SingularEnd::Hi, n, grading) +
          integrate_segment(p, ExactFactor::Weight, eta, mid, SingularEnd::Lo, n, grading) +
          integrate_segment(p, ExactFactor::Kernel, mid, t, SingularEnd::Hi, n, grading);
  }
  return sum / std::tgamma(beta);
}

double caputo_l1(double alpha, const SampledFunction& u, double t) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw DomainError("caputo_l1: alpha must lie in (0, 1)");
  const auto x = u.nodes();
  const auto v = u.values();
  if (x.size() < 2) throw DomainError("caputo_l1: need at least two nodes");
  const double step = x[1] - x[0];
  if (std::abs(x[0]) > 1e-12 * step) throw DomainError("caputo_l1: grid must start at 0");
  for (std::size_t j = 1; j < x.size(); ++j) {
    if (std::abs((x[j] - x[j - 1]) - step) > 1e-9 * step) {
      throw DomainError("caputo_l1: grid must be uniform");
    }
  }
  const double pos = t / step;
  const auto n = static_cast<std::size_t>(std::llround(pos));
  if (std::abs(pos - static_cast<double>(n)) > 1e-9 || n >= x.size()) {
    throw DomainError("caputo_l1: t must be a grid node");
  }
  const double e = 1.0 - alpha;
  long double sum = 0.0L;
  for (std::size_t j = 0; j < n; ++j) {
    const auto m = static_cast<long double>(n - j - 1);
    const long double bm = std::pow(m + 1, static_cast<long double>(e)) - std::pow(m, static_cast<long double>(e));
    sum += bm * (static_cast<long double>(v[j + 1]) - v[j]);
  }
  return static_cast<double>(sum / (std::tgamma(2.0 - alpha) * std::pow(step, alpha)));
}

double lq_norm(FunctionRef<double(double)> m, double q, double a, double b) {
  if (!(q >= 0.0) || !(q < 1.0)) throw DomainError("lq_norm: q must lie in [0, 1)");
  if (!(b >= a)) throw DomainError("lq_norm: interval reversed");
  if (b == a) return 0.0;
  constexpr int kCells = 2048;
  if (q == 0.0) {
    double sup = 0.0;
    for (int k = 0; k < 2 * kCells; ++k) {
      sup = std::max(sup, std::abs(m(a + (b - a) * (k + 0.5) / (2 * kCells))));
    }
    for (double endpoint : {a, b}) {
      try {
        sup = std::max(sup, std::abs(m(endpoint)));
      } catch (const SingularityError&) {
        // an endpoint singularity is visible in the interior samples
      }
    }
    return sup;
  }
  // Two-point Gauss-Legendre on a mesh graded toward both ends; never samples
  // the endpoints, where m may be integrably singular.
  const double power = 1.0 / q;
  const double g = 0.5 / std::sqrt(3.0);
  double integral = 0.0;
  const double mid = 0.5 * (a + b);
  for (const auto& mesh : {GradedMesh(a, mid, kCells, 2.0, SingularEnd::Lo),
                           GradedMesh(mid, b, kCells, 2.0, SingularEnd::Hi)}) {
    const auto x = mesh.nodes();
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
      const double c = 0.5 * (x[k] + x[k + 1]);
      const double hw = x[k + 1] - x[k];
      integral += 0.5 * hw * (std::pow(std::abs(m(c - g * hw)), power) + std::pow(std::abs(m(c + g * hw)), power));
    }
  }
  return std::pow(integral, q);
}

double holder_kernel_bound(double alpha, double q, double length) {
  if (!(q >= 0.0) || !(q < alpha) || !(q < 1.0)) {
    std::ostringstream msg;
    msg << "holder_kernel_bound: need 0 <= q < min(alpha, 1) (q=" << q << ", alpha=" << alpha << ")";
    throw DomainError(msg.str());
  }
  if (!(length >= 0.0)) throw DomainError("holder_kernel_bound: negative length");
  return std::pow((1.0 - q) / (alpha - q), 1.0 - q) * std::pow(length, alpha - q);
}

}  // namespace fdelay
