// Sampling falsifiers for the growth and Lipschitz conditions.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fdelay/error.hpp"
#include "fdelay/problem.hpp"

namespace fdelay {

namespace {

constexpr std::size_t kMaxCounterexamples = 10;
constexpr double kMaxSampleNorm = 10.0;

// scale * sum_k c_k x^k with x = theta / h in [-1, 0]
struct PolySegment {
  std::array<double, 4> c{};
  double scale = 1.0;
  double h = 1.0;

  [[nodiscard]] double operator()(double theta) const {
    const double x = theta / h;
    return scale * (c[0] + x * (c[1] + x * (c[2] + x * c[3])));
  }

  // max |d/dtheta| over [-h, 0]: endpoints and the vertex of the quadratic p'.
  [[nodiscard]] double lipschitz() const {
    auto dp = [&](double x) { return std::abs(c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x); };
    double L = std::max(dp(-1.0), dp(0.0));
    if (c[3] != 0.0) {
      const double v = -c[2] / (3.0 * c[3]);
      if (v > -1.0 && v < 0.0) L = std::max(L, dp(v));
    }
    return std::abs(scale) * L / h;
  }

  [[nodiscard]] double grid_sup() const {
    auto read = [this](double theta) { return (*this)(theta); };
    return segment_sup(Segment{read, h});
  }

  // Upper bound of the true sup norm: grid sup plus the interpolation gap.
  [[nodiscard]] double norm_bound() const {
    return grid_sup() + lipschitz() * h / (kSupGridPoints - 1);
  }
};

class SegmentSampler {
 public:
  SegmentSampler(double h, std::uint64_t seed) : h_(h), rng_(seed) {}

  PolySegment draw() {
    PolySegment s;
    s.h = h_;
    const int degree = std::uniform_int_distribution<int>(0, 3)(rng_);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int k = 0; k <= degree; ++k) s.c[k] = coef(rng_);
    double sup = s.grid_sup();
    if (sup < 1e-12) {
      s.c = {1.0, 0.0, 0.0, 0.0};
      sup = 1.0;
    }
    // Occasionally pin the extreme norms.
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    const double target = u < 0.05 ? kMaxSampleNorm : u < 0.07 ? 0.0 : kMaxSampleNorm * (u - 0.07) / 0.93;
    s.scale = target / sup;
    return s;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin() { return std::bernoulli_distribution(0.5)(rng_); }

 private:
  double h_;
  std::mt19937_64 rng_;
};

bool near_any(double t, const std::vector<double>& points, double tol) {
  return std::any_of(points.begin(), points.end(), [&](double p) { return std::abs(t - p) < tol; });
}

double sample_time(SegmentSampler& sampler, double lo, double hi, const std::vector<double>& avoid, double tol) {
  for (;;) {
    const double t = sampler.uniform(lo, hi);
    if (t > 0.0 && !near_any(t, avoid, tol)) return t;
  }
}

bool violates(double lhs, double rhs) { return lhs > rhs * (1.0 + 1e-12) + 1e-12; }

void record(ConditionReport& report, const Counterexample& ce) {
  report.passed = false;
  ++report.violations;
  if (report.counterexamples.size() < kMaxCounterexamples) report.counterexamples.push_back(ce);
}

template <class Spec>
std::vector<double> avoid_points(const DelayIVP& ivp, const Spec& spec, std::size_t piece) {
  std::vector<double> avoid = ivp.f.singular_points();
  avoid.push_back(spec.eta(piece));
  return avoid;
}

}  // namespace

ConditionReport check_growth(const DelayIVP& ivp, const GrowthSpec& spec, std::size_t samples,
                             std::uint64_t seed) {
  ivp.validate();
  spec.validate(ivp);
  ConditionReport report;
  report.samples = samples;
  report.seed = seed;
  SegmentSampler sampler(ivp.h, seed);
  const double tol = 1e-9 * std::max(1.0, ivp.T);
  for (std::size_t n = 0; n < samples; ++n) {
    const std::size_t i = n % spec.pieces.size();
    const auto& pc = spec.pieces[i];
    std::vector<double> avoid = avoid_points(ivp, spec, i);
    const auto m_sing = pc.m.singular_points();
    avoid.insert(avoid.end(), m_sing.begin(), m_sing.end());
    const double t = sample_time(sampler, spec.t_begin(i), pc.t_end, avoid, tol);
    const PolySegment u = sampler.draw();

    auto read = [&u](double theta) { return u(theta); };
    const double lhs = std::abs(eval_rhs(ivp.f, t, Segment{read, ivp.h}));
    const double norm = u.norm_bound();
    const double rhs = pc.b * std::pow(std::abs(t - spec.eta(i)), -pc.a) * std::pow(norm, pc.p) + pc.m.eval(t);
    if (violates(lhs, rhs)) record(report, Counterexample{t, u.grid_sup(), 0.0, lhs, rhs});
  }
  return report;
}

ConditionReport check_lipschitz(const DelayIVP& ivp, const LipschitzSpec& spec, std::size_t samples,
                                std::uint64_t seed) {
  ivp.validate();
  spec.validate(ivp);
  ConditionReport report;
  report.samples = samples;
  report.seed = seed;
  SegmentSampler sampler(ivp.h, seed);
  const double tol = 1e-9 * std::max(1.0, ivp.T);
  for (std::size_t n = 0; n < samples; ++n) {
    const std::size_t i = n % spec.pieces.size();
    const auto& pc = spec.pieces[i];
    const double t = sample_time(sampler, spec.t_begin(i), pc.t_end, avoid_points(ivp, spec, i), tol);
    const PolySegment u = sampler.draw();
    PolySegment v;
    if (sampler.coin()) {
      v = u;
      v.scale = u.scale * sampler.uniform(-1.0, 1.0);
    } else {
      v = sampler.draw();
    }
    PolySegment diff;
    diff.h = ivp.h;
    for (std::size_t k = 0; k < 4; ++k) diff.c[k] = u.scale * u.c[k] - v.scale * v.c[k];

    auto read_u = [&u](double theta) { return u(theta); };
    auto read_v = [&v](double theta) { return v(theta); };
    const double fu = eval_rhs(ivp.f, t, Segment{read_u, ivp.h});
    const double fv = eval_rhs(ivp.f, t, Segment{read_v, ivp.h});
    const double lhs = std::abs(fu - fv);
    const double rhs = pc.b * std::pow(std::abs(t - spec.eta(i)), -pc.a) * diff.norm_bound();
    if (violates(lhs, rhs)) record(report, Counterexample{t, u.grid_sup(), v.grid_sup(), lhs, rhs});
  }
  return report;
}

}  // namespace fdelay
