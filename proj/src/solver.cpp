#include "fdelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fdelay/error.hpp"
#include "fdelay/fracops.hpp"
#include "fdelay/kernels.hpp"

namespace fdelay {

namespace {

template <class Fn>
double evaluate_at_node(Fn&& fn, int k, double t) {
  auto annotate = [&](const Error& e) {
    std::ostringstream msg;
    msg << "apply_J: node " << k << " (t=" << t << "): " << e.what();
    return msg.str();
  };
  try {
    return fn();
  } catch (const SingularityError& e) {
    throw SingularityError(annotate(e));
  } catch (const DomainError& e) {
    throw DomainError(annotate(e));
  } catch (const OverflowError& e) {
    throw OverflowError(annotate(e));
  } catch (const Error& e) {
    throw Error(annotate(e));
  }
}

double rhs_at(const DelayIVP& ivp, const SolutionGrid& u, double t) {
  return u.with_segment(t, [&](const Segment& seg) { return eval_rhs(ivp.f, t, seg); });
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

SolutionGrid::SolutionGrid(HistorySpec history, double h, double T, std::vector<double> values)
    : history_(std::move(history)), h_(h), T_(T), values_(std::move(values)) {
  if (values_.size() < 2) throw DomainError("SolutionGrid: need at least one step");
  if (!(h > 0.0) || !(T > 0.0)) throw DomainError("SolutionGrid: h and T must be positive");
  step_ = T_ / static_cast<double>(values_.size() - 1);
}

double SolutionGrid::at(double t) const {
  if (t < 0.0) {
    if (t < -h_ * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "SolutionGrid: t=" << t << " before the history interval";
      throw DomainError(msg.str());
    }
    return history_.at(std::max(t, -h_));
  }
  if (t > T_ * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "SolutionGrid: t=" << t << " beyond the horizon " << T_;
    throw DomainError(msg.str());
  }
  const double pos = t / step_;
  const int n = n_steps();
  const int k = std::min(static_cast<int>(pos), n - 1);
  const double w = std::min(pos - k, 1.0);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

void SolverConfig::validate() const {
  if (n_steps < 1) throw DomainError("solver: n_steps must be >= 1");
  if (!(tol > 0.0)) throw DomainError("solver: tol must be positive");
  if (max_iter < 1) throw DomainError("solver: max_iter must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("solver: damping must lie in (0, 1]");
}

double taylor_head(const DelayIVP& ivp, double t) {
  const auto& d = ivp.phi.derivatives_at_zero();
  double sum = 0.0;
  double power = 1.0;  // t^i / i!
  for (std::size_t i = 0; i < d.size(); ++i) {
    sum += power * d[i];
    power *= t / static_cast<double>(i + 1);
  }
  return sum;
}

SolutionGrid initial_iterate(const DelayIVP& ivp, int n_steps) {
  if (n_steps < 1) throw DomainError("initial_iterate: n_steps must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(n_steps) + 1);
  const double step = ivp.T / n_steps;
  for (int k = 0; k <= n_steps; ++k) values[k] = taylor_head(ivp, k * step);
  return {ivp.phi, ivp.h, ivp.T, std::move(values)};
}

SolutionGrid apply_J(const DelayIVP& ivp, const SolutionGrid& current, Execution exec) {
  const int n = current.n_steps();
  const double step = current.step();
  const ProductWeights weights(ivp.alpha, step, n);

  // Cells touching a declared singular point of f use the midpoint value.
  std::vector<std::uint8_t> midpoint_cell;
  const auto singular = ivp.f.singular_points();
  if (!singular.empty()) {
    midpoint_cell.assign(static_cast<std::size_t>(n), 0);
    const double tol = 1e-12 * std::max(1.0, ivp.T);
    for (int j = 0; j < n; ++j) {
      const double a = j * step;
      const double b = (j + 1) * step;
      for (double eta : singular) {
        if (eta >= a - tol && eta <= b + tol) midpoint_cell[j] = 1;
      }
    }
  }
  auto node_used = [&](int k) {
    if (midpoint_cell.empty()) return true;
    return (k < n && !midpoint_cell[k]) || (k > 0 && !midpoint_cell[k - 1]);
  };

  std::vector<double> f_nodes(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> f_mid(midpoint_cell.empty() ? 0 : static_cast<std::size_t>(n), 0.0);
  parallel_for(n + 1, exec, [&](std::ptrdiff_t k) {
    const int kk = static_cast<int>(k);
    const double t = kk * step;
    if (node_used(kk)) f_nodes[k] = evaluate_at_node([&] { return rhs_at(ivp, current, t); }, kk, t);
    if (kk < n && !midpoint_cell.empty() && midpoint_cell[k]) {
      const double tm = t + 0.5 * step;
      f_mid[k] = evaluate_at_node([&] { return rhs_at(ivp, current, tm); }, kk, tm);
    }
  });

  std::vector<double> integral(static_cast<std::size_t>(n) + 1);
  kernels::fractional_convolution(exec, weights, f_nodes, f_mid, midpoint_cell, integral);

  // Starting-weight correction for the t^(j alpha) behaviour at t = 0, used
  // when the cells it touches are all trapezoidal.
  if (const auto sw = starting_weights(ivp.alpha, n)) {
    const bool applicable = midpoint_cell.empty() ||
                            std::none_of(midpoint_cell.begin(), midpoint_cell.begin() + std::min(sw->nodes, n),
                                         [](std::uint8_t c) { return c != 0; });
    if (applicable) {
      const double scale = std::pow(step, ivp.alpha);
      for (int k = 1; k <= n; ++k) {
        double corr = 0.0;
        for (int j = 0; j < sw->nodes; ++j) corr += sw->at(k, j) * f_nodes[j];
        integral[k] += scale * corr;
      }
    }
  }

  std::vector<double> values(integral.size());
  for (int k = 0; k <= n; ++k) values[k] = taylor_head(ivp, k * step) + integral[k];
  return {current.history(), current.delay(), current.horizon(), std::move(values)};
}

std::pair<SolutionGrid, IterationReport> solve_picard(const DelayIVP& ivp, const SolverConfig& cfg) {
  cfg.validate();
  return solve_picard(ivp, cfg, initial_iterate(ivp, cfg.n_steps));
}

std::pair<SolutionGrid, IterationReport> solve_picard(const DelayIVP& ivp, const SolverConfig& cfg,
                                                      SolutionGrid start) {
  ivp.validate();
  cfg.validate();
  if (start.n_steps() != cfg.n_steps) throw DomainError("solve_picard: start grid does not match n_steps");
  IterationReport report;
  SolutionGrid x = std::move(start);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const SolutionGrid jx = apply_J(ivp, x, cfg.exec);
    std::vector<double> next(jx.values().size());
    for (std::size_t k = 0; k < next.size(); ++k) {
      next[k] = (1.0 - cfg.damping) * x.values()[k] + cfg.damping * jx.values()[k];
    }
    const double delta = sup_distance(next, x.values());
    report.iterations = it;
    report.deltas.push_back(delta);
    x = SolutionGrid(x.history(), x.delay(), x.horizon(), std::move(next));
    if (!std::isfinite(delta)) break;
    if (delta < cfg.tol) {
      report.converged = true;
      break;
    }
  }
  report.residual = std::isfinite(report.deltas.back()) ? fixed_point_defect(ivp, x, cfg.exec)
                                                        : std::numeric_limits<double>::infinity();
  return {std::move(x), std::move(report)};
}

double fixed_point_defect(const DelayIVP& ivp, const SolutionGrid& sol, Execution exec) {
  return sup_distance(sol.values(), apply_J(ivp, sol, exec).values());
}

double residual_check(const DelayIVP& ivp, const SolutionGrid& sol, double t_from) {
  if (!(ivp.alpha > 0.0 && ivp.alpha < 1.0)) {
    throw DomainError("residual_check: the L1 scheme needs 0 < alpha < 1; use fixed_point_defect instead");
  }
  const int n = sol.n_steps();
  std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) nodes[k] = sol.time(k);
  const SampledFunction u(nodes, sol.values());
  const auto singular = ivp.f.singular_points();
  const double tol = 1e-12 * std::max(1.0, ivp.T);
  double worst = 0.0;
  for (int k = 2; k <= n; ++k) {
    const double t = nodes[k];
    if (t < t_from) continue;
    if (std::any_of(singular.begin(), singular.end(), [&](double eta) { return std::abs(t - eta) <= tol; })) {
      continue;
    }
    const double lhs = caputo_l1(ivp.alpha, u, t);
    worst = std::max(worst, std::abs(lhs - rhs_at(ivp, sol, t)));
  }
  return worst;
}

SolutionGrid reference_solve(const DelayIVP& ivp, int refine, SolverConfig base) {
  if (refine < 2) throw DomainError("reference_solve: refine must be >= 2");
  base.n_steps *= refine;
  base.tol /= 10.0;
  return solve_picard(ivp, base).first;
}

}  // namespace fdelay
