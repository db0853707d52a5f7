#pragma once

// Picard iteration on the equivalent Volterra integral equation
//   u(t) = sum_{i<ceil(alpha)} t^i/i! phi^(i)(0)
//          + (1/Gamma(alpha)) int_0^t (t-s)^(alpha-1) f(s, u_s) ds.

#include <utility>
#include <vector>

#include "fdelay/parallel.hpp"
#include "fdelay/problem.hpp"

namespace fdelay {

/// u on [-h, T]: phi on [-h, 0), piecewise-linear through values at k*step.
class SolutionGrid {
 public:
  SolutionGrid(HistorySpec history, double h, double T, std::vector<double> values);

  [[nodiscard]] double at(double t) const;
  [[nodiscard]] double time(int k) const { return k * step_; }
  [[nodiscard]] double step() const noexcept { return step_; }
  [[nodiscard]] int n_steps() const noexcept { return static_cast<int>(values_.size()) - 1; }
  [[nodiscard]] double horizon() const noexcept { return T_; }
  [[nodiscard]] double delay() const noexcept { return h_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] const HistorySpec& history() const noexcept { return history_; }

  /// The state segment u_t on [-h, 0].
  template <class Fn>
  auto with_segment(double t, Fn&& fn) const {
    auto read = [this, t](double theta) { return at(t + theta); };
    return fn(Segment{read, h_});
  }

 private:
  HistorySpec history_;
  double h_;
  double T_;
  double step_;
  std::vector<double> values_;
};

struct SolverConfig {
  int n_steps = 512;
  double tol = 1e-8;
  int max_iter = 200;
  double damping = 1.0;
  Execution exec = Execution::Parallel;

  void validate() const;
};

struct IterationReport {
  int iterations = 0;
  std::vector<double> deltas;  // ||x_{k+1} - x_k|| on [0, T]
  bool converged = false;
  double residual = 0.0;  // ||x - Jx|| estimate of the returned iterate
};

[[nodiscard]] double taylor_head(const DelayIVP& ivp, double t);

/// x0 = Taylor head on the uniform grid.
[[nodiscard]] SolutionGrid initial_iterate(const DelayIVP& ivp, int n_steps);

/// One application of the integral operator. Cells that touch a declared
/// singular point of f use the product-rectangle rule at the cell midpoint;
/// all other cells use product-trapezoidal weights. For 0 < alpha < 1 and no
/// midpoint cell near t = 0, starting weights on the first nodes absorb the
/// t^(j alpha) behaviour of the solution.
[[nodiscard]] SolutionGrid apply_J(const DelayIVP& ivp, const SolutionGrid& current,
                                   Execution exec = Execution::Parallel);

[[nodiscard]] std::pair<SolutionGrid, IterationReport> solve_picard(const DelayIVP& ivp,
                                                                    const SolverConfig& cfg);
/// Picard iteration from a caller-supplied first iterate.
[[nodiscard]] std::pair<SolutionGrid, IterationReport> solve_picard(const DelayIVP& ivp,
                                                                    const SolverConfig& cfg,
                                                                    SolutionGrid start);

/// ||sol - J sol|| over the grid nodes in [0, T].
[[nodiscard]] double fixed_point_defect(const DelayIVP& ivp, const SolutionGrid& sol,
                                        Execution exec = Execution::Parallel);

/// max over nodes k >= 2 (skipping singular points) of |L1 Caputo(u)(t_k) - f(t_k, u_{t_k})|.
/// Only for 0 < alpha < 1. Nodes before t_from are skipped as well: near t = 0
/// a t^alpha-type solution gives the L1 scheme an error at node k that depends
/// on k only, so the unrestricted maximum does not shrink under refinement.
[[nodiscard]] double residual_check(const DelayIVP& ivp, const SolutionGrid& sol, double t_from = 0.0);

/// solve_picard with refine * base.n_steps steps and base.tol / 10.
[[nodiscard]] SolutionGrid reference_solve(const DelayIVP& ivp, int refine,
                                           SolverConfig base = {});

}  // namespace fdelay
