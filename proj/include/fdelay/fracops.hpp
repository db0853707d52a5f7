#pragma once

// Fractional-calculus numerics on sampled and evaluable functions.

#include <memory>
#include <span>
#include <vector>

#include "fdelay/function_ref.hpp"

namespace fdelay {

/// Values on strictly increasing nodes, read back by linear interpolation.
class SampledFunction {
 public:
  SampledFunction(std::vector<double> nodes, std::vector<double> values);

  /// Samples fn on n+1 equispaced nodes of [lo, hi].
  static SampledFunction uniform(double lo, double hi, int n, FunctionRef<double(double)> fn);

  [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] double at(double t) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

enum class SingularEnd { Lo, Hi, None };

/// Nodes of [lo, hi] clustered toward a singular end:
/// x_k = lo + (hi - lo) * (k/n)^grading for SingularEnd::Lo (mirrored for Hi,
/// equispaced for None).
class GradedMesh {
 public:
  GradedMesh(double lo, double hi, int n, double grading = 2.0, SingularEnd end = SingularEnd::None);

  [[nodiscard]] double lo() const noexcept { return lo_; }
  [[nodiscard]] double hi() const noexcept { return hi_; }
  [[nodiscard]] int cells() const noexcept { return n_; }
  [[nodiscard]] double grading() const noexcept { return grading_; }
  [[nodiscard]] SingularEnd singular_end() const noexcept { return end_; }
  [[nodiscard]] std::vector<double> nodes() const;

 private:
  double lo_;
  double hi_;
  int n_;
  double grading_;
  SingularEnd end_;
};

/// (1/Gamma(beta)) int_{x_0}^t (t-s)^(beta-1) f(s) ds with product-trapezoidal
/// weights: the kernel is integrated exactly against the piecewise-linear
/// interpolant of f. Exact for linear f.
[[nodiscard]] double rl_integral(double beta, const SampledFunction& f, double t);

/// rl_integral evaluated at every node of f.
[[nodiscard]] SampledFunction rl_integral_all(double beta, const SampledFunction& f);

/// Product-integration weights of the RL kernel on a uniform grid with step
/// `step`, indexed by the distance m = k - j - 1 between the target node t_k and
/// the cell [t_j, t_{j+1}]. Includes the 1/Gamma(beta) factor.
struct ProductWeights {
  ProductWeights(double beta, double step, int cells);

  std::vector<double> left;   // weight of f(t_j)
  std::vector<double> right;  // weight of f(t_{j+1})
  std::vector<double> mid;    // weight of f at the cell midpoint (rectangle rule)
};

/// Correction weights on the first nodes of the unit-step product-trapezoidal
/// rule so that it also integrates s^gamma exactly for every listed exponent.
/// Solutions of order-alpha equations behave like sums of t^(j*alpha) near 0,
/// which the plain rule resolves only to O(h^(2*alpha)).
struct StartingWeights {
  std::vector<double> exponents;
  int nodes = 0;               // corrections act on f(t_0) .. f(t_{nodes-1})
  std::vector<double> sigma;   // (cells + 1) rows of `nodes` entries, unit step

  [[nodiscard]] double at(int k, int j) const { return sigma[static_cast<std::size_t>(k * nodes + j)]; }
};

/// {0, alpha, 2 alpha, 3 alpha, 1} restricted to fractional exponents below
/// 0.95; empty for alpha >= 1.
[[nodiscard]] std::vector<double> starting_exponents(double alpha);

/// Memoized per (alpha, cells); nullptr when no correction applies.
[[nodiscard]] std::shared_ptr<const StartingWeights> starting_weights(double alpha, int cells);

/// Cells per segment and sub-cells in the cell adjacent to a singularity.
inline constexpr int kWeightedCells = 256;
inline constexpr int kSingularSubcells = 64;

/// (1/Gamma(beta)) int_lo^t (t-s)^(beta-1) |s - singular_point|^(-d) g(s) ds with
/// lo = mesh.lo(). The range is split so that each graded segment carries at
/// most one singular endpoint. Cells within a few widths of that endpoint
/// integrate its power exactly against the quadratic interpolant of the rest
/// through the three Gauss points; the cell touching it is first split into
/// kSingularSubcells graded sub-cells. Remaining cells use 3-point Gauss on the
/// whole integrand. g is never evaluated at singular_point or t. mesh supplies
/// the lower limit, the cell count per segment and the grading exponent.
[[nodiscard]] double rl_weighted_integral(double beta, double d, double singular_point,
                                          FunctionRef<double(double)> g, double t,
                                          const GradedMesh& mesh);

/// L1 approximation of the Caputo derivative of order alpha in (0,1) at node t
/// of a uniform grid starting at 0.
[[nodiscard]] double caputo_l1(double alpha, const SampledFunction& u, double t);

/// (int_a^b |m|^(1/q))^q for q in (0,1); sup |m| over a sampling grid for q = 0.
[[nodiscard]] double lq_norm(FunctionRef<double(double)> m, double q, double a, double b);

/// ((1-q)/(alpha-q))^(1-q) * length^(alpha-q), the Hoelder bound of
/// (int_0^L (L-s)^((alpha-1)/(1-q)) ds)^(1-q).
[[nodiscard]] double holder_kernel_bound(double alpha, double q, double length);

}  // namespace fdelay
