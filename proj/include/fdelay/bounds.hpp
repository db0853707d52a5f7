#pragma once

// A-priori Mittag-Leffler envelopes for solutions under the piecewise growth
// condition, containment checks, and an empirical uniqueness probe.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdelay/mlf.hpp"
#include "fdelay/problem.hpp"
#include "fdelay/solver.hpp"

namespace fdelay {

struct EnvelopeProvenance {
  std::string formula;
  std::map<std::string, double> terms;  // named inputs of the formula
  double r_target = 0.0;                // before headroom scaling
  LambdaSearchSpec search;
  LambdaCertificate certificate;
};

/// 2 * D * E_{1, ml_second}(lambda * (t - shift)) on [t_lo, t_hi].
struct EnvelopePiece {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double D = 1.0;
  double lambda = 1.0;
  double ml_second = 1.0;
  double shift = 0.0;
  EnvelopeProvenance provenance;

  [[nodiscard]] double log_value(double t) const;
};

struct EnvelopeSpec {
  std::vector<EnvelopePiece> pieces;

  [[nodiscard]] double horizon() const { return pieces.empty() ? 0.0 : pieces.back().t_hi; }
};

struct BoundsOptions {
  int lambda_grid_points = 64;
  double lambda_max = 1024.0;
  // r targets are multiplied by this so the discrete check has slack.
  double headroom = 0.95;
  int phi_sup_points = 1024;
};

/// Constants D_i and rates lambda_i, processed left to right: a singular first
/// piece on [0, T_1], then for every later piece an interior part [T_{i-1}, eta_i]
/// and a shifted singular part [eta_i, T_i].
[[nodiscard]] EnvelopeSpec compute_constants(const DelayIVP& ivp, const GrowthSpec& spec,
                                             const BoundsOptions& opt = {});

/// Evaluable envelope. At a shared piece boundary the left piece is used.
class Envelope {
 public:
  explicit Envelope(EnvelopeSpec spec);

  [[nodiscard]] double log_at(double t) const;
  /// May be +inf when the envelope exceeds the double range.
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] const EnvelopeSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::size_t piece_index(double t) const;

 private:
  EnvelopeSpec spec_;
};

[[nodiscard]] Envelope build_envelope(const EnvelopeSpec& es);

struct EnvelopeReport {
  double max_ratio = 0.0;
  bool contained = true;
  std::optional<double> first_violation;
  std::vector<double> ratios;  // |u(t_k)| / envelope(t_k)
};

[[nodiscard]] EnvelopeReport verify_envelope(const SolutionGrid& sol, const EnvelopeSpec& es);

struct SeedOutcome {
  std::string label;
  bool converged = false;
  int iterations = 0;
  double final_delta = 0.0;
};

struct WeightedDeviation {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double w = 0.0;        // sup |x - y| / weight over the piece, max over pairs
  double argmax = 0.0;   // first grid point attaining w
};

struct UniquenessReport {
  std::vector<SeedOutcome> seeds;
  std::vector<double> pairwise_distances;  // row-major upper triangle
  std::vector<WeightedDeviation> weighted;
  double tolerance = 0.0;  // 10 * cfg.tol
  bool all_converged = false;
  bool unique_within_tol = false;
};

/// Runs Picard from `seeds` distinct first iterates (Taylor head, offsets of
/// +-10, oscillatory perturbations) and compares the fixed points. With a
/// Lipschitz spec the deviations are weighted by the per-piece Mittag-Leffler
/// weights; without one the weight is 1 on a single piece.
[[nodiscard]] UniquenessReport uniqueness_probe(const DelayIVP& ivp, const SolverConfig& cfg,
                                                int seeds, const LipschitzSpec* lipschitz = nullptr,
                                                const BoundsOptions& opt = {});

}  // namespace fdelay
