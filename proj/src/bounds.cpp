#include "fdelay/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fdelay/error.hpp"
#include "fdelay/fracops.hpp"

namespace fdelay {

namespace {

constexpr double kBoundaryTol = 1e-12;

LambdaCertificate search(const LambdaSearchSpec& spec, const std::string& where) {
  try {
    return find_lambda(spec);
  } catch (const LambdaSearchExhausted& e) {
    throw LambdaSearchExhausted(where + ": " + e.what(), e.last_certificate());
  }
}

LambdaSearchSpec make_search(double d, double beta, double r, double horizon, const BoundsOptions& opt) {
  LambdaSearchSpec s;
  s.c = 1.0;
  s.d = d;
  s.beta = beta;
  s.r = r * opt.headroom;
  s.horizon = horizon;
  s.grid_points = opt.lambda_grid_points;
  s.lambda_max = opt.lambda_max;
  return s;
}

// (1/Gamma(alpha)) * Hoelder kernel bound * ||m||_{1/q} on [lo, hi].
double forcing_term(double alpha, const GrowthPiece& piece, double lo, double hi, double length,
                    std::map<std::string, double>& terms, const std::string& tag) {
  const auto m = [&](double t) { return piece.m.eval(t); };
  const double norm = lq_norm(m, piece.q, lo, hi);
  const double hk = holder_kernel_bound(alpha, piece.q, length);
  terms["m_norm" + tag] = norm;
  terms["holder" + tag] = hk;
  return hk * norm / std::tgamma(alpha);
}

double checked(double D, const std::string& where) {
  if (!std::isfinite(D)) throw OverflowError(where + ": envelope constant exceeds the double range");
  return D;
}

double log_ml(double second, double x) { return ml_eval_log(MLParams{1.0, second}, std::max(x, 0.0)); }

}  // namespace

double EnvelopePiece::log_value(double t) const {
  return std::log(2.0 * D) + log_ml(ml_second, lambda * (t - shift));
}

EnvelopeSpec compute_constants(const DelayIVP& ivp, const GrowthSpec& spec, const BoundsOptions& opt) {
  ivp.validate();
  spec.validate(ivp);
  const double alpha = ivp.alpha;
  EnvelopeSpec es;

  // Singular piece at t = 0.
  {
    const GrowthPiece& g = spec.pieces.front();
    const double T1 = g.t_end;
    EnvelopePiece p;
    p.t_lo = 0.0;
    p.t_hi = T1;
    p.ml_second = 1.0 - g.a;
    p.shift = 0.0;
    auto& terms = p.provenance.terms;
    const double phi_sup = ivp.phi.sup_norm(ivp.h, opt.phi_sup_points);
    double head_sup = 0.0;
    double power = 1.0;
    const auto& derivs = ivp.phi.derivatives_at_zero();
    for (std::size_t i = 0; i < derivs.size(); ++i) {
      head_sup += power * std::abs(derivs[i]);
      power *= T1 / static_cast<double>(i + 1);
    }
    const double forcing = forcing_term(alpha, g, 0.0, T1, T1, terms, "");
    terms["phi_sup"] = phi_sup;
    terms["head_sup"] = head_sup;
    terms["gamma_1_minus_a"] = std::tgamma(1.0 - g.a);
    p.D = checked(std::tgamma(1.0 - g.a) * std::max({1.0, phi_sup, head_sup + forcing}), "piece 1");
    p.provenance.formula = "D = Gamma(1-a) * max{1, |phi|, head_sup + holder * |m|_{1/q} / Gamma(alpha)}";
    p.provenance.r_target = 1.0 / (2.0 * g.b);
    p.provenance.search = make_search(g.a, alpha, p.provenance.r_target, T1, opt);
    p.provenance.certificate = search(p.provenance.search, "piece 1");
    p.lambda = p.provenance.certificate.lambda;
    es.pieces.push_back(std::move(p));
  }

  for (std::size_t i = 1; i < spec.pieces.size(); ++i) {
    const GrowthPiece& g = spec.pieces[i];
    const double lo = spec.t_begin(i);
    const double eta = spec.eta(i);
    const double hi = g.t_end;
    const std::string label = "piece " + std::to_string(i + 1);
    const EnvelopePiece& prev = es.pieces.back();
    const double log_prev_end = prev.log_value(prev.t_hi);

    // Interior part [lo, eta]: unshifted E_{1,1}, chained from the previous endpoint.
    EnvelopePiece A;
    A.t_lo = lo;
    A.t_hi = eta;
    A.ml_second = 1.0;
    A.shift = 0.0;
    {
      auto& terms = A.provenance.terms;
      const double prev_end = std::exp(log_prev_end);
      const double forcing = forcing_term(alpha, g, lo, eta, eta, terms, "");
      terms["previous_endpoint"] = prev_end;
      A.D = checked(prev_end + forcing, label + " interior");
      A.provenance.formula = "D = previous envelope endpoint + holder * |m|_{1/q} / Gamma(alpha)";
      A.provenance.r_target = std::tgamma(alpha) / (2.0 * g.b * std::tgamma(alpha - g.a));
      A.provenance.search = make_search(0.0, alpha - g.a, A.provenance.r_target, eta, opt);
      A.provenance.certificate = search(A.provenance.search, label + " interior");
      A.lambda = A.provenance.certificate.lambda;
    }

    // Singular part [eta, hi]: E_{1,1-a} shifted to eta.
    EnvelopePiece B;
    B.t_lo = eta;
    B.t_hi = hi;
    B.ml_second = 1.0 - g.a;
    B.shift = eta;
    {
      auto& terms = B.provenance.terms;
      const double interior_end = 2.0 * A.D * std::exp(log_ml(1.0, A.lambda * eta));
      const double forcing = forcing_term(alpha, g, eta, hi, hi - eta, terms, "");
      terms["interior_endpoint"] = interior_end;
      terms["gamma_1_minus_a"] = std::tgamma(1.0 - g.a);
      B.D = checked(std::tgamma(1.0 - g.a) * (interior_end + forcing), label + " singular");
      B.provenance.formula =
          "D = Gamma(1-a) * [2 D_interior E_{1,1}(lambda_interior eta) + holder * |m|_{1/q} / Gamma(alpha)]";
      B.provenance.r_target = 1.0 / (2.0 * g.b);
      B.provenance.search = make_search(g.a, alpha, B.provenance.r_target, hi - eta, opt);
      B.provenance.certificate = search(B.provenance.search, label + " singular");
      B.lambda = B.provenance.certificate.lambda;
    }
    es.pieces.push_back(std::move(A));
    es.pieces.push_back(std::move(B));
  }
  return es;
}

Envelope::Envelope(EnvelopeSpec spec) : spec_(std::move(spec)) {
  if (spec_.pieces.empty()) throw DomainError("envelope: no pieces");
  for (const auto& p : spec_.pieces) {
    if (!(p.D > 0.0) || !(p.lambda > 0.0) || !(p.t_hi > p.t_lo)) {
      throw DomainError("envelope: pieces need D > 0, lambda > 0 and a non-empty interval");
    }
  }
}

std::size_t Envelope::piece_index(double t) const {
  for (std::size_t i = 0; i < spec_.pieces.size(); ++i) {
    if (t <= spec_.pieces[i].t_hi * (1.0 + kBoundaryTol)) return i;
  }
  return spec_.pieces.size() - 1;
}

double Envelope::log_at(double t) const { return spec_.pieces[piece_index(t)].log_value(t); }

double Envelope::operator()(double t) const { return std::exp(log_at(t)); }

Envelope build_envelope(const EnvelopeSpec& es) { return Envelope(es); }

EnvelopeReport verify_envelope(const SolutionGrid& sol, const EnvelopeSpec& es) {
  const Envelope env(es);
  if (std::abs(es.horizon() - sol.horizon()) > kBoundaryTol * std::max(1.0, sol.horizon())) {
    throw DomainError("verify_envelope: envelope and solution horizons differ");
  }
  EnvelopeReport report;
  const auto& u = sol.values();
  report.ratios.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double t = sol.time(static_cast<int>(k));
    const double mag = std::abs(u[k]);
    const double ratio = mag == 0.0 ? 0.0 : std::exp(std::log(mag) - env.log_at(t));
    report.ratios[k] = ratio;
    report.max_ratio = std::max(report.max_ratio, ratio);
    if (!(ratio < 1.0) && !report.first_violation) report.first_violation = t;
  }
  report.contained = !report.first_violation.has_value();
  return report;
}

namespace {

struct WeightPiece {
  double t_lo;
  double t_hi;
  double ml_second;
  double lambda;
  double shift;
};

std::vector<WeightPiece> lipschitz_weights(const DelayIVP& ivp, const LipschitzSpec& spec,
                                           const BoundsOptions& opt) {
  spec.validate(ivp);
  const double alpha = ivp.alpha;
  std::vector<WeightPiece> out;
  const auto& first = spec.pieces.front();
  const auto c1 = search(make_search(first.a, alpha, 1.0 / first.b, first.t_end, opt), "lipschitz piece 1");
  out.push_back({0.0, first.t_end, 1.0 - first.a, c1.lambda, 0.0});
  for (std::size_t i = 1; i < spec.pieces.size(); ++i) {
    const auto& p = spec.pieces[i];
    const double lo = spec.t_begin(i);
    const double eta = spec.eta(i);
    const std::string label = "lipschitz piece " + std::to_string(i + 1);
    const double rA = std::tgamma(alpha) / (p.b * std::tgamma(alpha - p.a));
    const auto cA = search(make_search(0.0, alpha - p.a, rA, eta, opt), label + " interior");
    const auto cB = search(make_search(p.a, alpha, 1.0 / p.b, p.t_end - eta, opt), label + " singular");
    out.push_back({lo, eta, 1.0, cA.lambda, 0.0});
    out.push_back({eta, p.t_end, 1.0 - p.a, cB.lambda, eta});
  }
  return out;
}

SolutionGrid seed_grid(const DelayIVP& ivp, int n_steps, int index, std::string& label) {
  SolutionGrid head = initial_iterate(ivp, n_steps);
  std::vector<double> v = head.values();
  const double T = ivp.T;
  // values[0] stays phi(0); the perturbation acts on t > 0 only.
  auto perturb = [&](auto&& fn) {
    for (int k = 1; k <= n_steps; ++k) v[k] += fn(head.time(k));
  };
  switch (index) {
    case 0:
      label = "taylor_head";
      break;
    case 1:
      label = "head+10";
      perturb([](double) { return 10.0; });
      break;
    case 2:
      label = "head-10";
      perturb([](double) { return -10.0; });
      break;
    default: {
      const int freq = index - 2;
      label = "oscillatory-" + std::to_string(freq);
      perturb([&](double t) { return 5.0 * std::sin(2.0 * std::numbers::pi * freq * t / T); });
      break;
    }
  }
  return {ivp.phi, ivp.h, ivp.T, std::move(v)};
}

}  // namespace

UniquenessReport uniqueness_probe(const DelayIVP& ivp, const SolverConfig& cfg, int seeds,
                                  const LipschitzSpec* lipschitz, const BoundsOptions& opt) {
  if (seeds < 2) throw DomainError("uniqueness_probe: need >= 2 seeds");
  ivp.validate();
  cfg.validate();

  std::vector<WeightPiece> weights;
  if (lipschitz != nullptr) {
    weights = lipschitz_weights(ivp, *lipschitz, opt);
  } else {
    weights.push_back({0.0, ivp.T, 1.0, 0.0, 0.0});  // E_{1,1}(0) = 1
  }

  std::vector<std::optional<SolutionGrid>> solutions(static_cast<std::size_t>(seeds));
  UniquenessReport report;
  report.seeds.resize(static_cast<std::size_t>(seeds));
  report.tolerance = 10.0 * cfg.tol;
  parallel_for(seeds, cfg.exec, [&](std::ptrdiff_t s) {
    std::string label;
    SolutionGrid start = seed_grid(ivp, cfg.n_steps, static_cast<int>(s), label);
    auto [sol, it] = solve_picard(ivp, cfg, std::move(start));
    auto& out = report.seeds[static_cast<std::size_t>(s)];
    out.label = label;
    out.converged = it.converged;
    out.iterations = it.iterations;
    out.final_delta = it.deltas.empty() ? 0.0 : it.deltas.back();
    solutions[static_cast<std::size_t>(s)] = std::move(sol);
  });

  report.all_converged =
      std::all_of(report.seeds.begin(), report.seeds.end(), [](const SeedOutcome& s) { return s.converged; });

  const std::size_t n_nodes = static_cast<std::size_t>(cfg.n_steps) + 1;
  const SolutionGrid& ref = *solutions.front();
  for (const auto& w : weights) report.weighted.push_back({w.t_lo, w.t_hi, 0.0, w.t_lo});

  double max_distance = 0.0;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < solutions.size(); ++j) {
      const auto& x = solutions[i]->values();
      const auto& y = solutions[j]->values();
      double dist = 0.0;
      for (std::size_t k = 0; k < n_nodes; ++k) {
        const double diff = std::abs(x[k] - y[k]);
        if (std::isnan(diff)) {
          dist = std::numeric_limits<double>::infinity();
        } else {
          dist = std::max(dist, diff);
        }
        const double t = ref.time(static_cast<int>(k));
        for (std::size_t p = 0; p < weights.size(); ++p) {
          const auto& w = weights[p];
          if (t < w.t_lo - kBoundaryTol || t > w.t_hi + kBoundaryTol) continue;
          const double weighted = diff * std::exp(-log_ml(w.ml_second, w.lambda * (t - w.shift)));
          auto& dev = report.weighted[p];
          if (weighted > dev.w) {
            dev.w = weighted;
            dev.argmax = t;
          }
        }
      }
      report.pairwise_distances.push_back(dist);
      max_distance = std::max(max_distance, dist);
    }
  }
  report.unique_within_tol = report.all_converged && max_distance < report.tolerance;
  return report;
}

}  // namespace fdelay
