#include "fdelay/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdelay/error.hpp"

namespace fdelay::io {

namespace {

// JSON has no infinity or NaN; report them as strings.
nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

nlohmann::json numbers(const std::vector<double>& xs) {
  auto out = nlohmann::json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

void row(std::ostringstream& os, std::initializer_list<double> xs) {
  bool first = true;
  for (double x : xs) {
    if (!first) os << ',';
    os << x;
    first = false;
  }
  os << '\n';
}

}  // namespace

std::string solution_csv(const SolutionGrid& sol) {
  std::ostringstream os;
  os.precision(17);
  os << "t,u\n";
  const double h = sol.delay();
  const int history_rows = std::max(1, static_cast<int>(std::lround(h / sol.step())));
  for (int i = 0; i < history_rows; ++i) {
    const double t = -h + h * i / history_rows;
    row(os, {t, sol.at(t)});
  }
  for (int k = 0; k <= sol.n_steps(); ++k) row(os, {sol.time(k), sol.values()[k]});
  return os.str();
}

std::string envelope_csv(const SolutionGrid& sol, const EnvelopeSpec& es, const EnvelopeReport& report) {
  const Envelope env(es);
  std::ostringstream os;
  os.precision(17);
  os << "t,abs_u,envelope,ratio\n";
  for (int k = 0; k <= sol.n_steps(); ++k) {
    const double t = sol.time(k);
    row(os, {t, std::abs(sol.values()[k]), env(t), report.ratios[k]});
  }
  return os.str();
}

nlohmann::json to_json(const LambdaSearchSpec& s) {
  return {{"c", s.c},
          {"d", s.d},
          {"beta", s.beta},
          {"r", s.r},
          {"horizon", s.horizon},
          {"grid_points", s.grid_points},
          {"lambda_max", s.lambda_max},
          {"quadrature_cells", s.quadrature_cells},
          {"refine", s.refine}};
}

nlohmann::json to_json(const LambdaCertificate& c) {
  nlohmann::json j = {{"lambda", c.lambda},
                      {"max_ratio", number(c.max_ratio)},
                      {"passed", c.passed},
                      {"grid", numbers(c.grid)},
                      {"ratios", numbers(c.ratios)}};
  j["first_failure"] = c.first_failure ? nlohmann::json(*c.first_failure) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const IterationReport& r) {
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"residual", number(r.residual)},
          {"deltas", numbers(r.deltas)}};
}

nlohmann::json to_json(const ConditionReport& r) {
  auto ce = nlohmann::json::array();
  for (const auto& c : r.counterexamples) {
    ce.push_back({{"t", c.t},
                  {"norm_u", c.norm_u},
                  {"norm_v", c.norm_v},
                  {"lhs", number(c.lhs)},
                  {"rhs", number(c.rhs)}});
  }
  return {{"passed", r.passed},
          {"samples", r.samples},
          {"violations", r.violations},
          {"seed", r.seed},
          {"counterexamples", ce}};
}

nlohmann::json to_json(const EnvelopeReport& r) {
  nlohmann::json j = {{"max_ratio", number(r.max_ratio)}, {"contained", r.contained}};
  j["first_violation"] = r.first_violation ? nlohmann::json(*r.first_violation) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const UniquenessReport& r) {
  auto seeds = nlohmann::json::array();
  for (const auto& s : r.seeds) {
    seeds.push_back({{"label", s.label},
                     {"converged", s.converged},
                     {"iterations", s.iterations},
                     {"final_delta", number(s.final_delta)}});
  }
  auto weighted = nlohmann::json::array();
  for (const auto& w : r.weighted) {
    weighted.push_back({{"t_lo", w.t_lo}, {"t_hi", w.t_hi}, {"w", number(w.w)}, {"argmax", w.argmax}});
  }
  return {{"seeds", seeds},
          {"pairwise_distances", numbers(r.pairwise_distances)},
          {"weighted", weighted},
          {"tolerance", r.tolerance},
          {"all_converged", r.all_converged},
          {"unique_within_tol", r.unique_within_tol}};
}

nlohmann::json constants_report(const EnvelopeSpec& es) {
  auto pieces = nlohmann::json::array();
  for (const auto& p : es.pieces) {
    nlohmann::json terms = nlohmann::json::object();
    for (const auto& [k, v] : p.provenance.terms) terms[k] = number(v);
    pieces.push_back({{"t_lo", p.t_lo},
                      {"t_hi", p.t_hi},
                      {"D", p.D},
                      {"lambda", p.lambda},
                      {"ml_second", p.ml_second},
                      {"shift", p.shift},
                      {"formula", p.provenance.formula},
                      {"terms", terms},
                      {"r_target", p.provenance.r_target},
                      {"search", to_json(p.provenance.search)},
                      {"certificate", to_json(p.provenance.certificate)}});
  }
  return {{"pieces", pieces}};
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace fdelay::io
