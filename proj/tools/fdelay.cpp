// fdelay: solve, bound and probe Caputo delay equations from JSON configs.
//
// Exit codes: 0 ok, 1 usage or config error, 2 non-convergence or lambda
// search exhaustion, 3 condition falsified (growth counterexample, envelope
// violation, distinct fixed points).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdelay/bounds.hpp"
#include "fdelay/error.hpp"
#include "fdelay/io.hpp"
#include "fdelay/mlf.hpp"
#include "fdelay/problem.hpp"
#include "fdelay/solver.hpp"

#ifndef FDELAY_VERSION
#define FDELAY_VERSION "unknown"
#endif

namespace {

using fdelay::io::write_file;
using json = nlohmann::json;

enum Exit : int { kOk = 0, kUsage = 1, kNotConverged = 2, kFalsified = 3 };

struct SolverFlags {
  int n_steps = 512;
  double tol = 1e-8;
  int max_iter = 200;
  double damping = 1.0;
  bool serial = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n-steps", n_steps, "Uniform grid steps on [0, T]")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--tol", tol, "Sup-norm stopping threshold")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", max_iter, "Picard iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--damping", damping, "Iterate mixing factor in (0, 1]")->capture_default_str();
    cmd->add_flag("--serial", serial, "Use the serial reference kernels");
  }

  [[nodiscard]] fdelay::SolverConfig config() const {
    fdelay::SolverConfig cfg;
    cfg.n_steps = n_steps;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.damping = damping;
    cfg.exec = serial ? fdelay::Execution::Serial : fdelay::Execution::Parallel;
    cfg.validate();
    return cfg;
  }

  [[nodiscard]] json echo() const {
    return {{"n_steps", n_steps}, {"tol", tol}, {"max_iter", max_iter}, {"damping", damping}, {"serial", serial}};
  }
};

struct LambdaFlags {
  int grid_points = 64;
  double lambda_max = 1024.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda-grid", grid_points, "Check points per lambda certificate")->capture_default_str();
    cmd->add_option("--lambda-max", lambda_max, "Upper end of the doubling search")->capture_default_str();
  }
};

// Shared state of one invocation, written out as the manifest.
class Run {
 public:
  Run(std::string subcommand, std::string out_dir, bool gnuplot)
      : subcommand_(std::move(subcommand)), out_dir_(std::move(out_dir)), gnuplot_(gnuplot),
        start_(std::chrono::steady_clock::now()) {}

  std::string path(const std::string& name) const { return (std::filesystem::path(out_dir_) / name).string(); }

  void write(const std::string& name, const std::string& text) {
    const std::string p = path(name);
    write_file(p, text);
    outputs_.push_back(p);
  }

  void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

  [[nodiscard]] bool gnuplot() const { return gnuplot_; }

  json parameters = json::object();
  std::string config_path;

  int finish(int code) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json manifest = {{"toolkit", "fdelay"},
                     {"version", FDELAY_VERSION},
                     {"subcommand", subcommand_},
                     {"config", config_path.empty() ? json(nullptr) : json(config_path)},
                     {"parameters", parameters},
                     {"outputs", outputs_},
                     {"duration_seconds", seconds},
                     {"exit_code", code}};
    try {
      write_file(path("manifest.json"), manifest.dump(2) + "\n");
    } catch (const fdelay::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kUsage;
    }
    return code;
  }

 private:
  std::string subcommand_;
  std::string out_dir_;
  bool gnuplot_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

std::string resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FDELAY_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "fdelay-out";
}

void print_iteration(const fdelay::IterationReport& r) {
  std::cout << "picard: " << (r.converged ? "converged" : "did not converge") << " after " << r.iterations
            << " iterations, last delta " << (r.deltas.empty() ? 0.0 : r.deltas.back()) << ", residual "
            << r.residual << "\n";
}

int cmd_solve(const std::string& config, const SolverFlags& flags, Run& run) {
  run.config_path = config;
  const auto bundle = fdelay::load_problem(config);
  const auto cfg = flags.config();
  run.parameters["solver"] = flags.echo();

  auto [sol, report] = fdelay::solve_picard(bundle.ivp, cfg);
  print_iteration(report);
  run.write("solution.csv", fdelay::io::solution_csv(sol));
  json doc = {{"iteration", fdelay::io::to_json(report)},
              {"problem", json::parse(fdelay::serialize(bundle))},
              {"solver", flags.echo()}};
  if (bundle.ivp.alpha < 1.0) doc["l1_residual"] = fdelay::residual_check(bundle.ivp, sol);
  run.write_json("run_report.json", doc);
  if (run.gnuplot()) {
    run.write("solution.gp",
              "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'u'\n"
              "plot 'solution.csv' using 1:2 with lines\n");
  }
  return report.converged ? kOk : kNotConverged;
}

int cmd_envelope(const std::string& config, const SolverFlags& flags, const LambdaFlags& lflags,
                 std::size_t samples, std::uint64_t seed, Run& run) {
  run.config_path = config;
  const auto bundle = fdelay::load_problem(config);
  if (!bundle.growth) {
    std::cerr << "error: growth: the config has no growth section\n";
    return kUsage;
  }
  const auto cfg = flags.config();
  fdelay::BoundsOptions opt;
  opt.lambda_grid_points = lflags.grid_points;
  opt.lambda_max = lflags.lambda_max;
  run.parameters.update(json{{"solver", flags.echo()},
                              {"samples", samples},
                              {"seed", seed},
                              {"lambda_grid", opt.lambda_grid_points},
                              {"lambda_max", opt.lambda_max},
                              {"headroom", opt.headroom},
                              {"phi_sup_points", opt.phi_sup_points}});

  const auto growth_check = fdelay::check_growth(bundle.ivp, *bundle.growth, samples, seed);
  run.write_json("growth_check.json", fdelay::io::to_json(growth_check));
  if (!growth_check.passed) {
    const auto& c = growth_check.counterexamples.front();
    std::cout << "growth condition falsified: " << growth_check.violations << " of " << growth_check.samples
              << " samples violate it; first at t=" << c.t << ", |u|=" << c.norm_u << ": |f|=" << c.lhs
              << " > bound " << c.rhs << "\n";
    return kFalsified;
  }

  fdelay::EnvelopeSpec es;
  try {
    es = fdelay::compute_constants(bundle.ivp, *bundle.growth, opt);
  } catch (const fdelay::LambdaSearchExhausted& e) {
    run.write_json("lambda_failure.json", fdelay::io::to_json(e.last_certificate()));
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  }
  run.write_json("constants.json", fdelay::io::constants_report(es));

  auto [sol, report] = fdelay::solve_picard(bundle.ivp, cfg);
  print_iteration(report);
  run.write("solution.csv", fdelay::io::solution_csv(sol));
  const auto env = fdelay::verify_envelope(sol, es);
  run.write("envelope.csv", fdelay::io::envelope_csv(sol, es, env));
  run.write_json("envelope_report.json",
                 {{"envelope", fdelay::io::to_json(env)}, {"iteration", fdelay::io::to_json(report)}});
  if (run.gnuplot()) {
    run.write("envelope.gp",
              "set datafile separator ','\nset key autotitle columnhead\nset logscale y\nset xlabel 't'\n"
              "plot 'envelope.csv' using 1:2 with lines, '' using 1:3 with lines\n");
  }
  std::cout << "envelope: " << es.pieces.size() << " pieces, max |u|/envelope = " << env.max_ratio << " ("
            << (env.contained ? "contained" : "violated") << ")\n";
  if (!report.converged) return kNotConverged;
  return env.contained ? kOk : kFalsified;
}

int cmd_lambda(const fdelay::LambdaSearchSpec& spec, Run& run) {
  run.parameters.update(fdelay::io::to_json(spec));
  try {
    const auto cert = fdelay::find_lambda(spec);
    run.write_json("certificate.json", {{"search", fdelay::io::to_json(spec)}, {"certificate", fdelay::io::to_json(cert)}});
    std::cout << "lambda = " << cert.lambda << " (max ratio " << cert.max_ratio << " over " << cert.grid.size()
              << " points)\n";
    return kOk;
  } catch (const fdelay::LambdaSearchExhausted& e) {
    run.write_json("certificate.json",
                   {{"search", fdelay::io::to_json(spec)}, {"certificate", fdelay::io::to_json(e.last_certificate())}});
    std::cerr << "error: " << e.what() << "\n";
    return kNotConverged;
  }
}

int cmd_probe(const std::string& config, const SolverFlags& flags, const LambdaFlags& lflags, int seeds, Run& run) {
  run.config_path = config;
  if (seeds < 2) {
    std::cerr << "error: --seeds: need >= 2 seeds, got " << seeds << "\n";
    return kUsage;
  }
  const auto bundle = fdelay::load_problem(config);
  const auto cfg = flags.config();
  fdelay::BoundsOptions opt;
  opt.lambda_grid_points = lflags.grid_points;
  opt.lambda_max = lflags.lambda_max;
  run.parameters.update(json{{"solver", flags.echo()}, {"seeds", seeds}, {"lambda_grid", opt.lambda_grid_points},
                              {"lambda_max", opt.lambda_max}, {"headroom", opt.headroom}});

  const auto* lip = bundle.lipschitz ? &*bundle.lipschitz : nullptr;
  const auto report = fdelay::uniqueness_probe(bundle.ivp, cfg, seeds, lip, opt);
  run.write_json("uniqueness.json", fdelay::io::to_json(report));
  for (const auto& s : report.seeds) {
    std::cout << "seed " << s.label << ": " << (s.converged ? "converged" : "did not converge") << " in "
              << s.iterations << " iterations (last delta " << s.final_delta << ")\n";
  }
  double max_distance = 0.0;
  for (double d : report.pairwise_distances) max_distance = std::max(max_distance, d);
  std::cout << "max pairwise distance " << max_distance << " (tolerance " << report.tolerance << "): "
            << (report.unique_within_tol ? "unique" : "not unique") << "\n";
  if (!report.all_converged) return kNotConverged;
  return report.unique_within_tol ? kOk : kFalsified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver and verifier for Caputo fractional delay differential equations"};
  app.set_version_flag("--version", std::string(FDELAY_VERSION));
  app.require_subcommand(1);

  std::string out_flag;
  bool gnuplot = false;
  app.add_option("--out", out_flag, "Output directory (default: $FDELAY_OUTPUT_DIR, else ./fdelay-out)");
  app.add_flag("--emit-gnuplot", gnuplot, "Also write a gnuplot script for the CSV output");

  std::string config;
  SolverFlags solver_flags;
  LambdaFlags lambda_flags;

  auto* solve = app.add_subcommand("solve", "Picard iteration on the integral form; writes solution.csv");
  solve->add_option("config", config, "Problem config (JSON)")->required();
  solver_flags.attach(solve);

  std::size_t samples = 10000;
  std::uint64_t seed = fdelay::kDefaultSamplerSeed;
  auto* envelope = app.add_subcommand("envelope", "Growth check, envelope constants, solve and containment check");
  envelope->add_option("config", config, "Problem config with a growth section")->required();
  envelope->add_option("--samples", samples, "Falsifier samples")->capture_default_str();
  envelope->add_option("--seed", seed, "Falsifier random seed")->capture_default_str();
  solver_flags.attach(envelope);
  lambda_flags.attach(envelope);

  fdelay::LambdaSearchSpec spec;
  auto* lambda = app.add_subcommand("lambda", "Search and certify a rate lambda for the ML integral inequality");
  lambda->add_option("--c", spec.c, "First ML parameter")->capture_default_str();
  lambda->add_option("--d", spec.d, "Singularity exponent, d < min(beta, 1)")->capture_default_str();
  lambda->add_option("--beta", spec.beta, "Integral order")->capture_default_str();
  lambda->add_option("--r", spec.r, "Target ratio")->required();
  lambda->add_option("--horizon", spec.horizon, "Interval end")->required();
  lambda->add_option("--grid-points", spec.grid_points, "Check points")->capture_default_str();
  lambda->add_option("--lambda-max", spec.lambda_max, "Search cap")->capture_default_str();
  lambda->add_flag("--refine", spec.refine, "Bisect below the first passing power of two");

  int seeds = 4;
  auto* probe = app.add_subcommand("probe", "Picard from several first iterates; compares the fixed points");
  probe->add_option("config", config, "Problem config (JSON)")->required();
  probe->add_option("--seeds", seeds, "Number of first iterates")->capture_default_str();
  solver_flags.attach(probe);
  lambda_flags.attach(probe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const auto* chosen = app.get_subcommands().front();
  Run run(chosen->get_name(), resolve_out_dir(out_flag), gnuplot);
  run.parameters["out"] = resolve_out_dir(out_flag);
  try {
    int code = kUsage;
    if (chosen == solve) code = cmd_solve(config, solver_flags, run);
    if (chosen == envelope) code = cmd_envelope(config, solver_flags, lambda_flags, samples, seed, run);
    if (chosen == lambda) code = cmd_lambda(spec, run);
    if (chosen == probe) code = cmd_probe(config, solver_flags, lambda_flags, seeds, run);
    return run.finish(code);
  } catch (const fdelay::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return run.finish(kUsage);
  }
}
