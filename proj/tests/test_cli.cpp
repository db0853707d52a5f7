// Runs the fdelay executable and checks exit codes and written files.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::temp_directory_path() / "fdelay_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(FDELAY_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out_dir(const std::string& name) {
  const auto p = kScratch / name;
  fs::remove_all(p);
  return p.string();
}

std::string write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kScratch);
  const auto p = kScratch / (name + ".json");
  std::ofstream(p) << body;
  return p.string();
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string family(const char* name) { return std::string(FDELAY_SOURCE_DIR) + "/configs/family/" + name; }
std::string example(const char* name) { return std::string(FDELAY_SOURCE_DIR) + "/configs/examples/" + name; }

}  // namespace

TEST_CASE("solve: constant forcing") {
  const auto out = out_dir("solve_forced");
  REQUIRE(run("--out " + out + " solve " + example("forced_constant.json") + " --n-steps 128") == 0);
  std::ifstream csv(fs::path(out) / "solution.csv");
  std::string line, last;
  while (std::getline(csv, line)) last = line;
  const double u_T = std::stod(last.substr(last.find(',') + 1));
  CHECK(u_T == doctest::Approx(1.0 + 1.0 / std::tgamma(1.5)).epsilon(1e-10));
  const auto manifest = read_json(fs::path(out) / "manifest.json");
  CHECK(manifest["subcommand"] == "solve");
  CHECK(manifest["exit_code"] == 0);
  CHECK(read_json(fs::path(out) / "run_report.json")["iteration"]["converged"] == true);
}

TEST_CASE("solve: malformed config names the field") {
  const auto out = out_dir("solve_bad");
  CHECK(run("--out " + out + " solve " + example("malformed.json")) == 1);
  const std::string cmd = std::string(FDELAY_CLI) + " --out " + out + " solve " + example("malformed.json") + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[256];
  while (fgets(buf, sizeof buf, pipe)) text += buf;
  pclose(pipe);
  CHECK(text.find("f:") != std::string::npos);
  CHECK(run("--out " + out + " solve /nonexistent.json") == 1);
}

TEST_CASE("solve: starved iteration exits 2") {
  CHECK(run("--out " + out_dir("solve_starved") + " solve " + example("relaxation.json") + " --max-iter 1") == 2);
}

TEST_CASE("solve: gnuplot script on request") {
  const auto out = out_dir("solve_gp");
  REQUIRE(run("--out " + out + " --emit-gnuplot solve " + example("forced_constant.json") + " --n-steps 32") == 0);
  CHECK(fs::exists(fs::path(out) / "solution.gp"));
}

TEST_CASE("output directory from the environment") {
  const auto out = out_dir("env_out");
  const std::string cmd = "FDELAY_OUTPUT_DIR=" + out + " " + std::string(FDELAY_CLI) + " solve " +
                          example("forced_constant.json") + " --n-steps 16 > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(fs::path(out) / "solution.csv"));
}

TEST_CASE("envelope: bundled linear delay problem is contained") {
  const auto out = out_dir("env_linear");
  REQUIRE(run("--out " + out + " envelope " + family("01_linear_delay.json")) == 0);
  CHECK(read_json(fs::path(out) / "envelope_report.json")["envelope"]["contained"] == true);
  CHECK(fs::exists(fs::path(out) / "constants.json"));
  CHECK(fs::exists(fs::path(out) / "envelope.csv"));
}

TEST_CASE("envelope: falsified growth exits 3") {
  const auto out = out_dir("env_bad");
  CHECK(run("--out " + out + " envelope " + example("bad_growth.json")) == 3);
  const auto g = read_json(fs::path(out) / "growth_check.json");
  CHECK(g["passed"] == false);
  CHECK_FALSE(g["counterexamples"].empty());
}

TEST_CASE("envelope: missing growth section exits 1") {
  CHECK(run("--out " + out_dir("env_none") + " envelope " + example("relaxation.json")) == 1);
}

TEST_CASE("lambda subcommand") {
  const auto out = out_dir("lambda_ok");
  REQUIRE(run("--out " + out + " lambda --c 1 --d 0 --beta 1 --r 2 --horizon 10") == 0);
  CHECK(read_json(fs::path(out) / "certificate.json")["certificate"]["lambda"] == 1.0);
  CHECK(run("--out " + out_dir("lambda_bad") + " lambda --c 1 --d 1.2 --beta 0.5 --r 1 --horizon 1") == 1);
  CHECK(run("--out " + out_dir("lambda_exhausted") +
            " lambda --c 1 --d 0.2 --beta 0.6 --r 1e-6 --horizon 1 --lambda-max 4") == 2);
  CHECK(run("lambda --c 1 --beta 1 --horizon 1") == 1);  // --r missing
}

TEST_CASE("probe subcommand") {
  const auto relax = write_config("relax_probe", R"J({"alpha": 0.5, "h": 1, "T": 1, "phi": "1", "f": "-U(0)"})J");
  const auto out = out_dir("probe_ok");
  REQUIRE(run("--out " + out + " probe " + relax + " --seeds 3 --n-steps 128") == 0);
  CHECK(read_json(fs::path(out) / "uniqueness.json")["unique_within_tol"] == true);
  CHECK(run("--out " + out_dir("probe_one") + " probe " + relax + " --seeds 1") == 1);
  CHECK(run("--out " + out_dir("probe_starved") + " probe " + relax + " --seeds 3 --max-iter 2") == 2);
}

TEST_CASE("version and unknown subcommands") {
  CHECK(run("--version") == 0);
  CHECK(run("frobnicate") == 1);
}
