#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "fdelay/io.hpp"

using namespace fdelay;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("solution CSV starts with the history") {
  const SolutionGrid g(HistorySpec::from_expression(Expression::parse("1"), 1), 1.0, 1.0, {1, 2, 3});
  const auto lines = lines_of(io::solution_csv(g));
  REQUIRE(lines.size() == 1 + 2 + 3);
  CHECK(lines[0] == "t,u");
  CHECK(lines[1].rfind("-1,", 0) == 0);
  CHECK(lines.back().rfind("1,3", 0) == 0);
}

TEST_CASE("envelope CSV has one row per node") {
  const SolutionGrid g(HistorySpec::from_expression(Expression::parse("1"), 1), 1.0, 1.0, {1, 1, 1});
  EnvelopePiece p;
  p.t_hi = 1.0;
  const EnvelopeSpec es{{p}};
  const auto rep = verify_envelope(g, es);
  const auto lines = lines_of(io::envelope_csv(g, es, rep));
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "t,abs_u,envelope,ratio");
  CHECK(lines[1] == "0,1,2,0.5");
}

TEST_CASE("non-finite numbers survive as strings") {
  LambdaCertificate cert;
  cert.lambda = 2;
  cert.max_ratio = std::numeric_limits<double>::infinity();
  cert.grid = {1.0};
  cert.ratios = {std::numeric_limits<double>::quiet_NaN()};
  const auto j = io::to_json(cert);
  CHECK(j["max_ratio"] == "inf");
  CHECK(j["ratios"][0] == "nan");
  CHECK(j["passed"] == false);
  CHECK(nlohmann::json::parse(j.dump()) == j);
}

TEST_CASE("reports serialize their fields") {
  IterationReport it;
  it.iterations = 3;
  it.deltas = {1, 0.1, 1e-9};
  it.converged = true;
  const auto ji = io::to_json(it);
  CHECK(ji["iterations"] == 3);
  CHECK(ji["deltas"].size() == 3);

  UniquenessReport u;
  u.seeds = {{"taylor_head", true, 4, 1e-10}};
  u.unique_within_tol = true;
  const auto ju = io::to_json(u);
  CHECK(ju["seeds"][0]["label"] == "taylor_head");
  CHECK(ju["unique_within_tol"] == true);
}

TEST_CASE("write_file creates directories") {
  const auto dir = std::filesystem::temp_directory_path() / "fdelay_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  io::write_file((dir / "x.txt").string(), "hello");
  std::ifstream in(dir / "x.txt");
  std::string s;
  in >> s;
  CHECK(s == "hello");
  std::filesystem::remove_all(dir.parent_path());
}
