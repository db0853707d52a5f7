#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fdelay/error.hpp"
#include "fdelay/fracops.hpp"
#include "oracles.hpp"

using namespace fdelay;

namespace {
double one(double) { return 1.0; }
double ident(double s) { return s; }
}  // namespace

TEST_CASE("sampled function interpolation and range") {
  SampledFunction f({0, 1, 3}, {0, 2, 6});
  CHECK(f.at(0.5) == doctest::Approx(1.0));
  CHECK(f.at(2.0) == doctest::Approx(4.0));
  CHECK(f.at(3.0) == 6.0);
  CHECK_THROWS_AS((void)f.at(3.5), DomainError);
  CHECK_THROWS_AS(SampledFunction({0, 0}, {1, 1}), DomainError);
  CHECK_THROWS_AS(SampledFunction({0, 1}, {1}), DomainError);
}

TEST_CASE("graded mesh clusters toward the singular end") {
  const auto lo = GradedMesh(0, 1, 4, 2.0, SingularEnd::Lo).nodes();
  CHECK(lo[1] == doctest::Approx(1.0 / 16));
  CHECK(lo.back() == 1.0);
  const auto hi = GradedMesh(0, 1, 4, 2.0, SingularEnd::Hi).nodes();
  CHECK(hi[3] == doctest::Approx(1.0 - 1.0 / 16));
  const auto flat = GradedMesh(2, 3, 4).nodes();
  CHECK(flat[2] == doctest::Approx(2.5));
}

TEST_CASE("Riemann-Liouville integral of constants and linear functions") {
  const auto c = SampledFunction::uniform(0, 2, 64, one);
  CHECK(rl_integral(1.0, c, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  const auto c1 = SampledFunction::uniform(0, 1, 64, one);
  CHECK(rl_integral(0.5, c1, 1.0) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  const auto s = SampledFunction::uniform(0, 1, 64, ident);
  CHECK(rl_integral(0.5, s, 1.0) == doctest::Approx(1.0 / std::tgamma(2.5)).epsilon(1e-12));
  CHECK_THROWS_AS((void)rl_integral(0.5, s, 1.5), DomainError);
}

TEST_CASE("Riemann-Liouville integral at every node") {
  const auto s = SampledFunction::uniform(0, 1, 40, ident);
  const auto all = rl_integral_all(0.8, s);
  for (std::size_t k = 0; k < all.size(); k += 7) {
    const double t = all.nodes()[k];
    CHECK(all.values()[k] == doctest::Approx(oracle::rl_power(0.8, 1, t)).epsilon(1e-12));
  }
}

TEST_CASE("product weights sum to the integral of the kernel") {
  const double beta = 0.6, step = 0.01;
  ProductWeights w(beta, step, 100);
  double sum = 0.0;
  double mid = 0.0;
  for (int m = 0; m < 100; ++m) {
    sum += w.left[m] + w.right[m];
    mid += w.mid[m];
  }
  const double exact = std::pow(1.0, beta) / std::tgamma(beta + 1);
  CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
  CHECK(mid == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("starting weights integrate the listed powers exactly") {
  const double alpha = 0.3;
  const auto exps = starting_exponents(alpha);
  CHECK(exps.size() == 5);  // 0, 0.3, 0.6, 0.9, 1
  CHECK(starting_exponents(1.2).empty());
  const auto sw = starting_weights(alpha, 32);
  REQUIRE(sw != nullptr);
  CHECK(sw->nodes == 5);  // 0, 0.3, 0.6, 0.9 and 1
  ProductWeights w(alpha, 1.0, 32);
  for (double g : sw->exponents) {
    for (int k : {1, 2, 7, 32}) {
      double sum = 0.0;
      for (int j = 0; j < k; ++j) {
        const int m = k - j - 1;
        sum += w.left[m] * std::pow(j, g) + w.right[m] * std::pow(j + 1, g);
      }
      for (int j = 0; j < sw->nodes; ++j) sum += sw->at(k, j) * std::pow(j, g);
      CAPTURE(g);
      CAPTURE(k);
      CHECK(sum == doctest::Approx(oracle::rl_power(alpha, g, k)).epsilon(1e-11));
    }
  }
  CHECK(starting_weights(alpha, 32) == sw);  // memoized
}

TEST_CASE("weighted integral closed forms") {
  const GradedMesh mesh(0, 1, kWeightedCells);
  CHECK(rl_weighted_integral(1.0, 0.5, 0.0, one, 1.0, mesh) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(rl_weighted_integral(0.5, 0.0, 0.0, one, 1.0, mesh) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-10));
  CHECK(rl_weighted_integral(0.5, 0.3, 0.0, one, 1.0, mesh) ==
        doctest::Approx(1.4137437626714575).epsilon(1e-9));
}

TEST_CASE("weighted integral against tanh-sinh") {
  auto g = [](double s) { return std::exp(s) * std::cos(s); };
  for (double eta : {0.0, 0.7, 2.0}) {
    for (double d : {0.2, 0.5}) {
      const double expect = oracle::weighted_integral(0.6, d, eta, g, 0.0, 2.0);
      CAPTURE(eta);
      CAPTURE(d);
      CHECK(rl_weighted_integral(0.6, d, eta, g, 2.0, GradedMesh(0, 2, kWeightedCells)) ==
            doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("weighted integral with the singular point at the upper limit") {
  // the two factors merge into (t-s)^(beta-d-1)
  const double beta = 0.8, d = 0.3, t = 1.5;
  auto shifted = [&](double) { return 1.0; };
  const double expect = std::pow(t, beta - d) / ((beta - d) * std::tgamma(beta));
  CHECK(rl_weighted_integral(beta, d, t, shifted, t, GradedMesh(0, t, kWeightedCells)) ==
        doctest::Approx(expect).epsilon(1e-9));
  CHECK_THROWS_AS((void)rl_weighted_integral(0.2, 0.3, t, shifted, t, GradedMesh(0, t, 8)), SingularityError);
  CHECK_THROWS_AS((void)rl_weighted_integral(0.5, 1.0, 0, shifted, t, GradedMesh(0, t, 8)), DomainError);
}

TEST_CASE("L1 Caputo derivative") {
  const auto c = SampledFunction::uniform(0, 1, 100, [](double) { return 3.0; });
  CHECK(caputo_l1(0.5, c, 1.0) == doctest::Approx(0.0));
  const auto s = SampledFunction::uniform(0, 1, 100, ident);
  CHECK(caputo_l1(0.5, s, 1.0) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  const auto sq = SampledFunction::uniform(0, 1, 2000, [](double x) { return x * x; });
  CHECK(caputo_l1(0.3, sq, 1.0) == doctest::Approx(1.2947616535572537).epsilon(1e-5));
  CHECK_THROWS_AS((void)caputo_l1(1.0, s, 1.0), DomainError);
  CHECK_THROWS_AS((void)caputo_l1(0.5, SampledFunction({0, 0.1, 0.3}, {0, 0, 0}), 0.3), DomainError);
}

TEST_CASE("Lq norms") {
  CHECK(lq_norm(one, 0.5, 0, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(lq_norm([](double) { return -2.5; }, 0.0, 1, 3) == doctest::Approx(2.5));
  CHECK(lq_norm(ident, 0.5, 0, 1) == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-8));
  CHECK_THROWS_AS((void)lq_norm(one, 1.0, 0, 1), DomainError);
}

TEST_CASE("Hoelder kernel bound") {
  CHECK(holder_kernel_bound(0.5, 0, 1) == doctest::Approx(2.0));
  CHECK(holder_kernel_bound(1.0, 0, 3) == doctest::Approx(3.0));
  CHECK(holder_kernel_bound(0.6, 0.2, 2) == doctest::Approx(2.2973967099940698).epsilon(1e-14));
  CHECK_THROWS_AS((void)holder_kernel_bound(0.5, 0.5, 1), DomainError);
  CHECK_THROWS_AS((void)holder_kernel_bound(1.5, 1.0, 1), DomainError);
}
