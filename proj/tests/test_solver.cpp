#include <cmath>

#include "doctest.h"
#include "fdelay/error.hpp"
#include "fdelay/solver.hpp"
#include "oracles.hpp"

using namespace fdelay;

namespace {

DelayIVP make_ivp(const char* f, double alpha, double h, double T, const char* phi = "1") {
  DelayIVP ivp;
  ivp.alpha = alpha;
  ivp.h = h;
  ivp.T = T;
  const auto p = Expression::parse(phi);
  ivp.phi = HistorySpec::from_expression(p, ivp.ceil_alpha());
  ivp.f = Expression::parse(f);
  return ivp;
}

double constant_forcing_solution(double alpha, double t) { return 1.0 + std::pow(t, alpha) / std::tgamma(alpha + 1); }

double sup_error(const SolutionGrid& sol, auto&& exact) {
  double err = 0.0;
  for (int k = 0; k <= sol.n_steps(); ++k) err = std::max(err, std::abs(sol.values()[k] - exact(sol.time(k))));
  return err;
}

}  // namespace

TEST_CASE("Taylor head") {
  CHECK(taylor_head(make_ivp("0", 0.5, 1, 10, "3"), 7.0) == 3.0);
  CHECK(taylor_head(make_ivp("0", 1.5, 1, 10, "1 + 2*t"), 1.0) == doctest::Approx(3.0));
  CHECK(taylor_head(make_ivp("0", 1.0, 1, 10, "0"), 4.0) == 0.0);
}

TEST_CASE("solution grid reads history and interpolates") {
  SolutionGrid g(HistorySpec::from_expression(Expression::parse("2 + t"), 1), 1.0, 1.0, {2, 3, 6});
  CHECK(g.step() == 0.5);
  CHECK(g.at(-0.5) == doctest::Approx(1.5));
  CHECK(g.at(0.25) == doctest::Approx(2.5));
  CHECK(g.at(0.75) == doctest::Approx(4.5));
  CHECK_THROWS_AS((void)g.at(1.5), DomainError);
  CHECK_THROWS_AS((void)g.at(-2.0), DomainError);
}

TEST_CASE("one application of J is exact for u-independent f") {
  const auto ivp = make_ivp("1", 0.5, 1, 1);
  const auto x = apply_J(ivp, initial_iterate(ivp, 64));
  CHECK(sup_error(x, [](double t) { return constant_forcing_solution(0.5, t); }) < 1e-13);
}

TEST_CASE("delayed argument inside the history") {
  const auto ivp = make_ivp("U(1)", 0.5, 1, 1);
  std::vector<double> junk(65, 17.0);
  junk[0] = 1.0;  // every iterate starts at phi(0)
  SolutionGrid arbitrary(ivp.phi, 1.0, 1.0, junk);
  const auto x = apply_J(ivp, arbitrary);
  CHECK(sup_error(x, [](double t) { return constant_forcing_solution(0.5, t); }) < 1e-13);
}

TEST_CASE("J at the exact relaxation solution") {
  const double alpha = 0.5;
  const auto ivp = make_ivp("-U(0)", alpha, 1, 1);
  std::vector<double> exact(1025);
  for (int k = 0; k <= 1024; ++k) exact[k] = oracle::ml(alpha, 1, -std::pow(k / 1024.0, alpha));
  const SolutionGrid sol(ivp.phi, 1.0, 1.0, exact);
  const auto x = apply_J(ivp, sol);
  CHECK(sup_error(x, [&](double t) { return sol.at(t); }) < 1e-5);
}

TEST_CASE("Picard on constant forcing") {
  const auto [sol, report] = solve_picard(make_ivp("1", 0.5, 1, 1), {.n_steps = 256});
  CHECK(report.converged);
  CHECK(report.iterations == 2);
  CHECK(sol.values().back() == doctest::Approx(1.0 + 1.0 / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(sol.values().back() == doctest::Approx(2.1283791670955126).epsilon(1e-12));
}

TEST_CASE("Picard on relaxation matches Mittag-Leffler") {
  const auto [sol, report] = solve_picard(make_ivp("-U(0)", 0.5, 1, 1), {.n_steps = 1024});
  CHECK(report.converged);
  CHECK(report.iterations > 2);
  CHECK(report.residual < 1e-7);
  CHECK(std::abs(sol.values().back() - oracle::ml(0.5, 1, -1.0)) < 1e-3);
  CHECK(sup_error(sol, [](double t) { return oracle::ml(0.5, 1, -std::sqrt(t)); }) < 1e-6);
}

TEST_CASE("Picard on the linear delay problem matches the method of steps") {
  const auto [sol, report] = solve_picard(make_ivp("U(1)", 0.5, 1, 2), {.n_steps = 1024});
  CHECK(report.converged);
  CHECK(sup_error(sol, [](double t) { return oracle::method_of_steps(0.5, t); }) < 2e-3);
}

TEST_CASE("serial and parallel iterations agree exactly") {
  const auto ivp = make_ivp("0.3*sing(0.5,0.2)*U(0.25) - 0.2*t", 0.7, 0.5, 1);
  const auto a = solve_picard(ivp, {.n_steps = 200, .exec = Execution::Serial});
  const auto b = solve_picard(ivp, {.n_steps = 200, .exec = Execution::Parallel});
  CHECK(a.first.values() == b.first.values());
  CHECK(a.second.deltas == b.second.deltas);
}

TEST_CASE("second-order equation") {
  // D^1.5 u = 1 with u(0) = 1, u'(0) = 1: u = 1 + t + t^1.5 / Gamma(2.5)
  const auto [sol, report] = solve_picard(make_ivp("1", 1.5, 1, 1, "1 + t"), {.n_steps = 128});
  CHECK(report.converged);
  CHECK(sol.values().back() == doctest::Approx(2.0 + 1.0 / std::tgamma(2.5)).epsilon(1e-12));
}

TEST_CASE("non-convergence is reported, not raised") {
  const auto [sol, report] = solve_picard(make_ivp("-U(0)", 0.5, 1, 1), {.n_steps = 128, .max_iter = 1});
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 1);
  CHECK(report.deltas.size() == 1);
}

TEST_CASE("damped iteration reaches the same fixed point") {
  const auto ivp = make_ivp("-U(0)", 0.5, 1, 1);
  const auto plain = solve_picard(ivp, {.n_steps = 128, .tol = 1e-12});
  const auto damped = solve_picard(ivp, {.n_steps = 128, .tol = 1e-12, .max_iter = 500, .damping = 0.5});
  CHECK(damped.second.converged);
  CHECK(sup_error(damped.first, [&](double t) { return plain.first.at(t); }) < 1e-10);
}

TEST_CASE("evaluation errors carry the node") {
  const auto ivp = make_ivp("log(U(0) - 1)", 0.5, 1, 1);
  try {
    (void)solve_picard(ivp, {.n_steps = 16});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("solver config validation") {
  const auto ivp = make_ivp("1", 0.5, 1, 1);
  CHECK_THROWS_AS((void)solve_picard(ivp, {.n_steps = 0}), DomainError);
  CHECK_THROWS_AS((void)solve_picard(ivp, {.tol = 0}), DomainError);
  CHECK_THROWS_AS((void)solve_picard(ivp, {.damping = 1.5}), DomainError);
}

TEST_CASE("L1 residual") {
  const auto forced = make_ivp("1", 0.5, 1, 1);
  const auto [s1, r1] = solve_picard(forced, {.n_steps = 512});
  CHECK(residual_check(forced, s1) < 0.1);
  CHECK(residual_check(forced, s1, 0.1) < 1e-3);

  const auto zero = make_ivp("0", 0.5, 1, 1);
  const auto [s0, r0] = solve_picard(zero, {.n_steps = 64});
  CHECK(residual_check(zero, s0) == doctest::Approx(0.0));

  // away from t = 0 the residual shrinks under refinement
  const auto relax = make_ivp("-U(0)", 0.5, 1, 1);
  double previous = 1.0;
  for (int n : {256, 512, 1024}) {
    const auto [s, r] = solve_picard(relax, {.n_steps = n});
    const double res = residual_check(relax, s, 0.1);
    CHECK(res < previous);
    previous = res;
  }
  CHECK(previous < 5e-3);
  CHECK_THROWS_AS((void)residual_check(make_ivp("1", 1.5, 1, 1, "1"), s0), DomainError);
}

TEST_CASE("reference solve") {
  const auto forced = make_ivp("1", 0.5, 1, 1);
  const auto ref = reference_solve(forced, 4, {.n_steps = 64});
  CHECK(ref.n_steps() == 256);
  CHECK(sup_error(ref, [](double t) { return constant_forcing_solution(0.5, t); }) < 1e-6);

  const auto relax = make_ivp("-U(0)", 0.5, 1, 1);
  const auto fine = reference_solve(relax, 8, {.n_steps = 128});
  CHECK(sup_error(fine, [](double t) { return oracle::ml(0.5, 1, -std::sqrt(t)); }) < 1e-4);

  const auto delay = make_ivp("U(1)", 0.5, 1, 2);
  const auto r4 = reference_solve(delay, 4, {.n_steps = 128});
  const auto r8 = reference_solve(delay, 8, {.n_steps = 128});
  // compared on shared nodes: interpolating the sqrt(t)-type start would dominate
  double gap = 0.0;
  for (int k = 0; k <= r4.n_steps(); ++k) gap = std::max(gap, std::abs(r4.values()[k] - r8.values()[2 * k]));
  CHECK(gap < 1e-3);
}
