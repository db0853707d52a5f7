#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"
#include "fdelay/kernels.hpp"

using namespace fdelay;

namespace {

struct Inputs {
  std::vector<double> f;
  std::vector<double> f_mid;
  std::vector<std::uint8_t> mid;
};

Inputs random_inputs(int cells, bool with_midpoints) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  Inputs in;
  in.f.resize(cells + 1);
  for (auto& v : in.f) v = u(rng);
  if (with_midpoints) {
    in.f_mid.resize(cells);
    in.mid.resize(cells);
    for (int j = 0; j < cells; ++j) {
      in.f_mid[j] = u(rng);
      in.mid[j] = j % 17 == 3;
    }
  }
  return in;
}

}  // namespace

TEST_CASE("serial and OpenMP convolutions agree bit for bit") {
  for (bool with_mid : {false, true}) {
    const int cells = 777;
    const ProductWeights w(0.4, 1.0 / cells, cells);
    const auto in = random_inputs(cells, with_mid);
    std::vector<double> a(cells + 1), b(cells + 1);
    kernels::fractional_convolution_serial(w, in.f, in.f_mid, in.mid, a);
    kernels::fractional_convolution_omp(w, in.f, in.f_mid, in.mid, b);
    CHECK(a == b);
    CHECK(a[0] == 0.0);
  }
}

TEST_CASE("convolution of a constant is the kernel integral") {
  const int cells = 100;
  const double beta = 0.7;
  const ProductWeights w(beta, 1.0 / cells, cells);
  std::vector<double> f(cells + 1, 1.0), out(cells + 1);
  kernels::fractional_convolution(Execution::Parallel, w, f, {}, {}, out);
  for (int k = 0; k <= cells; k += 10) {
    CHECK(out[k] == doctest::Approx(std::pow(k / 100.0, beta) / std::tgamma(beta + 1)).epsilon(1e-12));
  }
}

TEST_CASE("midpoint cells read the midpoint samples") {
  const int cells = 4;
  const ProductWeights w(1.0, 0.25, cells);
  std::vector<double> f(cells + 1, 0.0), f_mid(cells, 0.0), out(cells + 1);
  std::vector<std::uint8_t> mid(cells, 0);
  mid[1] = 1;
  f_mid[1] = 8.0;
  kernels::fractional_convolution_serial(w, f, f_mid, mid, out);
  // beta = 1: plain integral, cell [0.25, 0.5] contributes 8 * 0.25
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(2.0));
  CHECK(out[4] == doctest::Approx(2.0));
}
