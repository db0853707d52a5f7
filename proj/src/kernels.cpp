#include "fdelay/kernels.hpp"

#include <omp.h>

namespace fdelay::kernels {

namespace {

inline double convolve_node(const ProductWeights& w, std::span<const double> f_nodes,
                            std::span<const double> f_mid, std::span<const std::uint8_t> midpoint_cell,
                            std::size_t k) {
  double sum = 0.0;
  if (midpoint_cell.empty()) {
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t m = k - 1 - j;
      sum += w.left[m] * f_nodes[j] + w.right[m] * f_nodes[j + 1];
    }
    return sum;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t m = k - 1 - j;
    if (midpoint_cell[j]) {
      sum += w.mid[m] * f_mid[j];
    } else {
      sum += w.left[m] * f_nodes[j] + w.right[m] * f_nodes[j + 1];
    }
  }
  return sum;
}

}  // namespace

void fractional_convolution_serial(const ProductWeights& w, std::span<const double> f_nodes,
                                   std::span<const double> f_mid,
                                   std::span<const std::uint8_t> midpoint_cell, std::span<double> out) {
  out[0] = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) out[k] = convolve_node(w, f_nodes, f_mid, midpoint_cell, k);
}

void fractional_convolution_omp(const ProductWeights& w, std::span<const double> f_nodes,
                                std::span<const double> f_mid,
                                std::span<const std::uint8_t> midpoint_cell, std::span<double> out) {
  out[0] = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  // node k costs O(k): dynamic chunks balance the triangle
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t k = 1; k < n; ++k) {
    out[static_cast<std::size_t>(k)] =
        convolve_node(w, f_nodes, f_mid, midpoint_cell, static_cast<std::size_t>(k));
  }
}

}  // namespace fdelay::kernels
