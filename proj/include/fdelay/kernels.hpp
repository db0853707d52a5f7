#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and an
// OpenMP version; they sum in the same order and agree bit for bit.

#include <cstdint>
#include <span>

#include "fdelay/fracops.hpp"
#include "fdelay/parallel.hpp"

namespace fdelay::kernels {

/// out[k] = sum over cells j < k of the product-integration contribution of
/// cell [t_j, t_{j+1}] to node k: left/right weights against f_nodes, or the
/// midpoint weight against f_mid[j] where midpoint_cell[j] != 0.
/// out[0] = 0. f_mid and midpoint_cell may be empty (all cells trapezoidal).
void fractional_convolution_serial(const ProductWeights& w, std::span<const double> f_nodes,
                                   std::span<const double> f_mid,
                                   std::span<const std::uint8_t> midpoint_cell,
                                   std::span<double> out);

void fractional_convolution_omp(const ProductWeights& w, std::span<const double> f_nodes,
                                std::span<const double> f_mid,
                                std::span<const std::uint8_t> midpoint_cell,
                                std::span<double> out);

inline void fractional_convolution(Execution exec, const ProductWeights& w,
                                   std::span<const double> f_nodes, std::span<const double> f_mid,
                                   std::span<const std::uint8_t> midpoint_cell,
                                   std::span<double> out) {
  if (exec == Execution::Serial) {
    fractional_convolution_serial(w, f_nodes, f_mid, midpoint_cell, out);
  } else {
    fractional_convolution_omp(w, f_nodes, f_mid, midpoint_cell, out);
  }
}

}  // namespace fdelay::kernels
