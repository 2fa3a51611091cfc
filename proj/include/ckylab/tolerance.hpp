#pragma once

#include <cmath>

#include "errors.hpp"

namespace ckylab {

struct ToleranceConfig {
  double jacobi = 1e-10;
  /// Singular values below rank_rel * sigma_max count as zero.
  double rank_rel = 1e-10;
  double residual = 1e-9;

  void validate() const {
    for (double v : {jacobi, rank_rel, residual}) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("tolerances must be finite and non-negative");
      }
    }
  }
};

}  // namespace ckylab
