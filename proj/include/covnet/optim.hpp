#pragma once

#include <vector>

#include "covnet/types.hpp"

namespace covnet {

// A flat, mutable view onto one parameter array (Eigen storage is contiguous).
struct ParamView {
  double* data = nullptr;
  Index size = 0;
};

struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long t = 0;
  std::vector<Vector> m, v;  // first/second moments, congruent to the params

  static AdamState for_params(const std::vector<ParamView>& params);
};

// Standard Adam with bias correction; updates params in place.
void adam_step(AdamState& adam, const std::vector<ParamView>& params,
               const std::vector<ParamView>& grads, double lr);

}  // namespace covnet
