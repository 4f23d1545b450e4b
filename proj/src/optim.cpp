#include "covnet/optim.hpp"

#include <cmath>

namespace covnet {

AdamState AdamState::for_params(const std::vector<ParamView>& params) {
  AdamState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (const auto& p : params) {
    st.m.push_back(Vector::Zero(p.size));
    st.v.push_back(Vector::Zero(p.size));
  }
  return st;
}

void adam_step(AdamState& adam, const std::vector<ParamView>& params,
               const std::vector<ParamView>& grads, double lr) {
  require(lr > 0.0, "adam_step: lr must be positive");
  require(params.size() == grads.size() && params.size() == adam.m.size(),
          "adam_step: state/params/grads are not congruent");
  adam.t += 1;
  double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
  double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
  for (std::size_t a = 0; a < params.size(); ++a) {
    require(params[a].size == grads[a].size && params[a].size == adam.m[a].size(),
            "adam_step: array shape mismatch");
    double* p = params[a].data;
    const double* g = grads[a].data;
    Vector& m = adam.m[a];
    Vector& v = adam.v[a];
    for (Index i = 0; i < params[a].size; ++i) {
      m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
      v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + adam.eps);
    }
  }
}

}  // namespace covnet
