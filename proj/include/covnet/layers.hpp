#pragma once

#include <string>
#include <utility>
#include <vector>

#include "covnet/rng.hpp"
#include "covnet/types.hpp"

namespace covnet {

enum class LayerKind { Dense, ReLU, Tanh, BatchNorm, Dropout, L2Norm };
enum class Mode { Train, Infer };

inline constexpr double kL2NormEps = 1e-12;
inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  int in = 0, out = 0;  // Dense
  int dim = 0;          // BatchNorm
  double rate = 0.0;    // Dropout

  static LayerSpec dense(int in, int out);
  static LayerSpec relu() { return {LayerKind::ReLU}; }
  static LayerSpec tanh() { return {LayerKind::Tanh}; }
  static LayerSpec batch_norm(int dim);
  static LayerSpec dropout(double rate);
  static LayerSpec l2norm() { return {LayerKind::L2Norm}; }
};

std::string layer_kind_name(LayerKind kind);

// Parameters of one layer. Running statistics are inference state, not
// trainable parameters.
struct LayerState {
  LayerSpec spec;
  Matrix W;  // Dense: in x out
  Vector b;  // Dense: out
  Vector gamma, beta, running_mean, running_var;  // BatchNorm, per feature
};

// Forward byproducts needed by the matching backward call.
struct LayerCache {
  Matrix X;        // Dense, ReLU, L2Norm: input
  Matrix Y;        // Tanh: output
  Matrix mask;     // Dropout: keep mask, already scaled by 1/(1-rate)
  Matrix xhat;     // BatchNorm: normalized input
  Vector inv_std;  // BatchNorm: 1/sqrt(var + eps)
};

struct LayerGrads {
  Matrix dW;
  Vector db;
  Vector dgamma, dbeta;
};

// Dense weights: Glorot-uniform; biases zero; BatchNorm gamma=1, beta=0.
LayerState init_layer(const LayerSpec& spec, Pcg32& rng);

int layer_out_width(const LayerSpec& spec, int in_width);

std::pair<Matrix, LayerCache> layer_forward(LayerState& state, const Matrix& X,
                                            Mode mode, Pcg32& rng);

std::pair<Matrix, LayerGrads> layer_backward(const LayerState& state,
                                             const LayerCache& cache,
                                             const Matrix& dY);

// A stack is an ordered list of layers applied left to right.
using LayerStack = std::vector<LayerState>;

struct StackCache {
  std::vector<LayerCache> layers;
};

LayerStack init_stack(const std::vector<LayerSpec>& specs, Pcg32& rng);

Matrix stack_forward(LayerStack& stack, const Matrix& X, Mode mode, Pcg32& rng,
                     StackCache* cache = nullptr);

// Accumulates parameter gradients into `grads` (shape-congruent with the
// stack; see zero_grads_for) and returns the gradient w.r.t. the stack input.
Matrix stack_backward(const LayerStack& stack, const StackCache& cache,
                      Matrix dY, std::vector<LayerGrads>& grads);

std::vector<LayerGrads> zero_grads_for(const LayerStack& stack);

}  // namespace covnet
