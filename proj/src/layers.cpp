#include "covnet/layers.hpp"

#include <cmath>

namespace covnet {

LayerSpec LayerSpec::dense(int in, int out) {
  require(in > 0 && out > 0, "Dense: in/out widths must be positive");
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.in = in;
  s.out = out;
  return s;
}

LayerSpec LayerSpec::batch_norm(int dim) {
  require(dim > 0, "BatchNorm: dim must be positive");
  LayerSpec s;
  s.kind = LayerKind::BatchNorm;
  s.dim = dim;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  require(rate >= 0.0 && rate < 1.0, "Dropout: rate must be in [0, 1)");
  LayerSpec s;
  s.kind = LayerKind::Dropout;
  s.rate = rate;
  return s;
}

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::ReLU: return "relu";
    case LayerKind::Tanh: return "tanh";
    case LayerKind::BatchNorm: return "batch_norm";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::L2Norm: return "l2norm";
  }
  throw ContractError("unknown layer kind");
}

LayerState init_layer(const LayerSpec& spec, Pcg32& rng) {
  LayerState st;
  st.spec = spec;
  if (spec.kind == LayerKind::Dense) {
    double limit = std::sqrt(6.0 / (spec.in + spec.out));
    st.W.resize(spec.in, spec.out);
    for (Index i = 0; i < st.W.rows(); ++i)
      for (Index j = 0; j < st.W.cols(); ++j)
        st.W(i, j) = rng.uniform(-limit, limit);
    st.b = Vector::Zero(spec.out);
  } else if (spec.kind == LayerKind::BatchNorm) {
    st.gamma = Vector::Ones(spec.dim);
    st.beta = Vector::Zero(spec.dim);
    st.running_mean = Vector::Zero(spec.dim);
    st.running_var = Vector::Ones(spec.dim);
  }
  return st;
}

int layer_out_width(const LayerSpec& spec, int in_width) {
  switch (spec.kind) {
    case LayerKind::Dense:
      require(spec.in == in_width, "Dense: input width mismatch");
      return spec.out;
    case LayerKind::BatchNorm:
      require(spec.dim == in_width, "BatchNorm: dim must match input width");
      return in_width;
    default:
      return in_width;
  }
}

std::pair<Matrix, LayerCache> layer_forward(LayerState& state, const Matrix& X,
                                            Mode mode, Pcg32& rng) {
  require_finite(X, "layer_forward input");
  const LayerSpec& spec = state.spec;
  LayerCache cache;
  Matrix Y;

  switch (spec.kind) {
    case LayerKind::Dense: {
      require(X.cols() == spec.in, "Dense: input width mismatch");
      Y = X * state.W;
      Y.rowwise() += state.b.transpose();
      cache.X = X;
      break;
    }
    case LayerKind::ReLU: {
      Y = X.cwiseMax(0.0);
      cache.X = X;
      break;
    }
    case LayerKind::Tanh: {
      Y = X.array().tanh().matrix();
      cache.Y = Y;
      break;
    }
    case LayerKind::BatchNorm: {
      require(X.cols() == spec.dim, "BatchNorm: input width mismatch");
      if (mode == Mode::Train) {
        Index n = X.rows();
        Vector mu = X.colwise().mean();
        Matrix centered = X.rowwise() - mu.transpose();
        Vector var = centered.array().square().colwise().mean();  // biased
        Vector inv_std = (var.array() + kBatchNormEps).rsqrt();
        Matrix xhat = centered.array().rowwise() * inv_std.transpose().array();
        Y = (xhat.array().rowwise() * state.gamma.transpose().array()).matrix();
        Y.rowwise() += state.beta.transpose();
        state.running_mean =
            kBatchNormMomentum * state.running_mean + (1.0 - kBatchNormMomentum) * mu;
        state.running_var =
            kBatchNormMomentum * state.running_var + (1.0 - kBatchNormMomentum) * var;
        cache.xhat = std::move(xhat);
        cache.inv_std = std::move(inv_std);
        (void)n;
      } else {
        Vector inv_std = (state.running_var.array() + kBatchNormEps).rsqrt();
        Matrix xhat = (X.rowwise() - state.running_mean.transpose()).array().rowwise() *
                      inv_std.transpose().array();
        Y = (xhat.array().rowwise() * state.gamma.transpose().array()).matrix();
        Y.rowwise() += state.beta.transpose();
      }
      break;
    }
    case LayerKind::Dropout: {
      if (mode == Mode::Train && spec.rate > 0.0) {
        double keep_scale = 1.0 / (1.0 - spec.rate);
        Matrix mask(X.rows(), X.cols());
        for (Index i = 0; i < X.rows(); ++i)
          for (Index j = 0; j < X.cols(); ++j)
            mask(i, j) = rng.next_double() < spec.rate ? 0.0 : keep_scale;
        Y = X.cwiseProduct(mask);
        cache.mask = std::move(mask);
      } else {
        Y = X;
      }
      break;
    }
    case LayerKind::L2Norm: {
      Y.resize(X.rows(), X.cols());
      for (Index i = 0; i < X.rows(); ++i) {
        double n = X.row(i).norm();
        Y.row(i) = X.row(i) / std::max(n, kL2NormEps);
      }
      cache.X = X;
      break;
    }
  }
  return {std::move(Y), std::move(cache)};
}

std::pair<Matrix, LayerGrads> layer_backward(const LayerState& state,
                                             const LayerCache& cache,
                                             const Matrix& dY) {
  const LayerSpec& spec = state.spec;
  LayerGrads grads;
  Matrix dX;

  switch (spec.kind) {
    case LayerKind::Dense: {
      require(cache.X.cols() == spec.in && dY.cols() == spec.out &&
                  dY.rows() == cache.X.rows(),
              "Dense backward: cache/gradient shape mismatch");
      dX = dY * state.W.transpose();
      grads.dW = cache.X.transpose() * dY;
      grads.db = dY.colwise().sum();
      break;
    }
    case LayerKind::ReLU: {
      require(cache.X.rows() == dY.rows() && cache.X.cols() == dY.cols(),
              "ReLU backward: shape mismatch");
      dX = (cache.X.array() > 0.0).select(dY, 0.0);
      break;
    }
    case LayerKind::Tanh: {
      require(cache.Y.rows() == dY.rows() && cache.Y.cols() == dY.cols(),
              "Tanh backward: shape mismatch");
      dX = dY.cwiseProduct((1.0 - cache.Y.array().square()).matrix());
      break;
    }
    case LayerKind::BatchNorm: {
      require(cache.xhat.rows() == dY.rows() && cache.xhat.cols() == dY.cols(),
              "BatchNorm backward: cache/gradient shape mismatch");
      grads.dgamma = dY.cwiseProduct(cache.xhat).colwise().sum();
      grads.dbeta = dY.colwise().sum();
      // dX = gamma/std * (dY - mean(dY) - xhat * mean(dY*xhat)) per feature,
      // the full Jacobian through the batch statistics.
      Vector mean_dy = dY.colwise().mean().transpose();
      Vector mean_dy_xhat = dY.cwiseProduct(cache.xhat).colwise().mean().transpose();
      Matrix t = dY.rowwise() - mean_dy.transpose();
      t -= (cache.xhat.array().rowwise() * mean_dy_xhat.transpose().array()).matrix();
      dX = (t.array().rowwise() *
            (state.gamma.cwiseProduct(cache.inv_std)).transpose().array())
               .matrix();
      break;
    }
    case LayerKind::Dropout: {
      if (cache.mask.size() > 0) {
        require(cache.mask.rows() == dY.rows() && cache.mask.cols() == dY.cols(),
                "Dropout backward: shape mismatch");
        dX = dY.cwiseProduct(cache.mask);
      } else {
        dX = dY;
      }
      break;
    }
    case LayerKind::L2Norm: {
      require(cache.X.rows() == dY.rows() && cache.X.cols() == dY.cols(),
              "L2Norm backward: shape mismatch");
      dX.resize(dY.rows(), dY.cols());
      for (Index i = 0; i < dY.rows(); ++i) {
        double n = cache.X.row(i).norm();
        if (n > kL2NormEps) {
          // (I - y yT) dY / ||x|| with y the unit output row.
          Eigen::RowVectorXd y = cache.X.row(i) / n;
          dX.row(i) = (dY.row(i) - y * (y.dot(dY.row(i)))) / n;
        } else {
          dX.row(i) = dY.row(i) / kL2NormEps;
        }
      }
      break;
    }
  }
  return {std::move(dX), std::move(grads)};
}

LayerStack init_stack(const std::vector<LayerSpec>& specs, Pcg32& rng) {
  LayerStack stack;
  stack.reserve(specs.size());
  for (const auto& s : specs) stack.push_back(init_layer(s, rng));
  return stack;
}

Matrix stack_forward(LayerStack& stack, const Matrix& X, Mode mode, Pcg32& rng,
                     StackCache* cache) {
  Matrix cur = X;
  if (cache) cache->layers.clear();
  for (auto& layer : stack) {
    auto [y, c] = layer_forward(layer, cur, mode, rng);
    cur = std::move(y);
    if (cache) cache->layers.push_back(std::move(c));
  }
  return cur;
}

Matrix stack_backward(const LayerStack& stack, const StackCache& cache,
                      Matrix dY, std::vector<LayerGrads>& grads) {
  require(cache.layers.size() == stack.size(),
          "stack_backward: cache does not match stack");
  require(grads.size() == stack.size(),
          "stack_backward: gradient accumulator does not match stack");
  for (std::size_t idx = stack.size(); idx-- > 0;) {
    auto [dx, g] = layer_backward(stack[idx], cache.layers[idx], dY);
    dY = std::move(dx);
    if (g.dW.size() > 0) grads[idx].dW += g.dW;
    if (g.db.size() > 0) grads[idx].db += g.db;
    if (g.dgamma.size() > 0) grads[idx].dgamma += g.dgamma;
    if (g.dbeta.size() > 0) grads[idx].dbeta += g.dbeta;
  }
  return dY;
}

std::vector<LayerGrads> zero_grads_for(const LayerStack& stack) {
  std::vector<LayerGrads> grads(stack.size());
  for (std::size_t i = 0; i < stack.size(); ++i) {
    const LayerState& st = stack[i];
    if (st.spec.kind == LayerKind::Dense) {
      grads[i].dW = Matrix::Zero(st.W.rows(), st.W.cols());
      grads[i].db = Vector::Zero(st.b.size());
    } else if (st.spec.kind == LayerKind::BatchNorm) {
      grads[i].dgamma = Vector::Zero(st.gamma.size());
      grads[i].dbeta = Vector::Zero(st.beta.size());
    }
  }
  return grads;
}

}  // namespace covnet
