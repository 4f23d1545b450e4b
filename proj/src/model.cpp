#include "covnet/model.hpp"

#include <cmath>

#include "covnet/losses.hpp"
#include "covnet/merge.hpp"

namespace covnet {

VariantSpec variant_spec(Variant v, bool siamese_contrastive) {
  switch (v) {
    case Variant::CovNetV1:
      return {v, MappingKind::IM, MergeKind::Covariance, TailKind::SoftmaxDense,
              LossKind::CategoricalCE};
    case Variant::CovNetV2:
      return {v, MappingKind::IIM, MergeKind::Covariance, TailKind::SoftmaxDense,
              LossKind::CategoricalCE};
    case Variant::CovNetV3:
      return {v, MappingKind::ISIM, MergeKind::Covariance, TailKind::SigmoidDense,
              LossKind::BinaryCE};
    case Variant::Siamese:
      return {v, MappingKind::ISIM, MergeKind::Euclidean,
              siamese_contrastive ? TailKind::None : TailKind::SigmoidDense,
              siamese_contrastive ? LossKind::Contrastive : LossKind::BinaryCE};
    case Variant::Triplet:
      return {v, MappingKind::TM, MergeKind::None, TailKind::None,
              LossKind::TripletLoss};
    case Variant::NPair:
      return {v, MappingKind::IM, MergeKind::None, TailKind::None,
              LossKind::NPairLoss};
  }
  throw ContractError("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "covnet-v1") return Variant::CovNetV1;
  if (name == "covnet-v2") return Variant::CovNetV2;
  if (name == "covnet-v3") return Variant::CovNetV3;
  if (name == "siamese") return Variant::Siamese;
  if (name == "triplet") return Variant::Triplet;
  if (name == "n-pair") return Variant::NPair;
  throw ContractError(
      "unknown variant '" + name +
      "' (valid: covnet-v1, covnet-v2, covnet-v3, siamese, triplet, n-pair)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::CovNetV1: return "covnet-v1";
    case Variant::CovNetV2: return "covnet-v2";
    case Variant::CovNetV3: return "covnet-v3";
    case Variant::Siamese: return "siamese";
    case Variant::Triplet: return "triplet";
    case Variant::NPair: return "n-pair";
  }
  throw ContractError("unknown variant");
}

std::vector<LayerSpec> embedding_specs(int input_dim, const NetworkConfig& net) {
  require(input_dim > 0, "embedding network: input dim must be positive");
  require(net.embed_dim > 0, "embedding network: embed_dim must be positive");
  std::vector<LayerSpec> specs;
  int width = input_dim;
  for (int h : net.hidden) {
    specs.push_back(LayerSpec::dense(width, h));
    specs.push_back(LayerSpec::relu());
    if (net.dropout > 0.0) specs.push_back(LayerSpec::dropout(net.dropout));
    width = h;
  }
  specs.push_back(LayerSpec::dense(width, net.embed_dim));
  specs.push_back(LayerSpec::tanh());
  specs.push_back(LayerSpec::l2norm());
  return specs;
}

Model build_model(const VariantSpec& spec, int input_dim, int n_raw_classes,
                  const NetworkConfig& net, double margin, Pcg32& rng) {
  Model m;
  m.spec = spec;
  m.in_dim = input_dim;
  m.embed_dim = net.embed_dim;
  m.margin = margin;
  m.n_class = n_class_for(spec.mapping, n_raw_classes);
  m.embed = init_stack(embedding_specs(input_dim, net), rng);

  // Tail input width: the merge output (covariance vector is q wide, a
  // Euclidean distance is a single column).
  int merged = spec.merge == MergeKind::Covariance ? net.embed_dim
               : spec.merge == MergeKind::Euclidean ? 1
                                                    : 0;
  if (spec.tail == TailKind::SoftmaxDense) {
    require(m.n_class >= 2, "softmax tail needs at least 2 mapped classes");
    m.tail = init_stack({LayerSpec::dense(merged, m.n_class)}, rng);
  } else if (spec.tail == TailKind::SigmoidDense) {
    m.tail = init_stack(
        {LayerSpec::batch_norm(merged), LayerSpec::dense(merged, 1)}, rng);
  }
  return m;
}

Matrix embed(Model& model, const Matrix& X, Mode mode, Pcg32* rng) {
  require(X.cols() == model.in_dim, "embed: input width mismatch");
  Pcg32 dummy(0);
  require(mode == Mode::Infer || rng != nullptr,
          "embed: Train mode requires an rng");
  return stack_forward(model.embed, X, mode, rng ? *rng : dummy);
}

ModelGrads zero_grads(const Model& model) {
  return {zero_grads_for(model.embed), zero_grads_for(model.tail)};
}

namespace {

struct TailResult {
  Matrix out;
  StackCache cache;
};

// Scatters the merged-representation gradient back through both embedding
// branches, accumulating phi gradients from each.
void backprop_branches(Model& model, const StackCache& cache_l,
                       const StackCache& cache_r, const Matrix& dZl,
                       const Matrix& dZr, ModelGrads& grads) {
  stack_backward(model.embed, cache_l, dZl, grads.embed);
  stack_backward(model.embed, cache_r, dZr, grads.embed);
}

}  // namespace

StepResult pair_step(Model& model, const PairBatch& batch, Mode mode, Pcg32& rng) {
  require(batch.Xl.rows() == batch.Xr.rows() &&
              static_cast<std::size_t>(batch.Xl.rows()) == batch.labels.size(),
          "pair_step: batch shape mismatch");
  require(model.spec.merge != MergeKind::None,
          "pair_step: variant has no merge layer");

  StepResult res;
  res.grads = zero_grads(model);

  StackCache cache_l, cache_r;
  Matrix Zl = stack_forward(model.embed, batch.Xl, mode, rng, &cache_l);
  Matrix Zr = stack_forward(model.embed, batch.Xr, mode, rng, &cache_r);

  if (model.spec.merge == MergeKind::Covariance) {
    Matrix V = covariance_vector(Zl, Zr);
    StackCache tail_cache;
    Matrix logits = stack_forward(model.tail, V, mode, rng, &tail_cache);
    LossGrad lg;
    if (model.spec.loss == LossKind::CategoricalCE) {
      lg = ce_loss(logits, one_hot(batch.labels, model.n_class));
    } else {
      lg = be_loss(logits, batch.labels);
    }
    res.loss = lg.loss;
    if (mode == Mode::Infer) return res;  // loss-only path
    Matrix dV = stack_backward(model.tail, tail_cache, lg.dlogits, res.grads.tail);
    PairGrad pg = covariance_vector_backward(Zl, Zr, dV);
    backprop_branches(model, cache_l, cache_r, pg.dZl, pg.dZr, res.grads);
    return res;
  }

  // Euclidean merge (Siamese): distance column into the sigmoid tail, or
  // straight into the margin contrastive objective.
  Vector dist = euclidean_distance(Zl, Zr);
  Vector ddist;
  if (model.spec.loss == LossKind::BinaryCE) {
    Matrix D = dist;
    StackCache tail_cache;
    Matrix logit = stack_forward(model.tail, D, mode, rng, &tail_cache);
    LossGrad lg = be_loss(logit, batch.labels);
    res.loss = lg.loss;
    if (mode == Mode::Infer) return res;
    Matrix dD = stack_backward(model.tail, tail_cache, lg.dlogits, res.grads.tail);
    ddist = dD.col(0);
  } else if (model.spec.loss == LossKind::Contrastive) {
    DistanceLossGrad dl = contrastive_loss(dist, batch.labels, model.margin);
    res.loss = dl.loss;
    if (mode == Mode::Infer) return res;
    ddist = dl.ddist;
  } else {
    throw ContractError("pair_step: unsupported loss for Euclidean merge");
  }
  PairGrad pg = euclidean_distance_backward(Zl, Zr, dist, ddist);
  backprop_branches(model, cache_l, cache_r, pg.dZl, pg.dZr, res.grads);
  return res;
}

StepResult triplet_step(Model& model, const TripletBatch& batch, Mode mode,
                        Pcg32& rng) {
  require(model.spec.loss == LossKind::TripletLoss,
          "triplet_step: variant is not triplet");
  StepResult res;
  res.grads = zero_grads(model);
  StackCache ca, cp, cn;
  Matrix Za = stack_forward(model.embed, batch.Xa, mode, rng, &ca);
  Matrix Zp = stack_forward(model.embed, batch.Xp, mode, rng, &cp);
  Matrix Zn = stack_forward(model.embed, batch.Xn, mode, rng, &cn);
  TripletLossGrad tl = triplet_loss(Za, Zp, Zn, model.margin);
  res.loss = tl.loss;
  if (mode == Mode::Infer) return res;
  stack_backward(model.embed, ca, tl.dZa, res.grads.embed);
  stack_backward(model.embed, cp, tl.dZp, res.grads.embed);
  stack_backward(model.embed, cn, tl.dZn, res.grads.embed);
  return res;
}

StepResult npair_step(Model& model, const Matrix& Xa, const Matrix& Xp,
                      Mode mode, Pcg32& rng) {
  require(model.spec.loss == LossKind::NPairLoss,
          "npair_step: variant is not n-pair");
  StepResult res;
  res.grads = zero_grads(model);
  StackCache ca, cp;
  Matrix Za = stack_forward(model.embed, Xa, mode, rng, &ca);
  Matrix Zp = stack_forward(model.embed, Xp, mode, rng, &cp);
  NPairLossGrad nl = npair_loss(Za, Zp);
  res.loss = nl.loss;
  if (mode == Mode::Infer) return res;
  stack_backward(model.embed, ca, nl.dZa, res.grads.embed);
  stack_backward(model.embed, cp, nl.dZp, res.grads.embed);
  return res;
}

namespace {

void collect_params(LayerStack& stack, std::vector<ParamView>& out) {
  for (auto& layer : stack) {
    if (layer.spec.kind == LayerKind::Dense) {
      out.push_back({layer.W.data(), layer.W.size()});
      out.push_back({layer.b.data(), layer.b.size()});
    } else if (layer.spec.kind == LayerKind::BatchNorm) {
      out.push_back({layer.gamma.data(), layer.gamma.size()});
      out.push_back({layer.beta.data(), layer.beta.size()});
    }
  }
}

void collect_grads(std::vector<LayerGrads>& grads, std::vector<ParamView>& out) {
  for (auto& g : grads) {
    if (g.dW.size() > 0) {
      out.push_back({g.dW.data(), g.dW.size()});
      out.push_back({g.db.data(), g.db.size()});
    } else if (g.dgamma.size() > 0) {
      out.push_back({g.dgamma.data(), g.dgamma.size()});
      out.push_back({g.dbeta.data(), g.dbeta.size()});
    }
  }
}

}  // namespace

std::vector<ParamView> trainable_params(Model& model) {
  std::vector<ParamView> out;
  collect_params(model.embed, out);
  collect_params(model.tail, out);
  return out;
}

std::vector<ParamView> grad_views(ModelGrads& grads) {
  std::vector<ParamView> out;
  collect_grads(grads.embed, out);
  collect_grads(grads.tail, out);
  return out;
}

}  // namespace covnet
