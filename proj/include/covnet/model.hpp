#pragma once

#include <string>
#include <vector>

#include "covnet/layers.hpp"
#include "covnet/mapping.hpp"
#include "covnet/optim.hpp"

namespace covnet {

enum class Variant { CovNetV1, CovNetV2, CovNetV3, Siamese, Triplet, NPair };
enum class MergeKind { Covariance, Euclidean, None };
enum class TailKind { SoftmaxDense, SigmoidDense, None };
enum class LossKind { CategoricalCE, BinaryCE, Contrastive, TripletLoss, NPairLoss };

// One row of the architecture table: how a variant maps, merges, classifies
// and scores. The Siamese row pairs the printed sigmoid tail with binary
// cross-entropy; the classic margin contrastive form is an option.
struct VariantSpec {
  Variant variant = Variant::CovNetV1;
  MappingKind mapping = MappingKind::IM;
  MergeKind merge = MergeKind::Covariance;
  TailKind tail = TailKind::SoftmaxDense;
  LossKind loss = LossKind::CategoricalCE;
};

VariantSpec variant_spec(Variant v, bool siamese_contrastive = false);
Variant variant_from_name(const std::string& name);
std::string variant_name(Variant v);

struct NetworkConfig {
  std::vector<int> hidden{32};  // Dense+ReLU widths before the embedding layer
  int embed_dim = 16;           // q
  double dropout = 0.0;         // applied after each hidden ReLU when > 0
};

// A full two-branch model: the shared embedding network F (phi) and the tail
// head G (psi). Both branches run through the same LayerStack instance.
struct Model {
  VariantSpec spec;
  LayerStack embed;  // ends Dense(., q) - Tanh - L2Norm
  LayerStack tail;   // SoftmaxDense: Dense(q, n_class); SigmoidDense: BN + Dense(w, 1)
  int in_dim = 0;
  int embed_dim = 0;
  int n_class = 0;  // mapped label space (0 for Triplet/NPair)
  double margin = 0.2;
};

std::vector<LayerSpec> embedding_specs(int input_dim, const NetworkConfig& net);

Model build_model(const VariantSpec& spec, int input_dim, int n_raw_classes,
                  const NetworkConfig& net, double margin, Pcg32& rng);

// Projects rows of X to unit-norm q-dimensional embeddings. Train mode
// requires an rng (dropout) and updates BatchNorm running statistics.
Matrix embed(Model& model, const Matrix& X, Mode mode = Mode::Infer,
             Pcg32* rng = nullptr);

struct ModelGrads {
  std::vector<LayerGrads> embed, tail;
};

ModelGrads zero_grads(const Model& model);

struct StepResult {
  double loss = 0.0;
  ModelGrads grads;
};

// Mini-batches with rows already gathered from the dataset.
struct PairBatch {
  Matrix Xl, Xr;
  std::vector<int> labels;  // class ids (categorical) or 0/1 (binary)
};
struct TripletBatch {
  Matrix Xa, Xp, Xn;
};

// Loss and parameter gradients for one mini-batch; both branch passes
// accumulate into the single shared phi. Infer mode computes the loss only
// (dropout off, BatchNorm running stats) and leaves the gradients zero.
StepResult pair_step(Model& model, const PairBatch& batch, Mode mode, Pcg32& rng);
StepResult triplet_step(Model& model, const TripletBatch& batch, Mode mode,
                        Pcg32& rng);
StepResult npair_step(Model& model, const Matrix& Xa, const Matrix& Xp,
                      Mode mode, Pcg32& rng);

// Flat views over the trainable arrays (embed then tail, Dense W/b and
// BatchNorm gamma/beta in layer order). grad_views is congruent.
std::vector<ParamView> trainable_params(Model& model);
std::vector<ParamView> grad_views(ModelGrads& grads);

}  // namespace covnet
