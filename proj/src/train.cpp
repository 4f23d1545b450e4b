#include "covnet/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace covnet {

namespace {

// Fixed sub-streams of the run seed; training replays exactly from (seed,
// datasets, config).
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamTrain = 2;
constexpr std::uint64_t kStreamValMap = 3;
constexpr std::uint64_t kStreamTrainMap = 4;
constexpr std::uint64_t kStreamEpochMap = 16;

struct BatchIndices {
  std::vector<int> left, right, neg;  // neg only for triplets
  std::vector<int> labels;            // empty for triplet/n-pair
};

Matrix take_rows(const Matrix& X, const std::vector<int>& rows) {
  Matrix out(static_cast<Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = X.row(rows[i]);
  return out;
}

StepResult run_step(Model& model, const LabeledDataset& ds,
                    const BatchIndices& batch, Mode mode, Pcg32& rng) {
  if (model.spec.loss == LossKind::TripletLoss) {
    TripletBatch tb{take_rows(ds.X, batch.left), take_rows(ds.X, batch.right),
                    take_rows(ds.X, batch.neg)};
    return triplet_step(model, tb, mode, rng);
  }
  if (model.spec.loss == LossKind::NPairLoss) {
    return npair_step(model, take_rows(ds.X, batch.left),
                      take_rows(ds.X, batch.right), mode, rng);
  }
  PairBatch pb{take_rows(ds.X, batch.left), take_rows(ds.X, batch.right),
               batch.labels};
  return pair_step(model, pb, mode, rng);
}

// Cuts the mapped set (in `order` order) into consecutive mini-batches of
// index lists. N-pair batches below 2 are dropped.
std::vector<BatchIndices> make_batches(const MappedSet& mapped,
                                       const std::vector<int>& order,
                                       int batch_size, bool npair) {
  std::vector<BatchIndices> batches;
  std::size_t total = order.size();
  for (std::size_t start = 0; start < total; start += static_cast<std::size_t>(batch_size)) {
    std::size_t end = std::min(total, start + static_cast<std::size_t>(batch_size));
    if (npair && end - start < 2) break;
    BatchIndices b;
    for (std::size_t i = start; i < end; ++i) {
      int item = order[i];
      if (const auto* pairs = std::get_if<PairBatchSet>(&mapped)) {
        b.left.push_back(pairs->pairs[static_cast<std::size_t>(item)].first);
        b.right.push_back(pairs->pairs[static_cast<std::size_t>(item)].second);
        if (!npair) b.labels.push_back(pairs->labels[static_cast<std::size_t>(item)]);
      } else {
        const auto& t = std::get<TripletSet>(mapped).triples[static_cast<std::size_t>(item)];
        b.left.push_back(t[0]);
        b.right.push_back(t[1]);
        b.neg.push_back(t[2]);
      }
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

std::size_t mapped_size(const MappedSet& mapped) {
  if (const auto* pairs = std::get_if<PairBatchSet>(&mapped))
    return pairs->pairs.size();
  return std::get<TripletSet>(mapped).triples.size();
}

}  // namespace

MappedSet generate_mapping(const VariantSpec& spec, const LabeledDataset& ds,
                           Pcg32& rng) {
  switch (spec.mapping) {
    case MappingKind::IM: return im_map(ds, rng);
    case MappingKind::IIM: return iim_map(ds, rng).first;
    case MappingKind::ISIM: return isim_map(ds, rng);
    case MappingKind::TM: return triplet_map(ds, rng);
  }
  throw ContractError("unknown mapping kind");
}

double evaluate_loss(Model& model, const LabeledDataset& ds,
                     const MappedSet& mapped, int batch_size) {
  require(batch_size >= 1, "evaluate_loss: batch_size must be >= 1");
  if (const auto* pairs = std::get_if<PairBatchSet>(&mapped)) {
    bool binary = pairs->kind == LabelKind::Binary;
    require(model.spec.loss != LossKind::CategoricalCE || !binary,
            "evaluate_loss: binary mapping fed to a categorical loss");
    require((model.spec.loss != LossKind::BinaryCE &&
             model.spec.loss != LossKind::Contrastive) ||
                binary,
            "evaluate_loss: categorical mapping fed to a binary loss");
  } else {
    require(model.spec.loss == LossKind::TripletLoss,
            "evaluate_loss: triplet set fed to a non-triplet loss");
  }
  std::vector<int> order(mapped_size(mapped));
  std::iota(order.begin(), order.end(), 0);
  bool npair = model.spec.loss == LossKind::NPairLoss;
  auto batches = make_batches(mapped, order, batch_size, npair);
  require(!batches.empty(), "evaluate_loss: empty mapped set");
  Pcg32 rng(0);  // inference mode consumes no randomness
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& b : batches) {
    StepResult r = run_step(model, ds, b, Mode::Infer, rng);
    total += r.loss * static_cast<double>(b.left.size());
    count += b.left.size();
  }
  return total / static_cast<double>(count);
}

TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                  const TrainConfig& cfg) {
  require(cfg.epochs >= 1, "train: epochs must be >= 1");
  require(cfg.batch_size >= 1, "train: batch_size must be >= 1");
  require(cfg.lr > 0.0, "train: lr must be positive");
  require(cfg.patience >= 1, "train: patience must be >= 1");
  require(train_ds.dim() == val_ds.dim(), "train: train/val dimension mismatch");
  require(train_ds.C == val_ds.C, "train: train/val class count mismatch");

  VariantSpec spec =
      variant_spec(variant_from_name(cfg.variant), cfg.siamese_contrastive);
  bool npair = spec.loss == LossKind::NPairLoss;
  require(!npair || cfg.batch_size >= 2, "train: n-pair needs batch_size >= 2");

  Pcg32 rng_init(cfg.seed, kStreamInit);
  Model model = build_model(spec, static_cast<int>(train_ds.dim()), train_ds.C,
                            cfg.net, cfg.margin, rng_init);
  auto params = trainable_params(model);
  AdamState adam = AdamState::for_params(params);

  // The validation mapping is generated once so early stopping tracks a
  // fixed estimator.
  Pcg32 rng_val(cfg.seed, kStreamValMap);
  MappedSet val_map = generate_mapping(spec, val_ds, rng_val);

  MappedSet fixed_train_map;
  if (!cfg.resample_per_epoch) {
    Pcg32 rng_map(cfg.seed, kStreamTrainMap);
    fixed_train_map = generate_mapping(spec, train_ds, rng_map);
  }

  Pcg32 rng_train(cfg.seed, kStreamTrain);

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  Model best = model;
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();

    MappedSet epoch_map;
    const MappedSet* mapped = &fixed_train_map;
    if (cfg.resample_per_epoch) {
      Pcg32 rng_map(cfg.seed, kStreamEpochMap + static_cast<std::uint64_t>(epoch));
      epoch_map = generate_mapping(spec, train_ds, rng_map);
      mapped = &epoch_map;
    }

    std::vector<int> order(mapped_size(*mapped));
    std::iota(order.begin(), order.end(), 0);
    rng_train.shuffle(order);
    auto batches = make_batches(*mapped, order, cfg.batch_size, npair);
    require(!batches.empty(), "train: no usable batches this epoch");

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      StepResult r = run_step(model, train_ds, batches[b], Mode::Train, rng_train);
      if (!std::isfinite(r.loss))
        throw NumericError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(b));
      auto gviews = grad_views(r.grads);
      adam_step(adam, params, gviews, cfg.lr);
      total += r.loss * static_cast<double>(batches[b].left.size());
      count += batches[b].left.size();
    }
    double train_loss = total / static_cast<double>(count);
    double val_loss = evaluate_loss(model, val_ds, val_map, cfg.batch_size);
    if (!std::isfinite(val_loss))
      throw NumericError("train: non-finite validation loss at epoch " +
                         std::to_string(epoch));

    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    result.history.push_back({epoch, train_loss, val_loss, secs});

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      best = model;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }

  result.model = std::move(best);
  return result;
}

}  // namespace covnet
