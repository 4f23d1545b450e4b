#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "covnet/model.hpp"

namespace covnet {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 32;
  double lr = 1e-3;
  std::uint64_t seed = 42;
  int patience = 20;
  bool resample_per_epoch = true;
  std::string variant = "covnet-v1";
  double margin = 0.2;
  bool siamese_contrastive = false;
  NetworkConfig net;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

using TrainHistory = std::vector<EpochRecord>;

struct TrainResult {
  Model model;  // snapshot with the minimum validation loss
  TrainHistory history;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

// The variant's mapped supervision over a dataset.
using MappedSet = std::variant<PairBatchSet, TripletSet>;

MappedSet generate_mapping(const VariantSpec& spec, const LabeledDataset& ds,
                           Pcg32& rng);

// The fixed mapping train() scores validation loss on (a sub-stream of the
// run seed, generated once per run).
MappedSet validation_mapping(const VariantSpec& spec, const LabeledDataset& ds,
                             std::uint64_t seed);

// Mean loss over the mapped set in inference mode (dropout off, BatchNorm
// running stats); no parameters change. The n-pair loss is evaluated over
// consecutive batches of `batch_size` (its value depends on batch
// composition by construction).
double evaluate_loss(Model& model, const LabeledDataset& ds,
                     const MappedSet& mapped, int batch_size);

// Epoch loop: regenerate the mapped pairs/triplets (an epoch-derived
// sub-seed), shuffle, run mini-batch forward/backward, Adam-update the
// wrapped parameter set. Validation uses a mapping generated once; the
// returned model is the snapshot with the minimum validation loss, and the
// loop stops after `patience` epochs without improvement.
TrainResult train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                  const TrainConfig& cfg);

}  // namespace covnet
