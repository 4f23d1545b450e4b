#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covnet/dataset.hpp"
#include "covnet/rng.hpp"

namespace covnet {

struct SplitSpec {
  double train = 0.7, val = 0.1, test = 0.2;
  std::uint64_t seed = 0;
};

// Isotropic Gaussian class clusters: centers are unit directions scaled to
// center_scale, samples are center + N(0, spread^2) per coordinate. With a
// superclass_map, class centers become small perturbations (center_scale /
// hier_ratio) of well-separated superclass centers.
struct BlobSpec {
  int classes = 4;
  int per_class = 200;
  int dim = 20;
  double spread = 0.5;
  double center_scale = 5.0;
  std::uint64_t seed = 0;
  std::vector<int> superclass_map;  // label -> superclass; empty = flat blobs
  double hier_ratio = 5.0;          // D_super / D_sub
};

LabeledDataset gen_blobs(const BlobSpec& spec);
LabeledDataset gen_hierarchical(const BlobSpec& spec);

// CSV with header "label,f0,...,f{p-1}"; features printed at full round-trip
// precision. Loading remaps labels to contiguous [0, C).
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& ds, const std::string& path);

// IDX (big-endian) image/label files; pixels scaled to [0, 1].
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

struct SplitResult {
  LabeledDataset train, val, test;
};

// Stratified per class, deterministic per seed; per-class counts within 1 of
// the exact fractions.
SplitResult split(const LabeledDataset& ds, const SplitSpec& spec);

// Per-feature statistics computed on a training split. A zero stddev marks a
// constant feature that standardization passes through unchanged.
struct FeatureStats {
  Vector mean, stddev;
};

FeatureStats compute_feature_stats(const Matrix& X);
void apply_standardization(Matrix& X, const FeatureStats& stats);

// Computes stats on `train` and applies them to train and every dataset in
// `others`; returns the stats for checkpointing.
FeatureStats standardize(LabeledDataset& train, std::vector<LabeledDataset*> others);

}  // namespace covnet
