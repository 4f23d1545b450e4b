#pragma once

#include <cstdint>
#include <vector>

#include "covnet/types.hpp"

namespace covnet {

// A feature matrix with contiguous integer labels and the per-class row
// index (CG). `ids` are stable external identifiers (row numbers of the
// source file by default); `label_names` maps contiguous label -> original
// label value, so exports can round-trip foreign label schemes.
struct LabeledDataset {
  Matrix X;                              // N x p
  std::vector<int> Y;                    // values in [0, C)
  int C = 0;
  std::vector<std::vector<int>> CG;      // label -> row indices, ascending
  std::vector<long> ids;
  std::vector<long> label_names;

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

// Groups row indices by label. Labels must be contiguous in [0, C) with every
// class nonempty; remap first (make_dataset_remapped) otherwise.
std::vector<std::vector<int>> build_class_groups(const std::vector<int>& Y, int C);

// Builds a dataset from already-contiguous labels; identity ids/names.
LabeledDataset make_dataset(Matrix X, std::vector<int> Y);

// Remaps arbitrary integer labels to contiguous [0, C) (ascending original
// order) and records the mapping in label_names.
LabeledDataset make_dataset_remapped(Matrix X, const std::vector<long>& raw_labels);

// Row subset; ids and label_names carried over, CG rebuilt.
LabeledDataset subset(const LabeledDataset& ds, const std::vector<int>& rows);

}  // namespace covnet
