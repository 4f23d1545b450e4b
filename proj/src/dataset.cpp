#include "covnet/dataset.hpp"

#include <algorithm>
#include <map>

namespace covnet {

std::vector<std::vector<int>> build_class_groups(const std::vector<int>& Y, int C) {
  std::vector<std::vector<int>> cg(static_cast<std::size_t>(C));
  for (std::size_t i = 0; i < Y.size(); ++i) {
    require(Y[i] >= 0 && Y[i] < C,
            "build_class_groups: label " + std::to_string(Y[i]) +
                " outside [0, " + std::to_string(C) + ")");
    cg[static_cast<std::size_t>(Y[i])].push_back(static_cast<int>(i));
  }
  for (int c = 0; c < C; ++c)
    require(!cg[static_cast<std::size_t>(c)].empty(),
            "build_class_groups: class " + std::to_string(c) +
                " has no samples (labels not contiguous)");
  return cg;
}

LabeledDataset make_dataset(Matrix X, std::vector<int> Y) {
  require(X.rows() == static_cast<Index>(Y.size()),
          "make_dataset: row/label count mismatch");
  require_finite(X, "make_dataset features");
  LabeledDataset ds;
  int C = 0;
  for (int y : Y) C = std::max(C, y + 1);
  ds.CG = build_class_groups(Y, C);
  ds.X = std::move(X);
  ds.Y = std::move(Y);
  ds.C = C;
  ds.ids.resize(static_cast<std::size_t>(ds.X.rows()));
  for (std::size_t i = 0; i < ds.ids.size(); ++i) ds.ids[i] = static_cast<long>(i);
  ds.label_names.resize(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) ds.label_names[static_cast<std::size_t>(c)] = c;
  return ds;
}

LabeledDataset make_dataset_remapped(Matrix X, const std::vector<long>& raw_labels) {
  std::map<long, int> remap;
  for (long y : raw_labels) remap.emplace(y, 0);
  int next = 0;
  std::vector<long> names;
  names.reserve(remap.size());
  for (auto& [orig, id] : remap) {
    id = next++;
    names.push_back(orig);
  }
  std::vector<int> Y;
  Y.reserve(raw_labels.size());
  for (long y : raw_labels) Y.push_back(remap[y]);
  LabeledDataset ds = make_dataset(std::move(X), std::move(Y));
  ds.label_names = std::move(names);
  return ds;
}

LabeledDataset subset(const LabeledDataset& ds, const std::vector<int>& rows) {
  LabeledDataset out;
  out.X.resize(static_cast<Index>(rows.size()), ds.X.cols());
  out.Y.reserve(rows.size());
  out.ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    require(r >= 0 && r < ds.size(), "subset: row index out of range");
    out.X.row(static_cast<Index>(i)) = ds.X.row(r);
    out.Y.push_back(ds.Y[static_cast<std::size_t>(r)]);
    out.ids.push_back(ds.ids[static_cast<std::size_t>(r)]);
  }
  // Keeps the parent's label space: a split fraction of 0 (or a tiny class)
  // can leave a bucket empty here, which mapping functions diagnose on use.
  out.C = ds.C;
  out.CG.assign(static_cast<std::size_t>(ds.C), {});
  for (std::size_t i = 0; i < out.Y.size(); ++i)
    out.CG[static_cast<std::size_t>(out.Y[i])].push_back(static_cast<int>(i));
  out.label_names = ds.label_names;
  return out;
}

}  // namespace covnet
