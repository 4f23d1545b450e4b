#include "covnet/mapping.hpp"

#include <algorithm>

namespace covnet {

namespace {

void require_pairable_class(const LabeledDataset& ds, int c) {
  const auto& bucket = ds.CG[static_cast<std::size_t>(c)];
  if (bucket.size() < 2)
    throw MappingError("class " + std::to_string(c) + " has " +
                       std::to_string(bucket.size()) +
                       " sample(s); need >= 2 to draw a distinct partner");
}

// Uniform draw from CG[c], rejecting index `self` (Algorithm 1's do-while).
int draw_partner(const LabeledDataset& ds, int c, int self, Pcg32& rng) {
  const auto& bucket = ds.CG[static_cast<std::size_t>(c)];
  int j;
  do {
    j = bucket[rng.uniform_int(static_cast<std::uint32_t>(bucket.size()))];
  } while (j == self);
  return j;
}

int draw_any(const LabeledDataset& ds, int c, Pcg32& rng) {
  const auto& bucket = ds.CG[static_cast<std::size_t>(c)];
  return bucket[rng.uniform_int(static_cast<std::uint32_t>(bucket.size()))];
}

}  // namespace

MappingKind mapping_from_string(const std::string& s) {
  if (s == "im") return MappingKind::IM;
  if (s == "iim") return MappingKind::IIM;
  if (s == "isim") return MappingKind::ISIM;
  if (s == "tm") return MappingKind::TM;
  throw ContractError("unknown mapping kind '" + s +
                      "' (valid: im, iim, isim, tm)");
}

std::string mapping_name(MappingKind kind) {
  switch (kind) {
    case MappingKind::IM: return "im";
    case MappingKind::IIM: return "iim";
    case MappingKind::ISIM: return "isim";
    case MappingKind::TM: return "tm";
  }
  throw ContractError("unknown mapping kind");
}

int LabelVocabulary::id_of(const std::string& s) const {
  auto it = index.find(s);
  require(it != index.end(), "label vocabulary: unknown label '" + s + "'");
  return it->second;
}

const std::string& LabelVocabulary::label_of(int id) const {
  require(id >= 0 && id < size(), "label vocabulary: id out of range");
  return labels[static_cast<std::size_t>(id)];
}

std::string iim_label(int a, int b) {
  require(a >= 0 && b >= 0, "iim_label: labels must be nonnegative");
  if (a > b) std::swap(a, b);
  return std::to_string(a) + "-" + std::to_string(b);
}

LabelVocabulary build_label_vocabulary(int C) {
  require(C >= 1, "label vocabulary: C must be >= 1");
  LabelVocabulary vocab;
  for (int a = 0; a < C; ++a)
    for (int b = a; b < C; ++b) vocab.labels.push_back(iim_label(a, b));
  std::sort(vocab.labels.begin(), vocab.labels.end());
  for (std::size_t i = 0; i < vocab.labels.size(); ++i)
    vocab.index.emplace(vocab.labels[i], static_cast<int>(i));
  return vocab;
}

int n_class_for(MappingKind kind, int C) {
  require(C >= 1, "n_class_for: C must be >= 1");
  switch (kind) {
    case MappingKind::IM: return C;
    case MappingKind::IIM: return C + C * (C - 1) / 2;
    case MappingKind::ISIM: return 1;
    case MappingKind::TM: return 0;
  }
  throw ContractError("unknown mapping kind");
}

PairBatchSet im_map(const LabeledDataset& ds, Pcg32& rng) {
  for (int c = 0; c < ds.C; ++c) require_pairable_class(ds, c);
  PairBatchSet out;
  out.kind = LabelKind::Categorical;
  out.n_class = n_class_for(MappingKind::IM, ds.C);
  int n = static_cast<int>(ds.size());
  out.pairs.reserve(static_cast<std::size_t>(n));
  out.labels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int y = ds.Y[static_cast<std::size_t>(i)];
    out.pairs.emplace_back(i, draw_partner(ds, y, i, rng));
    out.labels.push_back(y);
  }
  return out;
}

std::pair<PairBatchSet, LabelVocabulary> iim_map(const LabeledDataset& ds,
                                                 Pcg32& rng) {
  for (int c = 0; c < ds.C; ++c) require_pairable_class(ds, c);
  LabelVocabulary vocab = build_label_vocabulary(ds.C);
  PairBatchSet out;
  out.kind = LabelKind::Categorical;
  out.n_class = vocab.size();
  int n = static_cast<int>(ds.size());
  out.pairs.reserve(static_cast<std::size_t>(n * ds.C));
  out.labels.reserve(static_cast<std::size_t>(n * ds.C));
  for (int i = 0; i < n; ++i) {
    int yi = ds.Y[static_cast<std::size_t>(i)];
    for (int c = 0; c < ds.C; ++c) {
      int j = (c == yi) ? draw_partner(ds, c, i, rng) : draw_any(ds, c, rng);
      out.pairs.emplace_back(i, j);
      out.labels.push_back(vocab.id_of(iim_label(yi, c)));
    }
  }
  return {std::move(out), std::move(vocab)};
}

PairBatchSet isim_map(const LabeledDataset& ds, Pcg32& rng) {
  if (ds.C < 2)
    throw MappingError("isim mapping needs at least 2 classes, got " +
                       std::to_string(ds.C));
  for (int c = 0; c < ds.C; ++c) require_pairable_class(ds, c);
  PairBatchSet out;
  out.kind = LabelKind::Binary;
  out.n_class = n_class_for(MappingKind::ISIM, ds.C);
  int n = static_cast<int>(ds.size());
  out.pairs.reserve(static_cast<std::size_t>(2 * n));
  out.labels.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    int yi = ds.Y[static_cast<std::size_t>(i)];
    out.pairs.emplace_back(i, draw_partner(ds, yi, i, rng));
    out.labels.push_back(1);
    // non-matching class drawn by rejection over [0, C)
    int yj;
    do {
      yj = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(ds.C)));
    } while (yj == yi);
    out.pairs.emplace_back(i, draw_any(ds, yj, rng));
    out.labels.push_back(0);
  }
  return out;
}

TripletSet triplet_map(const LabeledDataset& ds, Pcg32& rng) {
  if (ds.C < 2)
    throw MappingError("triplet mapping needs at least 2 classes, got " +
                       std::to_string(ds.C));
  for (int c = 0; c < ds.C; ++c) require_pairable_class(ds, c);
  TripletSet out;
  int n = static_cast<int>(ds.size());
  out.triples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int yi = ds.Y[static_cast<std::size_t>(i)];
    int pos = draw_partner(ds, yi, i, rng);
    int yn = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(ds.C - 1)));
    if (yn >= yi) ++yn;  // uniform over the other classes, no rejection
    out.triples.push_back({i, pos, draw_any(ds, yn, rng)});
  }
  return out;
}

}  // namespace covnet
