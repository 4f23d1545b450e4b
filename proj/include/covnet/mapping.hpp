#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "covnet/dataset.hpp"
#include "covnet/rng.hpp"

namespace covnet {

enum class MappingKind { IM, IIM, ISIM, TM };

MappingKind mapping_from_string(const std::string& s);
std::string mapping_name(MappingKind kind);

enum class LabelKind { Categorical, Binary };

// Supervised index pairs over a dataset plus their mapped labels.
struct PairBatchSet {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> labels;
  LabelKind kind = LabelKind::Categorical;
  int n_class = 0;  // Categorical label range
};

struct TripletSet {
  std::vector<std::array<int, 3>> triples;  // anchor, positive, negative
};

// Canonical pair-label strings "a-b" with a <= b, lexicographically sorted,
// with a bidirectional string <-> contiguous id map. Size C + C(C-1)/2.
struct LabelVocabulary {
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(labels.size()); }
  int id_of(const std::string& s) const;
  const std::string& label_of(int id) const;
};

// "min-max" with numeric components; symmetric in its arguments.
std::string iim_label(int a, int b);

LabelVocabulary build_label_vocabulary(int C);

// Output label space per mapping: IM -> C, IIM -> C + C(C-1)/2, ISIM -> 1
// (single sigmoid unit), TM -> 0 (no classification head).
int n_class_for(MappingKind kind, int C);

// One same-class partner per sample, drawn uniformly with rejection until
// the partner index differs; label is the raw class. Exactly N pairs.
PairBatchSet im_map(const LabeledDataset& ds, Pcg32& rng);

// For every sample and every class, one partner from that class (the
// same-class branch rejects the sample itself); labels are canonical
// pair-string ids. Exactly N*C pairs.
std::pair<PairBatchSet, LabelVocabulary> iim_map(const LabeledDataset& ds,
                                                 Pcg32& rng);

// Alternating matching (label 1) / non-matching (label 0) pairs, the
// non-matching class resampled until it differs. Exactly 2N pairs.
PairBatchSet isim_map(const LabeledDataset& ds, Pcg32& rng);

// (anchor, positive, negative) per sample; positive uniform over classmates,
// negative uniform over a uniformly chosen other class. Exactly N triples.
TripletSet triplet_map(const LabeledDataset& ds, Pcg32& rng);

}  // namespace covnet
