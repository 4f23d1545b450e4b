#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covnet/data.hpp"
#include "covnet/model.hpp"

#include <json.hpp>

namespace covnet {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to reload a trained model and replay the evaluation
// pipeline: the full parameter set (including BatchNorm running statistics),
// the resolved config, and the split/standardization used at train time.
struct Checkpoint {
  Model model;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  nlohmann::json config;  // resolved config echo
  bool has_split = false;
  SplitSpec split;
  bool has_stats = false;
  FeatureStats stats;
  std::vector<long> label_names;
};

// Self-describing JSON document; parameters are written in the shortest
// decimal form that parses back to the identical double, so a round trip
// reproduces forward outputs bitwise.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc, const std::string& where);

}  // namespace covnet
