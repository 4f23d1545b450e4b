// Command-line surface for the covnet library: generate synthetic datasets,
// train any of the six model variants, and run the embedding-space analyses.
// Every subcommand takes an optional --config JSON document whose keys mirror
// the long flag names; explicit flags win, and each run that writes files
// also writes the fully resolved config next to them so it can be replayed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covnet/checkpoint.hpp"
#include "covnet/data.hpp"
#include "covnet/eval.hpp"
#include "covnet/numio.hpp"
#include "covnet/train.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// One config-overridable option: `get` serializes the current value,
// `set` assigns from a JSON value when the flag was not given explicitly.
struct Binding {
  std::string key;
  std::function<json()> get;
  std::function<void(const json&)> set;
};

class ConfigurableCommand {
 public:
  ConfigurableCommand(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_,
                    "JSON config document; explicit flags override its values");
  }

  template <typename T>
  CLI::Option* bind(const std::string& flag, T& value, const std::string& desc) {
    bindings_.push_back({flag,
                         [&value]() { return json(value); },
                         [&value](const json& j) { value = j.get<T>(); }});
    return cmd_->add_option("--" + flag, value, desc);
  }

  CLI::Option* bind_flag(const std::string& flag, bool& value,
                         const std::string& desc) {
    bindings_.push_back({flag,
                         [&value]() { return json(value); },
                         [&value](const json& j) { value = j.get<bool>(); }});
    return cmd_->add_flag("--" + flag + ",!--no-" + flag, value, desc);
  }

  // Applies config-file values for options that were not passed explicitly.
  void resolve() {
    if (config_path_.empty()) return;
    std::ifstream in(config_path_);
    if (!in) throw covnet::IoError("cannot open config '" + config_path_ + "'");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw covnet::FormatError(config_path_ + ": " + e.what());
    }
    for (auto& b : bindings_) {
      if (!doc.contains(b.key)) continue;
      CLI::Option* opt = cmd_->get_option("--" + b.key);
      if (opt->count() == 0) b.set(doc.at(b.key));
    }
  }

  json resolved(const std::string& command) const {
    json doc;
    doc["command"] = command;
    for (const auto& b : bindings_) doc[b.key] = b.get();
    return doc;
  }

 private:
  CLI::App* cmd_;
  std::string config_path_;
  std::vector<Binding> bindings_;
};

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw covnet::IoError("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
  if (!out) throw covnet::IoError("write failed for '" + path + "'");
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    out.push_back(static_cast<int>(covnet::parse_long(tok, what)));
  }
  if (out.empty()) throw covnet::ContractError(what + ": empty list");
  return out;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw covnet::IoError("cannot open '" + path + "'");
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
  std::string out;
  int classes = 4, per_class = 200, dim = 20;
  double spread = 0.5, center_scale = 5.0, hier_ratio = 5.0;
  int superclasses = 0;  // 0 = flat blobs
  std::uint64_t seed = 0;
};

void run_gen_data(const GenDataOpts& o, const json& resolved) {
  covnet::require(!o.out.empty(), "gen-data: --out is required");
  covnet::require(o.classes >= 2, "gen-data: need --classes >= 2");
  covnet::require(o.per_class >= 2,
                  "gen-data: need --per-class >= 2 (pair mappings draw a "
                  "distinct same-class partner)");
  covnet::BlobSpec spec;
  spec.classes = o.classes;
  spec.per_class = o.per_class;
  spec.dim = o.dim;
  spec.spread = o.spread;
  spec.center_scale = o.center_scale;
  spec.seed = o.seed;
  spec.hier_ratio = o.hier_ratio;

  covnet::LabeledDataset ds;
  if (o.superclasses > 0) {
    covnet::require(o.superclasses >= 2 && o.superclasses <= o.classes,
                    "gen-data: --superclasses must be in [2, classes]");
    covnet::require(o.classes % o.superclasses == 0,
                    "gen-data: --classes must be divisible by --superclasses");
    int per_super = o.classes / o.superclasses;
    spec.superclass_map.resize(static_cast<std::size_t>(o.classes));
    for (int c = 0; c < o.classes; ++c)
      spec.superclass_map[static_cast<std::size_t>(c)] = c / per_super;
    ds = covnet::gen_hierarchical(spec);
  } else {
    ds = covnet::gen_blobs(spec);
  }
  covnet::save_csv(ds, o.out);

  json manifest = resolved;
  manifest["rows"] = static_cast<long>(ds.size());
  write_json(manifest, o.out + ".manifest.json");
  std::cout << "wrote " << ds.size() << " rows to " << o.out << "\n";
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data, out_dir;
  std::string variant = "covnet-v1";
  int epochs = 200, batch = 32, patience = 20;
  double lr = 1e-3, margin = 0.2, dropout = 0.0;
  std::uint64_t seed = 42;
  std::string hidden = "32";
  int embed_dim = 16;
  double val_frac = 0.1, test_frac = 0.2;
  bool resample = true;
  bool contrastive = false;
};

void run_train(const TrainOpts& o, const json& resolved) {
  covnet::require(!o.data.empty(), "train: --data is required");
  covnet::require(!o.out_dir.empty(), "train: --out-dir is required");
  covnet::require(o.val_frac >= 0.0 && o.test_frac >= 0.0 &&
                      o.val_frac + o.test_frac < 1.0,
                  "train: val/test fractions must be nonnegative and sum below 1");
  covnet::LabeledDataset full = covnet::load_csv(o.data);
  covnet::SplitSpec split_spec{1.0 - o.val_frac - o.test_frac, o.val_frac,
                               o.test_frac, o.seed};
  covnet::SplitResult parts = covnet::split(full, split_spec);
  covnet::FeatureStats stats =
      covnet::standardize(parts.train, {&parts.val, &parts.test});

  covnet::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.lr = o.lr;
  cfg.seed = o.seed;
  cfg.patience = o.patience;
  cfg.resample_per_epoch = o.resample;
  cfg.variant = o.variant;
  cfg.margin = o.margin;
  cfg.siamese_contrastive = o.contrastive;
  cfg.net.hidden = parse_int_list(o.hidden, "train: --hidden");
  cfg.net.embed_dim = o.embed_dim;
  cfg.net.dropout = o.dropout;

  covnet::TrainResult result = covnet::train(parts.train, parts.val, cfg);
  for (const auto& rec : result.history)
    std::cout << "epoch " << rec.epoch << " train " << rec.train_loss << " val "
              << rec.val_loss << "\n";
  std::cout << "best epoch " << result.best_epoch << " val "
            << result.best_val_loss << "\n";

  fs::create_directories(o.out_dir);
  covnet::Checkpoint ckpt;
  ckpt.model = std::move(result.model);
  ckpt.seed = o.seed;
  ckpt.best_epoch = result.best_epoch;
  ckpt.config = resolved;
  ckpt.has_split = true;
  ckpt.split = split_spec;
  ckpt.has_stats = true;
  ckpt.stats = stats;
  ckpt.label_names = full.label_names;
  covnet::save_checkpoint(ckpt, o.out_dir + "/checkpoint.json");

  std::ofstream hist(o.out_dir + "/history.csv");
  if (!hist) throw covnet::IoError("cannot write history.csv");
  hist << "epoch,train_loss,val_loss,seconds\n";
  for (const auto& rec : result.history)
    hist << rec.epoch << "," << covnet::format_double(rec.train_loss) << ","
         << covnet::format_double(rec.val_loss) << ","
         << covnet::format_double(rec.seconds) << "\n";

  write_json(resolved, o.out_dir + "/config.json");
}

// ------------------------------------------------------- shared eval input

covnet::LabeledDataset select_split(const covnet::Checkpoint& ckpt,
                                    const covnet::LabeledDataset& full,
                                    const std::string& which) {
  covnet::LabeledDataset ds;
  if (which == "all") {
    ds = full;
  } else {
    covnet::require(ckpt.has_split,
                    "checkpoint records no split; use --split all");
    covnet::SplitResult parts = covnet::split(full, ckpt.split);
    if (which == "train")
      ds = std::move(parts.train);
    else if (which == "val")
      ds = std::move(parts.val);
    else if (which == "test")
      ds = std::move(parts.test);
    else
      throw covnet::ContractError("unknown --split '" + which +
                                  "' (valid: train, val, test, all)");
  }
  return ds;
}

covnet::EmbeddingTable embed_for_eval(covnet::Checkpoint& ckpt,
                                      const std::string& data_path,
                                      const std::string& which) {
  covnet::LabeledDataset full = covnet::load_csv(data_path);
  covnet::LabeledDataset ds = select_split(ckpt, full, which);
  covnet::require(ds.size() > 0, "selected split is empty");
  if (ckpt.has_stats) covnet::apply_standardization(ds.X, ckpt.stats);
  return covnet::embed_dataset(ckpt.model, ds);
}

// -------------------------------------------------------------------- eval

struct EvalOpts {
  std::string checkpoint, data, out_dir;
  std::string k_list = "1,2,5,10,40";
  std::string split = "test";
  std::string corr_mode = "centroid";
};

void run_eval(const EvalOpts& o, const json& resolved) {
  covnet::require(!o.checkpoint.empty(), "eval: --checkpoint is required");
  covnet::require(!o.data.empty(), "eval: --data is required");
  covnet::require(!o.out_dir.empty(), "eval: --out-dir is required");
  covnet::Checkpoint ckpt = covnet::load_checkpoint(o.checkpoint);
  covnet::EmbeddingTable table = embed_for_eval(ckpt, o.data, o.split);

  std::vector<int> ks = parse_int_list(o.k_list, "eval: --k");
  for (int k : ks)
    covnet::require(k >= 1 && k < table.size(),
                    "eval: k=" + std::to_string(k) +
                        " out of range for N=" + std::to_string(table.size()));

  covnet::CorrelationMode mode;
  if (o.corr_mode == "centroid")
    mode = covnet::CorrelationMode::Centroid;
  else if (o.corr_mode == "sample")
    mode = covnet::CorrelationMode::SamplePairs;
  else
    throw covnet::ContractError("unknown --corr-mode '" + o.corr_mode +
                                "' (valid: centroid, sample)");

  json report;
  report["variant"] = covnet::variant_name(ckpt.model.spec.variant);
  report["seed"] = ckpt.seed;
  report["dataset_hash"] = hex64(fnv1a_file(o.data));
  report["split"] = o.split;
  report["n"] = static_cast<long>(table.size());
  json acc = json::array();
  for (int k : ks)
    acc.push_back({{"k", k}, {"accuracy", covnet::knn_accuracy(table, k)}});
  report["k_accuracy"] = acc;

  covnet::Matrix corr = covnet::class_correlation_matrix(table, mode);
  json rows = json::array();
  for (covnet::Index i = 0; i < corr.rows(); ++i) {
    json row = json::array();
    for (covnet::Index j = 0; j < corr.cols(); ++j)
      row.push_back(corr(i, j));  // NaN (undefined entry) serializes as null
    rows.push_back(row);
  }
  report["correlation"] = {{"mode", o.corr_mode}, {"matrix", rows}};

  fs::create_directories(o.out_dir);
  write_json(report, o.out_dir + "/report.json");
  covnet::write_embeddings_csv(table, o.out_dir + "/embeddings.csv");
  write_json(resolved, o.out_dir + "/config.json");
  for (int k : ks)
    std::cout << "k=" << k << " accuracy "
              << covnet::knn_accuracy(table, k) << "\n";
}

// ------------------------------------------------------------------ search

struct SearchOpts {
  std::string checkpoint, data, out;
  long query_id = -1;
  int k = 10;
  std::string split = "all";
};

void run_search(const SearchOpts& o, const json& resolved) {
  covnet::require(!o.checkpoint.empty(), "search: --checkpoint is required");
  covnet::require(!o.data.empty(), "search: --data is required");
  covnet::require(o.query_id >= 0, "search: --query-id is required");
  covnet::require(o.k >= 1, "search: --k must be >= 1");
  covnet::Checkpoint ckpt = covnet::load_checkpoint(o.checkpoint);
  covnet::EmbeddingTable table = embed_for_eval(ckpt, o.data, o.split);
  auto hits = covnet::topk_search(table, o.query_id, o.k);
  std::cout << "rank,id,similarity,relevant\n";
  for (std::size_t r = 0; r < hits.size(); ++r)
    std::cout << r + 1 << "," << hits[r].id << ","
              << covnet::format_double(hits[r].similarity) << ","
              << (hits[r].relevant ? 1 : 0) << "\n";
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw covnet::IoError("cannot write '" + o.out + "'");
    f << "rank,id,similarity,relevant\n";
    for (std::size_t r = 0; r < hits.size(); ++r)
      f << r + 1 << "," << hits[r].id << ","
        << covnet::format_double(hits[r].similarity) << ","
        << (hits[r].relevant ? 1 : 0) << "\n";
    write_json(resolved, o.out + ".config.json");
  }
}

// ----------------------------------------------------------------- project

struct ProjectOpts {
  std::string checkpoint, data, out;
  std::string split = "all";
};

void run_project(const ProjectOpts& o, const json& resolved) {
  covnet::require(!o.checkpoint.empty(), "project: --checkpoint is required");
  covnet::require(!o.data.empty(), "project: --data is required");
  covnet::require(!o.out.empty(), "project: --out is required");
  covnet::Checkpoint ckpt = covnet::load_checkpoint(o.checkpoint);
  covnet::EmbeddingTable table = embed_for_eval(ckpt, o.data, o.split);
  covnet::Matrix coords = covnet::pca_project(table);
  covnet::write_projection_csv(table, coords, o.out);
  write_json(resolved, o.out + ".config.json");
  std::cout << "wrote " << table.size() << " projected rows to " << o.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covnet: covariance-embedding metric learning laboratory"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic CSV dataset");
  ConfigurableCommand gen_cfg(gen);
  GenDataOpts go;
  gen_cfg.bind("out", go.out, "output CSV path");
  gen_cfg.bind("classes", go.classes, "number of classes");
  gen_cfg.bind("per-class", go.per_class, "samples per class");
  gen_cfg.bind("dim", go.dim, "feature dimension");
  gen_cfg.bind("spread", go.spread, "within-class stddev");
  gen_cfg.bind("center-scale", go.center_scale, "class center magnitude");
  gen_cfg.bind("superclasses", go.superclasses,
               "superclass count for hierarchical structure (0 = flat)");
  gen_cfg.bind("hier-ratio", go.hier_ratio, "D_super / D_sub distance ratio");
  gen_cfg.bind("seed", go.seed, "generator seed");

  // train
  auto* tr = app.add_subcommand("train", "train a model variant");
  ConfigurableCommand tr_cfg(tr);
  TrainOpts to;
  tr_cfg.bind("data", to.data, "dataset CSV");
  tr_cfg.bind("out-dir", to.out_dir, "output directory");
  tr_cfg.bind("variant", to.variant,
              "covnet-v1|covnet-v2|covnet-v3|siamese|triplet|n-pair");
  tr_cfg.bind("epochs", to.epochs, "max epochs");
  tr_cfg.bind("batch", to.batch, "mini-batch size");
  tr_cfg.bind("lr", to.lr, "Adam learning rate");
  tr_cfg.bind("seed", to.seed, "run seed");
  tr_cfg.bind("patience", to.patience, "early-stopping patience (epochs)");
  tr_cfg.bind("margin", to.margin, "triplet/contrastive margin");
  tr_cfg.bind("hidden", to.hidden, "hidden Dense widths, comma separated");
  tr_cfg.bind("embed-dim", to.embed_dim, "embedding dimension q");
  tr_cfg.bind("dropout", to.dropout, "dropout rate after hidden layers");
  tr_cfg.bind("val-frac", to.val_frac, "validation fraction");
  tr_cfg.bind("test-frac", to.test_frac, "test fraction");
  tr_cfg.bind_flag("resample", to.resample, "regenerate pairs every epoch");
  tr_cfg.bind_flag("contrastive", to.contrastive,
                   "use margin contrastive loss for the siamese variant");

  // eval
  auto* ev = app.add_subcommand("eval", "k-NN accuracy and class correlation");
  ConfigurableCommand ev_cfg(ev);
  EvalOpts eo;
  ev_cfg.bind("checkpoint", eo.checkpoint, "checkpoint JSON");
  ev_cfg.bind("data", eo.data, "dataset CSV");
  ev_cfg.bind("out-dir", eo.out_dir, "output directory");
  ev_cfg.bind("k", eo.k_list, "k values, comma separated");
  ev_cfg.bind("split", eo.split, "train|val|test|all");
  ev_cfg.bind("corr-mode", eo.corr_mode, "centroid|sample");

  // search
  auto* se = app.add_subcommand("search", "top-k similarity search by id");
  ConfigurableCommand se_cfg(se);
  SearchOpts so;
  se_cfg.bind("checkpoint", so.checkpoint, "checkpoint JSON");
  se_cfg.bind("data", so.data, "dataset CSV");
  se_cfg.bind("query-id", so.query_id, "query sample id");
  se_cfg.bind("k", so.k, "result count");
  se_cfg.bind("split", so.split, "train|val|test|all");
  se_cfg.bind("out", so.out, "optional results CSV");

  // project
  auto* pr = app.add_subcommand("project", "2-D PCA projection export");
  ConfigurableCommand pr_cfg(pr);
  ProjectOpts po;
  pr_cfg.bind("checkpoint", po.checkpoint, "checkpoint JSON");
  pr_cfg.bind("data", po.data, "dataset CSV");
  pr_cfg.bind("out", po.out, "output CSV (id,label,u,v)");
  pr_cfg.bind("split", po.split, "train|val|test|all");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) {
      gen_cfg.resolve();
      run_gen_data(go, gen_cfg.resolved("gen-data"));
    } else if (tr->parsed()) {
      tr_cfg.resolve();
      covnet::variant_from_name(to.variant);  // validate before any work
      run_train(to, tr_cfg.resolved("train"));
    } else if (ev->parsed()) {
      ev_cfg.resolve();
      run_eval(eo, ev_cfg.resolved("eval"));
    } else if (se->parsed()) {
      se_cfg.resolve();
      run_search(so, se_cfg.resolved("search"));
    } else if (pr->parsed()) {
      pr_cfg.resolve();
      run_project(po, pr_cfg.resolved("project"));
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
