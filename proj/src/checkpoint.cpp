#include "covnet/checkpoint.hpp"

#include <fstream>

namespace covnet {

using nlohmann::json;

namespace {

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_to_json(const Matrix& m) {
  json arr = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Vector vector_from_json(const json& arr, Index size, const std::string& what) {
  if (!arr.is_array() || static_cast<Index>(arr.size()) != size)
    throw FormatError(what + ": expected array of " + std::to_string(size));
  Vector v(size);
  for (Index i = 0; i < size; ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

Matrix matrix_from_json(const json& arr, Index rows, Index cols,
                        const std::string& what) {
  if (!arr.is_array() || static_cast<Index>(arr.size()) != rows * cols)
    throw FormatError(what + ": expected array of " + std::to_string(rows * cols));
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<double>();
  return m;
}

json layer_to_json(const LayerState& st) {
  json j;
  j["kind"] = layer_kind_name(st.spec.kind);
  switch (st.spec.kind) {
    case LayerKind::Dense:
      j["in"] = st.spec.in;
      j["out"] = st.spec.out;
      j["W"] = matrix_to_json(st.W);
      j["b"] = vector_to_json(st.b);
      break;
    case LayerKind::BatchNorm:
      j["dim"] = st.spec.dim;
      j["gamma"] = vector_to_json(st.gamma);
      j["beta"] = vector_to_json(st.beta);
      j["running_mean"] = vector_to_json(st.running_mean);
      j["running_var"] = vector_to_json(st.running_var);
      break;
    case LayerKind::Dropout:
      j["rate"] = st.spec.rate;
      break;
    default:
      break;
  }
  return j;
}

LayerState layer_from_json(const json& j, const std::string& where) {
  if (!j.contains("kind")) throw FormatError(where + ": layer without kind");
  std::string kind = j.at("kind").get<std::string>();
  LayerState st;
  if (kind == "dense") {
    int in = j.at("in").get<int>();
    int out = j.at("out").get<int>();
    st.spec = LayerSpec::dense(in, out);
    st.W = matrix_from_json(j.at("W"), in, out, where + ".W");
    st.b = vector_from_json(j.at("b"), out, where + ".b");
  } else if (kind == "batch_norm") {
    int dim = j.at("dim").get<int>();
    st.spec = LayerSpec::batch_norm(dim);
    st.gamma = vector_from_json(j.at("gamma"), dim, where + ".gamma");
    st.beta = vector_from_json(j.at("beta"), dim, where + ".beta");
    st.running_mean = vector_from_json(j.at("running_mean"), dim, where + ".running_mean");
    st.running_var = vector_from_json(j.at("running_var"), dim, where + ".running_var");
  } else if (kind == "dropout") {
    st.spec = LayerSpec::dropout(j.at("rate").get<double>());
  } else if (kind == "relu") {
    st.spec = LayerSpec::relu();
  } else if (kind == "tanh") {
    st.spec = LayerSpec::tanh();
  } else if (kind == "l2norm") {
    st.spec = LayerSpec::l2norm();
  } else {
    throw FormatError(where + ": unknown layer kind '" + kind + "'");
  }
  return st;
}

json stack_to_json(const LayerStack& stack) {
  json arr = json::array();
  for (const auto& layer : stack) arr.push_back(layer_to_json(layer));
  return arr;
}

LayerStack stack_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw FormatError(where + ": expected layer array");
  LayerStack stack;
  for (std::size_t i = 0; i < arr.size(); ++i)
    stack.push_back(layer_from_json(arr[i], where + "[" + std::to_string(i) + "]"));
  return stack;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& ckpt) {
  const Model& m = ckpt.model;
  json doc;
  doc["format"] = "covnet-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["variant"] = variant_name(m.spec.variant);
  doc["mapping"] = mapping_name(m.spec.mapping);
  doc["in_dim"] = m.in_dim;
  doc["embed_dim"] = m.embed_dim;
  doc["n_class"] = m.n_class;
  doc["margin"] = m.margin;
  doc["siamese_contrastive"] = m.spec.loss == LossKind::Contrastive;
  doc["embedding"] = stack_to_json(m.embed);
  doc["tail"] = stack_to_json(m.tail);
  doc["seed"] = ckpt.seed;
  doc["best_epoch"] = ckpt.best_epoch;
  doc["config"] = ckpt.config;
  if (ckpt.has_split) {
    doc["split"] = {{"train", ckpt.split.train},
                    {"val", ckpt.split.val},
                    {"test", ckpt.split.test},
                    {"seed", ckpt.split.seed}};
  }
  if (ckpt.has_stats) {
    doc["standardize"] = {{"mean", vector_to_json(ckpt.stats.mean)},
                          {"stddev", vector_to_json(ckpt.stats.stddev)}};
  }
  doc["label_names"] = ckpt.label_names;
  return doc;
}

Checkpoint checkpoint_from_json(const json& doc, const std::string& where) {
  try {
    if (!doc.contains("format") || doc.at("format") != "covnet-checkpoint")
      throw FormatError(where + ": not a covnet checkpoint");
    int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw VersionError(where + ": checkpoint version " + std::to_string(version) +
                         ", this build reads version " +
                         std::to_string(kCheckpointVersion));
    Checkpoint ckpt;
    Model& m = ckpt.model;
    m.spec = variant_spec(variant_from_name(doc.at("variant").get<std::string>()),
                          doc.value("siamese_contrastive", false));
    m.in_dim = doc.at("in_dim").get<int>();
    m.embed_dim = doc.at("embed_dim").get<int>();
    m.n_class = doc.at("n_class").get<int>();
    m.margin = doc.at("margin").get<double>();
    m.embed = stack_from_json(doc.at("embedding"), where + ".embedding");
    m.tail = stack_from_json(doc.at("tail"), where + ".tail");
    ckpt.seed = doc.at("seed").get<std::uint64_t>();
    ckpt.best_epoch = doc.at("best_epoch").get<int>();
    ckpt.config = doc.value("config", json::object());
    if (doc.contains("split")) {
      ckpt.has_split = true;
      const json& s = doc.at("split");
      ckpt.split.train = s.at("train").get<double>();
      ckpt.split.val = s.at("val").get<double>();
      ckpt.split.test = s.at("test").get<double>();
      ckpt.split.seed = s.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("standardize")) {
      ckpt.has_stats = true;
      const json& s = doc.at("standardize");
      Index p = static_cast<Index>(s.at("mean").size());
      ckpt.stats.mean = vector_from_json(s.at("mean"), p, where + ".standardize.mean");
      ckpt.stats.stddev =
          vector_from_json(s.at("stddev"), p, where + ".standardize.stddev");
    }
    ckpt.label_names = doc.value("label_names", std::vector<long>{});
    return ckpt;
  } catch (const json::exception& e) {
    throw FormatError(where + ": malformed checkpoint: " + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << checkpoint_to_json(ckpt).dump(2) << "\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": malformed checkpoint file: " + e.what());
  }
  return checkpoint_from_json(doc, path);
}

}  // namespace covnet
