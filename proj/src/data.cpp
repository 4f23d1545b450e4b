#include "covnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include "covnet/numio.hpp"

namespace covnet {

namespace {

Vector unit_direction(int dim, Pcg32& rng) {
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (norm < 1e-12);
  return v / norm;
}

void check_blob_spec(const BlobSpec& spec) {
  require(spec.classes >= 1, "blob spec: classes must be >= 1");
  require(spec.per_class >= 2, "blob spec: per_class must be >= 2");
  require(spec.dim >= 1, "blob spec: dim must be >= 1");
  require(spec.spread >= 0.0, "blob spec: spread must be >= 0");
  require(spec.center_scale >= 0.0, "blob spec: center_scale must be >= 0");
}

LabeledDataset sample_around_centers(const std::vector<Vector>& centers,
                                     const BlobSpec& spec, Pcg32& rng) {
  int n = spec.classes * spec.per_class;
  Matrix X(n, spec.dim);
  std::vector<int> Y(static_cast<std::size_t>(n));
  int row = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.per_class; ++s, ++row) {
      for (int j = 0; j < spec.dim; ++j)
        X(row, j) = centers[static_cast<std::size_t>(c)][j] +
                    spec.spread * rng.normal();
      Y[static_cast<std::size_t>(row)] = c;
    }
  }
  return make_dataset(std::move(X), std::move(Y));
}

}  // namespace

LabeledDataset gen_blobs(const BlobSpec& spec) {
  check_blob_spec(spec);
  Pcg32 rng(spec.seed, 0xb10b);
  std::vector<Vector> centers;
  centers.reserve(static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c)
    centers.push_back(spec.center_scale * unit_direction(spec.dim, rng));
  return sample_around_centers(centers, spec, rng);
}

LabeledDataset gen_hierarchical(const BlobSpec& spec) {
  check_blob_spec(spec);
  require(spec.hier_ratio > 0.0, "blob spec: hier_ratio must be positive");
  require(static_cast<int>(spec.superclass_map.size()) == spec.classes,
          "blob spec: superclass_map must cover every class");
  int n_super = 0;
  for (int s : spec.superclass_map) {
    require(s >= 0, "blob spec: superclass ids must be nonnegative");
    n_super = std::max(n_super, s + 1);
  }
  Pcg32 rng(spec.seed, 0xb10b);
  std::vector<Vector> super_centers;
  super_centers.reserve(static_cast<std::size_t>(n_super));
  for (int s = 0; s < n_super; ++s)
    super_centers.push_back(spec.center_scale * unit_direction(spec.dim, rng));
  double sub_scale = spec.center_scale / spec.hier_ratio;
  std::vector<Vector> centers;
  centers.reserve(static_cast<std::size_t>(spec.classes));
  for (int c = 0; c < spec.classes; ++c) {
    const Vector& base =
        super_centers[static_cast<std::size_t>(spec.superclass_map[static_cast<std::size_t>(c)])];
    centers.push_back(base + sub_scale * unit_direction(spec.dim, rng));
  }
  return sample_around_centers(centers, spec, rng);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw FormatError(path + ": empty file");
  line = strip_cr(line);
  auto header = split_fields(line);
  if (header.empty() || header[0] != "label")
    throw FormatError(path + ":1: header must start with 'label'");
  int p = static_cast<int>(header.size()) - 1;
  if (p < 1) throw FormatError(path + ":1: no feature columns");

  std::vector<long> labels;
  std::vector<double> values;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    auto fields = split_fields(line);
    std::string where = path + ":" + std::to_string(lineno);
    if (static_cast<int>(fields.size()) != p + 1)
      throw FormatError(where + ": expected " + std::to_string(p + 1) +
                        " columns, got " + std::to_string(fields.size()));
    labels.push_back(parse_long(fields[0], where));
    for (int j = 1; j <= p; ++j)
      values.push_back(parse_double(fields[static_cast<std::size_t>(j)], where));
  }
  if (labels.empty()) throw FormatError(path + ": no data rows");
  Matrix X(static_cast<Index>(labels.size()), p);
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j)
      X(i, j) = values[static_cast<std::size_t>(i * p + j)];
  return make_dataset_remapped(std::move(X), labels);
}

void save_csv(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "label";
  for (Index j = 0; j < ds.dim(); ++j) out << ",f" << j;
  out << "\n";
  for (Index i = 0; i < ds.size(); ++i) {
    out << ds.label_names[static_cast<std::size_t>(ds.Y[static_cast<std::size_t>(i)])];
    for (Index j = 0; j < ds.dim(); ++j)
      out << "," << format_double(ds.X(i, j));
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

std::vector<unsigned char> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  auto img = read_all_bytes(images_path);
  if (img.size() < 16)
    throw FormatError(images_path + ": truncated header (" +
                      std::to_string(img.size()) + " bytes)");
  if (read_be32(img, 0) != 0x00000803u)
    throw FormatError(images_path + ": bad magic (expected 0x00000803)");
  std::uint32_t n = read_be32(img, 4);
  std::uint32_t rows = read_be32(img, 8);
  std::uint32_t cols = read_be32(img, 12);
  std::size_t expected = 16 + std::size_t(n) * rows * cols;
  if (img.size() < expected)
    throw FormatError(images_path + ": truncated pixel data (have " +
                      std::to_string(img.size()) + " bytes, need " +
                      std::to_string(expected) + ")");
  if (img.size() > expected)
    throw FormatError(images_path + ": trailing bytes after pixel data");

  auto lab = read_all_bytes(labels_path);
  if (lab.size() < 8)
    throw FormatError(labels_path + ": truncated header (" +
                      std::to_string(lab.size()) + " bytes)");
  if (read_be32(lab, 0) != 0x00000801u)
    throw FormatError(labels_path + ": bad magic (expected 0x00000801)");
  std::uint32_t n_lab = read_be32(lab, 4);
  if (n_lab != n)
    throw FormatError("count mismatch: " + images_path + " has " +
                      std::to_string(n) + " images but " + labels_path +
                      " has " + std::to_string(n_lab) + " labels");
  if (lab.size() < 8 + std::size_t(n))
    throw FormatError(labels_path + ": truncated label data");
  if (lab.size() > 8 + std::size_t(n))
    throw FormatError(labels_path + ": trailing bytes after label data");
  require(n >= 1, "load_idx: empty image file");

  Index p = static_cast<Index>(rows) * static_cast<Index>(cols);
  Matrix X(static_cast<Index>(n), p);
  for (Index i = 0; i < static_cast<Index>(n); ++i)
    for (Index j = 0; j < p; ++j)
      X(i, j) = img[16 + static_cast<std::size_t>(i * p + j)] / 255.0;
  std::vector<long> raw(n);
  for (std::uint32_t i = 0; i < n; ++i) raw[i] = lab[8 + i];
  return make_dataset_remapped(std::move(X), raw);
}

SplitResult split(const LabeledDataset& ds, const SplitSpec& spec) {
  require(spec.train >= 0.0 && spec.val >= 0.0 && spec.test >= 0.0,
          "split: fractions must be nonnegative");
  require(std::abs(spec.train + spec.val + spec.test - 1.0) <= 1e-9,
          "split: fractions must sum to 1");
  Pcg32 rng(spec.seed, 0x5b17);
  std::vector<int> train_rows, val_rows, test_rows;
  const double fracs[3] = {spec.train, spec.val, spec.test};
  for (int c = 0; c < ds.C; ++c) {
    std::vector<int> idx = ds.CG[static_cast<std::size_t>(c)];
    rng.shuffle(idx);
    int n = static_cast<int>(idx.size());
    // largest-remainder apportionment keeps every count within 1 of exact
    int counts[3];
    double rem[3];
    int used = 0;
    for (int f = 0; f < 3; ++f) {
      double exact = n * fracs[f];
      counts[f] = static_cast<int>(std::floor(exact + 1e-9));
      rem[f] = exact - counts[f];
      used += counts[f];
    }
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3,
                     [&](int a, int b) { return rem[a] > rem[b]; });
    for (int r = 0; r < n - used; ++r) counts[order[r]] += 1;
    if (spec.train > 0.0 && counts[0] == 0)
      throw ContractError("split: class " + std::to_string(c) +
                          " too small to place a sample in train");
    auto take = [&](int from, int count, std::vector<int>& dest) {
      for (int i = from; i < from + count; ++i) dest.push_back(idx[static_cast<std::size_t>(i)]);
      return from + count;
    };
    int at = 0;
    at = take(at, counts[0], train_rows);
    at = take(at, counts[1], val_rows);
    take(at, counts[2], test_rows);
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {subset(ds, train_rows), subset(ds, val_rows), subset(ds, test_rows)};
}

FeatureStats compute_feature_stats(const Matrix& X) {
  require(X.rows() >= 1, "feature stats: empty matrix");
  FeatureStats st;
  st.mean = X.colwise().mean();
  Matrix centered = X.rowwise() - st.mean.transpose();
  st.stddev = centered.array().square().colwise().mean().sqrt();
  return st;
}

void apply_standardization(Matrix& X, const FeatureStats& stats) {
  require(X.cols() == stats.mean.size(), "standardize: width mismatch");
  for (Index j = 0; j < X.cols(); ++j) {
    if (stats.stddev[j] > 0.0)
      X.col(j) = (X.col(j).array() - stats.mean[j]) / stats.stddev[j];
  }
}

FeatureStats standardize(LabeledDataset& train, std::vector<LabeledDataset*> others) {
  FeatureStats stats = compute_feature_stats(train.X);
  apply_standardization(train.X, stats);
  for (LabeledDataset* ds : others)
    if (ds && ds->size() > 0) apply_standardization(ds->X, stats);
  return stats;
}

}  // namespace covnet
