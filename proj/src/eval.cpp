#include "covnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "covnet/merge.hpp"
#include "covnet/numio.hpp"

namespace covnet {

namespace {

Matrix normalized_rows(const Matrix& Z) {
  Matrix out(Z.rows(), Z.cols());
  for (Index i = 0; i < Z.rows(); ++i) {
    double n = std::max(Z.row(i).norm(), kCosineEps);
    out.row(i) = Z.row(i) / n;
  }
  return out;
}

// Indices of the k largest similarities, descending, ties by ascending index.
std::vector<int> rank_topk(const Vector& sims, int k, int exclude) {
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(sims.size()));
  for (int i = 0; i < sims.size(); ++i)
    if (i != exclude) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

double pearson(const Vector& u, const Vector& v) {
  double mu = u.mean();
  double mv = v.mean();
  Vector cu = u.array() - mu;
  Vector cv = v.array() - mv;
  double su = cu.squaredNorm();
  double sv = cv.squaredNorm();
  if (su == 0.0 || sv == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cu.dot(cv) / std::sqrt(su * sv);
}

}  // namespace

double knn_accuracy(const EmbeddingTable& table, int k) {
  Index n = table.size();
  require(static_cast<std::size_t>(n) == table.labels.size(),
          "knn_accuracy: label count mismatch");
  require(k >= 1 && k <= n - 1, "knn_accuracy: k must be in [1, N-1]");
  Matrix Zn = normalized_rows(table.Z);
  long hits = 0;
  for (Index i = 0; i < n; ++i) {
    Vector sims = Zn * Zn.row(i).transpose();
    for (int j : rank_topk(sims, k, static_cast<int>(i)))
      if (table.labels[static_cast<std::size_t>(j)] ==
          table.labels[static_cast<std::size_t>(i)])
        ++hits;
  }
  return static_cast<double>(hits) / (static_cast<double>(n) * k);
}

std::vector<SearchHit> topk_search(const EmbeddingTable& table, long query_id,
                                   int k) {
  Index n = table.size();
  auto it = std::find(table.ids.begin(), table.ids.end(), query_id);
  require(it != table.ids.end(),
          "topk_search: unknown id " + std::to_string(query_id));
  int qi = static_cast<int>(it - table.ids.begin());
  require(k >= 1 && k <= n - 1, "topk_search: k must be in [1, N-1]");
  Matrix Zn = normalized_rows(table.Z);
  Vector sims = Zn * Zn.row(qi).transpose();
  std::vector<SearchHit> hits;
  for (int j : rank_topk(sims, k, qi)) {
    hits.push_back({table.ids[static_cast<std::size_t>(j)], sims[j],
                    table.labels[static_cast<std::size_t>(j)] ==
                        table.labels[static_cast<std::size_t>(qi)]});
  }
  return hits;
}

std::vector<SearchHit> topk_search(const EmbeddingTable& table,
                                   const Vector& query, int k) {
  Index n = table.size();
  require(query.size() == table.Z.cols(),
          "topk_search: query dimension mismatch");
  require(k >= 1 && k <= n, "topk_search: k must be in [1, N]");
  Matrix Zn = normalized_rows(table.Z);
  Vector q = query / std::max(query.norm(), kCosineEps);
  Vector sims = Zn * q;
  std::vector<SearchHit> hits;
  for (int j : rank_topk(sims, k, -1))
    hits.push_back({table.ids[static_cast<std::size_t>(j)], sims[j], false});
  return hits;
}

Matrix class_correlation_matrix(const EmbeddingTable& table,
                                CorrelationMode mode) {
  Index n = table.size();
  require(n >= 1, "class_correlation_matrix: empty table");
  require(table.Z.cols() >= 2, "class_correlation_matrix: need q >= 2");
  int C = 0;
  for (int y : table.labels) {
    require(y >= 0, "class_correlation_matrix: negative label");
    C = std::max(C, y + 1);
  }
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(C));
  for (Index i = 0; i < n; ++i)
    groups[static_cast<std::size_t>(table.labels[static_cast<std::size_t>(i)])]
        .push_back(static_cast<int>(i));
  for (int c = 0; c < C; ++c)
    require(!groups[static_cast<std::size_t>(c)].empty(),
            "class_correlation_matrix: class " + std::to_string(c) + " is empty");

  Matrix out = Matrix::Identity(C, C);
  if (mode == CorrelationMode::Centroid) {
    Matrix centroids = Matrix::Zero(C, table.Z.cols());
    for (int c = 0; c < C; ++c) {
      for (int i : groups[static_cast<std::size_t>(c)])
        centroids.row(c) += table.Z.row(i);
      centroids.row(c) /= static_cast<double>(groups[static_cast<std::size_t>(c)].size());
    }
    for (int a = 0; a < C; ++a)
      for (int b = a + 1; b < C; ++b) {
        double r = pearson(centroids.row(a).transpose(), centroids.row(b).transpose());
        out(a, b) = r;
        out(b, a) = r;
      }
  } else {
    for (int a = 0; a < C; ++a)
      for (int b = a + 1; b < C; ++b) {
        double sum = 0.0;
        long count = 0;
        bool undefined = false;
        for (int i : groups[static_cast<std::size_t>(a)])
          for (int j : groups[static_cast<std::size_t>(b)]) {
            double r = pearson(table.Z.row(i).transpose(), table.Z.row(j).transpose());
            if (std::isnan(r)) undefined = true;
            sum += r;
            ++count;
          }
        double r = undefined ? std::numeric_limits<double>::quiet_NaN()
                             : sum / static_cast<double>(count);
        out(a, b) = r;
        out(b, a) = r;
      }
  }
  return out;
}

Matrix pca_project(const EmbeddingTable& table) {
  Index n = table.size();
  require(n >= 3, "pca_project: need at least 3 samples");
  require(table.Z.cols() >= 2, "pca_project: need q >= 2");
  Vector mean = table.Z.colwise().mean();
  Matrix centered = table.Z.rowwise() - mean.transpose();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  require(solver.info() == Eigen::Success, "pca_project: eigensolver failed");
  Matrix dirs(table.Z.cols(), 2);
  // eigenvalues come out ascending; the last two are the leading directions
  dirs.col(0) = solver.eigenvectors().col(table.Z.cols() - 1);
  dirs.col(1) = solver.eigenvectors().col(table.Z.cols() - 2);
  for (int d = 0; d < 2; ++d) {
    Index arg = 0;
    dirs.col(d).cwiseAbs().maxCoeff(&arg);
    if (dirs(arg, d) < 0.0) dirs.col(d) = -dirs.col(d);
  }
  return centered * dirs;
}

EmbeddingTable embed_dataset(Model& model, const LabeledDataset& ds) {
  EmbeddingTable table;
  table.ids = ds.ids;
  table.labels = ds.Y;
  table.Z = embed(model, ds.X, Mode::Infer, nullptr);
  return table;
}

void write_embeddings_csv(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "id,label";
  for (Index j = 0; j < table.Z.cols(); ++j) out << ",z" << j;
  out << "\n";
  for (Index i = 0; i < table.size(); ++i) {
    out << table.ids[static_cast<std::size_t>(i)] << ","
        << table.labels[static_cast<std::size_t>(i)];
    for (Index j = 0; j < table.Z.cols(); ++j)
      out << "," << format_double(table.Z(i, j));
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_projection_csv(const EmbeddingTable& table, const Matrix& coords,
                          const std::string& path) {
  require(coords.rows() == table.size() && coords.cols() == 2,
          "write_projection_csv: coordinate shape mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "id,label,u,v\n";
  for (Index i = 0; i < table.size(); ++i) {
    out << table.ids[static_cast<std::size_t>(i)] << ","
        << table.labels[static_cast<std::size_t>(i)] << ","
        << format_double(coords(i, 0)) << "," << format_double(coords(i, 1))
        << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace covnet
