#pragma once

#include <string>
#include <vector>

#include "covnet/dataset.hpp"
#include "covnet/model.hpp"

namespace covnet {

// Per-sample embeddings with labels and stable ids; the substrate of every
// evaluation operation.
struct EmbeddingTable {
  std::vector<long> ids;
  Matrix Z;  // N x q
  std::vector<int> labels;

  Index size() const { return Z.rows(); }
};

// Fraction of label-matching neighbors among the k most cosine-similar other
// samples of every sample (self excluded, ties broken by ascending index).
double knn_accuracy(const EmbeddingTable& table, int k);

struct SearchHit {
  long id = 0;
  double similarity = 0.0;
  bool relevant = false;  // neighbor label matches the query label
};

// Top-k by descending cosine similarity. The internal-query form excludes the
// query row itself and flags relevance against its label; external query
// vectors rank all rows and leave `relevant` false.
std::vector<SearchHit> topk_search(const EmbeddingTable& table, long query_id,
                                   int k);
std::vector<SearchHit> topk_search(const EmbeddingTable& table,
                                   const Vector& query, int k);

enum class CorrelationMode { Centroid, SamplePairs };

// C x C Pearson correlation between classes: centroid mode correlates the
// per-class mean embeddings over their q components; sample mode averages
// the pairwise sample correlations of each class pair. Diagonal is 1 by
// definition; entries whose class has a zero-variance centroid are NaN
// (undefined), never silently 0.
Matrix class_correlation_matrix(const EmbeddingTable& table,
                                CorrelationMode mode = CorrelationMode::Centroid);

// Projection onto the top-2 principal directions of the centered embedding;
// each direction's largest-magnitude loading is made positive so the result
// is deterministic.
Matrix pca_project(const EmbeddingTable& table);

// Inference-mode embedding of every dataset row, ids preserved.
EmbeddingTable embed_dataset(Model& model, const LabeledDataset& ds);

// Delimited text with header id,label,z0..z{q-1}, full-precision floats.
void write_embeddings_csv(const EmbeddingTable& table, const std::string& path);

// Header id,label,u,v.
void write_projection_csv(const EmbeddingTable& table, const Matrix& coords,
                          const std::string& path);

}  // namespace covnet
