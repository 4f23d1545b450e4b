#pragma once

#include <vector>

#include "covnet/types.hpp"

namespace covnet {

// Row-wise softmax, computed with max-subtraction.
Matrix softmax(const Matrix& logits);

Matrix one_hot(const std::vector<int>& labels, int n_class);

struct LossGrad {
  double loss = 0.0;
  Matrix dlogits;
};

// Categorical cross-entropy, batch mean; dlogits = (softmax - target)/batch.
LossGrad ce_loss(const Matrix& logits, const Matrix& onehot);

// Sigmoid binary cross-entropy on a batch x 1 logit column, batch mean,
// in the log-sum-exp form that never exponentiates a positive argument.
LossGrad be_loss(const Matrix& logit, const std::vector<int>& y);

// Classic margin contrastive objective on precomputed pair distances:
// mean( y * d^2 + (1-y) * max(0, margin - d)^2 ). Gradient is w.r.t. d.
struct DistanceLossGrad {
  double loss = 0.0;
  Vector ddist;
};
DistanceLossGrad contrastive_loss(const Vector& dist, const std::vector<int>& y,
                                  double margin);

// Hinge on squared distances: mean max(0, d(a,p)^2 - d(a,n)^2 + margin).
struct TripletLossGrad {
  double loss = 0.0;
  Matrix dZa, dZp, dZn;
};
TripletLossGrad triplet_loss(const Matrix& Za, const Matrix& Zp,
                             const Matrix& Zn, double margin);

// Multi-class N-pair objective with cosine logits: per anchor i,
// log(1 + sum_{j != i} exp(cos(za_i, zp_j) - cos(za_i, zp_i))), batch mean.
struct NPairLossGrad {
  double loss = 0.0;
  Matrix dZa, dZp;
};
NPairLossGrad npair_loss(const Matrix& Za, const Matrix& Zp);

}  // namespace covnet
