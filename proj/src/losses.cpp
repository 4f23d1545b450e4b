#include "covnet/losses.hpp"

#include <cmath>

#include "covnet/merge.hpp"

namespace covnet {

Matrix softmax(const Matrix& logits) {
  require_finite(logits, "softmax logits");
  Vector row_max = logits.rowwise().maxCoeff();
  Matrix shifted = logits.colwise() - row_max;
  Matrix e = shifted.array().exp();
  Vector sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

Matrix one_hot(const std::vector<int>& labels, int n_class) {
  require(n_class >= 1, "one_hot: n_class must be >= 1");
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), n_class);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < n_class, "one_hot: label out of range");
    out(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return out;
}

LossGrad ce_loss(const Matrix& logits, const Matrix& onehot) {
  require(logits.rows() == onehot.rows() && logits.cols() == onehot.cols(),
          "ce_loss: shape mismatch");
  require(logits.rows() >= 1, "ce_loss: empty batch");
  for (Index i = 0; i < onehot.rows(); ++i) {
    double sum = 0.0;
    for (Index j = 0; j < onehot.cols(); ++j) {
      double v = onehot(i, j);
      require(v == 0.0 || v == 1.0, "ce_loss: target is not one-hot");
      sum += v;
    }
    require(sum == 1.0, "ce_loss: target row does not sum to 1");
  }
  double batch = static_cast<double>(logits.rows());
  // log-softmax via the shifted log-sum-exp, so the loss never sees a 0 prob
  Vector row_max = logits.rowwise().maxCoeff();
  Matrix shifted = logits.colwise() - row_max;
  Vector lse = shifted.array().exp().rowwise().sum().log();
  Matrix log_probs = shifted.colwise() - lse;
  LossGrad out;
  out.loss = -(onehot.cwiseProduct(log_probs).sum()) / batch;
  out.dlogits = (softmax(logits) - onehot) / batch;
  return out;
}

LossGrad be_loss(const Matrix& logit, const std::vector<int>& y) {
  require(logit.cols() == 1, "be_loss: logit must be a batch x 1 column");
  require(static_cast<std::size_t>(logit.rows()) == y.size(),
          "be_loss: label count mismatch");
  require(logit.rows() >= 1, "be_loss: empty batch");
  double batch = static_cast<double>(logit.rows());
  LossGrad out;
  out.dlogits.resize(logit.rows(), 1);
  double total = 0.0;
  for (Index i = 0; i < logit.rows(); ++i) {
    require(y[i] == 0 || y[i] == 1, "be_loss: labels must be 0/1");
    double l = logit(i, 0);
    double yi = static_cast<double>(y[i]);
    // -[y log s(l) + (1-y) log(1-s(l))] == max(l,0) - l y + log(1+e^{-|l|})
    total += std::max(l, 0.0) - l * yi + std::log1p(std::exp(-std::abs(l)));
    double sig = l >= 0.0 ? 1.0 / (1.0 + std::exp(-l))
                          : std::exp(l) / (1.0 + std::exp(l));
    out.dlogits(i, 0) = (sig - yi) / batch;
  }
  out.loss = total / batch;
  return out;
}

DistanceLossGrad contrastive_loss(const Vector& dist, const std::vector<int>& y,
                                  double margin) {
  require(static_cast<std::size_t>(dist.size()) == y.size(),
          "contrastive_loss: label count mismatch");
  require(dist.size() >= 1, "contrastive_loss: empty batch");
  require(margin > 0.0, "contrastive_loss: margin must be positive");
  double batch = static_cast<double>(dist.size());
  DistanceLossGrad out;
  out.ddist = Vector::Zero(dist.size());
  for (Index i = 0; i < dist.size(); ++i) {
    require(y[i] == 0 || y[i] == 1, "contrastive_loss: labels must be 0/1");
    double d = dist[i];
    if (y[i] == 1) {
      out.loss += d * d;
      out.ddist[i] = 2.0 * d / batch;
    } else {
      double gap = std::max(0.0, margin - d);
      out.loss += gap * gap;
      out.ddist[i] = -2.0 * gap / batch;
    }
  }
  out.loss /= batch;
  return out;
}

TripletLossGrad triplet_loss(const Matrix& Za, const Matrix& Zp,
                             const Matrix& Zn, double margin) {
  require(Za.rows() == Zp.rows() && Za.rows() == Zn.rows() &&
              Za.cols() == Zp.cols() && Za.cols() == Zn.cols(),
          "triplet_loss: shape mismatch");
  require(Za.rows() >= 1, "triplet_loss: empty batch");
  require(margin > 0.0, "triplet_loss: margin must be positive");
  double batch = static_cast<double>(Za.rows());
  TripletLossGrad out;
  out.dZa = Matrix::Zero(Za.rows(), Za.cols());
  out.dZp = Matrix::Zero(Za.rows(), Za.cols());
  out.dZn = Matrix::Zero(Za.rows(), Za.cols());
  for (Index i = 0; i < Za.rows(); ++i) {
    auto ap = Za.row(i) - Zp.row(i);
    auto an = Za.row(i) - Zn.row(i);
    double hinge = ap.squaredNorm() - an.squaredNorm() + margin;
    if (hinge > 0.0) {
      out.loss += hinge;
      out.dZa.row(i) = 2.0 * (Zn.row(i) - Zp.row(i)) / batch;
      out.dZp.row(i) = -2.0 * ap / batch;
      out.dZn.row(i) = 2.0 * an / batch;
    }
  }
  out.loss /= batch;
  return out;
}

NPairLossGrad npair_loss(const Matrix& Za, const Matrix& Zp) {
  require(Za.rows() == Zp.rows() && Za.cols() == Zp.cols(),
          "npair_loss: shape mismatch");
  const Index n = Za.rows();
  require(n >= 2, "npair_loss: batch size must be >= 2");

  Vector na(n), np(n);
  for (Index i = 0; i < n; ++i) {
    na[i] = std::max(Za.row(i).norm(), kCosineEps);
    np[i] = std::max(Zp.row(i).norm(), kCosineEps);
  }
  // C(i,j) = cos(za_i, zp_j); cosines are bounded so the plain exp form is safe
  Matrix C = Za * Zp.transpose();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) C(i, j) /= na[i] * np[j];

  Matrix dC = Matrix::Zero(n, n);
  NPairLossGrad out;
  for (Index i = 0; i < n; ++i) {
    double denom = 1.0;
    for (Index j = 0; j < n; ++j)
      if (j != i) denom += std::exp(C(i, j) - C(i, i));
    out.loss += std::log(denom);
    double diag = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double p = std::exp(C(i, j) - C(i, i)) / denom;
      dC(i, j) = p / static_cast<double>(n);
      diag -= p / static_cast<double>(n);
    }
    dC(i, i) = diag;
  }
  out.loss /= static_cast<double>(n);

  // Chain through the cosine: dcos/dza_i = zp_j/(na np) - cos * za_i/na^2.
  out.dZa = Matrix::Zero(n, Za.cols());
  out.dZp = Matrix::Zero(n, Za.cols());
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double g = dC(i, j);
      if (g == 0.0) continue;
      double scale = 1.0 / (na[i] * np[j]);
      out.dZa.row(i) += g * (Zp.row(j) * scale - C(i, j) * Za.row(i) / (na[i] * na[i]));
      out.dZp.row(j) += g * (Za.row(i) * scale - C(i, j) * Zp.row(j) / (np[j] * np[j]));
    }
  }
  return out;
}

}  // namespace covnet
