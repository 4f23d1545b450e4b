#pragma once

#include <algorithm>
#include <cmath>

#include "covnet/types.hpp"

namespace covnet {

inline constexpr double kCosineEps = 1e-12;

// Row-wise covariance vector of two embedding batches: each row of the result
// is the elementwise product of the mean-centered rows of Z and Zp, where the
// mean is taken over the embedding components of that row. The sum of a row
// is positive for positively correlated embeddings, near zero for
// uncorrelated ones, and negative for anti-correlated ones.
template <typename D1, typename D2>
Matrix covariance_vector(const Eigen::MatrixBase<D1>& Z,
                         const Eigen::MatrixBase<D2>& Zp) {
  require(Z.rows() == Zp.rows() && Z.cols() == Zp.cols(),
          "covariance_vector: shape mismatch");
  Matrix L = Z;
  Matrix R = Zp;
  Vector ml = L.rowwise().mean();
  Vector mr = R.rowwise().mean();
  L.colwise() -= ml;
  R.colwise() -= mr;
  return L.cwiseProduct(R);
}

// Scalar covariance of two vectors of equal length s >= 2:
// sum_i (z_i - mean z)(z'_i - mean z') / (s - 1).
template <typename D1, typename D2>
double covariance_scalar(const Eigen::MatrixBase<D1>& z,
                         const Eigen::MatrixBase<D2>& zp) {
  require(z.size() == zp.size(), "covariance_scalar: length mismatch");
  require(z.size() >= 2, "covariance_scalar: need at least 2 components");
  double mz = z.mean();
  double mzp = zp.mean();
  return ((z.array() - mz) * (zp.array() - mzp)).sum() /
         static_cast<double>(z.size() - 1);
}

// Row-wise Euclidean distance between two batches.
template <typename D1, typename D2>
Vector euclidean_distance(const Eigen::MatrixBase<D1>& Z,
                          const Eigen::MatrixBase<D2>& Zp) {
  require(Z.rows() == Zp.rows() && Z.cols() == Zp.cols(),
          "euclidean_distance: shape mismatch");
  return (Z - Zp).rowwise().norm();
}

template <typename D1, typename D2>
double cosine_similarity(const Eigen::MatrixBase<D1>& z,
                         const Eigen::MatrixBase<D2>& zp) {
  require(z.size() == zp.size(), "cosine_similarity: length mismatch");
  double nz = std::max(z.norm(), kCosineEps);
  double nzp = std::max(zp.norm(), kCosineEps);
  return z.dot(zp) / (nz * nzp);
}

struct PairGrad {
  Matrix dZl, dZr;
};

// Backward of covariance_vector. With centered rows cl, cr and upstream dV:
// dZl = g - mean(g) per row where g = dV .* cr, and symmetrically for dZr
// (centering absorbs the mean-subtraction Jacobian).
inline PairGrad covariance_vector_backward(const Matrix& Zl, const Matrix& Zr,
                                           const Matrix& dV) {
  require(Zl.rows() == dV.rows() && Zl.cols() == dV.cols() &&
              Zr.rows() == dV.rows() && Zr.cols() == dV.cols(),
          "covariance_vector_backward: shape mismatch");
  Matrix Cl = Zl.colwise() - Vector(Zl.rowwise().mean());
  Matrix Cr = Zr.colwise() - Vector(Zr.rowwise().mean());
  Matrix g = dV.cwiseProduct(Cr);
  Matrix h = dV.cwiseProduct(Cl);
  PairGrad out;
  out.dZl = g.colwise() - Vector(g.rowwise().mean());
  out.dZr = h.colwise() - Vector(h.rowwise().mean());
  return out;
}

// Backward of euclidean_distance; rows with zero distance get zero gradient.
inline PairGrad euclidean_distance_backward(const Matrix& Zl, const Matrix& Zr,
                                            const Vector& dist,
                                            const Vector& ddist) {
  require(Zl.rows() == dist.size() && dist.size() == ddist.size(),
          "euclidean_distance_backward: shape mismatch");
  PairGrad out;
  out.dZl = Matrix::Zero(Zl.rows(), Zl.cols());
  for (Index i = 0; i < Zl.rows(); ++i) {
    if (dist[i] > 0.0)
      out.dZl.row(i) = (ddist[i] / dist[i]) * (Zl.row(i) - Zr.row(i));
  }
  out.dZr = -out.dZl;
  return out;
}

}  // namespace covnet
