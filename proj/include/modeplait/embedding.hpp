#pragma once

// Time-delay embedding: delay vectors, Hankel matrices, and the shifted
// data-matrix pairs consumed by mode estimation.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <utility>

namespace modeplait {

// Delay vectors are ordered newest-first: index 0 holds the current sample.
using DelayVector = Eigen::VectorXd;

// h x (n - h + 1) matrix; column j is the delay vector at time h + j
// (0-based). Anti-diagonals are constant.
using HankelMatrix = Eigen::MatrixXd;

// Delay vector (series[t], series[t-1], ..., series[t-h+1]). t is 0-based,
// so t >= h - 1 is required.
inline DelayVector embed(const Eigen::VectorXd& series, int h, Eigen::Index t) {
  if (h < 1) throw std::invalid_argument("embed: h must be >= 1");
  if (t < h - 1 || t >= series.size())
    throw std::out_of_range("embed: time index outside embeddable range");
  return series.segment(t - h + 1, h).reverse();
}

inline HankelMatrix build_hankel(const Eigen::VectorXd& series, int h) {
  if (h < 1) throw std::invalid_argument("build_hankel: h must be >= 1");
  const Eigen::Index n = series.size();
  if (n < h) throw std::invalid_argument("build_hankel: series shorter than h");
  HankelMatrix hankel(h, n - h + 1);
  for (Eigen::Index j = 0; j < hankel.cols(); ++j)
    hankel.col(j) = embed(series, h, h - 1 + j);
  return hankel;
}

// Splits a Hankel matrix into the time-shifted pair (L, R): R holds columns
// 0..m-2, L holds columns 1..m-1, so L is one step ahead of R columnwise.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
build_shift_pairs(const HankelMatrix& hankel) {
  const Eigen::Index m = hankel.cols();
  if (m < 2)
    throw std::invalid_argument("build_shift_pairs: need at least 2 columns");
  return {hankel.rightCols(m - 1), hankel.leftCols(m - 1)};
}

// Left inverse of the embedding observable: the real part of the
// newest-sample slot. Conjugate-pair modes make the imaginary residue
// vanish for real data.
inline double invert_embed(const Eigen::VectorXcd& v) {
  if (v.size() == 0) throw std::invalid_argument("invert_embed: empty vector");
  return v[0].real();
}

inline double invert_embed(const DelayVector& v) {
  if (v.size() == 0) throw std::invalid_argument("invert_embed: empty vector");
  return v[0];
}

}  // namespace modeplait
