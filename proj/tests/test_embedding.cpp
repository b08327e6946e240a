#include "modeplait/embedding.hpp"

#include <random>

#include "doctest.h"

using namespace modeplait;

namespace {
Eigen::VectorXd series_of(std::initializer_list<double> v) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) s[i++] = x;
  return s;
}
}  // namespace

TEST_CASE("embed returns the newest-first delay vector") {
  const auto s = series_of({5, 6, 7});
  const DelayVector v = embed(s, 3, 2);
  CHECK(v[0] == 7);
  CHECK(v[1] == 6);
  CHECK(v[2] == 5);

  const auto s2 = series_of({1, 2, 3, 4});
  CHECK(embed(s2, 1, 1)[0] == 2);

  const auto zeros = series_of({0, 0, 0, 0});
  CHECK(embed(zeros, 2, 3).isZero());
}

TEST_CASE("embed rejects out-of-range time indices") {
  const auto s = series_of({1, 2, 3});
  CHECK_THROWS_AS(embed(s, 2, 0), std::out_of_range);
  CHECK_THROWS_AS(embed(s, 2, 3), std::out_of_range);
}

TEST_CASE("build_hankel lays out delay vectors columnwise") {
  const auto h = build_hankel(series_of({1, 2, 3, 4}), 2);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 3);
  CHECK(h(0, 0) == 2);
  CHECK(h(1, 0) == 1);
  CHECK(h(0, 2) == 4);
  CHECK(h(1, 2) == 3);

  const auto single = build_hankel(series_of({1, 2, 3}), 3);
  REQUIRE(single.cols() == 1);
  CHECK(single(0, 0) == 3);
  CHECK(single(2, 0) == 1);

  const auto scalar = build_hankel(series_of({7}), 1);
  CHECK(scalar(0, 0) == 7);

  CHECK_THROWS(build_hankel(series_of({1, 2}), 3));
}

TEST_CASE("hankel anti-diagonals are constant") {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  Eigen::VectorXd s(40);
  for (auto& v : s.reshaped()) v = g(rng);
  const auto h = build_hankel(s, 5);
  for (Eigen::Index r = 0; r + 1 < h.rows(); ++r)
    for (Eigen::Index c = 0; c + 1 < h.cols(); ++c)
      CHECK(h(r, c) == h(r + 1, c + 1));
}

TEST_CASE("build_shift_pairs offsets columns by one step") {
  const auto h = build_hankel(series_of({1, 2, 3, 4}), 2);
  const auto [left, right] = build_shift_pairs(h);
  CHECK(right(0, 0) == 2);
  CHECK(right(1, 0) == 1);
  CHECK(left(0, 0) == 3);
  CHECK(left(1, 0) == 2);
  for (Eigen::Index j = 0; j < left.cols(); ++j) {
    CHECK(left.col(j) == h.col(j + 1));
    CHECK(right.col(j) == h.col(j));
  }

  const auto constant = build_hankel(series_of({2, 2, 2, 2}), 2);
  const auto [cl, cr] = build_shift_pairs(constant);
  CHECK(cl == cr);

  CHECK_THROWS(build_shift_pairs(build_hankel(series_of({1, 2, 3}), 3)));
}

TEST_CASE("invert_embed reads the newest slot") {
  CHECK(invert_embed(series_of({7, 6, 5})) == 7);
  Eigen::VectorXcd c(2);
  c << std::complex<double>(3, 0), std::complex<double>(1, 2);
  CHECK(invert_embed(c) == 3);
  CHECK(invert_embed(series_of({0})) == 0);
  CHECK_THROWS(invert_embed(Eigen::VectorXd{}));
}

TEST_CASE("embedding round-trips through invert_embed") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  Eigen::VectorXd s(30);
  for (auto& v : s.reshaped()) v = g(rng);
  for (int h = 1; h <= 6; ++h)
    for (Eigen::Index t = h - 1; t < s.size(); ++t)
      CHECK(invert_embed(embed(s, h, t)) == s[t]);
}
