#include "modeplait/metrics.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

using namespace modeplait;

namespace {

CausalDigraph graph_from_edges(int d, std::initializer_list<std::pair<int, int>> edges) {
  CausalDigraph g;
  g.adjacency.resize(d, d);
  g.adjacency.setConstant(false);
  for (auto [cause, effect] : edges) g.adjacency(effect, cause) = true;
  return g;
}

// All DAGs on 3 labeled nodes: per unordered pair choose none / forward /
// backward, then drop cyclic results.
std::vector<CausalDigraph> all_dags_d3() {
  std::vector<CausalDigraph> out;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int code = 0; code < 27; ++code) {
    CausalDigraph g;
    g.adjacency.resize(3, 3);
    g.adjacency.setConstant(false);
    int c = code;
    for (auto& pair : pairs) {
      const int state = c % 3;
      c /= 3;
      if (state == 1) g.adjacency(pair[1], pair[0]) = true;
      if (state == 2) g.adjacency(pair[0], pair[1]) = true;
    }
    if (is_acyclic(g)) out.push_back(g);
  }
  return out;
}

// Brute-force SID oracle: on random linear-Gaussian SEMs faithful to the
// true graph, compare the exact interventional effect with the effect
// obtained by adjusting for the estimated graph's parent set.
int sid_oracle(const CausalDigraph& truth, const CausalDigraph& est,
               std::mt19937& rng) {
  const int d = truth.dims();
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_int_distribution<int> sign(0, 1);
  std::uniform_real_distribution<double> var(0.5, 2.0);

  int count = 0;
  for (int i = 0; i < d; ++i) {
    std::vector<int> z;
    for (int p = 0; p < d; ++p)
      if (est.has_edge(p, i)) z.push_back(p);
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      bool miscalculated = false;
      for (int draw = 0; draw < 3 && !miscalculated; ++draw) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
        for (int r = 0; r < d; ++r)
          for (int cc = 0; cc < d; ++cc)
            if (truth.has_edge(cc, r))
              b(r, cc) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
        Eigen::VectorXd noise(d);
        for (int r = 0; r < d; ++r) noise[r] = var(rng);

        // Exact effect of do(x_i) on x_j.
        Eigen::MatrixXd b_do = b;
        b_do.row(i).setZero();
        const Eigen::MatrixXd t_do =
            (Eigen::MatrixXd::Identity(d, d) - b_do).inverse();
        const double effect_true = t_do(j, i);

        double effect_est;
        bool j_in_z = false;
        for (int zz : z) j_in_z = j_in_z || zz == j;
        if (j_in_z) {
          effect_est = 0.0;  // est claims j is upstream of i
        } else {
          const Eigen::MatrixXd mix =
              (Eigen::MatrixXd::Identity(d, d) - b).inverse();
          const Eigen::MatrixXd cov = mix * noise.asDiagonal() * mix.transpose();
          const int s = 1 + static_cast<int>(z.size());
          Eigen::MatrixXd css(s, s);
          Eigen::VectorXd csj(s);
          std::vector<int> idx{i};
          idx.insert(idx.end(), z.begin(), z.end());
          for (int a = 0; a < s; ++a) {
            csj[a] = cov(idx[a], j);
            for (int bb = 0; bb < s; ++bb) css(a, bb) = cov(idx[a], idx[bb]);
          }
          effect_est = css.ldlt().solve(csj)[0];
        }
        if (std::abs(effect_true - effect_est) >
            1e-7 * (1.0 + std::abs(effect_true)))
          miscalculated = true;
      }
      if (miscalculated) ++count;
    }
  }
  return count;
}

// Definition-level SHD: per unordered pair, any disagreement costs 1.
int shd_oracle(const CausalDigraph& a, const CausalDigraph& b) {
  int dist = 0;
  for (int i = 0; i < a.dims(); ++i)
    for (int j = i + 1; j < a.dims(); ++j) {
      const bool af = a.has_edge(i, j), ab = a.has_edge(j, i);
      const bool bf = b.has_edge(i, j), bb = b.has_edge(j, i);
      if (af != bf || ab != bb) ++dist;
    }
  return dist;
}

}  // namespace

TEST_CASE("shd basic cases") {
  const auto g1 = graph_from_edges(3, {{0, 1}});
  CHECK(shd(g1, g1) == 0);

  const auto reversed = graph_from_edges(3, {{1, 0}});
  CHECK(shd(g1, reversed) == 1);

  const auto empty = graph_from_edges(3, {});
  const auto two = graph_from_edges(3, {{0, 1}, {0, 2}});
  CHECK(shd(empty, two) == 2);

  CHECK_THROWS((void)shd(g1, graph_from_edges(4, {})));
}

TEST_CASE("shd matches the definition on random d=5 pairs") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> state(0, 2);
  auto random_dag = [&]() {
    CausalDigraph g;
    g.adjacency.resize(5, 5);
    g.adjacency.setConstant(false);
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        const int s = state(rng);
        if (s == 1) g.adjacency(j, i) = true;
        if (s == 2) g.adjacency(i, j) = true;
      }
    return g;
  };
  int checked = 0;
  while (checked < 20) {
    const auto a = random_dag();
    const auto b = random_dag();
    if (!is_acyclic(a) || !is_acyclic(b)) continue;
    CHECK(shd(a, b) == shd_oracle(a, b));
    ++checked;
  }
}

TEST_CASE("shd bounded by the number of pairs") {
  const auto empty = graph_from_edges(5, {});
  const auto chain = graph_from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(shd(empty, chain) <= 10);
}

TEST_CASE("sid basic cases") {
  const auto g1 = graph_from_edges(2, {{0, 1}});
  CHECK(sid(g1, g1) == 0);
  const auto empty2 = graph_from_edges(2, {});
  CHECK(sid(g1, empty2) == 1);

  CausalDigraph cyclic;
  cyclic.adjacency.resize(2, 2);
  cyclic.adjacency.setConstant(true);
  cyclic.adjacency.diagonal().setConstant(false);
  CHECK_THROWS((void)sid(g1, cyclic));
}

TEST_CASE("sid counts a reversed edge in both directions") {
  const auto truth = graph_from_edges(2, {{0, 1}});
  const auto est = graph_from_edges(2, {{1, 0}});
  // do(x_0): est treats x_1 as a parent of x_0 and predicts no effect, but
  // x_1 truly responds. do(x_1): est adjusts for nothing, so the open
  // backdoor through x_0 fakes an effect that does not exist.
  CHECK(sid(truth, est) == 2);
}

TEST_CASE("sid matches the interventional oracle on all d=3 DAG pairs") {
  const auto dags = all_dags_d3();
  std::mt19937 rng(2024);
  for (const auto& truth : dags)
    for (const auto& est : dags) {
      CHECK(sid(truth, est) == sid_oracle(truth, est, rng));
    }
}

TEST_CASE("sid range bounds") {
  const auto dags = all_dags_d3();
  for (const auto& truth : dags)
    for (const auto& est : dags) {
      const int v = sid(truth, est);
      CHECK(v >= 0);
      CHECK(v <= 6);  // d(d-1)
    }
}

TEST_CASE("rmse and mae basics") {
  std::vector<Eigen::VectorXd> a{Eigen::VectorXd::Constant(2, 1.0),
                                 Eigen::VectorXd::Constant(2, -1.0)};
  CHECK(rmse(a, a) == 0.0);
  CHECK(mae(a, a) == 0.0);

  std::vector<Eigen::VectorXd> b{Eigen::VectorXd::Constant(2, 1.5),
                                 Eigen::VectorXd::Constant(2, -0.5)};
  CHECK(rmse(a, b) == doctest::Approx(0.5));
  CHECK(mae(a, b) == doctest::Approx(0.5));

  std::vector<Eigen::VectorXd> p1{Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::VectorXd::Constant(1, -1.0),
                                  Eigen::VectorXd::Constant(1, 1.0),
                                  Eigen::VectorXd::Constant(1, -1.0)};
  std::vector<Eigen::VectorXd> z1(4, Eigen::VectorXd::Zero(1));
  CHECK(rmse(p1, z1) == doctest::Approx(1.0));
  CHECK(mae(p1, z1) == doctest::Approx(1.0));

  std::vector<Eigen::VectorXd> p2{Eigen::VectorXd::Zero(1),
                                  Eigen::VectorXd::Constant(1, 2.0)};
  std::vector<Eigen::VectorXd> z2(2, Eigen::VectorXd::Zero(1));
  CHECK(rmse(p2, z2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(mae(p2, z2) == doctest::Approx(1.0));

  CHECK_THROWS((void)rmse({}, {}));
}

TEST_CASE("rmse dominates mae") {
  std::mt19937 rng(55);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::VectorXd> p, a;
    for (int t = 0; t < 30; ++t) {
      Eigen::VectorXd x(3), y(3);
      for (auto& v : x.reshaped()) v = g(rng);
      for (auto& v : y.reshaped()) v = g(rng);
      p.push_back(x);
      a.push_back(y);
    }
    CHECK(rmse(p, a) >= mae(p, a));
  }
}
