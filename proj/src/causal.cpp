#include "modeplait/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace modeplait {

namespace {

double diag_abs_product(const Eigen::MatrixXd& w, const std::vector<int>& perm) {
  double p = 1.0;
  for (size_t i = 0; i < perm.size(); ++i) p *= std::abs(w(perm[i], static_cast<Eigen::Index>(i)));
  return p;
}

double upper_square_sum(const Eigen::MatrixXd& b, const std::vector<int>& perm) {
  double s = 0.0;
  const int d = static_cast<int>(perm.size());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double v = b(perm[i], perm[j]);
      s += v * v;
    }
  return s;
}

}  // namespace

std::pair<Eigen::MatrixXd, std::vector<int>>
permute_nonzero_diagonal(const Eigen::MatrixXd& w) {
  const int d = static_cast<int>(w.rows());
  if (w.cols() != d) throw std::invalid_argument("permute_nonzero_diagonal: square matrix required");

  std::vector<int> best(d), perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  double best_product = -1.0;

  if (d <= kExactPermutationCap) {
    do {
      const double p = diag_abs_product(w, perm);
      if (p > best_product) {
        best_product = p;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Greedy assignment: repeatedly take the largest remaining |entry|.
    std::vector<bool> row_used(d, false), col_used(d, false);
    best.assign(d, -1);
    for (int step = 0; step < d; ++step) {
      double top = -1.0;
      int top_r = -1, top_c = -1;
      for (int r = 0; r < d; ++r) {
        if (row_used[r]) continue;
        for (int c = 0; c < d; ++c) {
          if (col_used[c]) continue;
          if (std::abs(w(r, c)) > top) {
            top = std::abs(w(r, c));
            top_r = r;
            top_c = c;
          }
        }
      }
      row_used[top_r] = true;
      col_used[top_c] = true;
      best[top_c] = top_r;
    }
    best_product = diag_abs_product(w, best);
  }

  if (best_product <= 0.0)
    throw std::invalid_argument(
        "permute_nonzero_diagonal: no permutation yields a nonzero diagonal");

  Eigen::MatrixXd w_tilde(d, d);
  for (int i = 0; i < d; ++i) w_tilde.row(i) = w.row(best[i]);
  return {std::move(w_tilde), std::move(best)};
}

Eigen::MatrixXd normalize_diagonal(const Eigen::MatrixXd& w_tilde) {
  const Eigen::Index d = w_tilde.rows();
  Eigen::MatrixXd out = w_tilde;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diag = w_tilde(i, i);
    if (diag == 0.0)
      throw std::invalid_argument("normalize_diagonal: zero diagonal entry");
    out.row(i) /= diag;
  }
  return out;
}

CausalAdjacency to_adjacency(const Eigen::MatrixXd& w_prime) {
  return {Eigen::MatrixXd::Identity(w_prime.rows(), w_prime.cols()) - w_prime};
}

std::pair<std::vector<int>, CausalAdjacency>
order_causally(const CausalAdjacency& b_hat) {
  const int d = static_cast<int>(b_hat.b.rows());
  std::vector<int> best(d), perm(d);
  std::iota(perm.begin(), perm.end(), 0);

  if (d <= kExactPermutationCap) {
    double best_cost = std::numeric_limits<double>::infinity();
    std::iota(best.begin(), best.end(), 0);
    do {
      const double cost = upper_square_sum(b_hat.b, perm);
      if (cost < best_cost) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Root-first greedy: repeatedly pick the variable least caused by the
    // remaining ones.
    std::vector<int> remaining(d);
    std::iota(remaining.begin(), remaining.end(), 0);
    best.clear();
    while (!remaining.empty()) {
      double top_cost = std::numeric_limits<double>::infinity();
      size_t top_idx = 0;
      for (size_t i = 0; i < remaining.size(); ++i) {
        double cost = 0.0;
        for (int j : remaining) {
          if (j == remaining[i]) continue;
          const double v = b_hat.b(remaining[i], j);
          cost += v * v;
        }
        if (cost < top_cost) {
          top_cost = cost;
          top_idx = i;
        }
      }
      best.push_back(remaining[top_idx]);
      remaining.erase(remaining.begin() + static_cast<long>(top_idx));
    }
  }

  Eigen::MatrixXd b_tilde(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b_tilde(i, j) = b_hat.b(best[i], best[j]);
  // Edge removal: everything above the diagonal goes.
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) b_tilde(i, j) = 0.0;
  return {std::move(best), CausalAdjacency{std::move(b_tilde)}};
}

CausalDigraph binarize(const CausalAdjacency& b, double edge_threshold) {
  const Eigen::Index d = b.b.rows();
  CausalDigraph g;
  g.adjacency = (b.b.cwiseAbs().array() > edge_threshold);
  g.adjacency.diagonal().setConstant(false);
  (void)d;
  return g;
}

bool is_acyclic(const CausalDigraph& g) {
  const int d = g.dims();
  std::vector<int> indegree(d, 0);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (g.adjacency(i, j)) ++indegree[i];
  std::vector<int> stack;
  for (int i = 0; i < d; ++i)
    if (indegree[i] == 0) stack.push_back(i);
  int visited = 0;
  while (!stack.empty()) {
    const int cause = stack.back();
    stack.pop_back();
    ++visited;
    for (int effect = 0; effect < d; ++effect) {
      if (g.adjacency(effect, cause) && --indegree[effect] == 0)
        stack.push_back(effect);
    }
  }
  return visited == d;
}

CausalIdentifyResult identify_causality(const Eigen::MatrixXd& w,
                                        double edge_threshold) {
  const int d = static_cast<int>(w.rows());
  auto [w_tilde, row_perm] = permute_nonzero_diagonal(w);
  const Eigen::MatrixXd w_prime = normalize_diagonal(w_tilde);
  const CausalAdjacency b_hat = to_adjacency(w_prime);
  auto [order, b_tilde] = order_causally(b_hat);

  CausalIdentifyResult out;
  out.causal_order = order;
  out.exact = d <= kExactPermutationCap;
  out.adjacency.b = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.adjacency.b(order[i], order[j]) = b_tilde.b(i, j);
  out.digraph = binarize(out.adjacency, edge_threshold);
  return out;
}

}  // namespace modeplait
