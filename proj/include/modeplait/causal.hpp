#pragma once

// Turn a demixing matrix W into the causal adjacency matrix B of the
// structural equation model X = B X + E, and binarize it for evaluation.

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace modeplait {

// b(i, j) = strength of the direct effect j -> i (row = effect).
struct CausalAdjacency {
  Eigen::MatrixXd b;
};

struct CausalDigraph {
  // adjacency(i, j) = true iff edge j -> i.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;

  int dims() const { return static_cast<int>(adjacency.rows()); }
  bool has_edge(int cause, int effect) const {
    return adjacency(effect, cause);
  }
};

struct CausalIdentifyResult {
  CausalAdjacency adjacency;  // in original variable order
  CausalDigraph digraph;
  std::vector<int> causal_order;  // permutation found in the ordering step
  bool exact = true;              // false when the greedy fallback was used
};

// Exhaustive-search cap for the permutation steps; above it a greedy
// heuristic is used and the result is flagged.
inline constexpr int kExactPermutationCap = 10;

// Row permutation of w maximizing the product of |diagonal| entries.
// perm[i] gives the source row placed at row i.
std::pair<Eigen::MatrixXd, std::vector<int>>
permute_nonzero_diagonal(const Eigen::MatrixXd& w);

// Scale each row by 1 / diagonal so the diagonal becomes all ones.
Eigen::MatrixXd normalize_diagonal(const Eigen::MatrixXd& w_tilde);

// B_hat = I - W' for a unit-diagonal W'.
CausalAdjacency to_adjacency(const Eigen::MatrixXd& w_prime);

// Simultaneous row/column permutation minimizing the sum of squared
// upper-triangular entries of K B K^T; the surviving upper triangle is then
// zeroed so the result is acyclic by construction.
std::pair<std::vector<int>, CausalAdjacency>
order_causally(const CausalAdjacency& b_hat);

// Full pipeline W -> B, with the ordering permutation undone so B is
// indexed by the original variables. Edges are |b| > edge_threshold.
CausalIdentifyResult identify_causality(const Eigen::MatrixXd& w,
                                        double edge_threshold);

CausalDigraph binarize(const CausalAdjacency& b, double edge_threshold);

// True when the digraph has no directed cycle (topological sort succeeds).
bool is_acyclic(const CausalDigraph& g);

}  // namespace modeplait
