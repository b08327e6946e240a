#include "modeplait/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace modeplait {

namespace {

int pair_status(const CausalDigraph& g, int a, int b) {
  // 0 none, 1 a->b, 2 b->a, 3 both
  return (g.has_edge(a, b) ? 1 : 0) | (g.has_edge(b, a) ? 2 : 0);
}

// de(v) including v itself.
std::vector<bool> descendants(const CausalDigraph& g, int v) {
  const int d = g.dims();
  std::vector<bool> seen(d, false);
  std::vector<int> stack{v};
  seen[v] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w = 0; w < d; ++w)
      if (g.has_edge(u, w) && !seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
  }
  return seen;
}

struct PathSearch {
  const CausalDigraph& g;
  int target;
  std::vector<int> path;
  std::vector<bool> on_path;
  // each found path: node list plus per-step direction (true = forward edge
  // path[k] -> path[k+1])
  std::vector<std::pair<std::vector<int>, std::vector<bool>>> found;
  std::vector<bool> dirs;

  void dfs(int u) {
    if (u == target) {
      found.emplace_back(path, dirs);
      return;
    }
    const int d = g.dims();
    for (int w = 0; w < d; ++w) {
      if (on_path[w]) continue;
      const bool fwd = g.has_edge(u, w);
      const bool bwd = g.has_edge(w, u);
      for (int use_fwd = 1; use_fwd >= 0; --use_fwd) {
        if (use_fwd ? !fwd : !bwd) continue;
        on_path[w] = true;
        path.push_back(w);
        dirs.push_back(use_fwd);
        dfs(w);
        dirs.pop_back();
        path.pop_back();
        on_path[w] = false;
      }
    }
  }
};

// All simple paths i..j in the skeleton, with edge orientations.
std::vector<std::pair<std::vector<int>, std::vector<bool>>>
all_paths(const CausalDigraph& g, int i, int j) {
  PathSearch s{g, j, {i}, std::vector<bool>(g.dims(), false), {}, {}};
  s.on_path[i] = true;
  s.dfs(i);
  return s.found;
}

bool path_is_causal(const std::vector<bool>& dirs) {
  for (bool fwd : dirs)
    if (!fwd) return false;
  return true;
}

// d-separation blocking of one path given conditioning set z.
bool path_blocked(const CausalDigraph& g, const std::vector<int>& nodes,
                  const std::vector<bool>& dirs, const std::vector<bool>& z) {
  const size_t m = nodes.size();
  for (size_t k = 1; k + 1 < m; ++k) {
    const bool collider = dirs[k - 1] && !dirs[k];  // -> v <-
    if (!collider) {
      if (z[nodes[k]]) return true;
    } else {
      const auto de = descendants(g, nodes[k]);
      bool opened = false;
      for (int v = 0; v < g.dims(); ++v)
        if (de[v] && z[v]) {
          opened = true;
          break;
        }
      if (!opened) return true;
    }
  }
  return false;
}

// Complete adjustment criterion for X = {i}, Y = {j} in DAG g.
bool valid_adjustment_set(const CausalDigraph& g, int i, int j,
                          const std::vector<bool>& z) {
  const int d = g.dims();
  const auto paths = all_paths(g, i, j);

  // Forbidden set: nodes (other than i) on a proper causal path i -> ... -> j,
  // and all their descendants.
  std::vector<bool> forb(d, false);
  for (const auto& [nodes, dirs] : paths) {
    if (!path_is_causal(dirs)) continue;
    for (size_t k = 1; k < nodes.size(); ++k) {
      const auto de = descendants(g, nodes[k]);
      for (int v = 0; v < d; ++v) forb[v] = forb[v] || de[v];
    }
  }
  for (int v = 0; v < d; ++v)
    if (z[v] && forb[v]) return false;

  for (const auto& [nodes, dirs] : paths) {
    if (path_is_causal(dirs)) continue;
    if (!path_blocked(g, nodes, dirs, z)) return false;
  }
  return true;
}

}  // namespace

int shd(const CausalDigraph& truth, const CausalDigraph& est) {
  const int d = truth.dims();
  if (est.dims() != d) throw std::invalid_argument("shd: dimension mismatch");
  int dist = 0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (pair_status(truth, a, b) != pair_status(est, a, b)) ++dist;
  return dist;
}

int sid(const CausalDigraph& truth, const CausalDigraph& est) {
  const int d = truth.dims();
  if (est.dims() != d) throw std::invalid_argument("sid: dimension mismatch");
  if (!is_acyclic(truth) || !is_acyclic(est))
    throw std::invalid_argument("sid: graphs must be acyclic");

  int count = 0;
  for (int i = 0; i < d; ++i) {
    std::vector<bool> z(d, false);
    for (int p = 0; p < d; ++p)
      if (est.has_edge(p, i)) z[p] = true;  // parents of i in est
    const auto de_i = descendants(truth, i);

    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      bool correct;
      if (z[j]) {
        // est claims j is a parent of i, hence unaffected by do(x_i);
        // correct only when j is truly not downstream of i.
        correct = !de_i[j];
      } else {
        correct = valid_adjustment_set(truth, i, j, z);
      }
      if (!correct) ++count;
    }
  }
  return count;
}

namespace {
void check_series(const std::vector<Eigen::VectorXd>& pred,
                  const std::vector<Eigen::VectorXd>& actual) {
  if (pred.empty() || pred.size() != actual.size())
    throw std::invalid_argument("forecast metric: empty or mismatched series");
}
}  // namespace

double rmse(const std::vector<Eigen::VectorXd>& pred,
            const std::vector<Eigen::VectorXd>& actual) {
  check_series(pred, actual);
  double sum = 0.0;
  long n = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    sum += (pred[t] - actual[t]).squaredNorm();
    n += pred[t].size();
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double mae(const std::vector<Eigen::VectorXd>& pred,
           const std::vector<Eigen::VectorXd>& actual) {
  check_series(pred, actual);
  double sum = 0.0;
  long n = 0;
  for (size_t t = 0; t < pred.size(); ++t) {
    sum += (pred[t] - actual[t]).cwiseAbs().sum();
    n += pred[t].size();
  }
  return sum / static_cast<double>(n);
}

}  // namespace modeplait
