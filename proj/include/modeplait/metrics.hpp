#pragma once

// Scoring: structural Hamming distance and structural intervention distance
// for causal graphs, RMSE/MAE for forecasts.

#include <Eigen/Dense>
#include <vector>

#include "modeplait/causal.hpp"

namespace modeplait {

// Missing, extra, and reversed edges each cost 1, counted per unordered pair.
int shd(const CausalDigraph& truth, const CausalDigraph& est);

// Number of ordered pairs (i, j) whose interventional distribution would be
// miscalculated when the estimated graph's parent set of i is used as the
// adjustment set in the true graph. Exact (adjustment criterion with
// d-separation checks); both graphs must be acyclic and d must be small.
int sid(const CausalDigraph& truth, const CausalDigraph& est);

double rmse(const std::vector<Eigen::VectorXd>& pred,
            const std::vector<Eigen::VectorXd>& actual);
double mae(const std::vector<Eigen::VectorXd>& pred,
           const std::vector<Eigen::VectorXd>& actual);

}  // namespace modeplait
