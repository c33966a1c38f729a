#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace bevtrack::assoc {

/// Result of a rectangular linear assignment.
struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (row, col), ascending by row
  std::vector<int> unmatched_rows;           // ascending
  std::vector<int> unmatched_cols;           // ascending
  double total_cost = 0.0;                   // sum over matches
};

/// Solves min-cost assignment on a rectangular cost matrix by shortest
/// augmenting paths.  Entries of +infinity mark forbidden pairs; among all
/// matchings of maximum cardinality over the allowed pairs, a minimum-cost
/// one is returned.  The solver is deterministic: its fixed row order and
/// ascending column scans resolve equal-cost alternatives toward smaller
/// (row, col) indices.  Costs must be finite or +infinity; NaN or -infinity
/// throws ValidationError.
Assignment hungarian(const Eigen::MatrixXd& cost);

}  // namespace bevtrack::assoc
