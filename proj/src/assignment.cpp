#include "bevtrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bevtrack/errors.hpp"

namespace bevtrack::assoc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Classic shortest-augmenting-path assignment on an n x m matrix with
/// n <= m and all entries finite.  Returns row_of_col (1-based internally).
std::vector<int> solve_dense(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  return p;
}

}  // namespace

Assignment hungarian(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());

  Assignment result;
  if (rows == 0 || cols == 0) {
    for (int i = 0; i < rows; ++i) result.unmatched_rows.push_back(i);
    for (int j = 0; j < cols; ++j) result.unmatched_cols.push_back(j);
    return result;
  }

  double lo = kInf, hi = -kInf;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double c = cost(i, j);
      if (std::isnan(c) || c == -kInf) {
        throw ValidationError("assignment costs must be finite or +infinity");
      }
      if (c != kInf) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }

  std::vector<char> row_matched(rows, 0);
  if (lo <= hi) {  // at least one allowed pair
    // Work on the transposed matrix when rows exceed columns so the solver
    // always assigns every row.  Forbidden pairs become a sentinel larger
    // than any possible finite total, which makes the solver maximize the
    // number of allowed pairs before minimizing their cost; sentinel matches
    // are stripped afterwards.
    const bool transposed = rows > cols;
    const int n = transposed ? cols : rows;
    const int m = transposed ? rows : cols;
    const double span = hi - lo;
    const double big = span * static_cast<double>(n) + 1.0;

    Eigen::MatrixXd a(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        const double c = transposed ? cost(j, i) : cost(i, j);
        a(i, j) = (c == kInf) ? big : c - lo;
      }
    }

    const std::vector<int> row_of_col = solve_dense(a);
    for (int j = 1; j <= m; ++j) {
      const int i = row_of_col[j];
      if (i == 0) continue;
      const int r = transposed ? j - 1 : i - 1;
      const int c = transposed ? i - 1 : j - 1;
      if (cost(r, c) == kInf) continue;
      result.matches.emplace_back(r, c);
      row_matched[r] = 1;
    }
    std::sort(result.matches.begin(), result.matches.end());
  }

  std::vector<char> col_matched(cols, 0);
  for (const auto& [r, c] : result.matches) {
    col_matched[c] = 1;
    result.total_cost += cost(r, c);
  }
  for (int i = 0; i < rows; ++i) {
    if (!row_matched[i]) result.unmatched_rows.push_back(i);
  }
  for (int j = 0; j < cols; ++j) {
    if (!col_matched[j]) result.unmatched_cols.push_back(j);
  }
  return result;
}

}  // namespace bevtrack::assoc
