#include "t3dp/hungarian.hpp"

#include <algorithm>
#include <limits>

#include "t3dp/error.hpp"

namespace t3dp {

namespace {

// Requires rows <= cols. Returns the column assigned to each row.
std::vector<std::size_t> solve_wide(const Matrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = 0;

  // 1-based arrays; column 0 is the virtual root of each augmenting search.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), min_to(m + 1);
  std::vector<std::size_t> row_of(m + 1, kNone), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(min_to.begin(), min_to.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_to[j]) {
          min_to[j] = cur;
          way[j] = j0;
        }
        if (min_to[j] < delta) {
          delta = min_to[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != kNone);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> col_of_row(n);
  for (std::size_t j = 1; j <= m; ++j)
    if (row_of[j] != kNone) col_of_row[row_of[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace

Assignment hungarian(const Matrix& cost) {
  Assignment out;
  if (cost.rows() == 0 || cost.cols() == 0) return out;
  if (!all_finite(cost.flat())) throw InputError("hungarian needs finite costs");

  if (cost.rows() <= cost.cols()) {
    const auto cols = solve_wide(cost);
    for (std::size_t r = 0; r < cols.size(); ++r) out.pairs.emplace_back(r, cols[r]);
  } else {
    Matrix t(cost.cols(), cost.rows());
    for (std::size_t r = 0; r < cost.rows(); ++r)
      for (std::size_t c = 0; c < cost.cols(); ++c) t(c, r) = cost(r, c);
    const auto rows = solve_wide(t);
    for (std::size_t c = 0; c < rows.size(); ++c) out.pairs.emplace_back(rows[c], c);
    std::sort(out.pairs.begin(), out.pairs.end());
  }
  for (const auto& [r, c] : out.pairs) out.cost += cost(r, c);
  return out;
}

}  // namespace t3dp
