#include <algorithm>
#include <cmath>
#include <limits>

#include "vpme/error.hpp"
#include "vpme/ot_solvers.hpp"

namespace vpme {

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  if (n == 0) throw InvalidArgument("assignment: empty problem");
  if (cost.size() != n * n) throw InvalidArgument("assignment: cost matrix is not n x n");
  for (double c : cost)
    if (!std::isfinite(c)) throw InvalidArgument("assignment: non-finite cost");

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr long none = -1;
  auto c = [&](std::size_t i, std::size_t j) { return cost[i * n + j]; };

  std::vector<long> rowsol(n, none);
  std::vector<long> colsol(n, none);
  std::vector<double> v(n);
  std::vector<std::size_t> free_rows;
  free_rows.reserve(n);

  // Column reduction: v[j] = min_i c(i,j), each column tentatively taken by its argmin row.
  {
    std::vector<int> matches(n, 0);
    for (std::size_t jj = n; jj-- > 0;) {
      std::size_t imin = 0;
      double m = c(0, jj);
      for (std::size_t i = 1; i < n; ++i)
        if (c(i, jj) < m) {
          m = c(i, jj);
          imin = i;
        }
      v[jj] = m;
      if (++matches[imin] == 1) {
        rowsol[imin] = static_cast<long>(jj);
        colsol[jj] = static_cast<long>(imin);
      } else if (v[jj] < v[static_cast<std::size_t>(rowsol[imin])]) {
        colsol[static_cast<std::size_t>(rowsol[imin])] = none;
        rowsol[imin] = static_cast<long>(jj);
        colsol[jj] = static_cast<long>(imin);
      } else {
        colsol[jj] = none;
      }
    }
    // Reduction transfer.
    for (std::size_t i = 0; i < n; ++i) {
      if (matches[i] == 0) {
        free_rows.push_back(i);
      } else if (matches[i] == 1 && n > 1) {
        const auto j1 = static_cast<std::size_t>(rowsol[i]);
        double m = inf;
        for (std::size_t j = 0; j < n; ++j)
          if (j != j1) m = std::min(m, c(i, j) - v[j]);
        v[j1] -= m;
      }
    }
  }

  // Augmenting row reduction, two sweeps, with a cap against floating-point cycling.
  for (int sweep = 0; sweep < 2 && !free_rows.empty(); ++sweep) {
    std::vector<std::size_t> queue = std::move(free_rows);
    free_rows.clear();
    std::size_t k = 0;
    std::size_t budget = 8 * n + 16;
    while (k < queue.size()) {
      if (budget-- == 0) {
        free_rows.insert(free_rows.end(), queue.begin() + static_cast<long>(k), queue.end());
        break;
      }
      const std::size_t i = queue[k++];
      std::size_t j1 = 0;
      std::size_t j2 = 0;
      double umin = c(i, 0) - v[0];
      double usub = inf;
      for (std::size_t j = 1; j < n; ++j) {
        const double h = c(i, j) - v[j];
        if (h < usub) {
          if (h >= umin) {
            usub = h;
            j2 = j;
          } else {
            usub = umin;
            umin = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      long i0 = colsol[j1];
      const bool strict = umin < usub;
      if (strict) {
        v[j1] -= usub - umin;
      } else if (i0 != none) {
        j1 = j2;
        i0 = colsol[j2];
      }
      if (rowsol[i] != none && colsol[static_cast<std::size_t>(rowsol[i])] == static_cast<long>(i))
        colsol[static_cast<std::size_t>(rowsol[i])] = none;
      rowsol[i] = static_cast<long>(j1);
      colsol[j1] = static_cast<long>(i);
      if (i0 != none) {
        rowsol[static_cast<std::size_t>(i0)] = none;
        if (strict) {
          queue[--k] = static_cast<std::size_t>(i0);
        } else {
          free_rows.push_back(static_cast<std::size_t>(i0));
        }
      }
    }
  }

  // Shortest augmenting paths (Dijkstra on reduced costs) for the remaining free rows.
  std::vector<double> d(n);
  std::vector<std::size_t> pred(n);
  std::vector<std::size_t> collist(n);
  for (const std::size_t freerow : free_rows) {
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = c(freerow, j) - v[j];
      pred[j] = freerow;
      collist[j] = j;
    }
    std::size_t low = 0;
    std::size_t up = 0;
    std::size_t last = 0;
    std::size_t endofpath = 0;
    bool found = false;
    double mind = 0.0;
    while (!found) {
      if (up == low) {
        last = low;
        mind = d[collist[up++]];
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = collist[k];
          const double h = d[j];
          if (h <= mind) {
            if (h < mind) {
              up = low;
              mind = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (std::size_t k = low; k < up; ++k)
          if (colsol[collist[k]] == none) {
            endofpath = collist[k];
            found = true;
            break;
          }
      }
      if (!found) {
        const std::size_t j1 = collist[low++];
        const auto i = static_cast<std::size_t>(colsol[j1]);
        const double u1 = c(i, j1) - v[j1] - mind;
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = collist[k];
          const double cred = c(i, j) - v[j] - u1;
          if (cred < d[j]) {
            d[j] = cred;
            pred[j] = i;
            if (cred <= mind) {
              if (colsol[j] == none) {
                endofpath = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
          }
        }
      }
    }
    // Columns finalized in the scan get their prices raised.
    for (std::size_t k = 0; k < last; ++k) {
      const std::size_t j = collist[k];
      v[j] += d[j] - mind;
    }
    // Flip the alternating path.
    while (true) {
      const std::size_t i = pred[endofpath];
      colsol[endofpath] = static_cast<long>(i);
      const long prev = rowsol[i];
      rowsol[i] = static_cast<long>(endofpath);
      if (i == freerow) break;
      endofpath = static_cast<std::size_t>(prev);
    }
  }

  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rowsol[i] == none) throw Error("assignment: internal error, unmatched row");
    out[i] = static_cast<std::size_t>(rowsol[i]);
  }
  return out;
}

}  // namespace vpme
