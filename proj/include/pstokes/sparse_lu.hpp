// Sparse direct LU: left-looking Gilbert-Peierls factorization with partial
// pivoting on a column-compressed copy of the matrix, optionally preceded by
// reverse Cuthill-McKee reordering of the (structurally symmetric) pattern.
// Used as the coarse-level solver of the multilevel preconditioner.

#ifndef PSTOKES_SPARSE_LU_HPP
#define PSTOKES_SPARSE_LU_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pstokes/csr.hpp"

namespace pstokes {

enum class LuOrdering { Natural, Rcm };

/// Reverse Cuthill-McKee permutation (new -> old) of a symmetrized pattern.
inline std::vector<int> rcm_ordering(const CsrMatrix& a) {
  const int n = a.n;
  // symmetrized adjacency without the diagonal
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const int j = a.cols[p];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto& v : adj) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  auto degree = [&](int v) { return static_cast<int>(adj[v].size()); };

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> visited(n, 0);
  std::vector<int> level_of(n, -1);

  // BFS returning the depth and leaving the last level in `last`
  auto bfs = [&](int start, std::vector<int>& last) {
    std::fill(level_of.begin(), level_of.end(), -1);
    std::vector<int> cur{start}, nxt;
    level_of[start] = 0;
    int depth = 0;
    last = cur;
    while (!cur.empty()) {
      nxt.clear();
      for (int v : cur)
        for (int w : adj[v])
          if (level_of[w] < 0) {
            level_of[w] = depth + 1;
            nxt.push_back(w);
          }
      if (nxt.empty()) break;
      last = nxt;
      std::swap(cur, nxt);
      ++depth;
    }
    return depth;
  };

  for (int seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    // pseudo-peripheral start within this component
    int start = seed;
    {
      std::vector<int> last;
      int depth = bfs(start, last);
      for (int iter = 0; iter < 8; ++iter) {
        int best = last[0];
        for (int v : last)
          if (degree(v) < degree(best)) best = v;
        std::vector<int> last2;
        const int d2 = bfs(best, last2);
        if (d2 <= depth) break;
        depth = d2;
        start = best;
        last = last2;
      }
    }
    // Cuthill-McKee sweep, neighbors by increasing degree
    std::vector<int> queue{start};
    visited[start] = 1;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int v = queue[qi];
      order.push_back(v);
      std::vector<int> nb;
      for (int w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          nb.push_back(w);
        }
      std::sort(nb.begin(), nb.end(), [&](int x, int y) {
        return degree(x) != degree(y) ? degree(x) < degree(y) : x < y;
      });
      queue.insert(queue.end(), nb.begin(), nb.end());
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

class SparseLu {
public:
  explicit SparseLu(const CsrMatrix& a, LuOrdering ordering = LuOrdering::Rcm) : m_n(a.n) {
    m_perm.resize(m_n);
    if (ordering == LuOrdering::Rcm) m_perm = rcm_ordering(a);
    else
      for (int i = 0; i < m_n; ++i) m_perm[i] = i;
    std::vector<int> iperm(m_n);
    for (int i = 0; i < m_n; ++i) iperm[m_perm[i]] = i;

    // column-compressed copy of A(perm, perm)
    std::vector<std::int64_t> col_ptr(m_n + 1, 0);
    for (int i = 0; i < m_n; ++i)
      for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
        col_ptr[iperm[a.cols[p]] + 1]++;
    for (int j = 0; j < m_n; ++j) col_ptr[j + 1] += col_ptr[j];
    std::vector<int> rows(a.nnz());
    std::vector<double> vals(a.nnz());
    {
      std::vector<std::int64_t> next = col_ptr;
      for (int i = 0; i < m_n; ++i)
        for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
          const std::int64_t q = next[iperm[a.cols[p]]]++;
          rows[q] = iperm[i];
          vals[q] = a.vals[p];
        }
    }
    factor(col_ptr, rows, vals);
  }

  void solve(const double* b, double* x) const {
    std::vector<double> y(m_n);
    // y = L^{-1} P_row P_sym b
    for (int j = 0; j < m_n; ++j) y[j] = b[m_perm[m_pivot_orig[j]]];
    for (int j = 0; j < m_n; ++j) {
      const double xj = y[j];
      if (xj == 0.0) continue;
      for (std::int64_t p = m_l_ptr[j]; p < m_l_ptr[j + 1]; ++p) y[m_l_rows[p]] -= m_l_vals[p] * xj;
    }
    // back substitution with U (columns hold the diagonal last)
    for (int j = m_n - 1; j >= 0; --j) {
      y[j] /= m_u_vals[m_u_ptr[j + 1] - 1];
      const double xj = y[j];
      if (xj == 0.0) continue;
      for (std::int64_t p = m_u_ptr[j]; p < m_u_ptr[j + 1] - 1; ++p) y[m_u_rows[p]] -= m_u_vals[p] * xj;
    }
    for (int j = 0; j < m_n; ++j) x[m_perm[j]] = y[j];
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x(m_n);
    solve(b.data(), x.data());
    return x;
  }

  std::int64_t fill() const {
    return static_cast<std::int64_t>(m_l_vals.size() + m_u_vals.size());
  }

private:
  int m_n;
  std::vector<int> m_perm;       // symmetric ordering, new -> old
  std::vector<int> m_pivot_orig; // pivot row (pre-row-pivoting index) of each column
  std::vector<std::int64_t> m_l_ptr, m_u_ptr;
  std::vector<int> m_l_rows, m_u_rows; // in pivot-order indices
  std::vector<double> m_l_vals, m_u_vals;

  /// Left-looking sparse LU with partial pivoting. Row indices of A are in
  /// the symmetric ordering; pivoting introduces a second, row-only
  /// permutation recorded in m_pivot_orig / pinv.
  void factor(const std::vector<std::int64_t>& col_ptr, const std::vector<int>& rows,
              const std::vector<double>& vals) {
    const int n = m_n;
    m_l_ptr.assign(n + 1, 0);
    m_u_ptr.assign(n + 1, 0);
    m_pivot_orig.assign(n, -1);
    std::vector<int> pinv(n, -1); // original row -> pivot position, -1 if unpivoted

    std::vector<double> work(n, 0.0);
    std::vector<int> found(n, -1); // DFS marks, holds current column index
    std::vector<int> topo;        // topological order of reached nodes
    std::vector<int> stack, estack;
    topo.reserve(256);

    for (int j = 0; j < n; ++j) {
      // symbolic: reachability of pattern(A(:,j)) through columns of L
      topo.clear();
      for (std::int64_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
        int r = rows[p];
        if (found[r] == j) continue;
        // iterative DFS from r
        stack.clear();
        estack.clear();
        stack.push_back(r);
        estack.push_back(pinv[r] < 0 ? -1 : static_cast<int>(m_l_ptr[pinv[r]]));
        found[r] = j;
        while (!stack.empty()) {
          const int node = stack.back();
          const int col = pinv[node];
          bool descended = false;
          if (col >= 0) {
            int& e = estack.back();
            while (e < m_l_ptr[col + 1]) {
              const int child = m_l_rows[e++];
              if (found[child] != j) {
                found[child] = j;
                stack.push_back(child);
                estack.push_back(pinv[child] < 0 ? -1 : static_cast<int>(m_l_ptr[pinv[child]]));
                descended = true;
                break;
              }
            }
          }
          if (!descended && (col < 0 || estack.back() >= m_l_ptr[col + 1])) {
            topo.push_back(node);
            stack.pop_back();
            estack.pop_back();
          }
        }
      }
      // numeric: x = A(:,j), then eliminate along reverse topological order
      for (std::int64_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) work[rows[p]] = vals[p];
      for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const int node = *it;
        const int col = pinv[node];
        if (col < 0) continue;
        const double xv = work[node];
        if (xv == 0.0) continue;
        for (std::int64_t p = m_l_ptr[col]; p < m_l_ptr[col + 1]; ++p)
          work[m_l_rows[p]] -= m_l_vals[p] * xv;
      }
      // partial pivot among unpivoted rows
      int piv = -1;
      double pmax = 0.0;
      for (int node : topo)
        if (pinv[node] < 0 && std::abs(work[node]) > pmax) {
          pmax = std::abs(work[node]);
          piv = node;
        }
      if (piv < 0 || pmax == 0.0)
        throw std::runtime_error("sparse_lu: structurally or numerically singular at column " +
                                 std::to_string(j));
      const double pv = work[piv];
      // scatter into U (pivoted rows) and L (below), erase the work array
      for (int node : topo) {
        const double xv = work[node];
        work[node] = 0.0;
        if (node == piv) continue;
        if (pinv[node] >= 0) {
          if (xv != 0.0) {
            m_u_rows.push_back(pinv[node]);
            m_u_vals.push_back(xv);
          }
        } else if (xv != 0.0) {
          m_l_rows.push_back(node);
          m_l_vals.push_back(xv / pv);
        }
      }
      m_u_rows.push_back(j); // diagonal stored last in each U column
      m_u_vals.push_back(pv);
      m_u_ptr[j + 1] = static_cast<std::int64_t>(m_u_vals.size());
      m_l_ptr[j + 1] = static_cast<std::int64_t>(m_l_vals.size());
      pinv[piv] = j;
      m_pivot_orig[j] = piv;
    }
    // remap L's row indices to pivot positions for the triangular solves
    for (auto& r : m_l_rows) r = pinv[r];
  }
};

} // namespace pstokes

#endif
