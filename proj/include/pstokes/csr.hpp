// Compressed sparse row matrices with sorted column indices, a pattern
// builder for assembly, and MatrixMarket-style coordinate export.

#ifndef PSTOKES_CSR_HPP
#define PSTOKES_CSR_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pstokes {

class CsrMatrix {
public:
  int n = 0;
  std::vector<std::int64_t> row_ptr; // size n+1
  std::vector<int> cols;             // strictly increasing per row
  std::vector<double> vals;

  std::int64_t nnz() const { return static_cast<std::int64_t>(cols.size()); }

  /// Builds the pattern from per-row column lists (deduplicated + sorted),
  /// values zero-initialized.
  static CsrMatrix from_pattern(std::vector<std::vector<int>>& row_cols) {
    CsrMatrix a;
    a.n = static_cast<int>(row_cols.size());
    a.row_ptr.assign(a.n + 1, 0);
    for (int i = 0; i < a.n; ++i) {
      auto& rc = row_cols[i];
      std::sort(rc.begin(), rc.end());
      rc.erase(std::unique(rc.begin(), rc.end()), rc.end());
      a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<std::int64_t>(rc.size());
    }
    a.cols.reserve(a.row_ptr[a.n]);
    for (int i = 0; i < a.n; ++i) a.cols.insert(a.cols.end(), row_cols[i].begin(), row_cols[i].end());
    a.vals.assign(a.row_ptr[a.n], 0.0);
    return a;
  }

  /// Position of entry (i,j) or -1 when it is not in the pattern.
  std::int64_t find(int i, int j) const {
    const auto b = cols.begin() + row_ptr[i];
    const auto e = cols.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(b, e, j);
    if (it == e || *it != j) return -1;
    return it - cols.begin();
  }

  void add(int i, int j, double v) {
    const std::int64_t p = find(i, j);
    if (p < 0)
      throw std::runtime_error("CsrMatrix::add: entry (" + std::to_string(i) + "," +
                               std::to_string(j) + ") outside the pattern");
    vals[p] += v;
  }

  double get(int i, int j) const {
    const std::int64_t p = find(i, j);
    return p < 0 ? 0.0 : vals[p];
  }

  void multiply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += vals[p] * x[cols[p]];
      y[i] = s;
    }
  }

  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(n);
    multiply(x.data(), y.data());
    return y;
  }

  bool pattern_symmetric() const {
    for (int i = 0; i < n; ++i)
      for (std::int64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
        if (find(cols[p], i) < 0) return false;
    return true;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (std::int64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) d(i, cols[p]) = vals[p];
    return d;
  }
};

/// Coordinate text export (1-based triplets) for external verification.
inline void write_matrix_market(const CsrMatrix& a, std::ostream& os) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  os.precision(17);
  for (int i = 0; i < a.n; ++i)
    for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      os << i + 1 << ' ' << a.cols[p] + 1 << ' ' << a.vals[p] << '\n';
}

inline void write_matrix_market(const CsrMatrix& a, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_market: cannot open '" + path + "'");
  write_matrix_market(a, os);
}

} // namespace pstokes

#endif
