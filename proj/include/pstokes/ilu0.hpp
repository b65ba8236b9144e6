// ILU(0): incomplete LU factorization restricted to the sparsity pattern of
// the input matrix, no pivoting. The saddle-point systems assembled here
// carry explicit diagonal entries, so zero diagonal blocks acquire their
// pivots through elimination fill on the diagonal position itself.

#ifndef PSTOKES_ILU0_HPP
#define PSTOKES_ILU0_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pstokes/csr.hpp"

namespace pstokes {

class Ilu0 {
public:
  explicit Ilu0(const CsrMatrix& a) : m_a(a) {
    const int n = a.n;
    m_lu = a.vals;
    m_diag.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      m_diag[i] = a.find(i, i);
      if (m_diag[i] < 0)
        throw std::runtime_error("ilu0: row " + std::to_string(i) +
                                 " has no diagonal entry; reorder or extend the pattern");
    }
    std::vector<std::int64_t> pos(n, -1); // column -> position in current row
    for (int i = 0; i < n; ++i) {
      for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) pos[a.cols[p]] = p;
      for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        const int k = a.cols[p];
        if (k >= i) break;
        const double piv = m_lu[m_diag[k]];
        if (piv == 0.0)
          throw std::runtime_error("ilu0: zero pivot at row " + std::to_string(k) +
                                   "; a fill-reducing or pivot-friendly ordering is needed");
        const double lik = m_lu[p] / piv;
        m_lu[p] = lik;
        for (std::int64_t q = m_diag[k] + 1; q < a.row_ptr[k + 1]; ++q) {
          const std::int64_t r = pos[a.cols[q]];
          if (r >= 0) m_lu[r] -= lik * m_lu[q];
        }
      }
      if (m_lu[m_diag[i]] == 0.0)
        throw std::runtime_error("ilu0: zero pivot at row " + std::to_string(i));
      for (std::int64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) pos[a.cols[p]] = -1;
    }
  }

  /// y = (LU)^{-1} x via forward/back substitution.
  void apply(const double* x, double* y) const {
    const int n = m_a.n;
    for (int i = 0; i < n; ++i) {
      double s = x[i];
      for (std::int64_t p = m_a.row_ptr[i]; p < m_diag[i]; ++p) s -= m_lu[p] * y[m_a.cols[p]];
      y[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (std::int64_t p = m_diag[i] + 1; p < m_a.row_ptr[i + 1]; ++p) s -= m_lu[p] * y[m_a.cols[p]];
      y[i] = s / m_lu[m_diag[i]];
    }
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(m_a.n);
    apply(x.data(), y.data());
    return y;
  }

  /// L and U share the input pattern; exposed for the no-fill exactness tests.
  const std::vector<double>& factors() const { return m_lu; }

private:
  const CsrMatrix& m_a;
  std::vector<double> m_lu;
  std::vector<std::int64_t> m_diag;
};

} // namespace pstokes

#endif
