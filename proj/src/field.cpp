#include "ceqss/field.hpp"

#include <sstream>

namespace ceqss {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint32_t smallest_prime_greater_than(std::uint64_t floor) {
  std::uint64_t n = floor + 1;
  while (!is_prime(n)) ++n;
  if (n > 0xffffffffULL) throw BadModulus("prime search exceeded 32-bit range");
  return static_cast<std::uint32_t>(n);
}

std::uint32_t smallest_prime_at_least(std::uint64_t floor) {
  std::uint64_t n = floor < 2 ? 2 : floor;
  while (!is_prime(n)) ++n;
  if (n > 0xffffffffULL) throw BadModulus("prime search exceeded 32-bit range");
  return static_cast<std::uint32_t>(n);
}

FieldModulus::FieldModulus(std::uint32_t q_) : q(q_) {
  if (!is_prime(q)) throw BadModulus("modulus " + std::to_string(q_) + " is not prime");
}

Fel fpow(Fel a, std::uint64_t e, FieldModulus m) {
  Fel r = 1 % m.q;
  Fel base = a % m.q;
  while (e) {
    if (e & 1) r = fmul(r, base, m);
    base = fmul(base, base, m);
    e >>= 1;
  }
  return r;
}

Fel field_inverse(Fel a, FieldModulus m) {
  a %= m.q;
  if (a == 0) throw NotInvertible("0 has no inverse mod " + std::to_string(m.q));
  return fpow(a, m.q - 2, m);
}

FMatrix FMatrix::identity(std::size_t n, FieldModulus m) {
  FMatrix I(n, n, m);
  for (std::size_t i = 0; i < n; ++i) I.at(i, i) = 1;
  return I;
}

FMatrix FMatrix::from_rows(const std::vector<std::vector<Fel>>& rows_in, FieldModulus m) {
  std::size_t r = rows_in.size();
  std::size_t c = r == 0 ? 0 : rows_in[0].size();
  FMatrix M(r, c, m);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows_in[i].size() != c) throw ShapeError("ragged row list");
    for (std::size_t j = 0; j < c; ++j) M.at(i, j) = rows_in[i][j] % m.q;
  }
  return M;
}

bool FMatrix::is_identity() const {
  if (rows != cols) return false;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (at(i, j) != (i == j ? 1u : 0u)) return false;
  return true;
}

std::string FMatrix::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < rows; ++i) {
    if (i) os << ';';
    for (std::size_t j = 0; j < cols; ++j) {
      if (j) os << ' ';
      os << at(i, j);
    }
  }
  return os.str();
}

FMatrix mat_mul(const FMatrix& A, const FMatrix& B) {
  if (A.mod != B.mod) throw ShapeError("modulus mismatch in mat_mul");
  if (A.cols != B.rows) throw ShapeError("dimension mismatch in mat_mul");
  FMatrix C(A.rows, B.cols, A.mod);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t k = 0; k < A.cols; ++k) {
      Fel aik = A.at(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < B.cols; ++j) {
        C.at(i, j) = fadd(C.at(i, j), fmul(aik, B.at(k, j), A.mod), A.mod);
      }
    }
  }
  return C;
}

std::vector<Fel> mat_vec(const FMatrix& A, const std::vector<Fel>& x) {
  if (A.cols != x.size()) throw ShapeError("dimension mismatch in mat_vec");
  std::vector<Fel> y(A.rows, 0);
  for (std::size_t i = 0; i < A.rows; ++i) {
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < A.cols; ++j) {
      acc += static_cast<std::uint64_t>(A.at(i, j)) * x[j];
      if (acc >> 62) acc %= A.mod.q;
    }
    y[i] = static_cast<Fel>(acc % A.mod.q);
  }
  return y;
}

FMatrix mat_inv(const FMatrix& K) {
  if (K.rows != K.cols) throw ShapeError("mat_inv needs a square matrix");
  std::size_t n = K.rows;
  FMatrix A = K;
  FMatrix I = FMatrix::identity(n, K.mod);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && A.at(piv, col) == 0) ++piv;
    if (piv == n) throw SingularMatrix("matrix singular over F_" + std::to_string(K.mod.q));
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(A.a[piv * n + j], A.a[col * n + j]);
        std::swap(I.a[piv * n + j], I.a[col * n + j]);
      }
    }
    Fel inv = field_inverse(A.at(col, col), K.mod);
    for (std::size_t j = 0; j < n; ++j) {
      A.at(col, j) = fmul(A.at(col, j), inv, K.mod);
      I.at(col, j) = fmul(I.at(col, j), inv, K.mod);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      Fel f = A.at(r, col);
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        A.at(r, j) = fsub(A.at(r, j), fmul(f, A.at(col, j), K.mod), K.mod);
        I.at(r, j) = fsub(I.at(r, j), fmul(f, I.at(col, j), K.mod), K.mod);
      }
    }
  }
  return I;
}

std::vector<std::size_t> rref_in_place(FMatrix& M) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < M.cols && row < M.rows; ++col) {
    std::size_t piv = row;
    while (piv < M.rows && M.at(piv, col) == 0) ++piv;
    if (piv == M.rows) continue;
    if (piv != row) {
      for (std::size_t j = 0; j < M.cols; ++j)
        std::swap(M.a[piv * M.cols + j], M.a[row * M.cols + j]);
    }
    Fel inv = field_inverse(M.at(row, col), M.mod);
    for (std::size_t j = 0; j < M.cols; ++j) M.at(row, j) = fmul(M.at(row, j), inv, M.mod);
    for (std::size_t r = 0; r < M.rows; ++r) {
      if (r == row) continue;
      Fel f = M.at(r, col);
      if (f == 0) continue;
      for (std::size_t j = 0; j < M.cols; ++j)
        M.at(r, j) = fsub(M.at(r, j), fmul(f, M.at(row, j), M.mod), M.mod);
    }
    pivots.push_back(col);
    ++row;
  }
  // drop zero rows
  FMatrix R(pivots.size(), M.cols, M.mod);
  for (std::size_t i = 0; i < pivots.size(); ++i)
    for (std::size_t j = 0; j < M.cols; ++j) R.at(i, j) = M.at(i, j);
  M = R;
  return pivots;
}

std::size_t rank(const FMatrix& M) {
  FMatrix C = M;
  return rref_in_place(C).size();
}

FMatrix vandermonde(const std::vector<Fel>& points, std::size_t width, FieldModulus m,
                    bool allow_zero) {
  if (width < 1) throw BadEvaluationPoints("vandermonde width must be >= 1");
  for (std::size_t i = 0; i < points.size(); ++i) {
    Fel p = points[i] % m.q;
    if (p == 0 && !allow_zero)
      throw BadEvaluationPoints("evaluation point 0 not allowed");
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (p == points[j] % m.q) throw BadEvaluationPoints("repeated evaluation point");
    }
  }
  FMatrix V(points.size(), width, m);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Fel p = points[i] % m.q;
    Fel pw = 1 % m.q;
    for (std::size_t j = 0; j < width; ++j) {
      V.at(i, j) = pw;
      pw = fmul(pw, p, m);
    }
  }
  return V;
}

FMatrix submatrix(const FMatrix& M, const std::vector<std::size_t>& row_set,
                  const std::vector<std::size_t>& col_set) {
  for (std::size_t i = 0; i + 1 < row_set.size(); ++i)
    if (row_set[i] >= row_set[i + 1]) throw IndexError("row set not strictly ascending");
  for (std::size_t i = 0; i + 1 < col_set.size(); ++i)
    if (col_set[i] >= col_set[i + 1]) throw IndexError("col set not strictly ascending");
  FMatrix S(row_set.size(), col_set.size(), M.mod);
  for (std::size_t i = 0; i < row_set.size(); ++i) {
    if (row_set[i] >= M.rows) throw IndexError("row index out of range");
    for (std::size_t j = 0; j < col_set.size(); ++j) {
      if (col_set[j] >= M.cols) throw IndexError("col index out of range");
      S.at(i, j) = M.at(row_set[i], col_set[j]);
    }
  }
  return S;
}

bool in_row_space(const FMatrix& R, const std::vector<std::size_t>& pivots,
                  const std::vector<Fel>& v) {
  std::vector<Fel> w = reduce_by_rows(R, pivots, v);
  for (Fel x : w)
    if (x != 0) return false;
  return true;
}

std::vector<Fel> reduce_by_rows(const FMatrix& R, const std::vector<std::size_t>& pivots,
                                std::vector<Fel> v) {
  if (v.size() != R.cols) throw ShapeError("vector length mismatch in reduce_by_rows");
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    Fel f = v[pivots[i]];
    if (f == 0) continue;
    for (std::size_t j = 0; j < R.cols; ++j) v[j] = fsub(v[j], fmul(f, R.at(i, j), R.mod), R.mod);
  }
  return v;
}

bool solve_combination(const FMatrix& R, const std::vector<std::size_t>& pivots,
                       const std::vector<Fel>& v, std::vector<Fel>& lambda_out) {
  if (v.size() != R.cols) throw ShapeError("vector length mismatch in solve_combination");
  std::vector<Fel> w = v;
  lambda_out.assign(R.rows, 0);
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    Fel f = w[pivots[i]];
    lambda_out[i] = f;
    if (f == 0) continue;
    for (std::size_t j = 0; j < R.cols; ++j) w[j] = fsub(w[j], fmul(f, R.at(i, j), R.mod), R.mod);
  }
  for (Fel x : w)
    if (x != 0) return false;
  return true;
}

}  // namespace ceqss
