#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ceqss/errors.hpp"

namespace ceqss {

// Canonical residue in [0, q). q fits a 32-bit word; products are widened
// to 64 bits before reduction.
using Fel = std::uint32_t;

bool is_prime(std::uint64_t n);
std::uint32_t smallest_prime_greater_than(std::uint64_t floor);
std::uint32_t smallest_prime_at_least(std::uint64_t floor);

struct FieldModulus {
  std::uint32_t q;

  explicit FieldModulus(std::uint32_t q_);

  bool operator==(const FieldModulus& o) const { return q == o.q; }
  bool operator!=(const FieldModulus& o) const { return q != o.q; }
};

inline Fel fadd(Fel a, Fel b, FieldModulus m) {
  Fel s = a + b;
  return s >= m.q ? s - m.q : s;
}

inline Fel fsub(Fel a, Fel b, FieldModulus m) { return a >= b ? a - b : a + m.q - b; }

inline Fel fneg(Fel a, FieldModulus m) { return a == 0 ? 0 : m.q - a; }

inline Fel fmul(Fel a, Fel b, FieldModulus m) {
  return static_cast<Fel>((static_cast<std::uint64_t>(a) * b) % m.q);
}

Fel fpow(Fel a, std::uint64_t e, FieldModulus m);

// Multiplicative inverse of a nonzero element. Throws NotInvertible on a == 0.
Fel field_inverse(Fel a, FieldModulus m);

// Dense row-major matrix over F_q.
struct FMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  FieldModulus mod{2};
  std::vector<Fel> a;

  FMatrix() = default;
  FMatrix(std::size_t r, std::size_t c, FieldModulus m)
      : rows(r), cols(c), mod(m), a(r * c, 0) {}

  Fel& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  Fel at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  static FMatrix identity(std::size_t n, FieldModulus m);
  static FMatrix from_rows(const std::vector<std::vector<Fel>>& rows_in, FieldModulus m);

  bool operator==(const FMatrix& o) const {
    return rows == o.rows && cols == o.cols && mod == o.mod && a == o.a;
  }
  bool is_identity() const;

  std::string to_string() const;  // rows separated by ';', entries by ' '
};

FMatrix mat_mul(const FMatrix& A, const FMatrix& B);
std::vector<Fel> mat_vec(const FMatrix& A, const std::vector<Fel>& x);

// Gauss-Jordan inverse. Pivot selection: first nonzero entry scanning down
// from the diagonal, lowest row index wins, so results are reproducible.
FMatrix mat_inv(const FMatrix& K);

std::size_t rank(const FMatrix& M);

// Vandermonde matrix: entry (i,j) = points[i]^j for j in [0, width).
// Points must be distinct; zero entries are rejected unless allow_zero is
// set (the Cleve construction permits a zero evaluation point).
FMatrix vandermonde(const std::vector<Fel>& points, std::size_t width, FieldModulus m,
                    bool allow_zero = false);

// Rows/cols picked by ascending index sets.
FMatrix submatrix(const FMatrix& M, const std::vector<std::size_t>& row_set,
                  const std::vector<std::size_t>& col_set);

// Reduced row echelon form; returns pivot column per pivot row.
std::vector<std::size_t> rref_in_place(FMatrix& M);

// True iff v lies in the row space of R (R in RREF with given pivots).
bool in_row_space(const FMatrix& R, const std::vector<std::size_t>& pivots,
                  const std::vector<Fel>& v);

// Reduce v by the RREF rows so that v is zero at every pivot column.
std::vector<Fel> reduce_by_rows(const FMatrix& R, const std::vector<std::size_t>& pivots,
                                std::vector<Fel> v);

// Solve R^T lambda = v for RREF-with-pivots R (rows are generators). Returns
// empty optional-equivalent flag through the bool; lambda has R.rows entries.
bool solve_combination(const FMatrix& R, const std::vector<std::size_t>& pivots,
                       const std::vector<Fel>& v, std::vector<Fel>& lambda_out);

}  // namespace ceqss
