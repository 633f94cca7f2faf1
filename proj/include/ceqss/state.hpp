#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "ceqss/field.hpp"

namespace ceqss {

using Amp = std::complex<double>;

// Basis word over F_q, one byte per symbol. The state engine is limited to
// q <= 255; the matrix layer is not.
using Word = std::string;

struct Budgets {
  std::size_t max_terms = std::size_t(1) << 24;  // sparse terms / density entries
  std::size_t max_dense_dim = 4096;              // dense eigensolve
};

Budgets budgets_from_env();  // CEQSS_TERM_BUDGET / CEQSS_DENSE_BUDGET overrides

constexpr double kPruneEps = 1e-12;

std::string word_to_digits(const Word& w);

// ---------------------------------------------------------------------------
// Sparse amplitude map backend.

struct SparseState {
  FieldModulus q;
  std::size_t n_qudits = 0;
  std::unordered_map<Word, Amp> terms;

  SparseState(FieldModulus q_, std::size_t n) : q(q_), n_qudits(n) {}

  double norm2() const;
  void prune();

  // One line per term: digits(re,im), sorted lexicographically.
  std::string dump() const;
};

SparseState state_from_secret(const std::map<Word, Amp>& amplitudes, FieldModulus q);

SparseState apply_linear(const SparseState& s, const FMatrix& K,
                         const std::vector<std::size_t>& indices);
SparseState apply_ctrl_add(const SparseState& s, Fel alpha, std::size_t control,
                           std::size_t target);
SparseState attach_uniform_registers(const SparseState& s, std::size_t count,
                                     const Budgets& budgets = Budgets{});

// ---------------------------------------------------------------------------
// Exact affine-coset backend: sum_s alpha_s * uniform superposition over
// (offset_s + row space of W). W is kept in RREF; offsets are canonical
// (zero at every pivot column). The q^{-rank/2} normalization per branch is
// implicit and materialized only by to_sparse().

struct CosetBranch {
  Word label;  // secret basis word this branch came from
  Amp amp;
  std::vector<Fel> offset;
};

struct CosetState {
  FieldModulus q;
  std::size_t n_qudits = 0;
  FMatrix W;                        // generator rows, RREF
  std::vector<std::size_t> pivots;  // pivot column per W row
  std::vector<CosetBranch> branches;

  CosetState(FieldModulus q_, std::size_t n) : q(q_), n_qudits(n), W(0, n, q_) {}

  void canonicalize();
  double norm2() const;  // sum |amp|^2 (branches with distinct cosets are orthogonal)
};

CosetState apply_linear(const CosetState& s, const FMatrix& K,
                        const std::vector<std::size_t>& indices);
CosetState apply_ctrl_add(const CosetState& s, Fel alpha, std::size_t control,
                          std::size_t target);
CosetState attach_uniform_registers(const CosetState& s, std::size_t count);

SparseState to_sparse(const CosetState& cs, const Budgets& budgets = Budgets{});

// ---------------------------------------------------------------------------
// Density operators as sparse entry maps keyed by row-word + col-word.

struct DensityOperator {
  FieldModulus q;
  std::size_t n_qudits = 0;
  std::unordered_map<std::string, Amp> entries;  // key = row word + col word

  DensityOperator(FieldModulus q_, std::size_t n) : q(q_), n_qudits(n) {}

  static std::string key(const Word& row, const Word& col) { return row + col; }
  Amp entry(const Word& row, const Word& col) const;
  void add(const Word& row, const Word& col, Amp v);

  double trace_real() const;
  double purity() const;  // tr(rho^2), valid for Hermitian rho
  double hermiticity_defect() const;
  std::size_t dimension() const;  // q^n_qudits, throws CapacityExceeded on overflow
};

DensityOperator partial_trace(const SparseState& s, const std::vector<std::size_t>& keep,
                              const Budgets& budgets = Budgets{});
DensityOperator partial_trace(const CosetState& s, const std::vector<std::size_t>& keep,
                              const Budgets& budgets = Budgets{});

double max_entry_deviation(const DensityOperator& A, const DensityOperator& B);

double fidelity(const DensityOperator& rho, const SparseState& psi);

// Dense Hermitian eigensolve (cyclic Jacobi); dimension capped by budget.
std::vector<double> eigenvalues(const DensityOperator& rho, const Budgets& budgets = Budgets{});

// -sum lambda log_q lambda, lambdas clamped into [0,1].
double von_neumann_entropy(const DensityOperator& rho, const Budgets& budgets = Budgets{});

// Exact subsystem entropy (in log_q units) of the uniform superposition
// sum_v |G v> over all v: rank(G_T) + rank(G_complement) - rank(G). Flat
// spectra make this the entropy of the reduced state; it is cross-checked
// against the dense path in the tests.
double coset_subsystem_entropy(const FMatrix& G, const std::vector<std::size_t>& rows_T);

}  // namespace ceqss
