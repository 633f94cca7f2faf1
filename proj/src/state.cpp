#include "ceqss/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace ceqss {

namespace {

FMatrix transpose(const FMatrix& M) {
  FMatrix T(M.cols, M.rows, M.mod);
  for (std::size_t i = 0; i < M.rows; ++i)
    for (std::size_t j = 0; j < M.cols; ++j) T.at(j, i) = M.at(i, j);
  return T;
}

FMatrix take_columns(const FMatrix& M, const std::vector<std::size_t>& cols) {
  FMatrix S(M.rows, cols.size(), M.mod);
  for (std::size_t i = 0; i < M.rows; ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) S.at(i, j) = M.at(i, cols[j]);
  return S;
}

struct AffineSolution {
  bool consistent = false;
  std::vector<Fel> x0;
  FMatrix kernel_rows;  // basis of homogeneous solutions, one per row

  AffineSolution(FieldModulus m, std::size_t unknowns) : kernel_rows(0, unknowns, m) {}
};

// Solve A x = b over F_q; kernel rows span {x : A x = 0}.
AffineSolution solve_columns(const FMatrix& A, const std::vector<Fel>& b) {
  AffineSolution sol(A.mod, A.cols);
  FMatrix aug(A.rows, A.cols + 1, A.mod);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) aug.at(i, j) = A.at(i, j);
    aug.at(i, A.cols) = b[i] % A.mod.q;
  }
  std::vector<std::size_t> piv = rref_in_place(aug);
  std::vector<bool> is_pivot(A.cols, false);
  sol.x0.assign(A.cols, 0);
  for (std::size_t i = 0; i < piv.size(); ++i) {
    if (piv[i] == A.cols) return sol;  // pivot in rhs column: inconsistent
    is_pivot[piv[i]] = true;
    sol.x0[piv[i]] = aug.at(i, A.cols);
  }
  sol.consistent = true;
  for (std::size_t free_col = 0; free_col < A.cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<Fel> v(A.cols, 0);
    v[free_col] = 1;
    for (std::size_t i = 0; i < piv.size(); ++i)
      v[piv[i]] = fneg(aug.at(i, free_col), A.mod);
    FMatrix grown(sol.kernel_rows.rows + 1, A.cols, A.mod);
    for (std::size_t i = 0; i < sol.kernel_rows.rows; ++i)
      for (std::size_t j = 0; j < A.cols; ++j) grown.at(i, j) = sol.kernel_rows.at(i, j);
    for (std::size_t j = 0; j < A.cols; ++j) grown.at(sol.kernel_rows.rows, j) = v[j];
    sol.kernel_rows = grown;
  }
  return sol;
}

// Solutions of x M = rhs with x a row vector.
AffineSolution solve_rows(const FMatrix& M, const std::vector<Fel>& rhs) {
  return solve_columns(transpose(M), rhs);
}

std::vector<Fel> row_times(const std::vector<Fel>& lambda, const FMatrix& M) {
  std::vector<Fel> out(M.cols, 0);
  for (std::size_t i = 0; i < M.rows; ++i) {
    if (lambda[i] == 0) continue;
    for (std::size_t j = 0; j < M.cols; ++j)
      out[j] = fadd(out[j], fmul(lambda[i], M.at(i, j), M.mod), M.mod);
  }
  return out;
}

std::size_t checked_pow(std::uint64_t base, std::size_t exp, std::size_t cap) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    v *= base;
    if (v > cap) throw CapacityExceeded("q^" + std::to_string(exp) + " exceeds budget");
  }
  return static_cast<std::size_t>(v);
}

// Enumerate lambda * R over all coefficient vectors, calling f(vector).
// The odometer updates the running combination incrementally: digit i
// stepping adds row i once, and a digit wrapping q-1 -> 0 also adds its row
// once since -(q-1) = 1 mod q.
template <typename F>
void enumerate_row_space(const FMatrix& R, F&& f) {
  std::size_t r = R.rows;
  std::size_t n = R.cols;
  std::vector<Fel> lambda(r, 0);
  std::vector<Fel> acc(n, 0);
  auto add_row = [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) acc[j] = fadd(acc[j], R.at(i, j), R.mod);
  };
  while (true) {
    f(acc);
    std::size_t i = 0;
    while (i < r) {
      lambda[i]++;
      add_row(i);
      if (lambda[i] < R.mod.q) break;
      lambda[i] = 0;
      ++i;
    }
    if (i == r) break;
  }
}

void validate_linear_args(std::size_t n_qudits, const FMatrix& K,
                          const std::vector<std::size_t>& indices) {
  if (K.rows != K.cols) throw ShapeError("gate matrix must be square");
  if (K.rows != indices.size()) throw ShapeError("gate arity does not match index count");
  std::vector<bool> seen(n_qudits, false);
  for (std::size_t i : indices) {
    if (i >= n_qudits) throw IndexError("gate index out of range");
    if (seen[i]) throw IndexError("gate indices must be distinct");
    seen[i] = true;
  }
}

}  // namespace

Budgets budgets_from_env() {
  Budgets b;
  if (const char* t = std::getenv("CEQSS_TERM_BUDGET")) b.max_terms = std::strtoull(t, nullptr, 10);
  if (const char* d = std::getenv("CEQSS_DENSE_BUDGET"))
    b.max_dense_dim = std::strtoull(d, nullptr, 10);
  return b;
}

std::string word_to_digits(const Word& w) {
  static const char* alphabet = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  out.reserve(w.size());
  for (unsigned char c : w) {
    if (c < 36) {
      out.push_back(alphabet[c]);
    } else {
      out += "." + std::to_string(static_cast<unsigned>(c)) + ".";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SparseState

double SparseState::norm2() const {
  double n = 0;
  for (const auto& [w, a] : terms) n += std::norm(a);
  return n;
}

void SparseState::prune() {
  for (auto it = terms.begin(); it != terms.end();) {
    if (std::abs(it->second) < kPruneEps)
      it = terms.erase(it);
    else
      ++it;
  }
}

std::string SparseState::dump() const {
  std::vector<const std::pair<const Word, Amp>*> rows;
  rows.reserve(terms.size());
  for (const auto& kv : terms) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  std::string out;
  char buf[80];
  for (const auto* kv : rows) {
    std::snprintf(buf, sizeof(buf), "(%.9g,%.9g)\n", kv->second.real(), kv->second.imag());
    out += word_to_digits(kv->first);
    out += buf;
  }
  return out;
}

SparseState state_from_secret(const std::map<Word, Amp>& amplitudes, FieldModulus q) {
  if (q.q > 255) throw CapacityExceeded("state engine supports q <= 255");
  double n2 = 0;
  std::size_t len = 0;
  for (const auto& [w, a] : amplitudes) {
    n2 += std::norm(a);
    len = w.size();
    for (unsigned char c : w)
      if (c >= q.q) throw IndexError("secret symbol out of field range");
  }
  for (const auto& [w, a] : amplitudes)
    if (w.size() != len) throw ShapeError("secret words of unequal length");
  if (n2 < kPruneEps * kPruneEps || amplitudes.empty())
    throw ZeroState("secret amplitude vector is zero");
  SparseState s(q, len);
  double inv = 1.0 / std::sqrt(n2);
  for (const auto& [w, a] : amplitudes) {
    if (std::abs(a) == 0.0) continue;
    s.terms[w] = a * inv;
  }
  return s;
}

SparseState apply_linear(const SparseState& s, const FMatrix& K,
                         const std::vector<std::size_t>& indices) {
  validate_linear_args(s.n_qudits, K, indices);
  if (K.mod != s.q) throw ShapeError("gate modulus mismatch");
  mat_inv(K);  // throws SingularMatrix if not unitary as a basis permutation
  SparseState out(s.q, s.n_qudits);
  out.terms.reserve(s.terms.size());
  std::vector<Fel> x(indices.size());
  for (const auto& [w, a] : s.terms) {
    for (std::size_t t = 0; t < indices.size(); ++t)
      x[t] = static_cast<unsigned char>(w[indices[t]]);
    std::vector<Fel> y = mat_vec(K, x);
    Word nw = w;
    for (std::size_t t = 0; t < indices.size(); ++t)
      nw[indices[t]] = static_cast<char>(y[t]);
    out.terms[nw] += a;
  }
  out.prune();
  return out;
}

SparseState apply_ctrl_add(const SparseState& s, Fel alpha, std::size_t control,
                           std::size_t target) {
  if (control == target) throw IndexError("control and target must differ");
  if (control >= s.n_qudits || target >= s.n_qudits) throw IndexError("qudit index out of range");
  SparseState out(s.q, s.n_qudits);
  out.terms.reserve(s.terms.size());
  for (const auto& [w, a] : s.terms) {
    Word nw = w;
    Fel c = static_cast<unsigned char>(w[control]);
    Fel t = static_cast<unsigned char>(w[target]);
    nw[target] = static_cast<char>(fadd(t, fmul(alpha, c, s.q), s.q));
    out.terms[nw] += a;
  }
  out.prune();
  return out;
}

SparseState attach_uniform_registers(const SparseState& s, std::size_t count,
                                     const Budgets& budgets) {
  if (count == 0) return s;
  std::size_t factor = checked_pow(s.q.q, count, budgets.max_terms);
  if (s.terms.size() > budgets.max_terms / factor)
    throw CapacityExceeded("uniform register attachment exceeds term budget");
  SparseState out(s.q, s.n_qudits + count);
  double scale = 1.0 / std::sqrt(static_cast<double>(factor));
  std::vector<Fel> reg(count, 0);
  while (true) {
    Word suffix(count, 0);
    for (std::size_t i = 0; i < count; ++i) suffix[i] = static_cast<char>(reg[i]);
    for (const auto& [w, a] : s.terms) out.terms[w + suffix] = a * scale;
    std::size_t i = 0;
    while (i < count) {
      reg[i]++;
      if (reg[i] < s.q.q) break;
      reg[i] = 0;
      ++i;
    }
    if (i == count) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// CosetState

void CosetState::canonicalize() {
  pivots = rref_in_place(W);
  for (auto& br : branches) {
    if (br.offset.size() != n_qudits) throw ShapeError("offset length mismatch");
    br.offset = reduce_by_rows(W, pivots, br.offset);
  }
  std::sort(branches.begin(), branches.end(),
            [](const CosetBranch& a, const CosetBranch& b) { return a.label < b.label; });
}

double CosetState::norm2() const {
  double n = 0;
  for (const auto& br : branches) n += std::norm(br.amp);
  return n;
}

CosetState apply_linear(const CosetState& s, const FMatrix& K,
                        const std::vector<std::size_t>& indices) {
  validate_linear_args(s.n_qudits, K, indices);
  if (K.mod != s.q) throw ShapeError("gate modulus mismatch");
  mat_inv(K);
  CosetState out = s;
  std::vector<Fel> x(indices.size());
  auto map_vec = [&](std::vector<Fel>& v) {
    for (std::size_t t = 0; t < indices.size(); ++t) x[t] = v[indices[t]];
    std::vector<Fel> y = mat_vec(K, x);
    for (std::size_t t = 0; t < indices.size(); ++t) v[indices[t]] = y[t];
  };
  for (std::size_t r = 0; r < out.W.rows; ++r) {
    std::vector<Fel> row(out.W.cols);
    for (std::size_t j = 0; j < out.W.cols; ++j) row[j] = out.W.at(r, j);
    map_vec(row);
    for (std::size_t j = 0; j < out.W.cols; ++j) out.W.at(r, j) = row[j];
  }
  for (auto& br : out.branches) map_vec(br.offset);
  out.canonicalize();
  return out;
}

CosetState apply_ctrl_add(const CosetState& s, Fel alpha, std::size_t control,
                          std::size_t target) {
  if (control == target) throw IndexError("control and target must differ");
  if (control >= s.n_qudits || target >= s.n_qudits) throw IndexError("qudit index out of range");
  CosetState out = s;
  for (std::size_t r = 0; r < out.W.rows; ++r)
    out.W.at(r, target) =
        fadd(out.W.at(r, target), fmul(alpha, out.W.at(r, control), s.q), s.q);
  for (auto& br : out.branches)
    br.offset[target] = fadd(br.offset[target], fmul(alpha, br.offset[control], s.q), s.q);
  out.canonicalize();
  return out;
}

CosetState attach_uniform_registers(const CosetState& s, std::size_t count) {
  CosetState out(s.q, s.n_qudits + count);
  out.W = FMatrix(s.W.rows + count, s.n_qudits + count, s.q);
  for (std::size_t r = 0; r < s.W.rows; ++r)
    for (std::size_t j = 0; j < s.n_qudits; ++j) out.W.at(r, j) = s.W.at(r, j);
  for (std::size_t i = 0; i < count; ++i) out.W.at(s.W.rows + i, s.n_qudits + i) = 1;
  out.branches = s.branches;
  for (auto& br : out.branches) br.offset.resize(s.n_qudits + count, 0);
  out.canonicalize();
  return out;
}

SparseState to_sparse(const CosetState& cs, const Budgets& budgets) {
  if (cs.q.q > 255) throw CapacityExceeded("state engine supports q <= 255");
  std::size_t members = checked_pow(cs.q.q, cs.W.rows, budgets.max_terms);
  if (cs.branches.size() > budgets.max_terms / std::max<std::size_t>(members, 1))
    throw CapacityExceeded("coset expansion exceeds term budget");
  SparseState out(cs.q, cs.n_qudits);
  double scale = 1.0 / std::sqrt(static_cast<double>(members));
  for (const auto& br : cs.branches) {
    enumerate_row_space(cs.W, [&](const std::vector<Fel>& v) {
      Word w(cs.n_qudits, 0);
      for (std::size_t j = 0; j < cs.n_qudits; ++j)
        w[j] = static_cast<char>(fadd(br.offset[j], v[j], cs.q));
      out.terms[w] += br.amp * scale;
    });
  }
  out.prune();
  return out;
}

// ---------------------------------------------------------------------------
// DensityOperator

Amp DensityOperator::entry(const Word& row, const Word& col) const {
  auto it = entries.find(key(row, col));
  return it == entries.end() ? Amp(0, 0) : it->second;
}

void DensityOperator::add(const Word& row, const Word& col, Amp v) {
  entries[key(row, col)] += v;
}

double DensityOperator::trace_real() const {
  double t = 0;
  for (const auto& [k, v] : entries) {
    if (std::equal(k.begin(), k.begin() + n_qudits, k.begin() + n_qudits)) t += v.real();
  }
  return t;
}

double DensityOperator::purity() const {
  double p = 0;
  for (const auto& [k, v] : entries) p += std::norm(v);
  return p;
}

double DensityOperator::hermiticity_defect() const {
  double worst = 0;
  for (const auto& [k, v] : entries) {
    Word row = k.substr(0, n_qudits);
    Word col = k.substr(n_qudits);
    worst = std::max(worst, std::abs(v - std::conj(entry(col, row))));
  }
  return worst;
}

std::size_t DensityOperator::dimension() const {
  std::uint64_t d = 1;
  for (std::size_t i = 0; i < n_qudits; ++i) {
    d *= q.q;
    if (d > (std::uint64_t(1) << 62)) throw CapacityExceeded("dimension overflow");
  }
  return static_cast<std::size_t>(d);
}

DensityOperator partial_trace(const SparseState& s, const std::vector<std::size_t>& keep,
                              const Budgets& budgets) {
  if (keep.empty()) throw IndexError("keep set must be nonempty");
  std::vector<bool> kept(s.n_qudits, false);
  for (std::size_t i : keep) {
    if (i >= s.n_qudits) throw IndexError("keep index out of range");
    kept[i] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < s.n_qudits; ++i)
    if (!kept[i]) rest.push_back(i);
  std::unordered_map<Word, std::vector<std::pair<Word, Amp>>> classes;
  classes.reserve(s.terms.size());
  Word rw(rest.size(), 0), kw(keep.size(), 0);
  for (const auto& [w, a] : s.terms) {
    for (std::size_t i = 0; i < rest.size(); ++i) rw[i] = w[rest[i]];
    for (std::size_t i = 0; i < keep.size(); ++i) kw[i] = w[keep[i]];
    classes[rw].emplace_back(kw, a);
  }
  DensityOperator rho(s.q, keep.size());
  std::size_t produced = 0;
  for (const auto& [rword, group] : classes) {
    produced += group.size() * group.size();
    if (produced > budgets.max_terms)
      throw CapacityExceeded("partial trace exceeds entry budget");
  }
  rho.entries.reserve(produced);
  std::string key(2 * keep.size(), 0);
  for (const auto& [rword, group] : classes) {
    for (const auto& [wx, ax] : group) {
      std::copy(wx.begin(), wx.end(), key.begin());
      for (const auto& [wy, ay] : group) {
        std::copy(wy.begin(), wy.end(), key.begin() + keep.size());
        rho.entries[key] += ax * std::conj(ay);
      }
    }
  }
  return rho;
}

DensityOperator partial_trace(const CosetState& s, const std::vector<std::size_t>& keep,
                              const Budgets& budgets) {
  if (keep.empty()) throw IndexError("keep set must be nonempty");
  std::vector<bool> kept(s.n_qudits, false);
  for (std::size_t i : keep) {
    if (i >= s.n_qudits) throw IndexError("keep index out of range");
    kept[i] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < s.n_qudits; ++i)
    if (!kept[i]) rest.push_back(i);

  FMatrix WT = take_columns(s.W, keep);
  FMatrix WR = take_columns(s.W, rest);
  FMatrix WT_red = WT;
  rref_in_place(WT_red);
  std::size_t r_T = WT_red.rows;

  DensityOperator rho(s.q, keep.size());
  std::size_t produced = 0;
  for (const auto& bs : s.branches) {
    for (const auto& bt : s.branches) {
      std::vector<Fel> delta_rest(rest.size());
      for (std::size_t i = 0; i < rest.size(); ++i)
        delta_rest[i] = fsub(bt.offset[rest[i]], bs.offset[rest[i]], s.q);
      AffineSolution nu = solve_rows(WR, delta_rest);
      if (!nu.consistent) continue;
      // y = x + delta_T - nu * W_T ranges over an affine set as nu varies
      FMatrix off_dirs = nu.kernel_rows.rows
                             ? mat_mul(nu.kernel_rows, WT)
                             : FMatrix(0, keep.size(), s.q);
      FMatrix off_red = off_dirs;
      std::size_t rho_K = rref_in_place(off_red).size();
      std::size_t kappa = nu.kernel_rows.rows;
      std::vector<Fel> base_off = row_times(nu.x0, WT);
      std::vector<Fel> delta_keep(keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i)
        delta_keep[i] = fsub(bt.offset[keep[i]], bs.offset[keep[i]], s.q);
      for (std::size_t i = 0; i < keep.size(); ++i)
        base_off[i] = fsub(delta_keep[i], base_off[i], s.q);

      std::size_t x_count = checked_pow(s.q.q, r_T, budgets.max_terms);
      std::size_t o_count = checked_pow(s.q.q, rho_K, budgets.max_terms);
      produced += x_count * o_count;
      if (produced > budgets.max_terms)
        throw CapacityExceeded("coset partial trace exceeds entry budget");

      // q^(kappa - rho_K) multiplicity per offset, q^(r - r_T) per x, q^-r overall
      double weight = std::pow(static_cast<double>(s.q.q),
                               static_cast<double>(kappa) - static_cast<double>(rho_K) -
                                   static_cast<double>(r_T));
      Amp coeff = bs.amp * std::conj(bt.amp) * weight;

      enumerate_row_space(WT_red, [&](const std::vector<Fel>& xoff) {
        Word xw(keep.size(), 0);
        for (std::size_t i = 0; i < keep.size(); ++i)
          xw[i] = static_cast<char>(fadd(bs.offset[keep[i]], xoff[i], s.q));
        enumerate_row_space(off_red, [&](const std::vector<Fel>& od) {
          Word yw(keep.size(), 0);
          for (std::size_t i = 0; i < keep.size(); ++i) {
            Fel x = static_cast<unsigned char>(xw[i]);
            yw[i] = static_cast<char>(
                fadd(x, fsub(base_off[i], od[i], s.q), s.q));
          }
          rho.add(xw, yw, coeff);
        });
      });
    }
  }
  return rho;
}

double max_entry_deviation(const DensityOperator& A, const DensityOperator& B) {
  double worst = 0;
  for (const auto& [k, v] : A.entries) {
    auto it = B.entries.find(k);
    Amp bv = it == B.entries.end() ? Amp(0, 0) : it->second;
    worst = std::max(worst, std::abs(v - bv));
  }
  for (const auto& [k, v] : B.entries) {
    if (!A.entries.count(k)) worst = std::max(worst, std::abs(v));
  }
  return worst;
}

double fidelity(const DensityOperator& rho, const SparseState& psi) {
  if (psi.n_qudits != rho.n_qudits || psi.q != rho.q)
    throw ShapeError("fidelity dimension mismatch");
  Amp acc(0, 0);
  for (const auto& [k, v] : rho.entries) {
    Word row = k.substr(0, rho.n_qudits);
    Word col = k.substr(rho.n_qudits);
    auto ix = psi.terms.find(row);
    if (ix == psi.terms.end()) continue;
    auto iy = psi.terms.find(col);
    if (iy == psi.terms.end()) continue;
    acc += std::conj(ix->second) * v * iy->second;
  }
  return acc.real();
}

std::vector<double> eigenvalues(const DensityOperator& rho, const Budgets& budgets) {
  std::size_t dim = rho.dimension();
  if (dim > budgets.max_dense_dim)
    throw CapacityExceeded("dense eigensolve over budget: dim " + std::to_string(dim));

  // index <-> word
  std::vector<Word> words(dim, Word(rho.n_qudits, 0));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t v = idx;
    for (std::size_t j = rho.n_qudits; j-- > 0;) {
      words[idx][j] = static_cast<char>(v % rho.q.q);
      v /= rho.q.q;
    }
  }
  std::unordered_map<Word, std::size_t> index;
  for (std::size_t i = 0; i < dim; ++i) index[words[i]] = i;

  std::vector<Amp> A(dim * dim, Amp(0, 0));
  for (const auto& [k, v] : rho.entries) {
    std::size_t i = index.at(k.substr(0, rho.n_qudits));
    std::size_t j = index.at(k.substr(rho.n_qudits));
    A[i * dim + j] = v;
  }

  // cyclic Jacobi for Hermitian matrices
  auto off_norm = [&]() {
    double s = 0;
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = i + 1; j < dim; ++j) s += std::norm(A[i * dim + j]);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off_norm() > 1e-13 * dim; ++sweep) {
    for (std::size_t p = 0; p < dim; ++p) {
      for (std::size_t qi = p + 1; qi < dim; ++qi) {
        Amp apq = A[p * dim + qi];
        double g = std::abs(apq);
        if (g < 1e-300) continue;
        double app = A[p * dim + p].real();
        double aqq = A[qi * dim + qi].real();
        double tau = (aqq - app) / (2 * g);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        double c = 1.0 / std::sqrt(1 + t * t);
        double sn = t * c;
        Amp phase = apq / g;
        // columns
        for (std::size_t k2 = 0; k2 < dim; ++k2) {
          Amp akp = A[k2 * dim + p];
          Amp akq = A[k2 * dim + qi];
          A[k2 * dim + p] = c * akp - sn * std::conj(phase) * akq;
          A[k2 * dim + qi] = sn * phase * akp + c * akq;
        }
        // rows
        for (std::size_t k2 = 0; k2 < dim; ++k2) {
          Amp apk = A[p * dim + k2];
          Amp aqk = A[qi * dim + k2];
          A[p * dim + k2] = c * apk - sn * phase * aqk;
          A[qi * dim + k2] = sn * std::conj(phase) * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> lam(dim);
  for (std::size_t i = 0; i < dim; ++i) lam[i] = A[i * dim + i].real();
  std::sort(lam.begin(), lam.end(), std::greater<double>());
  return lam;
}

double von_neumann_entropy(const DensityOperator& rho, const Budgets& budgets) {
  std::vector<double> lam = eigenvalues(rho, budgets);
  double s = 0;
  double logq = std::log(static_cast<double>(rho.q.q));
  for (double l : lam) {
    if (l < 1e-12) continue;
    double x = std::min(l, 1.0);
    s -= x * std::log(x) / logq;
  }
  return s;
}

double coset_subsystem_entropy(const FMatrix& G, const std::vector<std::size_t>& rows_T) {
  std::vector<bool> in_T(G.rows, false);
  for (std::size_t i : rows_T) {
    if (i >= G.rows) throw IndexError("subsystem row out of range");
    in_T[i] = true;
  }
  std::vector<std::vector<Fel>> t_rows, c_rows;
  for (std::size_t i = 0; i < G.rows; ++i) {
    std::vector<Fel> row(G.cols);
    for (std::size_t j = 0; j < G.cols; ++j) row[j] = G.at(i, j);
    (in_T[i] ? t_rows : c_rows).push_back(row);
  }
  FMatrix GT = FMatrix::from_rows(t_rows, G.mod);
  FMatrix GC = FMatrix::from_rows(c_rows, G.mod);
  if (GT.rows == 0) return 0.0;
  std::size_t rT = GT.cols ? rank(GT) : 0;
  std::size_t rC = (GC.rows && GC.cols) ? rank(GC) : 0;
  std::size_t rAll = rank(G);
  return static_cast<double>(rT + rC) - static_cast<double>(rAll);
}

}  // namespace ceqss
