#include "ceqss/recovery.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

namespace ceqss {

namespace {

// ---------------------------------------------------------------------------
// Symbolic linear forms, one per qudit, used to derive and certify schedules.
// Variables: [0, m) secret, [m, m+rho) randomness, beyond that fresh
// variables introduced by sum reindexing during disentanglement.

class SymbolicTracker {
 public:
  explicit SymbolicTracker(const LinearEncoding& enc)
      : q_(enc.q), m_(enc.m_secret), nvars_(enc.m_secret + enc.n_random) {
    forms_.resize(enc.n_qudits);
    for (std::size_t i = 0; i < enc.n_qudits; ++i) forms_[i] = enc.qudit_form(i);
  }

  FieldModulus q() const { return q_; }
  std::size_t n_vars() const { return nvars_; }
  std::size_t m_secret() const { return m_; }

  const std::vector<Fel>& form(std::size_t qudit) const { return forms_[qudit]; }

  void apply_linear(const FMatrix& K, const std::vector<std::size_t>& idx) {
    std::vector<std::vector<Fel>> in(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) in[t] = forms_[idx[t]];
    for (std::size_t t = 0; t < idx.size(); ++t) {
      std::vector<Fel> f(nvars_, 0);
      for (std::size_t u = 0; u < idx.size(); ++u) {
        Fel c = K.at(t, u);
        if (c == 0) continue;
        for (std::size_t v = 0; v < nvars_; ++v)
          f[v] = fadd(f[v], fmul(c, in[u][v], q_), q_);
      }
      forms_[idx[t]] = std::move(f);
    }
  }

  void apply_ctrl_add(Fel alpha, std::size_t control, std::size_t target) {
    for (std::size_t v = 0; v < nvars_; ++v)
      forms_[target][v] = fadd(forms_[target][v], fmul(alpha, forms_[control][v], q_), q_);
  }

  std::optional<std::size_t> plain_var(std::size_t qudit) const {
    std::optional<std::size_t> found;
    for (std::size_t v = 0; v < nvars_; ++v) {
      Fel c = forms_[qudit][v];
      if (c == 0) continue;
      if (found || c != 1) return std::nullopt;
      found = v;
    }
    return found;
  }

  std::vector<std::size_t> holders(std::size_t var) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      auto pv = plain_var(i);
      if (pv && *pv == var) out.push_back(i);
    }
    return out;
  }

  std::vector<std::size_t> occurrences(std::size_t var) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < forms_.size(); ++i)
      if (forms_[i][var] != 0) out.push_back(i);
    return out;
  }

  std::size_t fresh_var() {
    ++nvars_;
    for (auto& f : forms_) f.push_back(0);
    return nvars_ - 1;
  }

  // Reindex the sum over `var` using tau = defining(vars); every occurrence
  // of var is rewritten. defining must have a nonzero coefficient on var.
  void substitute(std::size_t var, std::vector<Fel> defining, std::size_t tau) {
    defining.resize(nvars_, 0);
    Fel c = defining[var];
    if (c == 0) throw PlanError("substitution with vanishing pivot");
    Fel cinv = field_inverse(c, q_);
    std::vector<Fel> expr(nvars_, 0);  // var = expr(other vars, tau)
    expr[tau] = cinv;
    for (std::size_t v = 0; v < nvars_; ++v) {
      if (v == var || v == tau) continue;
      if (defining[v] != 0) expr[v] = fneg(fmul(cinv, defining[v], q_), q_);
    }
    for (auto& f : forms_) {
      Fel fv = f[var];
      if (fv == 0) continue;
      f[var] = 0;
      for (std::size_t v = 0; v < nvars_; ++v)
        f[v] = fadd(f[v], fmul(fv, expr[v], q_), q_);
    }
  }

  // Joint reindexing for several variables; defining forms may mention each
  // other, handled by Gaussian-style pivoting.
  void substitute_jointly(std::vector<std::size_t> vars,
                          std::vector<std::vector<Fel>> defs) {
    while (!vars.empty()) {
      std::size_t pick = vars.size();
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (vars[i] < defs[i].size() && defs[i][vars[i]] != 0) {
          pick = i;
          break;
        }
      }
      if (pick == vars.size()) throw PlanError("joint substitution is singular");
      std::size_t var = vars[pick];
      std::vector<Fel> def = defs[pick];
      vars.erase(vars.begin() + pick);
      defs.erase(defs.begin() + pick);
      std::size_t tau = fresh_var();
      for (auto& d : defs) d.resize(nvars_, 0);
      def.resize(nvars_, 0);
      // rewrite the remaining defining forms as well
      Fel c = def[var];
      Fel cinv = field_inverse(c, q_);
      std::vector<Fel> expr(nvars_, 0);
      expr[tau] = cinv;
      for (std::size_t v = 0; v < nvars_; ++v) {
        if (v == var || v == tau) continue;
        if (def[v] != 0) expr[v] = fneg(fmul(cinv, def[v], q_), q_);
      }
      for (auto& d : defs) {
        Fel dv = d[var];
        if (dv == 0) continue;
        d[var] = 0;
        for (std::size_t v = 0; v < nvars_; ++v)
          d[v] = fadd(d[v], fmul(dv, expr[v], q_), q_);
      }
      substitute(var, def, tau);
    }
  }

  // True iff no qudit outside `out` carries any secret coefficient and the
  // out qudits hold exactly s_0..s_{m-1}.
  void certify_disentangled(const std::vector<std::size_t>& out) const {
    std::vector<bool> is_out(forms_.size(), false);
    for (std::size_t i = 0; i < out.size(); ++i) {
      is_out[out[i]] = true;
      auto pv = plain_var(out[i]);
      if (!pv || *pv != i)
        throw PlanError("output register " + std::to_string(i) + " does not hold s" +
                        std::to_string(i + 1));
    }
    for (std::size_t qd = 0; qd < forms_.size(); ++qd) {
      if (is_out[qd]) continue;
      for (std::size_t v = 0; v < m_; ++v)
        if (forms_[qd][v] != 0)
          throw PlanError("residual secret coefficient after recovery plan");
    }
  }

 private:
  FieldModulus q_;
  std::size_t m_;
  std::size_t nvars_;
  std::vector<std::vector<Fel>> forms_;
};

// ---------------------------------------------------------------------------
// annotation helpers (submatrix notation, 1-based)

std::string ann_set(const std::vector<std::size_t>& xs) {
  std::string s = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i] + 1);
  }
  return s + "}";
}

std::string ann_window(const std::vector<std::size_t>& cols) {
  bool contiguous = true;
  for (std::size_t i = 1; i < cols.size(); ++i)
    if (cols[i] != cols[i - 1] + 1) contiguous = false;
  if (contiguous && !cols.empty())
    return "[" + std::to_string(cols.front() + 1) + "," + std::to_string(cols.back() + 1) + "]";
  return ann_set(cols);
}

std::size_t stage_index(const SchemeSpec& spec, std::size_t d) {
  for (std::size_t i = 0; i < spec.d_list.size(); ++i)
    if (spec.d_list[i] == d) return i;
  throw UnsupportedD("d = " + std::to_string(d) + " is not admissible for this scheme");
}

GateStep make_linear(FMatrix K, std::vector<std::size_t> idx, std::string ann) {
  GateStep st;
  st.kind = GateStep::Kind::LinearMap;
  st.matrix = std::move(K);
  st.indices = std::move(idx);
  st.annotation = std::move(ann);
  return st;
}

GateStep make_ctrl(Fel alpha, std::size_t control, std::size_t target, std::string ann) {
  GateStep st;
  st.kind = GateStep::Kind::CtrlAdd;
  st.alpha = alpha;
  st.control = control;
  st.target = target;
  st.annotation = std::move(ann);
  return st;
}

void plan_apply(SymbolicTracker& tr, GateSchedule& sched, GateStep st) {
  if (st.kind == GateStep::Kind::LinearMap)
    tr.apply_linear(st.matrix, st.indices);
  else if (st.kind == GateStep::Kind::CtrlAdd)
    tr.apply_ctrl_add(st.alpha, st.control, st.target);
  sched.steps.push_back(std::move(st));
}

std::string var_name(std::size_t var, std::size_t m) {
  return var < m ? "s" + std::to_string(var + 1) : "r" + std::to_string(var - m + 1);
}

// ---------------------------------------------------------------------------
// staircase planner

struct ColumnInfo {
  std::size_t col = 0;
  std::size_t zeros = 0;
  std::vector<std::size_t> vars;  // global variable ids, top to bottom
};

ColumnInfo column_info(const StaircaseAssembly& A, std::size_t m, std::size_t c) {
  ColumnInfo ci;
  ci.col = c;
  ci.zeros = A.leading_zeros(c);
  for (std::size_t u = ci.zeros; u < A.y_rows; ++u) {
    const YEntry& e = A.ycols[c][u];
    if (e.kind == YEntry::Zero) throw PlanError("interior zero in Y column");
    ci.vars.push_back(e.kind == YEntry::Secret ? e.idx : m + e.idx);
  }
  return ci;
}

GateSchedule plan_staircase(const BuiltScheme& scheme, const std::vector<std::size_t>& D,
                            std::size_t stage_idx) {
  const StaircaseAssembly& A = *scheme.assembly;
  const SchemeSpec& spec = scheme.spec;
  const FMatrix& V = A.V;
  std::size_t m_cols = A.ycols.size();
  std::size_t m = spec.m;
  std::size_t sent_cols = A.stages[stage_idx].cols;
  std::size_t d = D.size();
  if (sent_cols > m_cols) throw PlanError("stage asks for more columns than the template has");

  std::vector<std::size_t> E;
  for (std::size_t p = 0; p < A.n_parties; ++p)
    if (std::find(D.begin(), D.end(), p) == D.end()) E.push_back(p);

  auto pq = [&](std::size_t p, std::size_t c) { return p * m_cols + c; };

  SymbolicTracker tr(scheme.enc);
  GateSchedule sched;
  for (std::size_t p : D) {
    std::vector<std::size_t> quds;
    for (std::size_t c = 0; c < sent_cols; ++c) quds.push_back(pq(p, c));
    sched.communicated.emplace_back(p, quds);
  }

  std::vector<ColumnInfo> cols;
  for (std::size_t c = 0; c < sent_cols; ++c) cols.push_back(column_info(A, m, c));

  // Peel columns, deepest zero count first, left to right inside a group.
  std::vector<std::size_t> order(sent_cols);
  for (std::size_t i = 0; i < sent_cols; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return cols[a].zeros > cols[b].zeros;
  });

  bool l_style_always = spec.variant == Variant::StaircaseFixed;

  for (std::size_t oi : order) {
    const ColumnInfo& ci = cols[oi];
    std::size_t w = ci.vars.size();
    if (w < d) throw PlanError("column narrower than accessed set");
    std::size_t excess = w - d;
    std::vector<std::size_t> col_window;
    for (std::size_t u = 0; u < w; ++u) col_window.push_back(ci.zeros + u);

    if (excess == 0) {
      FMatrix K = mat_inv(submatrix(V, D, col_window));
      std::vector<std::size_t> quds;
      for (std::size_t p : D) quds.push_back(pq(p, ci.col));
      plan_apply(tr, sched, make_linear(K, quds,
          "inverse of V_" + ann_set(D) + "^" + ann_window(col_window)));
      continue;
    }

    // find known entries (already held in plain form elsewhere)
    std::vector<std::size_t> known_pos;
    for (std::size_t u = 0; u < w; ++u)
      if (!tr.holders(ci.vars[u]).empty()) known_pos.push_back(u);
    if (known_pos.size() < excess)
      throw PlanError("not enough recovered symbols to peel column");
    // use the highest-power knowns
    std::vector<std::size_t> helpers(known_pos.end() - excess, known_pos.end());

    bool use_l_style = l_style_always || excess == 1;
    if (use_l_style) {
      for (std::size_t hi = helpers.size(); hi-- > 0;) {
        std::size_t u = helpers[hi];
        std::size_t var = ci.vars[u];
        std::size_t control = tr.holders(var).front();
        for (std::size_t p : D) {
          Fel alpha = fneg(V.at(p, ci.zeros + u), spec.q);
          plan_apply(tr, sched, make_ctrl(alpha, control, pq(p, ci.col),
              "remove " + var_name(var, m) + " from column " + std::to_string(ci.col + 1)));
        }
      }
      std::vector<std::size_t> rest_cols;
      std::vector<std::size_t> rest_pos;
      for (std::size_t u = 0; u < w; ++u) {
        if (std::find(helpers.begin(), helpers.end(), u) == helpers.end()) {
          rest_cols.push_back(ci.zeros + u);
          rest_pos.push_back(u);
        }
      }
      FMatrix K = mat_inv(submatrix(V, D, rest_cols));
      std::vector<std::size_t> quds;
      for (std::size_t p : D) quds.push_back(pq(p, ci.col));
      plan_apply(tr, sched, make_linear(K, quds,
          "inverse of V_" + ann_set(D) + "^" + ann_window(rest_cols)));
    } else {
      // bordered inverse: solve for the whole column at once, helper slots
      // pass through unchanged
      FMatrix big(w, w, spec.q);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t u = 0; u < w; ++u) big.at(r, u) = V.at(D[r], ci.zeros + u);
      for (std::size_t j = 0; j < excess; ++j) big.at(d + j, helpers[j]) = 1;
      FMatrix K = mat_inv(big);
      std::vector<std::size_t> quds;
      for (std::size_t p : D) quds.push_back(pq(p, ci.col));
      std::string helper_names;
      for (std::size_t j = 0; j < excess; ++j) {
        quds.push_back(tr.holders(ci.vars[helpers[j]]).front());
        if (j) helper_names += ",";
        helper_names += var_name(ci.vars[helpers[j]], m);
      }
      plan_apply(tr, sched, make_linear(K, quds,
          "inverse of [V_" + ann_set(D) + "^" + ann_window(col_window) +
          "; unit rows " + helper_names + "]"));
    }
  }

  // Disentangling pass, rightmost column first.
  if (!E.empty()) {
    for (std::size_t c = sent_cols; c-- > 0;) {
      const ColumnInfo& ci = cols[c];
      std::size_t w = ci.vars.size();
      std::vector<std::size_t> hold(w);
      for (std::size_t u = 0; u < w; ++u) {
        auto hs = tr.holders(ci.vars[u]);
        if (hs.empty()) throw PlanError("column symbol lost before disentangling");
        hold[u] = hs.front();
      }
      std::vector<std::size_t> ecol;
      for (std::size_t e : E) ecol.push_back(pq(e, ci.col));

      std::vector<std::size_t> eligible;
      for (std::size_t u = 0; u < w; ++u) {
        std::size_t var = ci.vars[u];
        if (var < m) continue;  // never sacrifice the secret
        if (tr.holders(var).size() != 1) continue;
        bool ok = true;
        for (std::size_t qd : tr.occurrences(var)) {
          if (qd == hold[u]) continue;
          if (std::find(ecol.begin(), ecol.end(), qd) == ecol.end()) {
            ok = false;
            break;
          }
        }
        if (ok) eligible.push_back(u);
      }
      if (eligible.size() < E.size())
        throw PlanError("not enough fresh symbols to disentangle column " +
                        std::to_string(ci.col + 1));

      // choose |E| eligible positions, lowest rows first, requiring an
      // invertible pairing with the outside parties
      std::vector<std::size_t> comb(E.size());
      std::vector<std::size_t> idx(E.size());
      for (std::size_t i = 0; i < E.size(); ++i) idx[i] = i;
      bool found = false;
      while (!found) {
        for (std::size_t i = 0; i < E.size(); ++i) comb[i] = eligible[idx[i]];
        FMatrix Achk(E.size(), E.size(), spec.q);
        for (std::size_t j = 0; j < E.size(); ++j)
          for (std::size_t t2 = 0; t2 < E.size(); ++t2)
            Achk.at(j, t2) = V.at(E[j], ci.zeros + comb[t2]);
        if (rank(Achk) == E.size()) {
          found = true;
          break;
        }
        // next combination
        std::size_t i = E.size();
        while (i-- > 0) {
          if (idx[i] + (E.size() - i) < eligible.size()) {
            ++idx[i];
            for (std::size_t j2 = i + 1; j2 < E.size(); ++j2) idx[j2] = idx[j2 - 1] + 1;
            break;
          }
          if (i == 0) throw PlanError("no invertible disentangling pairing");
        }
      }

      FMatrix M(w, w, spec.q);
      std::vector<bool> sac(w, false);
      for (std::size_t j = 0; j < comb.size(); ++j) sac[comb[j]] = true;
      std::size_t jrow = 0;
      for (std::size_t u = 0; u < w; ++u) {
        if (!sac[u]) {
          M.at(u, u) = 1;
        } else {
          for (std::size_t u2 = 0; u2 < w; ++u2)
            M.at(u, u2) = V.at(E[jrow], ci.zeros + u2);
          ++jrow;
        }
      }
      // defining forms before the step rewrites holders
      std::vector<std::vector<Fel>> defs;
      std::vector<std::size_t> sac_vars;
      for (std::size_t j = 0; j < comb.size(); ++j) {
        std::vector<Fel> def(tr.n_vars(), 0);
        for (std::size_t u2 = 0; u2 < w; ++u2) {
          Fel cf = V.at(E[j], ci.zeros + u2);
          if (cf == 0) continue;
          const auto& hf = tr.form(hold[u2]);
          for (std::size_t v = 0; v < tr.n_vars(); ++v)
            def[v] = fadd(def[v], fmul(cf, hf[v], spec.q), spec.q);
        }
        defs.push_back(std::move(def));
        sac_vars.push_back(ci.vars[comb[j]]);
      }
      plan_apply(tr, sched, make_linear(M, hold,
          "copy column " + std::to_string(ci.col + 1) + " onto parties " + ann_set(E)));
      tr.substitute_jointly(sac_vars, defs);
    }
  }

  sched.secret_out.clear();
  for (std::size_t j = 0; j < m; ++j) {
    auto hs = tr.holders(j);
    if (hs.empty()) throw PlanError("secret register not recovered");
    sched.secret_out.push_back(hs.front());
  }
  tr.certify_disentangled(sched.secret_out);
  return sched;
}

// ---------------------------------------------------------------------------
// concat / polynomial-scheme planner

GateSchedule plan_concat(const BuiltScheme& scheme, const std::vector<std::size_t>& D,
                         std::size_t stage_idx) {
  const ConcatStructure& C = *scheme.concat;
  const SchemeSpec& spec = scheme.spec;
  std::size_t layers_used = spec.send_list[stage_idx];
  std::size_t m = spec.m;

  SymbolicTracker tr(scheme.enc);
  GateSchedule sched;
  for (std::size_t p : D)
    sched.communicated.emplace_back(p, scheme.layout.sent_qudits(p, layers_used));

  // layer random variable bases
  std::vector<std::size_t> rbase(C.layers.size(), 0);
  {
    std::size_t acc = 0;
    for (std::size_t l = 0; l < C.layers.size(); ++l) {
      rbase[l] = acc;
      acc += C.layers[l].blocks * C.layers[l].z;
    }
  }

  // register holders per layer, filled as layers are decoded
  std::vector<std::vector<std::size_t>> reg_holder(C.layers.size());

  for (std::size_t l = layers_used; l-- > 0;) {
    const ConcatLayer& L = C.layers[l];
    std::size_t pb = L.t - L.z;

    std::vector<std::size_t> used;  // share indices, ascending
    for (std::size_t p : D) used.push_back(p);
    for (std::size_t j = 0; j < L.shares.size(); ++j) {
      const auto& sh = L.shares[j];
      if (sh.role == ConcatLayerShare::Role::Surplus && sh.feeds_layer < layers_used)
        used.push_back(j);
    }
    std::sort(used.begin(), used.end());
    if (used.size() != L.t)
      throw PlanError("layer " + std::to_string(l + 1) + " has " +
                      std::to_string(used.size()) + " shares, needs " + std::to_string(L.t));
    std::vector<std::size_t> unused;
    for (std::size_t j = 0; j < L.shares.size(); ++j)
      if (std::find(used.begin(), used.end(), j) == used.end()) unused.push_back(j);

    std::vector<std::size_t> full_window(L.t);
    for (std::size_t i = 0; i < L.t; ++i) full_window[i] = i;
    FMatrix K = mat_inv(submatrix(L.V, used, full_window));

    reg_holder[l].assign(L.inputs.size(), 0);
    for (std::size_t b = 0; b < L.blocks; ++b) {
      std::vector<std::size_t> quds;
      for (std::size_t j : used) {
        const auto& sh = L.shares[j];
        if (sh.role == ConcatLayerShare::Role::Party) {
          quds.push_back(scheme.layout.layers[sh.party][l][b]);
        } else {
          quds.push_back(reg_holder[sh.feeds_layer][sh.reg_offset + b]);
        }
      }
      plan_apply(tr, sched, make_linear(K, quds,
          "layer " + std::to_string(l + 1) + " block " + std::to_string(b + 1) +
          ": inverse of share rows " + ann_set(used)));
      // record outputs
      for (std::size_t i = 0; i < L.t; ++i) {
        bool secret_slot = L.secret_on_top ? (i < pb) : (i >= L.z);
        if (secret_slot) {
          std::size_t reg = b * pb + (L.secret_on_top ? i : i - L.z);
          reg_holder[l][reg] = quds[i];
          // wiring check: the register form must be exactly what was encoded
          const auto& f = tr.form(quds[i]);
          const auto& expect = L.input_forms[reg];
          for (std::size_t v = 0; v < f.size(); ++v) {
            Fel ev = v < expect.size() ? expect[v] : 0;
            if (f[v] != ev) throw PlanError("layer decode produced unexpected register form");
          }
        }
      }

      // disentangle this block against the unused shares
      if (L.z > 0) {
        std::vector<std::size_t> slot_qudit(L.t);
        std::vector<std::size_t> rand_vars;
        for (std::size_t i = 0; i < L.t; ++i) slot_qudit[i] = quds[i];
        for (std::size_t i = 0; i < L.t; ++i) {
          bool secret_slot = L.secret_on_top ? (i < pb) : (i >= L.z);
          if (!secret_slot) {
            std::size_t ridx = L.secret_on_top ? i - pb : i;
            rand_vars.push_back(m + rbase[l] + b * L.z + ridx);
          }
        }
        FMatrix M(L.t, L.t, spec.q);
        std::size_t jrow = 0;
        std::vector<std::vector<Fel>> defs;
        for (std::size_t i = 0; i < L.t; ++i) {
          bool secret_slot = L.secret_on_top ? (i < pb) : (i >= L.z);
          if (secret_slot) {
            M.at(i, i) = 1;
          } else {
            std::vector<Fel> def(tr.n_vars(), 0);
            for (std::size_t u = 0; u < L.t; ++u) {
              Fel cf = L.V.at(unused[jrow], u);
              M.at(i, u) = cf;
              if (cf == 0) continue;
              const auto& hf = tr.form(slot_qudit[u]);
              for (std::size_t v = 0; v < tr.n_vars(); ++v)
                def[v] = fadd(def[v], fmul(cf, hf[v], spec.q), spec.q);
            }
            defs.push_back(std::move(def));
            ++jrow;
          }
        }
        plan_apply(tr, sched, make_linear(M, slot_qudit,
            "layer " + std::to_string(l + 1) + " block " + std::to_string(b + 1) +
            ": copy onto shares " + ann_set(unused)));
        tr.substitute_jointly(rand_vars, defs);
      }
    }
  }

  sched.secret_out.clear();
  for (std::size_t j = 0; j < m; ++j) sched.secret_out.push_back(reg_holder[0][j]);
  tr.certify_disentangled(sched.secret_out);
  return sched;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t GateSchedule::total_cost() const {
  std::size_t c = 0;
  for (const auto& [p, quds] : communicated) c += quds.size();
  return c;
}

std::vector<std::size_t> GateSchedule::communicated_flat() const {
  std::vector<std::size_t> out;
  for (const auto& [p, quds] : communicated) out.insert(out.end(), quds.begin(), quds.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::string GateSchedule::dump() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const GateStep& st = steps[i];
    os << "step " << (i + 1) << ": ";
    switch (st.kind) {
      case GateStep::Kind::LinearMap: {
        os << "U qudits=";
        for (std::size_t j = 0; j < st.indices.size(); ++j)
          os << (j ? "," : "") << st.indices[j];
        os << " K=[" << st.matrix.to_string() << "]";
        break;
      }
      case GateStep::Kind::CtrlAdd:
        os << "L alpha=" << st.alpha << " control=" << st.control << " target=" << st.target;
        break;
      case GateStep::Kind::Reorder: {
        os << "reorder ";
        for (std::size_t j = 0; j < st.indices.size(); ++j)
          os << (j ? "," : "") << st.indices[j];
        break;
      }
    }
    if (!st.annotation.empty()) os << "  # " << st.annotation;
    os << '\n';
  }
  os << "secret_out=";
  for (std::size_t j = 0; j < secret_out.size(); ++j) os << (j ? "," : "") << secret_out[j];
  os << '\n';
  return os.str();
}

GateSchedule plan_recovery(const BuiltScheme& scheme, const std::vector<std::size_t>& D_in) {
  std::vector<std::size_t> D = D_in;
  std::sort(D.begin(), D.end());
  if (std::adjacent_find(D.begin(), D.end()) != D.end())
    throw AccessStructureViolation("accessed set has repeated parties");
  for (std::size_t p : D) {
    if (p >= scheme.layout.n_parties) throw AccessStructureViolation("unknown party in D");
    if (scheme.layout.dropped[p]) throw AccessStructureViolation("accessed party was dropped");
  }
  std::size_t threshold =
      scheme.spec.variant == Variant::RampQSS ? scheme.spec.t : scheme.spec.k;
  if (D.size() < threshold)
    throw AccessStructureViolation("accessed set below the recovery threshold");
  std::size_t idx = stage_index(scheme.spec, D.size());
  if (scheme.assembly) return plan_staircase(scheme, D, idx);
  if (scheme.concat) return plan_concat(scheme, D, idx);
  throw PlanError("scheme has no recovery structure");
}

Transcript execute(const GateSchedule& schedule, const BuiltScheme& scheme,
                   const EncodedState& state, const Budgets& budgets) {
  std::vector<std::size_t> allowed = schedule.communicated_flat();
  auto check = [&](std::size_t qd) {
    if (!std::binary_search(allowed.begin(), allowed.end(), qd))
      throw ScheduleError("step touches non-communicated qudit " + std::to_string(qd));
  };

  EncodedState cur = state;
  for (const GateStep& st : schedule.steps) {
    switch (st.kind) {
      case GateStep::Kind::LinearMap:
        for (std::size_t qd : st.indices) check(qd);
        if (cur.backend == Backend::Sparse)
          cur.sparse = apply_linear(*cur.sparse, st.matrix, st.indices);
        else
          cur.coset = apply_linear(*cur.coset, st.matrix, st.indices);
        break;
      case GateStep::Kind::CtrlAdd:
        check(st.control);
        check(st.target);
        if (cur.backend == Backend::Sparse)
          cur.sparse = apply_ctrl_add(*cur.sparse, st.alpha, st.control, st.target);
        else
          cur.coset = apply_ctrl_add(*cur.coset, st.alpha, st.control, st.target);
        break;
      case GateStep::Kind::Reorder: {
        // relabel qudits: new position i holds what position perm[i] held
        const auto& perm = st.indices;
        std::size_t n = cur.backend == Backend::Sparse ? cur.sparse->n_qudits
                                                       : cur.coset->n_qudits;
        if (perm.size() != n) throw ScheduleError("reorder permutation length mismatch");
        std::vector<bool> seen(n, false);
        for (std::size_t i : perm) {
          if (i >= n || seen[i]) throw ScheduleError("reorder is not a permutation");
          seen[i] = true;
        }
        if (cur.backend == Backend::Sparse) {
          SparseState out(cur.sparse->q, n);
          out.terms.reserve(cur.sparse->terms.size());
          for (const auto& [w, a] : cur.sparse->terms) {
            Word nw(n, 0);
            for (std::size_t i = 0; i < n; ++i) nw[i] = w[perm[i]];
            out.terms[nw] += a;
          }
          cur.sparse = std::move(out);
        } else {
          CosetState out = *cur.coset;
          for (std::size_t r = 0; r < out.W.rows; ++r)
            for (std::size_t i = 0; i < n; ++i) out.W.at(r, i) = cur.coset->W.at(r, perm[i]);
          for (std::size_t b = 0; b < out.branches.size(); ++b)
            for (std::size_t i = 0; i < n; ++i)
              out.branches[b].offset[i] = cur.coset->branches[b].offset[perm[i]];
          out.canonicalize();
          cur.coset = std::move(out);
        }
        break;
      }
    }
  }

  Transcript t;
  for (const auto& [p, quds] : schedule.communicated) {
    t.accessed.push_back(p);
    t.qudits_received.emplace_back(p, quds.size());
  }
  t.d = t.accessed.size();
  t.final_state = std::move(cur);
  t.secret_out = schedule.secret_out;
  t.communication_cost = schedule.total_cost();
  (void)budgets;
  (void)scheme;
  return t;
}

DensityOperator reduced_on_out(const Transcript& t, const Budgets& budgets) {
  if (t.final_state.backend == Backend::Sparse)
    return partial_trace(*t.final_state.sparse, t.secret_out, budgets);
  return partial_trace(*t.final_state.coset, t.secret_out, budgets);
}

namespace {

SparseState extract_out_state(const Transcript& t) {
  const auto& out = t.secret_out;
  if (t.final_state.backend == Backend::Coset) {
    const CosetState& cs = *t.final_state.coset;
    for (std::size_t r = 0; r < cs.W.rows; ++r)
      for (std::size_t qd : out)
        if (cs.W.at(r, qd) != 0)
          throw ScheduleError("output registers still entangled with randomness");
    SparseState psi(cs.q, out.size());
    for (const auto& br : cs.branches) {
      Word w(out.size(), 0);
      for (std::size_t i = 0; i < out.size(); ++i) w[i] = static_cast<char>(br.offset[out[i]]);
      psi.terms[w] += br.amp;
    }
    psi.prune();
    return psi;
  }
  const SparseState& s = *t.final_state.sparse;
  std::vector<bool> is_out(s.n_qudits, false);
  for (std::size_t qd : out) is_out[qd] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < s.n_qudits; ++i)
    if (!is_out[i]) rest.push_back(i);
  // pick one residual class deterministically and read the factor off it
  std::optional<Word> pick;
  for (const auto& [w, a] : s.terms) {
    Word rw(rest.size(), 0);
    for (std::size_t i = 0; i < rest.size(); ++i) rw[i] = w[rest[i]];
    if (!pick || rw < *pick) pick = rw;
  }
  SparseState psi(s.q, out.size());
  double n2 = 0;
  for (const auto& [w, a] : s.terms) {
    Word rw(rest.size(), 0);
    for (std::size_t i = 0; i < rest.size(); ++i) rw[i] = w[rest[i]];
    if (rw != *pick) continue;
    Word kw(out.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) kw[i] = w[out[i]];
    psi.terms[kw] += a;
    n2 += std::norm(a);
  }
  double inv = 1.0 / std::sqrt(n2);
  for (auto& [w, a] : psi.terms) a *= inv;
  psi.prune();
  return psi;
}

}  // namespace

RecoveryOutcome recover(const BuiltScheme& scheme, const EncodedState& state,
                        const std::vector<std::size_t>& D, const Budgets& budgets) {
  GateSchedule sched = plan_recovery(scheme, D);
  Transcript t = execute(sched, scheme, state, budgets);
  SparseState psi = extract_out_state(t);
  return RecoveryOutcome{std::move(psi), std::move(t), std::move(sched)};
}

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t d) {
  std::vector<std::vector<std::size_t>> out;
  if (d > n) return out;
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = d;
    bool done = true;
    while (i-- > 0) {
      if (idx[i] + (d - i) < n) {
        ++idx[i];
        for (std::size_t j = i + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
        done = false;
        break;
      }
    }
    if (done) break;
  }
  return out;
}

double entangled_reference_fidelity(const BuiltScheme& scheme,
                                    const std::vector<std::size_t>& D,
                                    const Budgets& budgets) {
  std::size_t m = scheme.spec.m;
  GateSchedule sched = plan_recovery(scheme, D);
  // the reference occupies qudits [0, m); shift every schedule index up
  for (auto& step : sched.steps) {
    if (step.kind == GateStep::Kind::LinearMap) {
      for (auto& i : step.indices) i += m;
    } else {
      step.control += m;
      step.target += m;
    }
  }
  for (auto& [p, quds] : sched.communicated)
    for (auto& i : quds) i += m;
  for (auto& i : sched.secret_out) i += m;

  EncodedState st;
  st.backend = Backend::Coset;
  st.coset = encode_entangled_reference(scheme);
  Transcript t = execute(sched, scheme, st, budgets);

  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < m; ++j) keep.push_back(j);
  keep.insert(keep.end(), t.secret_out.begin(), t.secret_out.end());
  std::vector<std::size_t> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  DensityOperator rho = partial_trace(*t.final_state.coset, sorted, budgets);

  // position of each logical register inside the sorted keep list
  std::vector<std::size_t> pos(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    pos[i] = std::lower_bound(sorted.begin(), sorted.end(), keep[i]) - sorted.begin();

  std::uint64_t total = 1;
  for (std::size_t j = 0; j < m; ++j) total *= scheme.spec.q.q;
  SparseState phi(scheme.spec.q, sorted.size());
  double amp = 1.0 / std::sqrt(double(total));
  for (std::uint64_t v = 0; v < total; ++v) {
    Word s(m, 0);
    std::uint64_t x = v;
    for (std::size_t j = m; j-- > 0;) {
      s[j] = static_cast<char>(x % scheme.spec.q.q);
      x /= scheme.spec.q.q;
    }
    Word w(sorted.size(), 0);
    for (std::size_t j = 0; j < m; ++j) {
      w[pos[j]] = s[j];          // reference register j
      w[pos[m + j]] = s[j];      // recovered output register j
    }
    phi.terms[w] = amp;
  }
  return fidelity(rho, phi);
}

bool universal_staircase_plans(const SchemeSpec& spec_in) {
  SchemeSpec spec = spec_in;
  spec.n = 2 * spec.k - 1;  // probe the full scheme; dropping only shrinks D
  BuiltScheme scheme = build_from_assembly(spec, build_staircase_assembly(spec));
  std::size_t n_full = scheme.layout.n_parties;
  for (std::size_t d : spec.d_list) {
    for (const auto& D : all_subsets(n_full, d)) {
      try {
        plan_recovery(scheme, D);
      } catch (const Error&) {
        return false;
      }
    }
  }
  return true;
}

std::size_t communication_cost(const BuiltScheme& scheme, std::size_t d) {
  std::size_t idx = stage_index(scheme.spec, d);
  std::vector<std::size_t> active;
  for (std::size_t p = 0; p < scheme.layout.n_parties; ++p)
    if (!scheme.layout.dropped[p]) active.push_back(p);
  if (d > active.size()) throw UnsupportedD("not enough active parties for d");

  std::size_t layers_sent = 0;
  if (scheme.assembly) {
    std::vector<std::size_t> bounds;
    for (const auto& st : scheme.assembly->stages) bounds.push_back(st.cols);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    std::size_t cols = scheme.assembly->stages[idx].cols;
    for (std::size_t b : bounds)
      if (b <= cols) ++layers_sent;
  } else {
    layers_sent = scheme.spec.send_list[idx];
  }

  std::size_t worst = 0;
  bool first = true;
  std::size_t uniform = 0;
  for (const auto& comb : all_subsets(active.size(), d)) {
    std::size_t cost = 0;
    for (std::size_t i : comb) cost += scheme.layout.sent_qudits(active[i], layers_sent).size();
    if (first) {
      uniform = cost;
      first = false;
    } else if (cost != uniform) {
      throw PlanError("communication cost varies across accessed sets");
    }
    worst = std::max(worst, cost);
  }
  return worst;
}

}  // namespace ceqss
