#include "ceqss/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace ceqss {

bool CheckReport::all_pass() const { return failures() == 0; }
std::size_t CheckReport::failures() const {
  std::size_t f = 0;
  for (const auto& r : records)
    if (!r.skipped() && !r.pass) ++f;
  return f;
}
std::size_t CheckReport::skips() const {
  std::size_t s = 0;
  for (const auto& r : records)
    if (r.skipped()) ++s;
  return s;
}

bool SchemeVerdict::all_pass() const {
  for (const auto& r : reports)
    if (!r.all_pass()) return false;
  return costs.pass;
}

namespace {

std::string set_str(const std::vector<std::size_t>& xs) {
  std::string s = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(xs[i] + 1);
  }
  return s + "}";
}

std::vector<std::size_t> active_parties(const BuiltScheme& s) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < s.layout.n_parties; ++p)
    if (!s.layout.dropped[p]) out.push_back(p);
  return out;
}

std::size_t secrecy_threshold(const SchemeSpec& spec) {
  return spec.variant == Variant::RampQSS ? spec.z : spec.k - 1;
}

std::size_t recovery_threshold(const SchemeSpec& spec) {
  return spec.variant == Variant::RampQSS ? spec.t : spec.k;
}

bool is_universal(const SchemeSpec& spec) {
  return spec.variant == Variant::StaircaseUniversal ||
         spec.variant == Variant::ConcatUniversal;
}

std::vector<std::vector<std::size_t>> pick_subsets(const std::vector<std::size_t>& pool,
                                                   std::size_t d, const VerifyOptions& opt,
                                                   std::uint64_t salt) {
  auto combos = all_subsets(pool.size(), d);
  std::vector<std::vector<std::size_t>> out;
  if (combos.size() > opt.subset_cap) {
    std::mt19937_64 rng(opt.seed ^ salt);
    std::shuffle(combos.begin(), combos.end(), rng);
    combos.resize(opt.sample_count);
    std::sort(combos.begin(), combos.end());
  }
  for (const auto& c : combos) {
    std::vector<std::size_t> parties;
    for (std::size_t i : c) parties.push_back(pool[i]);
    out.push_back(parties);
  }
  return out;
}

Word word_of(std::size_t value, std::size_t m, std::uint32_t q) {
  Word w(m, 0);
  for (std::size_t j = m; j-- > 0;) {
    w[j] = static_cast<char>(value % q);
    value /= q;
  }
  return w;
}

std::vector<std::size_t> party_qudit_union(const BuiltScheme& s,
                                           const std::vector<std::size_t>& parties) {
  std::vector<std::size_t> out;
  for (std::size_t p : parties) {
    auto q = s.layout.party_qudits(p);
    out.insert(out.end(), q.begin(), q.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FMatrix take_rows(const FMatrix& M, const std::vector<std::size_t>& rows) {
  FMatrix out(rows.size(), M.cols, M.mod);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < M.cols; ++j) out.at(i, j) = M.at(rows[i], j);
  return out;
}

FMatrix hstack(const FMatrix& A, const FMatrix& B) {
  FMatrix out(A.rows, A.cols + B.cols, A.mod);
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
    for (std::size_t j = 0; j < B.cols; ++j) out.at(i, A.cols + j) = B.at(i, j);
  }
  return out;
}

// Exact reduced-state independence over the whole secret space: no cross
// term between distinct basis secrets survives outside B, and the B-side
// offsets stay inside the projected randomness space.
bool secrecy_certificate(const BuiltScheme& s, const std::vector<std::size_t>& b_qudits) {
  std::vector<bool> in_b(s.enc.n_qudits, false);
  for (std::size_t i : b_qudits) in_b[i] = true;
  std::vector<std::size_t> brows = b_qudits;
  std::vector<std::size_t> rrows;
  for (std::size_t i = 0; i < s.enc.n_qudits; ++i)
    if (!in_b[i]) rrows.push_back(i);

  FMatrix mr_rest = take_rows(s.enc.Mr, rrows);
  FMatrix ms_rest = take_rows(s.enc.Ms, rrows);
  bool cross_free =
      rank(hstack(mr_rest, ms_rest)) == rank(mr_rest) + s.enc.m_secret;

  FMatrix mr_b = take_rows(s.enc.Mr, brows);
  FMatrix ms_b = take_rows(s.enc.Ms, brows);
  bool shift_absorbed = rank(hstack(mr_b, ms_b)) == rank(mr_b);

  return cross_free && shift_absorbed;
}

// The (reference + shares) form matrix used by the information model.
FMatrix reference_form_matrix(const BuiltScheme& s) {
  std::size_t m = s.enc.m_secret;
  FMatrix G(m + s.enc.n_qudits, m + s.enc.n_random, s.spec.q);
  for (std::size_t j = 0; j < m; ++j) G.at(j, j) = 1;
  for (std::size_t i = 0; i < s.enc.n_qudits; ++i) {
    for (std::size_t j = 0; j < m; ++j) G.at(m + i, j) = s.enc.Ms.at(i, j);
    for (std::size_t j = 0; j < s.enc.n_random; ++j)
      G.at(m + i, m + j) = s.enc.Mr.at(i, j);
  }
  return G;
}

double subsystem_entropy(const FMatrix& G, std::vector<std::size_t> rows) {
  std::sort(rows.begin(), rows.end());
  return coset_subsystem_entropy(G, rows);
}

}  // namespace

std::vector<SparseState> spanning_secret_family(FieldModulus q, std::size_t m,
                                                const VerifyOptions& opt) {
  std::vector<SparseState> family;
  std::size_t total = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < m; ++i) {
    total *= q.q;
    if (total > opt.family_cap) {
      overflow = true;
      break;
    }
  }

  std::vector<Word> basis;
  if (!overflow) {
    for (std::size_t v = 0; v < total; ++v) basis.push_back(word_of(v, m, q.q));
  } else {
    std::mt19937_64 rng(opt.seed + 1);
    std::map<Word, bool> seen;
    basis.push_back(Word(m, 0));
    seen[basis[0]] = true;
    while (basis.size() < opt.family_basis_sample) {
      Word w(m, 0);
      for (auto& c : w) c = static_cast<char>(rng() % q.q);
      if (!seen.count(w)) {
        seen[w] = true;
        basis.push_back(w);
      }
    }
  }
  for (const auto& w : basis) family.push_back(state_from_secret({{w, 1.0}}, q));

  std::size_t pair_cap =
      overflow ? opt.family_pair_sample : basis.size() * (basis.size() - 1) / 2;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < basis.size() && pairs < pair_cap; ++i) {
    for (std::size_t j = i + 1; j < basis.size() && pairs < pair_cap; ++j, ++pairs) {
      family.push_back(state_from_secret({{basis[i], 1.0}, {basis[j], 1.0}}, q));
      family.push_back(state_from_secret({{basis[i], 1.0}, {basis[j], Amp(0, 1)}}, q));
    }
  }

  std::mt19937_64 rng(opt.seed + 2);
  for (int r = 0; r < 5; ++r) {
    std::map<Word, Amp> amps;
    while (amps.size() < std::min<std::size_t>(4, total ? total : 4)) {
      Word w(m, 0);
      for (auto& c : w) c = static_cast<char>(rng() % q.q);
      amps[w] = Amp(std::cos(double(rng() % 1024)), std::sin(double(rng() % 1024)));
    }
    family.push_back(state_from_secret(amps, q));
  }
  return family;
}

CheckReport check_recoverability(const BuiltScheme& scheme, const VerifyOptions& opt) {
  CheckReport rep;
  rep.check = "recoverability";
  auto actives = active_parties(scheme);
  auto family = spanning_secret_family(scheme.spec.q, scheme.spec.m, opt);
  // keep the per-D loop affordable: a basis state, a superposition, a random state
  std::vector<const SparseState*> probe;
  if (!family.empty()) probe.push_back(&family[0]);
  for (const auto& st : family) {
    if (st.terms.size() > 1) {
      probe.push_back(&st);
      break;
    }
  }
  probe.push_back(&family.back());

  for (std::size_t d : scheme.spec.d_list) {
    if (d > actives.size()) continue;
    for (const auto& D : pick_subsets(actives, d, opt, d)) {
      for (const SparseState* secret : probe) {
        CheckRecord rec;
        rec.name = "fidelity(d=" + std::to_string(d) + ")";
        rec.subject = "D=" + set_str(D) + " terms=" + std::to_string(secret->terms.size());
        rec.expected = 1.0;
        rec.tolerance = opt.tol.fidelity;
        try {
          auto st = encode(scheme, *secret, Backend::Coset, opt.budgets);
          auto out = recover(scheme, st, D, opt.budgets);
          auto rho = reduced_on_out(out.transcript, opt.budgets);
          rec.measured = fidelity(rho, *secret);
          double purity = rho.purity();
          rec.pass = rec.measured >= 1.0 - opt.tol.fidelity &&
                     purity >= 1.0 - opt.tol.fidelity;
        } catch (const CapacityExceeded& e) {
          rec.skipped_reason = e.what();
        } catch (const Error& e) {
          rec.pass = false;
          rec.subject += " error=";
          rec.subject += e.what();
        }
        rep.records.push_back(std::move(rec));
      }
    }
  }

  // entangled-reference round trip on small instances
  std::size_t m = scheme.spec.m;
  double dim = std::pow(double(scheme.spec.q.q), double(2 * m));
  if (dim <= double(opt.budgets.max_dense_dim)) {
    for (std::size_t d : scheme.spec.d_list) {
      if (d > actives.size()) continue;
      std::vector<std::size_t> D(actives.begin(), actives.begin() + d);
      CheckRecord rec;
      rec.name = "entangled-reference(d=" + std::to_string(d) + ")";
      rec.subject = "D=" + set_str(D);
      rec.expected = 1.0;
      rec.tolerance = opt.tol.fidelity;
      try {
        rec.measured = entangled_reference_fidelity(scheme, D, opt.budgets);
        rec.pass = rec.measured >= 1.0 - opt.tol.fidelity;
      } catch (const CapacityExceeded& e) {
        rec.skipped_reason = e.what();
      } catch (const Error& e) {
        rec.pass = false;
        rec.subject += " error=";
        rec.subject += e.what();
      }
      rep.records.push_back(std::move(rec));
    }
  }
  return rep;
}

CheckReport check_secrecy(const BuiltScheme& scheme, const VerifyOptions& opt) {
  CheckReport rep;
  rep.check = "secrecy";
  auto actives = active_parties(scheme);
  std::size_t zmax = secrecy_threshold(scheme.spec);

  std::vector<std::size_t> sizes;
  if (zmax >= 1) sizes.push_back(zmax);
  if (zmax >= 2) sizes.push_back(1);  // spot-check below the threshold

  auto family = spanning_secret_family(scheme.spec.q, scheme.spec.m, opt);

  // Encode each family member once. The sparse expansion is the oracle of
  // choice when it fits; the coset form stays exact at any size.
  struct EncState {
    std::optional<SparseState> sp;
    CosetState cs;
    EncState(CosetState c) : cs(std::move(c)) {}
  };
  std::vector<EncState> encoded;
  Budgets oracle_budget = opt.budgets;
  oracle_budget.max_terms = std::min<std::size_t>(oracle_budget.max_terms, 1u << 20);
  for (const auto& secret : family) {
    EncState e(encode_coset(scheme, secret));
    try {
      e.sp = to_sparse(e.cs, oracle_budget);
    } catch (const CapacityExceeded&) {
    }
    encoded.push_back(std::move(e));
  }
  // coset-side reduced operators get a tighter enumeration cap; the sparse
  // oracle covers the heavyweight cases
  Budgets coset_budget = opt.budgets;
  coset_budget.max_terms = std::min<std::size_t>(coset_budget.max_terms, 1u << 16);

  for (std::size_t bs : sizes) {
    bool first_of_size = true;
    for (const auto& B : pick_subsets(actives, bs, opt, 1000 + bs)) {
      bool is_first = first_of_size;
      first_of_size = false;
      auto b_qudits = party_qudit_union(scheme, B);
      CheckRecord cert;
      cert.name = "independence-certificate";
      cert.subject = "B=" + set_str(B);
      cert.expected = 0.0;
      cert.tolerance = opt.tol.entrywise;
      bool ok = secrecy_certificate(scheme, b_qudits);
      cert.measured = ok ? 0.0 : 1.0;
      cert.pass = ok;
      rep.records.push_back(cert);

      // entrywise comparison of reduced operators: the full family on the
      // first subset of each size, a slimmer sample on the rest (the rank
      // certificate above already covers every input exactly)
      CheckRecord fam;
      fam.name = "family-entrywise";
      fam.subject = "B=" + set_str(B);
      fam.expected = 0.0;
      fam.tolerance = opt.tol.entrywise;
      std::vector<std::size_t> members;
      if (is_first) {
        for (std::size_t i = 0; i < encoded.size(); ++i) members.push_back(i);
      } else {
        for (std::size_t i = 0; i < encoded.size(); i += 3) members.push_back(i);
        members.push_back(encoded.size() - 1);
      }
      fam.subject += " family=" + std::to_string(members.size());
      try {
        double worst = 0.0;
        std::optional<DensityOperator> first;
        for (std::size_t i : members) {
          const auto& e = encoded[i];
          DensityOperator rho = e.sp ? partial_trace(*e.sp, b_qudits, opt.budgets)
                                     : partial_trace(e.cs, b_qudits, coset_budget);
          if (!first) {
            first = std::move(rho);
          } else {
            worst = std::max(worst, max_entry_deviation(*first, rho));
          }
        }
        fam.measured = worst;
        fam.pass = worst <= opt.tol.entrywise;
      } catch (const CapacityExceeded& e) {
        fam.skipped_reason = e.what();
      }
      rep.records.push_back(fam);

      // cross-validate the two backends once per subset size
      if (is_first && encoded[0].sp) {
        CheckRecord oracle;
        oracle.name = "coset-vs-sparse";
        oracle.subject = "B=" + set_str(B);
        oracle.expected = 0.0;
        oracle.tolerance = opt.tol.entrywise;
        try {
          auto a = partial_trace(encoded[0].cs, b_qudits, coset_budget);
          auto b = partial_trace(*encoded[0].sp, b_qudits, opt.budgets);
          oracle.measured = max_entry_deviation(a, b);
          oracle.pass = oracle.measured <= opt.tol.entrywise;
        } catch (const CapacityExceeded& e) {
          oracle.skipped_reason = e.what();
        }
        rep.records.push_back(oracle);
      }
    }
  }
  return rep;
}

CostAudit audit_costs(const BuiltScheme& scheme) {
  CostAudit audit;
  const SchemeSpec& spec = scheme.spec;
  auto actives = active_parties(scheme);
  std::size_t kk = recovery_threshold(spec) == spec.t && spec.variant == Variant::RampQSS
                       ? spec.z + 1
                       : spec.k;

  bool all_meet = true;
  for (std::size_t d : spec.d_list) {
    if (d > actives.size()) continue;
    CostRow row;
    row.d = d;
    row.measured = communication_cost(scheme, d);
    row.bound_num = d * spec.m;
    row.bound_den = d - kk + 1;
    row.meets_bound = row.measured * row.bound_den >= row.bound_num;
    row.saturates = row.measured * row.bound_den == row.bound_num;
    if (!row.meets_bound) all_meet = false;
    if (!row.saturates && row.meets_bound)
      audit.notes.push_back("communication " + std::to_string(row.measured) + " at d=" +
                            std::to_string(d) + " sits above the d*m/(d-k+1) bound " +
                            std::to_string(row.bound_num) + "/" +
                            std::to_string(row.bound_den) + "; not optimal at this d");
    audit.rows.push_back(row);
  }

  audit.strictly_decreasing = true;
  for (std::size_t i = 0; i + 1 < audit.rows.size(); ++i) {
    // rows are listed largest d first
    if (!(audit.rows[i].measured < audit.rows[i + 1].measured))
      audit.strictly_decreasing = false;
  }

  // Every d-k+1 partial shares must jointly carry at least the secret size.
  audit.partial_bound_ok = true;
  audit.partial_checks = 0;
  for (std::size_t di = 0; di < spec.d_list.size(); ++di) {
    std::size_t d = spec.d_list[di];
    if (d > actives.size()) continue;
    std::size_t layers_sent = 0;
    if (scheme.assembly) {
      std::vector<std::size_t> bounds;
      for (const auto& st : scheme.assembly->stages) bounds.push_back(st.cols);
      std::sort(bounds.begin(), bounds.end());
      bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
      for (std::size_t b : bounds)
        if (b <= scheme.assembly->stages[di].cols) ++layers_sent;
    } else {
      layers_sent = spec.send_list[di];
    }
    std::size_t f_size = d - kk + 1;
    for (const auto& Dc : all_subsets(actives.size(), d)) {
      std::vector<std::size_t> sent_counts;
      for (std::size_t i : Dc)
        sent_counts.push_back(scheme.layout.sent_qudits(actives[i], layers_sent).size());
      for (const auto& Fc : all_subsets(Dc.size(), f_size)) {
        std::size_t total = 0;
        for (std::size_t i : Fc) total += sent_counts[i];
        ++audit.partial_checks;
        if (total < spec.m) audit.partial_bound_ok = false;
      }
    }
  }

  audit.pass = all_meet && audit.partial_bound_ok &&
               (!is_universal(spec) || audit.strictly_decreasing);
  return audit;
}

CheckReport cost_audit_report(const BuiltScheme& scheme) {
  CostAudit audit = audit_costs(scheme);
  CheckReport rep;
  rep.check = "costs";
  for (const auto& row : audit.rows) {
    CheckRecord rec;
    rec.name = "cc(d=" + std::to_string(row.d) + ")";
    rec.subject = "bound " + std::to_string(row.bound_num) + "/" + std::to_string(row.bound_den);
    rec.measured = double(row.measured);
    rec.expected = double(row.bound_num) / double(row.bound_den);
    rec.tolerance = 0;
    rec.pass = row.meets_bound;
    rep.records.push_back(rec);
  }
  CheckRecord partial;
  partial.name = "partial-share-bound";
  partial.subject = std::to_string(audit.partial_checks) + " (D,F) pairs";
  partial.measured = audit.partial_bound_ok ? 1.0 : 0.0;
  partial.expected = 1.0;
  partial.pass = audit.partial_bound_ok;
  rep.records.push_back(partial);
  if (is_universal(scheme.spec)) {
    CheckRecord chain;
    chain.name = "strict-chain";
    chain.subject = "CC(n) < ... < CC(k)";
    chain.measured = audit.strictly_decreasing ? 1.0 : 0.0;
    chain.expected = 1.0;
    chain.pass = audit.strictly_decreasing;
    rep.records.push_back(chain);
  }
  return rep;
}

CheckReport entropy_model_check(const BuiltScheme& scheme, const VerifyOptions& opt) {
  CheckReport rep;
  rep.check = "entropy-model";
  const SchemeSpec& spec = scheme.spec;
  std::size_t m = spec.m;
  auto actives = active_parties(scheme);
  FMatrix G = reference_form_matrix(scheme);

  std::vector<std::size_t> ref_rows;
  for (std::size_t j = 0; j < m; ++j) ref_rows.push_back(j);
  auto rows_of_parties = [&](const std::vector<std::size_t>& parties) {
    std::vector<std::size_t> rows;
    for (std::size_t qd : party_qudit_union(scheme, parties)) rows.push_back(m + qd);
    return rows;
  };

  auto push = [&](std::string name, std::string subject, double measured, double expected,
                  bool pass_cond) {
    CheckRecord rec;
    rec.name = std::move(name);
    rec.subject = std::move(subject);
    rec.measured = measured;
    rec.expected = expected;
    rec.tolerance = opt.tol.entropy;
    rec.pass = pass_cond;
    rep.records.push_back(std::move(rec));
  };

  double s_secret = subsystem_entropy(G, ref_rows);  // S(R) = S(secret) = m
  push("S(secret)", "reference register", s_secret, double(m),
       std::abs(s_secret - double(m)) <= opt.tol.entropy);

  // purity of the global pure state
  std::vector<std::size_t> all_rows;
  for (std::size_t i = 0; i < G.rows; ++i) all_rows.push_back(i);
  double s_all = subsystem_entropy(G, all_rows);
  push("S(global)", "shares+environment+reference", s_all, 0.0,
       std::abs(s_all) <= opt.tol.entropy);

  auto mutual_with_ref = [&](const std::vector<std::size_t>& sys_rows) {
    std::vector<std::size_t> joint = sys_rows;
    joint.insert(joint.end(), ref_rows.begin(), ref_rows.end());
    return s_secret + subsystem_entropy(G, sys_rows) - subsystem_entropy(G, joint);
  };

  std::size_t kk = recovery_threshold(spec);
  // authorized full-share sets
  for (std::size_t asize = kk; asize <= actives.size(); ++asize) {
    for (const auto& A : pick_subsets(actives, asize, opt, 7000 + asize)) {
      double i_ra = mutual_with_ref(rows_of_parties(A));
      push("I(R:S_A)", "A=" + set_str(A), i_ra, 2.0 * m,
           std::abs(i_ra - 2.0 * m) <= opt.tol.entropy);
    }
  }
  // unauthorized sets
  std::size_t zmax = secrecy_threshold(spec);
  for (std::size_t bsize = 1; bsize <= zmax; ++bsize) {
    for (const auto& B : pick_subsets(actives, bsize, opt, 8000 + bsize)) {
      double i_rb = mutual_with_ref(rows_of_parties(B));
      push("I(R:S_B)", "B=" + set_str(B), i_rb, 0.0, std::abs(i_rb) <= opt.tol.entropy);
    }
  }
  // partial-share transcripts
  for (std::size_t di = 0; di < spec.d_list.size(); ++di) {
    std::size_t d = spec.d_list[di];
    if (d > actives.size()) continue;
    std::size_t layers_sent = 0;
    if (scheme.assembly) {
      std::vector<std::size_t> bounds;
      for (const auto& st : scheme.assembly->stages) bounds.push_back(st.cols);
      std::sort(bounds.begin(), bounds.end());
      bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
      for (std::size_t b : bounds)
        if (b <= scheme.assembly->stages[di].cols) ++layers_sent;
    } else {
      layers_sent = spec.send_list[di];
    }
    for (const auto& D : pick_subsets(actives, d, opt, 9000 + d)) {
      std::vector<std::size_t> rows;
      for (std::size_t p : D)
        for (std::size_t qd : scheme.layout.sent_qudits(p, layers_sent))
          rows.push_back(m + qd);
      double i_rh = mutual_with_ref(rows);
      push("I(R:H_DD)", "d=" + std::to_string(d) + " D=" + set_str(D), i_rh, 2.0 * m,
           std::abs(i_rh - 2.0 * m) <= opt.tol.entropy);
    }
  }
  // per-share entropy bound: S(S_j) >= S(secret) for perfect threshold
  // schemes; ramp schemes only promise the average bound S(secret)/(t-z)
  double share_floor = spec.variant == Variant::RampQSS
                           ? double(m) / double(spec.t - spec.z)
                           : double(m);
  for (std::size_t p : actives) {
    double sj = subsystem_entropy(G, rows_of_parties({p}));
    push("S(share)", "party " + std::to_string(p + 1), sj, share_floor,
         sj >= share_floor - opt.tol.entropy);
  }
  // subadditivity and Araki-Lieb on sampled bipartitions
  {
    std::mt19937_64 rng(opt.seed + 77);
    for (int trial = 0; trial < 8; ++trial) {
      std::vector<std::size_t> a_rows, b_rows;
      for (std::size_t i = 0; i < G.rows; ++i) (rng() % 2 ? a_rows : b_rows).push_back(i);
      if (a_rows.empty() || b_rows.empty()) continue;
      std::vector<std::size_t> ab = a_rows;
      ab.insert(ab.end(), b_rows.begin(), b_rows.end());
      double sa = subsystem_entropy(G, a_rows);
      double sb = subsystem_entropy(G, b_rows);
      double sab = subsystem_entropy(G, ab);
      push("subadditivity", "trial " + std::to_string(trial), sab, sa + sb,
           sab <= sa + sb + opt.tol.entropy);
      push("araki-lieb", "trial " + std::to_string(trial), sab, std::abs(sa - sb),
           sab >= std::abs(sa - sb) - opt.tol.entropy);
    }
  }
  // dense-oracle cross-check on small subsystems
  {
    CosetState cs = encode_entangled_reference(scheme);
    double dimref = 1;
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < m && dimref <= opt.dense_oracle_dim; ++j) {
      keep.push_back(j);
      dimref *= spec.q.q;
    }
    if (!actives.empty()) {
      for (std::size_t qd : scheme.layout.party_qudits(actives[0])) {
        if (dimref * spec.q.q > opt.dense_oracle_dim) break;
        keep.push_back(m + qd);
        dimref *= spec.q.q;
      }
    }
    CheckRecord rec;
    rec.name = "rank-vs-dense";
    rec.subject = "subsystem of " + std::to_string(keep.size()) + " qudits";
    rec.expected = 0.0;
    rec.tolerance = opt.tol.entropy;
    try {
      double dense = von_neumann_entropy(partial_trace(cs, keep, opt.budgets), opt.budgets);
      double exact = subsystem_entropy(G, keep);
      rec.measured = std::abs(dense - exact);
      rec.pass = rec.measured <= opt.tol.entropy;
    } catch (const CapacityExceeded& e) {
      rec.skipped_reason = e.what();
    }
    rep.records.push_back(rec);
  }
  return rep;
}

SchemeVerdict verify_scheme(const BuiltScheme& scheme, const VerifyOptions& opt) {
  SchemeVerdict verdict;
  verdict.reports.push_back(check_recoverability(scheme, opt));
  verdict.reports.push_back(check_secrecy(scheme, opt));
  verdict.reports.push_back(cost_audit_report(scheme));
  verdict.reports.push_back(entropy_model_check(scheme, opt));
  verdict.costs = audit_costs(scheme);
  return verdict;
}

// ---------------------------------------------------------------------------
// mutations

Mutation mutation_from_name(const std::string& name) {
  if (name.rfind("zero-y", 0) == 0) return Mutation::ZeroYEntry;
  if (name == "dup-point") return Mutation::DuplicatePoint;
  if (name == "truncate-layer") return Mutation::TruncateLayer;
  if (name == "swap-d") return Mutation::SwapDEntries;
  if (name == "skip-ctrladd") return Mutation::SkipCtrlAdd;
  throw ConfigError("unknown mutation: " + name);
}

std::string mutation_name(Mutation m) {
  switch (m) {
    case Mutation::ZeroYEntry: return "zero-y";
    case Mutation::DuplicatePoint: return "dup-point";
    case Mutation::TruncateLayer: return "truncate-layer";
    case Mutation::SwapDEntries: return "swap-d";
    case Mutation::SkipCtrlAdd: return "skip-ctrladd";
  }
  return "?";
}

namespace {

// Recoverability check where states come from `enc_scheme` but plans come
// from `plan_scheme`; optionally drops the first generalized-CNOT step.
CheckReport tampered_recoverability(const BuiltScheme& plan_scheme,
                                    const BuiltScheme& enc_scheme, bool skip_ctrl,
                                    const VerifyOptions& opt) {
  CheckReport rep;
  rep.check = "recoverability";
  auto actives = active_parties(plan_scheme);
  auto family = spanning_secret_family(plan_scheme.spec.q, plan_scheme.spec.m, opt);
  const SparseState& secret = family[0];
  for (std::size_t d : plan_scheme.spec.d_list) {
    if (d > actives.size()) continue;
    for (const auto& D : pick_subsets(actives, d, opt, d)) {
      CheckRecord rec;
      rec.name = "fidelity(d=" + std::to_string(d) + ")";
      rec.subject = "D=" + set_str(D);
      rec.expected = 1.0;
      rec.tolerance = opt.tol.fidelity;
      try {
        auto sched = plan_recovery(plan_scheme, D);
        if (skip_ctrl) {
          for (std::size_t i = 0; i < sched.steps.size(); ++i) {
            if (sched.steps[i].kind == GateStep::Kind::CtrlAdd) {
              sched.steps.erase(sched.steps.begin() + i);
              break;
            }
          }
        }
        auto st = encode(enc_scheme, secret, Backend::Coset, opt.budgets);
        auto t = execute(sched, enc_scheme, st, opt.budgets);
        auto rho = reduced_on_out(t, opt.budgets);
        rec.measured = fidelity(rho, secret);
        double purity = rho.purity();
        rec.pass =
            rec.measured >= 1.0 - opt.tol.fidelity && purity >= 1.0 - opt.tol.fidelity;
      } catch (const CapacityExceeded& e) {
        rec.skipped_reason = e.what();
      } catch (const Error& e) {
        rec.pass = false;
        rec.subject += " error=";
        rec.subject += e.what();
      }
      rep.records.push_back(std::move(rec));
    }
  }
  return rep;
}

}  // namespace

SchemeVerdict verify_mutated(const BuiltScheme& pristine, Mutation mutation,
                             const VerifyOptions& opt,
                             std::optional<std::pair<std::size_t, std::size_t>> zero_y) {
  if (!pristine.assembly)
    throw ConfigError("mutations are defined for staircase schemes");
  const StaircaseAssembly& A = *pristine.assembly;

  SchemeVerdict verdict;
  switch (mutation) {
    case Mutation::ZeroYEntry: {
      StaircaseAssembly mut = A;
      if (zero_y) {
        auto [row, col] = *zero_y;
        if (col >= mut.ycols.size() || row >= mut.y_rows)
          throw ConfigError("zero-y cell out of range");
        mut.ycols[col][row] = YEntry{YEntry::Zero, 0};
      } else {
        bool done = false;
        for (std::size_t c = 1; c < mut.ycols.size() && !done; ++c) {
          for (std::size_t u = 0; u < mut.y_rows && !done; ++u) {
            if (mut.ycols[c][u].kind == YEntry::Random) {
              mut.ycols[c][u] = YEntry{YEntry::Zero, 0};
              done = true;
            }
          }
        }
      }
      BuiltScheme enc_scheme = build_from_assembly(pristine.spec, mut);
      verdict.reports.push_back(tampered_recoverability(pristine, enc_scheme, false, opt));
      break;
    }
    case Mutation::SwapDEntries: {
      StaircaseAssembly mut = A;
      // swap two carried symbols in the first column that has at least two
      std::size_t target = 0;
      for (std::size_t c = 1; c < mut.ycols.size(); ++c) {
        std::size_t z = mut.leading_zeros(c);
        if (mut.y_rows - z >= 2 && mut.ycols[c][z].kind == YEntry::Random) {
          target = c;
          break;
        }
      }
      std::size_t z = mut.leading_zeros(target);
      std::swap(mut.ycols[target][z], mut.ycols[target][z + 1]);
      BuiltScheme enc_scheme = build_from_assembly(pristine.spec, mut);
      verdict.reports.push_back(tampered_recoverability(pristine, enc_scheme, false, opt));
      break;
    }
    case Mutation::DuplicatePoint: {
      // bypass the distinctness check: overwrite the last V row with the
      // previous one and replan from the damaged scheme
      BuiltScheme damaged = pristine;
      auto asm2 = std::make_shared<StaircaseAssembly>(A);
      std::size_t last = asm2->V.rows - 1;
      for (std::size_t c = 0; c < asm2->V.cols; ++c)
        asm2->V.at(last, c) = asm2->V.at(last - 1, c);
      BuiltScheme enc_scheme = build_from_assembly(pristine.spec, *asm2);
      enc_scheme.assembly = asm2;
      verdict.reports.push_back(tampered_recoverability(enc_scheme, enc_scheme, false, opt));
      break;
    }
    case Mutation::TruncateLayer: {
      StaircaseAssembly mut = A;
      mut.ycols.pop_back();
      SchemeSpec spec = pristine.spec;
      BuiltScheme enc_scheme = build_from_assembly(spec, mut);
      verdict.reports.push_back(tampered_recoverability(enc_scheme, enc_scheme, false, opt));
      CostAudit audit = audit_costs(enc_scheme);
      CheckRecord rec;
      rec.name = "partial-share-bound";
      rec.subject = "after layer truncation";
      rec.measured = audit.partial_bound_ok ? 1.0 : 0.0;
      rec.expected = 1.0;
      rec.pass = audit.partial_bound_ok;
      CheckReport costs;
      costs.check = "costs";
      costs.records.push_back(rec);
      verdict.reports.push_back(costs);
      break;
    }
    case Mutation::SkipCtrlAdd: {
      verdict.reports.push_back(tampered_recoverability(pristine, pristine, true, opt));
      break;
    }
  }
  verdict.costs.pass = true;  // cost audit not part of the tamper verdict unless added above
  return verdict;
}

}  // namespace ceqss
