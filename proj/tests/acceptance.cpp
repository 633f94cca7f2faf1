// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// The two worked ((3,5,*)) examples ship with q = 7, where F_7* contains
// zero-sum point subsets that make some accessed sets provably unrecoverable
// (see notes in the README). Criteria that need a sound universal scheme use
// the admissible modulus picked by derive_params; the q = 7 instances are
// still exercised where the printed worked-example numbers apply, and the
// suite additionally asserts that the verifier detects their defective sets.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "ceqss/report.hpp"

using namespace ceqss;

namespace {

int g_failures = 0;

struct Criterion {
  std::string label;
  std::chrono::steady_clock::time_point start;
  double limit_s;
  bool ok = true;
  std::string detail;

  Criterion(std::string l, double limit) : label(std::move(l)), limit_s(limit) {
    start = std::chrono::steady_clock::now();
  }
  void fail(const std::string& why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void require(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
  void finish() {
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > limit_s) fail("runtime " + std::to_string(secs) + "s over limit");
    std::printf("%-12s %s (%.1fs)%s%s\n", label.c_str(), ok ? "PASS" : "FAIL", secs,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

Word word_of(std::initializer_list<int> symbols) {
  Word w;
  for (int s : symbols) w.push_back(static_cast<char>(s));
  return w;
}

SparseState basis_secret(FieldModulus q, const std::vector<int>& symbols) {
  Word w;
  for (int s : symbols) w.push_back(static_cast<char>(s));
  return state_from_secret({{w, 1.0}}, q);
}

SparseState random_secret(FieldModulus q, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t space = 1;
  for (std::size_t i = 0; i < m && space < 4; ++i) space *= q.q;
  std::map<Word, Amp> amps;
  while (amps.size() < std::min<std::size_t>(4, space)) {
    Word w(m, 0);
    for (auto& c : w) c = static_cast<char>(rng() % q.q);
    amps[w] = Amp(std::cos(double(rng() % 512)), std::sin(double(rng() % 512)));
  }
  return state_from_secret(amps, q);
}

double roundtrip(const BuiltScheme& scheme, const SparseState& secret,
                 const std::vector<std::size_t>& D, Backend backend, double* purity = nullptr,
                 Transcript* transcript_out = nullptr) {
  auto st = encode(scheme, secret, backend);
  auto res = recover(scheme, st, D);
  auto rho = reduced_on_out(res.transcript);
  if (purity) *purity = rho.purity();
  if (transcript_out) *transcript_out = res.transcript;
  return fidelity(rho, secret);
}

double sparse_term_deviation(const SparseState& a, const SparseState& b) {
  double worst = 0;
  for (const auto& [w, amp] : a.terms) {
    auto it = b.terms.find(w);
    Amp other = it == b.terms.end() ? Amp(0, 0) : it->second;
    worst = std::max(worst, std::abs(amp - other));
  }
  for (const auto& [w, amp] : b.terms)
    if (!a.terms.count(w)) worst = std::max(worst, std::abs(amp));
  return worst;
}

// ---------------------------------------------------------------------------

void criterion1() {
  Criterion c("criterion 1", 1.0);
  FieldModulus q7(7);
  FMatrix V = vandermonde({1, 2, 3, 4, 5}, 5, q7);
  FMatrix printed = FMatrix::from_rows({{1, 1, 1, 1, 1},
                                        {1, 2, 4, 1, 2},
                                        {1, 3, 2, 6, 4},
                                        {1, 4, 2, 1, 4},
                                        {1, 5, 4, 6, 2}},
                                       q7);
  c.require(V == printed, "vandermonde([1..5],5,7) differs from the printed matrix");

  auto fixed = build_staircase_assembly(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  c.require(fixed.y_to_string() ==
                "s1 0 0\ns2 0 0\ns3 r1 r2\nr1 r3 r5\nr2 r4 r6\n",
            "fixed d=5 Y template mismatch");
  auto uni = build_staircase_assembly(derive_params(Variant::StaircaseUniversal, 3, 5));
  c.require(uni.y_to_string() ==
                "s1 s4 0 0 0 0\ns2 s5 r1 0 0 0\ns3 s6 r3 r2 r4 r6\n"
                "r1 r3 r5 r7 r9 r11\nr2 r4 r6 r8 r10 r12\n",
            "universal k=3 Y template mismatch");
  c.finish();
}

void criterion2() {
  Criterion c("criterion 2", 60.0);
  auto scheme = build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  c.require(scheme.spec.q.q == 7 && scheme.spec.m == 3, "expected q=7, m=3");

  std::vector<SparseState> secrets = {
      basis_secret(scheme.spec.q, {1, 2, 3}),
      state_from_secret({{word_of({0, 0, 0}), 1.0}, {word_of({6, 5, 4}), 1.0}}, scheme.spec.q),
      random_secret(scheme.spec.q, 3, 42)};

  std::vector<std::vector<std::size_t>> sets = {{0, 1, 2, 3, 4}};
  for (const auto& comb : all_subsets(5, 3)) sets.push_back(comb);
  c.require(sets.size() == 11, "expected 11 accessed sets");

  std::size_t checked = 0;
  for (const auto& D : sets) {
    for (const auto& secret : secrets) {
      auto st = encode(scheme, secret, Backend::Sparse);
      if (st.sparse->terms.size() != 117649 * secret.terms.size()) {
        c.fail("sparse expansion is not 117649 terms per branch");
        break;
      }
      auto res = recover(scheme, st, D);
      auto rho = reduced_on_out(res.transcript);
      double f = fidelity(rho, secret);
      double purity = rho.purity();
      if (f < 1.0 - 1e-9 || purity < 1.0 - 1e-9) {
        std::ostringstream os;
        os << "fidelity " << f << " purity " << purity << " at |D|=" << D.size();
        c.fail(os.str());
      }
      ++checked;
    }
  }
  c.require(checked == 33, "expected 33 round trips");
  c.require(communication_cost(scheme, 5) == 5, "CC(5) != 5");
  c.require(communication_cost(scheme, 3) == 9, "CC(3) != 9");
  c.finish();
}

void criterion3() {
  Criterion c("criterion 3", 60.0);
  for (std::uint32_t q : {7u, 17u}) {
    auto scheme = build_example_universal_m3(q);
    auto audit = audit_costs(scheme);
    if (audit.rows.size() != 3 || audit.rows[0].measured != 5 || audit.rows[1].measured != 8 ||
        audit.rows[2].measured != 9) {
      c.fail("measured CC != (9,8,5) at q=" + std::to_string(q));
      continue;
    }
    c.require(audit.strictly_decreasing, "chain not strictly decreasing");
    c.require(audit.rows[1].meets_bound && !audit.rows[1].saturates,
              "d=4 not flagged above the bound");
    bool noted = false;
    for (const auto& note : audit.notes)
      if (note.find("d=4") != std::string::npos) noted = true;
    c.require(noted, "missing audit note at d=4");
  }
  c.finish();
}

void criterion4() {
  Criterion c("criterion 4", 120.0);
  auto scheme = build_scheme(derive_params(Variant::StaircaseUniversal, 3, 5));
  auto secret = random_secret(scheme.spec.q, 6, 4242);

  std::map<std::size_t, std::size_t> expected_sends = {{3, 6}, {4, 3}, {5, 2}};
  std::size_t sets = 0;
  for (std::size_t d : {3u, 4u, 5u}) {
    for (const auto& D : all_subsets(5, d)) {
      double purity = 0;
      Transcript t;
      double f = roundtrip(scheme, secret, D, Backend::Coset, &purity, &t);
      if (f < 1.0 - 1e-9 || purity < 1.0 - 1e-9) c.fail("imperfect recovery at some D");
      for (const auto& [party, count] : t.qudits_received)
        if (count != expected_sends[d]) c.fail("per-party send != a_i at d=" + std::to_string(d));
      ++sets;
    }
  }
  c.require(sets == 16, "expected 16 accessed sets");
  c.require(communication_cost(scheme, 3) == 18, "CC(3) != 18");
  c.require(communication_cost(scheme, 4) == 12, "CC(4) != 12");
  c.require(communication_cost(scheme, 5) == 10, "CC(5) != 10");
  auto audit = audit_costs(scheme);
  for (const auto& row : audit.rows)
    c.require(row.saturates, "bound not saturated at d=" + std::to_string(row.d));
  c.finish();
}

void criterion5() {
  Criterion c("criterion 5", 600.0);
  VerifyOptions opt;
  opt.family_basis_sample = 8;
  opt.family_pair_sample = 4;

  struct Subject {
    std::string name;
    BuiltScheme scheme;
  };
  std::vector<Subject> subjects;
  subjects.push_back({"fixed-3-5-5", build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5))});
  subjects.push_back({"universal-m3(q=17)", build_example_universal_m3(17)});
  subjects.push_back(
      {"universal-m6", build_scheme(derive_params(Variant::StaircaseUniversal, 3, 5))});
  subjects.push_back(
      {"concat-fixed-2-3-3", build_scheme(derive_params(Variant::ConcatFixed, 2, 3, 3))});
  subjects.push_back(
      {"concat-universal-2-3", build_scheme(derive_params(Variant::ConcatUniversal, 2, 3))});

  for (const auto& sub : subjects) {
    auto rep = check_secrecy(sub.scheme, opt);
    if (!rep.all_pass()) {
      for (const auto& rec : rep.records)
        if (!rec.skipped() && !rec.pass)
          c.fail(sub.name + ": " + rec.name + " " + rec.subject);
    }
  }

  // the q=7 worked example must be *detected* as leaky at B={3,5}
  {
    auto leaky = build_example_universal_m3(7);
    auto rep = check_secrecy(leaky, opt);
    bool detected = false;
    for (const auto& rec : rep.records)
      if (rec.name == "independence-certificate" && !rec.pass && rec.subject == "B={3,5}")
        detected = true;
    c.require(detected, "verifier missed the printed example's q=7 leak at B={3,5}");
  }

  // canned mutations must each trip at least one check
  auto pristine = build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  for (Mutation m : {Mutation::ZeroYEntry, Mutation::DuplicatePoint, Mutation::TruncateLayer,
                     Mutation::SwapDEntries, Mutation::SkipCtrlAdd}) {
    auto verdict = verify_mutated(pristine, m, opt);
    c.require(!verdict.all_pass(), "mutation " + mutation_name(m) + " went undetected");
  }
  c.finish();
}

void criterion6() {
  Criterion c("criterion 6", 60.0);
  for (Variant v : {Variant::ConcatFixed, Variant::ConcatUniversal}) {
    auto spec = v == Variant::ConcatFixed ? derive_params(v, 2, 3, 3) : derive_params(v, 2, 3);
    auto scheme = build_scheme(spec);
    c.require(spec.q.q == 5, "expected q=5");
    c.require(spec.m == 2, "expected m=2");
    for (std::size_t p = 0; p < 3; ++p)
      c.require(scheme.layout.share_size(p) == spec.m, "w_j != m");
    c.require(communication_cost(scheme, 2) == 4, "CC(k) != km");
    c.require(communication_cost(scheme, 3) == 3, "CC(3) != dm/(d-k+1)");

    // layer-1 marginal vs a standalone ramp encoding of the same secret
    auto secret = basis_secret(spec.q, {3, 1});
    auto concat_state = encode(scheme, secret, Backend::Sparse);
    std::vector<std::size_t> layer1;
    for (std::size_t p = 0; p < 3; ++p)
      for (std::size_t qd : scheme.layout.layers[p][0]) layer1.push_back(qd);
    auto rho_concat = partial_trace(*concat_state.sparse, layer1);

    auto ramp = build_scheme(derive_ramp_params(3, 4, 1, 5));
    auto ramp_state = encode(ramp, secret, Backend::Sparse);
    auto rho_ramp = partial_trace(*ramp_state.sparse, {0, 1, 2});
    double dev = max_entry_deviation(rho_concat, rho_ramp);
    c.require(dev <= 1e-9, "layer-1 marginal deviates " + std::to_string(dev) + " for " +
                               variant_name(v));
  }
  c.finish();
}

void criterion7() {
  Criterion c("criterion 7", 60.0);
  VerifyOptions opt;
  opt.dense_oracle_dim = 256;
  for (auto spec : {derive_params(Variant::QTS, 2, 3), derive_params(Variant::ConcatFixed, 2, 3, 3)}) {
    auto scheme = build_scheme(spec);
    auto rep = entropy_model_check(scheme, opt);
    bool saw_auth = false, saw_unauth = false, saw_partial = false, saw_share = false;
    for (const auto& rec : rep.records) {
      if (rec.skipped()) continue;
      if (!rec.pass) c.fail(variant_name(spec.variant) + ": " + rec.name + " " + rec.subject);
      if (rec.name == "I(R:S_A)") saw_auth = true;
      if (rec.name == "I(R:S_B)") saw_unauth = true;
      if (rec.name == "I(R:H_DD)") saw_partial = true;
      if (rec.name == "S(share)") saw_share = true;
    }
    c.require(saw_auth && saw_unauth && saw_partial && saw_share,
              "entropy model skipped a required family");
  }
  c.finish();
}

void criterion8() {
  Criterion c("criterion 8", 300.0);
  struct Case {
    BuiltScheme scheme;
    std::vector<std::vector<std::size_t>> sets;
  };
  std::vector<Case> cases;
  cases.push_back({build_scheme(derive_params(Variant::QTS, 2, 3)), all_subsets(3, 2)});
  cases.push_back({build_scheme(derive_ramp_params(3, 4, 1)), all_subsets(4, 3)});
  cases.push_back({build_scheme(derive_params(Variant::ConcatFixed, 2, 3, 3)),
                   {{0, 1, 2}, {0, 1}, {1, 2}}});
  cases.push_back({build_scheme(derive_params(Variant::ConcatUniversal, 2, 3)),
                   {{0, 1, 2}, {0, 2}}});
  cases.push_back({build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5)),
                   {{0, 1, 2, 3, 4}, {1, 3, 4}}});
  cases.push_back({build_example_universal_m3(7), {{0, 1, 2, 3, 4}, {0, 1, 2, 3}, {0, 1, 2}}});

  for (const auto& kase : cases) {
    const auto& scheme = kase.scheme;
    auto secret = random_secret(scheme.spec.q, scheme.spec.m, 777);
    for (const auto& D : kase.sets) {
      auto sched = plan_recovery(scheme, D);
      SparseState sp = *encode(scheme, secret, Backend::Sparse).sparse;
      CosetState cs = *encode(scheme, secret, Backend::Coset).coset;
      double dev = sparse_term_deviation(sp, to_sparse(cs));
      for (const auto& step : sched.steps) {
        if (step.kind == GateStep::Kind::LinearMap) {
          sp = apply_linear(sp, step.matrix, step.indices);
          cs = apply_linear(cs, step.matrix, step.indices);
        } else {
          sp = apply_ctrl_add(sp, step.alpha, step.control, step.target);
          cs = apply_ctrl_add(cs, step.alpha, step.control, step.target);
        }
        dev = std::max(dev, sparse_term_deviation(sp, to_sparse(cs)));
      }
      if (dev > 1e-9) c.fail("state deviation " + std::to_string(dev));
      auto rho_sp = partial_trace(sp, sched.secret_out);
      auto rho_cs = partial_trace(cs, sched.secret_out);
      double rdev = max_entry_deviation(rho_sp, rho_cs);
      if (rdev > 1e-9) c.fail("reduced operator deviation " + std::to_string(rdev));
    }
  }
  c.finish();
}

void criterion9() {
  Criterion c("criterion 9", 60.0);
  std::size_t total_checks = 0;
  for (const auto& name : demo_names()) {
    auto scheme = build_demo(name);
    auto audit = audit_costs(scheme);
    if (!audit.partial_bound_ok) c.fail(name + ": partial-share bound violated");
    total_checks += audit.partial_checks;
  }
  c.require(total_checks > 0, "no (D, F) pairs enumerated");
  std::ostringstream os;
  os << total_checks << " (D,F) pairs";
  c.detail = c.detail.empty() ? os.str() : c.detail;
  c.finish();
}

}  // namespace

int main() {
  std::printf("acceptance suite (tolerances pinned in code)\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures) std::printf("%d criterion(s) FAILED\n", g_failures);
  else std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
