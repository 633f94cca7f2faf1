#include "ceqss/verify.hpp"
#include "doctest.h"

using namespace ceqss;

namespace {
VerifyOptions quick_opts() {
  VerifyOptions opt;
  opt.subset_cap = 64;
  opt.family_basis_sample = 4;
  opt.family_pair_sample = 2;
  return opt;
}
}  // namespace

TEST_CASE("cleve ((2,3)) passes the full verifier") {
  auto scheme = build_scheme(derive_params(Variant::QTS, 2, 3));
  auto verdict = verify_scheme(scheme, quick_opts());
  for (const auto& rep : verdict.reports) {
    INFO(rep.check);
    CHECK(rep.all_pass());
  }
  CHECK(verdict.costs.pass);
}

TEST_CASE("fixed ((3,5,5)) passes the full verifier") {
  auto scheme = build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  auto verdict = verify_scheme(scheme, quick_opts());
  for (const auto& rep : verdict.reports) {
    INFO(rep.check);
    for (const auto& rec : rep.records) {
      if (!rec.skipped() && !rec.pass) {
        INFO(rec.name << " " << rec.subject << " measured=" << rec.measured);
      }
    }
    CHECK(rep.all_pass());
  }
  CHECK(verdict.costs.pass);
  // CC rows: d=5 measured 5, d=3 measured 9
  REQUIRE(verdict.costs.rows.size() == 2);
  CHECK(verdict.costs.rows[0].measured == 5);
  CHECK(verdict.costs.rows[0].saturates);
  CHECK(verdict.costs.rows[1].measured == 9);
}

TEST_CASE("worked m=3 universal: costs flagged suboptimal at d=4, chain strict") {
  auto scheme = build_example_universal_m3();
  auto audit = audit_costs(scheme);
  REQUIRE(audit.rows.size() == 3);
  CHECK(audit.rows[0].measured == 5);   // d=5
  CHECK(audit.rows[1].measured == 8);   // d=4, bound 6
  CHECK(audit.rows[1].bound_num == 12);
  CHECK(audit.rows[1].bound_den == 2);
  CHECK(audit.rows[1].meets_bound);
  CHECK(!audit.rows[1].saturates);
  CHECK(audit.rows[2].measured == 9);   // d=3
  CHECK(audit.strictly_decreasing);
  CHECK(audit.partial_bound_ok);
  CHECK(audit.pass);
  REQUIRE(!audit.notes.empty());
  CHECK(audit.notes[0].find("d=4") != std::string::npos);
}

TEST_CASE("universal m=6 staircase audit saturates the bound everywhere") {
  auto scheme = build_scheme(derive_params(Variant::StaircaseUniversal, 3, 5));
  auto audit = audit_costs(scheme);
  REQUIRE(audit.rows.size() == 3);
  for (const auto& row : audit.rows) CHECK(row.saturates);
  CHECK(audit.rows[0].measured == 10);
  CHECK(audit.rows[1].measured == 12);
  CHECK(audit.rows[2].measured == 18);
  CHECK(audit.strictly_decreasing);
  CHECK(audit.pass);
}

TEST_CASE("secrecy certificate holds for sound schemes") {
  for (auto scheme : {build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5)),
                      build_example_universal_m3(17),
                      build_scheme(derive_params(Variant::ConcatFixed, 2, 3, 3)),
                      build_scheme(derive_params(Variant::ConcatUniversal, 2, 3))}) {
    auto rep = check_secrecy(scheme, quick_opts());
    INFO(variant_name(scheme.spec.variant));
    CHECK(rep.all_pass());
    CHECK(rep.records.size() > 0);
  }
}

TEST_CASE("the worked m=3 example leaks one qudit to parties {3,5} at q=7") {
  // x^3 = 1 on {1,2,4} mod 7, so shifting s1 while adjusting r1, r4 is
  // invisible to parties 1,2,4: their complement {3,5} must therefore hold
  // information on the secret. The verifier has to catch this.
  auto scheme = build_example_universal_m3();  // q = 7 as printed
  auto rep = check_secrecy(scheme, quick_opts());
  std::size_t cert_failures = 0;
  for (const auto& rec : rep.records) {
    if (rec.name == "independence-certificate" && !rec.pass) {
      ++cert_failures;
      CHECK(rec.subject == "B={3,5}");
    }
  }
  CHECK(cert_failures == 1);

  // information-theoretic confirmation: I(R:S_B) = 1 qudit
  auto erep = entropy_model_check(scheme, quick_opts());
  bool found = false;
  for (const auto& rec : erep.records) {
    if (rec.name == "I(R:S_B)" && rec.subject == "B={3,5}") {
      found = true;
      CHECK(rec.measured == doctest::Approx(1.0));
      CHECK(!rec.pass);
    }
  }
  CHECK(found);
}

TEST_CASE("entropy model on ((2,3)) q=3") {
  auto scheme = build_scheme(derive_params(Variant::QTS, 2, 3));
  auto rep = entropy_model_check(scheme, quick_opts());
  CHECK(rep.all_pass());
  bool saw_share = false, saw_auth = false, saw_unauth = false, saw_dense = false;
  for (const auto& rec : rep.records) {
    if (rec.name == "S(share)") {
      saw_share = true;
      CHECK(rec.measured == doctest::Approx(1.0));  // each share is 1 maximally mixed qutrit
    }
    if (rec.name == "I(R:S_A)") {
      saw_auth = true;
      CHECK(rec.measured == doctest::Approx(2.0));
    }
    if (rec.name == "I(R:S_B)") {
      saw_unauth = true;
      CHECK(rec.measured == doctest::Approx(0.0));
    }
    if (rec.name == "rank-vs-dense" && !rec.skipped()) saw_dense = true;
  }
  CHECK(saw_share);
  CHECK(saw_auth);
  CHECK(saw_unauth);
  CHECK(saw_dense);
}

TEST_CASE("entropy model on concat fixed ((2,3,3)) q=5") {
  auto scheme = build_scheme(derive_params(Variant::ConcatFixed, 2, 3, 3));
  auto rep = entropy_model_check(scheme, quick_opts());
  for (const auto& rec : rep.records) {
    if (!rec.skipped() && !rec.pass) {
      INFO(rec.name << " " << rec.subject << " measured=" << rec.measured);
    }
  }
  CHECK(rep.all_pass());
  for (const auto& rec : rep.records) {
    if (rec.name == "I(R:H_DD)") CHECK(rec.measured == doctest::Approx(4.0));
  }
}

TEST_CASE("each canned mutation trips at least one check") {
  auto scheme = build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  for (Mutation m : {Mutation::ZeroYEntry, Mutation::DuplicatePoint,
                     Mutation::TruncateLayer, Mutation::SwapDEntries,
                     Mutation::SkipCtrlAdd}) {
    auto verdict = verify_mutated(scheme, m, quick_opts());
    INFO(mutation_name(m));
    CHECK(!verdict.all_pass());
  }
}

TEST_CASE("a share leaking s1 verbatim fails the secrecy check") {
  auto scheme = build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  // overwrite party 1's last qudit with a verbatim copy of s1
  std::size_t qd = scheme.layout.party_qudits(0).back();
  for (std::size_t j = 0; j < scheme.enc.m_secret; ++j) scheme.enc.Ms.at(qd, j) = j == 0;
  for (std::size_t j = 0; j < scheme.enc.n_random; ++j) scheme.enc.Mr.at(qd, j) = 0;
  auto rep = check_secrecy(scheme, quick_opts());
  std::size_t failures = 0;
  double worst = 0;
  for (const auto& rec : rep.records) {
    if (rec.skipped() || rec.pass) continue;
    ++failures;
    if (rec.name == "family-entrywise") worst = std::max(worst, rec.measured);
  }
  CHECK(failures > 0);
  CHECK(worst > 0.01);  // O(1) deviation, not rounding noise
}

TEST_CASE("recoverability report for the m=6 universal staircase") {
  auto scheme = build_scheme(derive_params(Variant::StaircaseUniversal, 3, 5));
  auto rep = check_recoverability(scheme, quick_opts());
  CHECK(rep.all_pass());
  // 16 accessed sets x 3 probe secrets
  std::size_t fid_records = 0;
  for (const auto& rec : rep.records)
    if (rec.name.rfind("fidelity", 0) == 0) ++fid_records;
  CHECK(fid_records == 48);
}

TEST_CASE("the ramp demo verifies cleanly at its own thresholds") {
  auto scheme = build_scheme(derive_ramp_params(3, 4, 1));
  auto verdict = verify_scheme(scheme, quick_opts());
  for (const auto& rep : verdict.reports) {
    INFO(rep.check);
    CHECK(rep.all_pass());
  }
  CHECK(verdict.costs.pass);
}
