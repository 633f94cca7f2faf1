#include <cmath>
#include <random>

#include "ceqss/scheme.hpp"
#include "doctest.h"

using namespace ceqss;

namespace {

Word w(std::initializer_list<int> symbols) {
  Word out;
  for (int s : symbols) out.push_back(static_cast<char>(s));
  return out;
}

SparseState basis_secret(FieldModulus q, const std::vector<int>& symbols) {
  Word word;
  for (int s : symbols) word.push_back(static_cast<char>(s));
  return state_from_secret({{word, 1.0}}, q);
}

}  // namespace

TEST_CASE("derive_params: universal staircase k=3 n=5") {
  auto s = derive_params(Variant::StaircaseUniversal, 3, 5);
  // The floor prime 7 leaves x^4+x^2+1 vanishing on {2,3,4,5}, which makes
  // the d=4 recovery matrices singular for that accessed set (and 11, 13
  // have the same flaw for other sets); 17 is the first prime where the
  // default points x_i = i recover from every accessed set.
  CHECK(s.q.q == 17);
  CHECK(s.m == 6);
  CHECK(s.d_list == std::vector<std::size_t>{5, 4, 3});
  CHECK(s.a_list == std::vector<std::size_t>{2, 3, 6});
  CHECK(s.b_list == std::vector<std::size_t>{2, 1, 3});
}

TEST_CASE("derive_params: fixed staircase k=3 n=5 d=5") {
  auto s = derive_params(Variant::StaircaseFixed, 3, 5, 5);
  CHECK(s.q.q == 7);
  CHECK(s.m == 3);
  CHECK(s.d_list == std::vector<std::size_t>{5, 3});
}

TEST_CASE("derive_params: universal staircase k=2 n=3") {
  auto s = derive_params(Variant::StaircaseUniversal, 2, 3);
  CHECK(s.q.q == 5);
  CHECK(s.m == 2);
  CHECK(s.d_list == std::vector<std::size_t>{3, 2});
  CHECK(s.a_list == std::vector<std::size_t>{1, 2});
  CHECK(s.b_list == std::vector<std::size_t>{1, 1});
}

TEST_CASE("derive_params: concat variants and qts") {
  auto cf = derive_params(Variant::ConcatFixed, 3, 5, 5);
  CHECK(cf.q.q == 11);  // smallest prime > d+k-1 = 7
  CHECK(cf.m == 3);

  auto cu = derive_params(Variant::ConcatUniversal, 2, 3);
  CHECK(cu.q.q == 5);  // smallest prime > n+k-1 = 4
  CHECK(cu.m == 2);

  auto qts = derive_params(Variant::QTS, 2, 3);
  CHECK(qts.q.q == 3);
  CHECK(qts.m == 1);

  CHECK_THROWS_AS(derive_params(Variant::QTS, 2, 4), NoCloningViolation);
  CHECK_THROWS_AS(derive_params(Variant::StaircaseFixed, 3, 5, 5, 6), BadModulus);  // not prime
  CHECK_THROWS_AS(derive_params(Variant::StaircaseFixed, 3, 5, 5, 5), BadModulus);  // strict floor
  CHECK_NOTHROW(derive_params(Variant::StaircaseFixed, 3, 5, 5, 7));
  CHECK_NOTHROW(derive_params(Variant::QTS, 2, 3, 0, 3));  // floor met with equality
}

TEST_CASE("derive_ramp_params") {
  auto r = derive_ramp_params(3, 4, 1);
  CHECK(r.q.q == 5);
  CHECK(r.m == 2);
  CHECK(r.d_list == std::vector<std::size_t>{3});
  CHECK_THROWS_AS(derive_ramp_params(3, 5, 1), ConfigError);  // n > t+z
}

TEST_CASE("fixed staircase Y template matches the printed matrix") {
  auto spec = derive_params(Variant::StaircaseFixed, 3, 5, 5);
  auto A = build_staircase_assembly(spec);
  CHECK(A.y_to_string() ==
        "s1 0 0\n"
        "s2 0 0\n"
        "s3 r1 r2\n"
        "r1 r3 r5\n"
        "r2 r4 r6\n");
  CHECK(A.V == vandermonde({1, 2, 3, 4, 5}, 5, spec.q));
}

TEST_CASE("universal staircase Y template matches the printed matrix") {
  auto spec = derive_params(Variant::StaircaseUniversal, 3, 5);
  auto A = build_staircase_assembly(spec);
  CHECK(A.y_to_string() ==
        "s1 s4 0 0 0 0\n"
        "s2 s5 r1 0 0 0\n"
        "s3 s6 r3 r2 r4 r6\n"
        "r1 r3 r5 r7 r9 r11\n"
        "r2 r4 r6 r8 r10 r12\n");
}

TEST_CASE("worked m=3 universal example template") {
  auto A = example_universal_m3_assembly(FieldModulus(7));
  CHECK(A.y_to_string() ==
        "s1 0 0\n"
        "s2 r1 0\n"
        "s3 r2 r3\n"
        "r1 r3 r5\n"
        "r2 r4 r6\n");
}

TEST_CASE("degenerate fixed staircase d=k reduces to one polynomial column") {
  auto spec = derive_params(Variant::StaircaseFixed, 2, 2, 2);
  auto A = build_staircase_assembly(spec);
  CHECK(A.ycols.size() == 1);
  CHECK(A.y_to_string() == "s1\nr1\n");
}

TEST_CASE("cleve ((2,3)) encoding over F_3") {
  auto spec = derive_params(Variant::QTS, 2, 3);
  auto scheme = build_scheme(spec);
  CHECK(scheme.layout.total_qudits == 3);
  CHECK(scheme.enc.n_random == 1);

  auto st = encode(scheme, basis_secret(spec.q, {0}), Backend::Sparse);
  REQUIRE(st.sparse);
  CHECK(st.sparse->terms.size() == 3);
  CHECK(std::abs(st.sparse->terms.at(w({0, 0, 0})) - Amp(1 / std::sqrt(3.0), 0)) < 1e-12);
  CHECK(st.sparse->terms.count(w({1, 1, 1})) == 1);
  CHECK(st.sparse->terms.count(w({2, 2, 2})) == 1);
}

TEST_CASE("ogawa ((3,4;1)) encoding matches the printed polynomial forms") {
  auto spec = derive_ramp_params(3, 4, 1);
  auto scheme = build_scheme(spec);
  CHECK(scheme.layout.total_qudits == 4);
  // u_j = s1 + s2 x_j + r x_j^2 with x = 1..4 mod 5
  std::vector<std::vector<Fel>> expect = {
      {1, 1, 1}, {1, 2, 4}, {1, 3, 4}, {1, 4, 1}};
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(scheme.enc.Ms.at(j, 0) == expect[j][0]);
    CHECK(scheme.enc.Ms.at(j, 1) == expect[j][1]);
    CHECK(scheme.enc.Mr.at(j, 0) == expect[j][2]);
  }
}

TEST_CASE("staircase encodings expand to the expected term counts") {
  auto spec = derive_params(Variant::StaircaseFixed, 3, 5, 5);
  auto scheme = build_scheme(spec);
  auto st = encode(scheme, basis_secret(spec.q, {1, 2, 3}), Backend::Sparse);
  REQUIRE(st.sparse);
  CHECK(st.sparse->terms.size() == 117649);  // 7^6
  CHECK(st.sparse->norm2() == doctest::Approx(1.0));
}

TEST_CASE("universal staircase coset encoding: rank 12, 30 qudits") {
  auto spec = derive_params(Variant::StaircaseUniversal, 3, 5);
  auto scheme = build_scheme(spec);
  auto st = encode(scheme, basis_secret(spec.q, {1, 0, 0, 0, 0, 0}), Backend::Coset);
  REQUIRE(st.coset);
  CHECK(st.coset->n_qudits == 30);
  CHECK(st.coset->W.rows == 12);
  Budgets b;
  CHECK_THROWS_AS(to_sparse(*st.coset, b), CapacityExceeded);  // 7^12 over budget
}

TEST_CASE("template evaluation equals direct polynomial evaluation") {
  std::mt19937_64 rng(71);
  for (auto spec : {derive_params(Variant::StaircaseFixed, 3, 5, 4),
                    derive_params(Variant::StaircaseUniversal, 3, 5)}) {
    auto A = build_staircase_assembly(spec);
    auto scheme = build_from_assembly(spec, A);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Fel> s(spec.m), r(A.n_random);
      for (auto& x : s) x = static_cast<Fel>(rng() % spec.q.q);
      for (auto& x : r) x = static_cast<Fel>(rng() % spec.q.q);
      // via the linear encoding
      std::vector<Fel> full(spec.m + A.n_random);
      std::copy(s.begin(), s.end(), full.begin());
      std::copy(r.begin(), r.end(), full.begin() + spec.m);
      FMatrix G = scheme.enc.form_matrix();
      std::vector<Fel> words = mat_vec(G, full);
      // direct row-by-row polynomial evaluation of C = VY
      for (std::size_t p = 0; p < A.n_parties; ++p) {
        for (std::size_t c = 0; c < A.ycols.size(); ++c) {
          Fel acc = 0;
          for (std::size_t u = 0; u < A.y_rows; ++u) {
            const YEntry& e = A.ycols[c][u];
            if (e.kind == YEntry::Zero) continue;
            Fel val = e.kind == YEntry::Secret ? s[e.idx] : r[e.idx];
            acc = fadd(acc, fmul(A.V.at(p, u), val, spec.q), spec.q);
          }
          CHECK(acc == words[p * A.ycols.size() + c]);
        }
      }
    }
  }
}

TEST_CASE("share sizes equal the secret size for threshold variants") {
  for (auto spec : {derive_params(Variant::QTS, 2, 3),
                    derive_params(Variant::StaircaseFixed, 3, 5, 5),
                    derive_params(Variant::StaircaseUniversal, 3, 5),
                    derive_params(Variant::ConcatFixed, 2, 3, 3),
                    derive_params(Variant::ConcatUniversal, 2, 3)}) {
    auto scheme = build_scheme(spec);
    for (std::size_t p = 0; p < scheme.layout.n_parties; ++p) {
      if (scheme.layout.dropped[p]) continue;
      CHECK(scheme.layout.share_size(p) == spec.m);
    }
  }
}

TEST_CASE("concat fixed k=2 n=3 d=3 layering") {
  auto spec = derive_params(Variant::ConcatFixed, 2, 3, 3);
  auto scheme = build_scheme(spec);
  REQUIRE(scheme.concat);
  CHECK(scheme.concat->layers.size() == 2);
  CHECK(scheme.concat->layers[0].t == 3);
  CHECK(scheme.concat->layers[0].z == 1);
  CHECK(scheme.concat->layers[1].t == 2);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(scheme.layout.layers[p][0].size() == 1);
    CHECK(scheme.layout.layers[p][1].size() == 1);
  }
  // layer-1 ramp has 4 shares: 3 party + 1 surplus, no environment
  std::size_t surplus = 0;
  for (const auto& sh : scheme.concat->layers[0].shares)
    if (sh.role == ConcatLayerShare::Role::Surplus) ++surplus;
  CHECK(surplus == 1);
  CHECK(scheme.layout.environment.empty());
}

TEST_CASE("concat universal k=2 n=3 layering") {
  auto spec = derive_params(Variant::ConcatUniversal, 2, 3);
  auto scheme = build_scheme(spec);
  REQUIRE(scheme.concat);
  CHECK(spec.m == 2);
  CHECK(scheme.concat->layers.size() == 2);
  CHECK(scheme.concat->layers[0].t == 3);  // d_1 = 3
  CHECK(scheme.concat->layers[1].t == 2);  // d_2 = 2
  for (std::size_t p = 0; p < 3; ++p) CHECK(scheme.layout.share_size(p) == 2);
}

TEST_CASE("encoding is linear in the secret") {
  auto spec = derive_params(Variant::QTS, 2, 3);
  auto scheme = build_scheme(spec);
  Amp alpha(0.6, 0.0), beta(0.0, 0.8);
  auto mixed = encode(scheme,
                      state_from_secret({{w({0}), alpha}, {w({1}), beta}}, spec.q),
                      Backend::Sparse);
  auto s0 = encode(scheme, basis_secret(spec.q, {0}), Backend::Sparse);
  auto s1 = encode(scheme, basis_secret(spec.q, {1}), Backend::Sparse);
  for (const auto& [word, amp] : mixed.sparse->terms) {
    Amp expect = 0.0;
    auto it0 = s0.sparse->terms.find(word);
    if (it0 != s0.sparse->terms.end()) expect += alpha * it0->second;
    auto it1 = s1.sparse->terms.find(word);
    if (it1 != s1.sparse->terms.end()) expect += beta * it1->second;
    CHECK(std::abs(amp - expect) < 1e-12);
  }
}

TEST_CASE("drop_shares bookkeeping") {
  auto spec = derive_params(Variant::StaircaseFixed, 3, 5, 4);
  auto scheme = build_scheme(spec);
  drop_shares(scheme, {4});
  CHECK(scheme.layout.dropped[4]);
  CHECK(scheme.layout.active_parties() == 4);
  CHECK(scheme.layout.environment.size() == 2);  // m = 2 qudits moved out
  CHECK_THROWS_AS(drop_shares(scheme, {1, 2}), AccessStructureViolation);
  drop_shares(scheme, {});  // no-op
  CHECK(scheme.layout.active_parties() == 4);
}

TEST_CASE("universal staircase built for n < 2k-1 drops the extra shares") {
  auto spec = derive_params(Variant::StaircaseUniversal, 3, 4);
  auto scheme = build_scheme(spec);
  CHECK(scheme.layout.n_parties == 5);
  CHECK(scheme.layout.active_parties() == 4);
  CHECK(scheme.layout.dropped[4]);
}

TEST_CASE("entangled reference encoding") {
  auto spec = derive_params(Variant::QTS, 2, 3);
  auto scheme = build_scheme(spec);
  auto cs = encode_entangled_reference(scheme);
  CHECK(cs.n_qudits == 4);  // 1 reference + 3 shares
  auto sp = to_sparse(cs);
  CHECK(sp.norm2() == doctest::Approx(1.0));
  // tracing out the shares leaves the reference maximally mixed
  auto rho = partial_trace(cs, {0});
  for (int x = 0; x < 3; ++x)
    CHECK(std::abs(rho.entry(Word(1, char(x)), Word(1, char(x))) - Amp(1.0 / 3, 0)) < 1e-9);
}
