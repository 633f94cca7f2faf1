#include "ceqss/scheme.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace ceqss {

namespace {

std::size_t lcm_upto(std::size_t k) {
  std::size_t acc = 1;
  for (std::size_t i = 2; i <= k; ++i) acc = std::lcm(acc, i);
  return acc;
}

std::vector<Fel> default_points(std::size_t count, FieldModulus q, bool allow_zero) {
  std::vector<Fel> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    Fel x = static_cast<Fel>((i + 1) % q.q);
    if (x == 0 && !allow_zero) throw BadEvaluationPoints("not enough nonzero points in F_q");
    pts[i] = x;
  }
  // distinctness needs count <= q
  if (count > q.q) throw BadEvaluationPoints("more points than field elements");
  return pts;
}

void check_threshold_args(std::size_t k, std::size_t n) {
  if (k < 2) throw ConfigError("threshold k must be at least 2");
  if (n < k) throw ConfigError("need n >= k parties");
  if (n > 2 * k - 1)
    throw NoCloningViolation("n > 2k-1 admits two disjoint authorized sets");
}

std::uint32_t pick_prime(std::uint64_t floor, bool strict, std::uint32_t q_override) {
  if (q_override == 0)
    return strict ? smallest_prime_greater_than(floor) : smallest_prime_at_least(floor);
  if (!is_prime(q_override)) throw BadModulus("q override is not prime");
  if (strict ? (q_override <= floor) : (q_override < floor))
    throw BadModulus("q override below the variant floor");
  return q_override;
}

void add_scaled(std::vector<Fel>& acc, Fel coeff, const std::vector<Fel>& v, FieldModulus q) {
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc[i] = fadd(acc[i], fmul(coeff, v[i], q), q);
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::QTS: return "qts";
    case Variant::RampQSS: return "ramp";
    case Variant::StaircaseFixed: return "fixed-staircase";
    case Variant::StaircaseUniversal: return "universal-staircase";
    case Variant::ConcatFixed: return "concat-fixed";
    case Variant::ConcatUniversal: return "concat-universal";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  if (name == "qts") return Variant::QTS;
  if (name == "ramp") return Variant::RampQSS;
  if (name == "fixed-staircase" || name == "staircase-fixed") return Variant::StaircaseFixed;
  if (name == "universal-staircase" || name == "staircase-universal")
    return Variant::StaircaseUniversal;
  if (name == "concat-fixed") return Variant::ConcatFixed;
  if (name == "concat-universal") return Variant::ConcatUniversal;
  throw ConfigError("unknown variant: " + name);
}

std::size_t SchemeSpec::communication_formula(std::size_t d_value) const {
  std::size_t kk = (variant == Variant::RampQSS) ? z + 1 : k;
  if (d_value < kk) throw UnsupportedD("d below threshold");
  std::size_t den = d_value - kk + 1;
  if ((d_value * m) % den != 0)
    throw UnsupportedD("communication formula not integral at this d");
  return d_value * m / den;
}

SchemeSpec derive_params(Variant v, std::size_t k, std::size_t n, std::size_t d,
                         std::uint32_t q_override) {
  SchemeSpec s;
  s.variant = v;
  s.k = k;
  s.n = n;
  switch (v) {
    case Variant::QTS: {
      check_threshold_args(k, n);
      s.q = FieldModulus(pick_prime(2 * k - 1, false, q_override));
      s.m = 1;
      s.points = default_points(2 * k - 1, s.q, /*allow_zero=*/true);
      s.d_list = {k};
      s.send_list = {1};
      break;
    }
    case Variant::StaircaseFixed: {
      check_threshold_args(k, n);
      if (d < k || d > n) throw UnsupportedD("fixed-d variant needs k <= d <= n");
      s.d = d;
      s.q = FieldModulus(pick_prime(2 * k - 1, true, q_override));
      s.m = d - k + 1;
      s.points = default_points(2 * k - 1, s.q, false);
      if (d > k) {
        s.d_list = {d, k};
        s.send_list = {1, s.m};
      } else {
        s.d_list = {k};
        s.send_list = {s.m};
      }
      break;
    }
    case Variant::StaircaseUniversal: {
      check_threshold_args(k, n);
      s.m = lcm_upto(k);
      for (std::size_t i = 1; i <= k; ++i) {
        std::size_t di = 2 * k - i;
        std::size_t ai = s.m / (di - k + 1);
        s.d_list.push_back(di);
        s.a_list.push_back(ai);
        s.b_list.push_back(ai - (i == 1 ? 0 : s.a_list[i - 2]));
        s.send_list.push_back(ai);
      }
      // built at 2k-1 parties; n < 2k-1 is served by dropping shares
      std::uint32_t q = pick_prime(2 * k - 1, true, q_override);
      while (true) {
        s.q = FieldModulus(q);
        s.points = default_points(2 * k - 1, s.q, false);
        if (q_override != 0) break;  // explicit q: caller's choice, verifier will tell
        if (universal_staircase_plans(s)) break;
        q = smallest_prime_greater_than(q);
      }
      break;
    }
    case Variant::ConcatFixed: {
      check_threshold_args(k, n);
      if (d < k || d > n) throw UnsupportedD("fixed-d variant needs k <= d <= n");
      s.d = d;
      s.q = FieldModulus(pick_prime(d + k - 1, true, q_override));
      s.m = d - k + 1;
      s.points = default_points(d + k - 1, s.q, false);
      if (d > k) {
        s.d_list = {d, k};
        s.send_list = {1, 2};  // layer counts
      } else {
        s.d_list = {k};
        s.send_list = {1};
      }
      break;
    }
    case Variant::ConcatUniversal: {
      check_threshold_args(k, n);
      s.q = FieldModulus(pick_prime(n + k - 1, true, q_override));
      s.m = lcm_upto(n - k + 1);
      s.points = default_points(n + k - 1, s.q, false);
      for (std::size_t i = 1; i <= n - k + 1; ++i) {
        s.d_list.push_back(n + 1 - i);
        s.send_list.push_back(i);  // layers 1..i
      }
      break;
    }
    case Variant::RampQSS:
      throw ConfigError("use derive_ramp_params for ramp schemes");
  }
  return s;
}

SchemeSpec derive_ramp_params(std::size_t t, std::size_t n, std::size_t z,
                              std::uint32_t q_override) {
  if (z < 1 || z >= t) throw ConfigError("ramp needs 1 <= z < t");
  if (n < t || n > t + z) throw ConfigError("ramp needs t <= n <= t+z");
  SchemeSpec s;
  s.variant = Variant::RampQSS;
  s.t = t;
  s.z = z;
  s.k = z + 1;  // secrecy threshold, for audits
  s.n = n;
  s.q = FieldModulus(pick_prime(t + z, true, q_override));
  s.m = t - z;
  s.points = default_points(t + z, s.q, false);
  s.d_list = {t};
  s.send_list = {1};
  return s;
}

// ---------------------------------------------------------------------------
// Staircase assemblies

std::string YEntry::name() const {
  switch (kind) {
    case Zero: return "0";
    case Secret: return "s" + std::to_string(idx + 1);
    case Random: return "r" + std::to_string(idx + 1);
  }
  return "?";
}

std::size_t StaircaseAssembly::leading_zeros(std::size_t col) const {
  std::size_t z = 0;
  while (z < ycols[col].size() && ycols[col][z].kind == YEntry::Zero) ++z;
  return z;
}

std::string StaircaseAssembly::y_to_string() const {
  std::ostringstream os;
  for (std::size_t r = 0; r < y_rows; ++r) {
    for (std::size_t c = 0; c < ycols.size(); ++c) {
      if (c) os << ' ';
      os << ycols[c][r].name();
    }
    os << '\n';
  }
  return os.str();
}

StaircaseAssembly build_staircase_assembly(const SchemeSpec& spec) {
  StaircaseAssembly A;
  std::size_t k = spec.k;
  std::size_t nfull = 2 * k - 1;
  A.n_parties = nfull;

  if (spec.variant == Variant::StaircaseFixed) {
    std::size_t d = spec.d;
    std::size_t m = spec.m;  // d - k + 1
    A.y_rows = d;
    A.V = vandermonde(spec.points, d, spec.q);
    A.n_random = m * (k - 1);
    A.ycols.assign(m, std::vector<YEntry>(d));
    // first column: secret on top, fresh randomness below
    for (std::size_t u = 0; u < m; ++u) A.ycols[0][u] = {YEntry::Secret, u};
    for (std::size_t u = 0; u < k - 1; ++u) A.ycols[0][m + u] = {YEntry::Random, u};
    // later columns carry one earlier symbol at row m-1 plus fresh randomness
    for (std::size_t c = 1; c < m; ++c) {
      A.ycols[c][m - 1] = {YEntry::Random, k - m + c - 1};
      for (std::size_t u = 0; u < k - 1; ++u)
        A.ycols[c][m + u] = {YEntry::Random, c * (k - 1) + u};
    }
    for (std::size_t i = 0; i < spec.d_list.size(); ++i)
      A.stages.push_back({spec.d_list[i], spec.send_list[i]});
    return A;
  }

  if (spec.variant != Variant::StaircaseUniversal)
    throw ConfigError("no staircase assembly for this variant");

  std::size_t m = spec.m;
  A.y_rows = nfull;
  A.V = vandermonde(spec.points, nfull, spec.q);
  A.n_random = m * (k - 1);
  A.ycols.assign(m, std::vector<YEntry>(nfull));

  const auto& a = spec.a_list;  // a_i, i = 1..k
  const auto& b = spec.b_list;

  // secret block S: k x (m/k), column-major filling
  for (std::size_t c = 0; c < b[0]; ++c)
    for (std::size_t u = 0; u < k; ++u) A.ycols[c][u] = {YEntry::Secret, c * k + u};

  // R_i blocks: (k-1) x b_i, r indices column-major across all of r
  auto r_index = [&](std::size_t global_col, std::size_t row) {
    return global_col * (k - 1) + row;
  };
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t col0 = (i == 0) ? 0 : a[i - 1];
    for (std::size_t v = 0; v < b[i]; ++v)
      for (std::size_t u = 0; u < k - 1; ++u)
        A.ycols[col0 + v][k + u] = {YEntry::Random, r_index(col0 + v, u)};
  }

  // D_i blocks: (k-i) x b_{i+1}, filled column-major from row i of [R_1 .. R_i]
  for (std::size_t i = 1; i < k; ++i) {
    std::size_t col0 = a[i - 1];
    std::size_t rows_d = k - i;
    for (std::size_t v = 0; v < b[i]; ++v) {
      for (std::size_t u = 0; u < rows_d; ++u) {
        std::size_t src = v * rows_d + u;  // position in row i of [R_1 .. R_i]
        A.ycols[col0 + v][(i - 1) + 1 + u] = {YEntry::Random, r_index(src, i - 1)};
      }
    }
  }

  for (std::size_t i = 0; i < spec.d_list.size(); ++i)
    A.stages.push_back({spec.d_list[i], spec.a_list[i]});
  return A;
}

StaircaseAssembly example_universal_m3_assembly(FieldModulus q) {
  StaircaseAssembly A;
  A.n_parties = 5;
  A.y_rows = 5;
  std::vector<Fel> pts = {1, 2, 3, 4, 5};
  A.V = vandermonde(pts, 5, q);
  A.n_random = 6;
  auto S = [](std::size_t i) { return YEntry{YEntry::Secret, i}; };
  auto R = [](std::size_t i) { return YEntry{YEntry::Random, i}; };
  auto Z = []() { return YEntry{YEntry::Zero, 0}; };
  A.ycols = {
      {S(0), S(1), S(2), R(0), R(1)},
      {Z(), R(0), R(1), R(2), R(3)},
      {Z(), Z(), R(2), R(4), R(5)},
  };
  A.stages = {{5, 1}, {4, 2}, {3, 3}};
  return A;
}

BuiltScheme build_example_universal_m3(std::uint32_t q) {
  SchemeSpec s;
  s.variant = Variant::StaircaseUniversal;
  s.k = 3;
  s.n = 5;
  s.q = FieldModulus(q);
  s.m = 3;
  s.points = {1, 2, 3, 4, 5};
  s.d_list = {5, 4, 3};
  s.send_list = {1, 2, 3};
  s.a_list = {1, 2, 3};
  s.b_list = {1, 1, 1};
  return build_from_assembly(s, example_universal_m3_assembly(s.q));
}

// ---------------------------------------------------------------------------
// ShareLayout

std::vector<std::size_t> ShareLayout::party_qudits(std::size_t p) const {
  std::vector<std::size_t> out;
  for (const auto& layer : layers[p]) out.insert(out.end(), layer.begin(), layer.end());
  return out;
}

std::size_t ShareLayout::share_size(std::size_t p) const { return party_qudits(p).size(); }

std::vector<std::size_t> ShareLayout::sent_qudits(std::size_t p, std::size_t layers_sent) const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < layers_sent && l < layers[p].size(); ++l)
    out.insert(out.end(), layers[p][l].begin(), layers[p][l].end());
  return out;
}

std::size_t ShareLayout::active_parties() const {
  std::size_t c = 0;
  for (bool d : dropped)
    if (!d) ++c;
  return c;
}

// ---------------------------------------------------------------------------
// LinearEncoding helpers

std::vector<Fel> LinearEncoding::qudit_form(std::size_t qudit) const {
  std::vector<Fel> f(m_secret + n_random, 0);
  for (std::size_t j = 0; j < m_secret; ++j) f[j] = Ms.at(qudit, j);
  for (std::size_t j = 0; j < n_random; ++j) f[m_secret + j] = Mr.at(qudit, j);
  return f;
}

FMatrix LinearEncoding::form_matrix() const {
  FMatrix G(n_qudits, m_secret + n_random, q);
  for (std::size_t i = 0; i < n_qudits; ++i) {
    for (std::size_t j = 0; j < m_secret; ++j) G.at(i, j) = Ms.at(i, j);
    for (std::size_t j = 0; j < n_random; ++j) G.at(i, m_secret + j) = Mr.at(i, j);
  }
  return G;
}

// ---------------------------------------------------------------------------
// Staircase build

BuiltScheme build_from_assembly(const SchemeSpec& spec, const StaircaseAssembly& asmb) {
  std::size_t nfull = asmb.n_parties;
  std::size_t m_cols = asmb.ycols.size();
  std::size_t N = nfull * m_cols;

  LinearEncoding enc(spec.q, N, spec.m, asmb.n_random);
  for (std::size_t p = 0; p < nfull; ++p) {
    for (std::size_t c = 0; c < m_cols; ++c) {
      std::size_t qudit = p * m_cols + c;
      for (std::size_t u = 0; u < asmb.y_rows; ++u) {
        const YEntry& e = asmb.ycols[c][u];
        if (e.kind == YEntry::Zero) continue;
        Fel coeff = asmb.V.at(p, u);
        if (e.kind == YEntry::Secret)
          enc.Ms.at(qudit, e.idx) = fadd(enc.Ms.at(qudit, e.idx), coeff, spec.q);
        else
          enc.Mr.at(qudit, e.idx) = fadd(enc.Mr.at(qudit, e.idx), coeff, spec.q);
      }
    }
  }

  ShareLayout layout;
  layout.n_parties = nfull;
  layout.dropped.assign(nfull, false);
  layout.total_qudits = N;
  layout.secret_size = spec.m;
  layout.layers.assign(nfull, {});
  // layer boundaries follow the stage column counts
  std::vector<std::size_t> bounds;
  for (const auto& st : asmb.stages) bounds.push_back(std::min(st.cols, m_cols));
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  for (std::size_t p = 0; p < nfull; ++p) {
    std::size_t prev = 0;
    for (std::size_t b : bounds) {
      std::vector<std::size_t> quds;
      for (std::size_t c = prev; c < b; ++c) quds.push_back(p * m_cols + c);
      layout.layers[p].push_back(quds);
      prev = b;
    }
  }

  BuiltScheme out{spec, enc, layout, std::make_shared<StaircaseAssembly>(asmb), nullptr};
  if (spec.n < nfull) {
    std::vector<std::size_t> to_drop;
    for (std::size_t p = spec.n; p < nfull; ++p) to_drop.push_back(p);
    drop_shares(out, to_drop);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Concatenation build (also covers standalone QTS / ramp as one layer)

namespace {

enum class SurplusPolicy { None, AllToNext, Chain };

struct LayerPlanEntry {
  std::size_t t, z;
  bool secret_on_top;
  std::size_t input_size;
  SurplusPolicy surplus = SurplusPolicy::None;
  std::size_t surplus_count = 0;
};

BuiltScheme build_concat_like(const SchemeSpec& spec,
                              const std::vector<LayerPlanEntry>& plan) {
  FieldModulus q = spec.q;
  std::size_t n_layers = plan.size();

  // sizing pass
  std::vector<std::size_t> blocks(n_layers);
  std::size_t total_random = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::size_t per_block = plan[l].t - plan[l].z;
    if (plan[l].input_size % per_block != 0)
      throw ShapeError("layer input not divisible into blocks");
    blocks[l] = plan[l].input_size / per_block;
    total_random += blocks[l] * plan[l].z;
  }

  std::size_t m = spec.m;
  std::size_t nvars = m + total_random;
  std::size_t n_parties = spec.n;
  std::size_t w_total = 0;
  for (std::size_t l = 0; l < n_layers; ++l) w_total += blocks[l];

  auto structure = std::make_shared<ConcatStructure>();
  structure->layers.resize(n_layers);

  // physical layout
  ShareLayout layout;
  layout.n_parties = n_parties;
  layout.dropped.assign(n_parties, false);
  layout.secret_size = m;
  layout.layers.assign(n_parties, {});
  std::size_t next_qudit = 0;
  for (std::size_t p = 0; p < n_parties; ++p) {
    for (std::size_t l = 0; l < n_layers; ++l) {
      std::vector<std::size_t> quds(blocks[l]);
      for (std::size_t b = 0; b < blocks[l]; ++b) quds[b] = next_qudit++;
      layout.layers[p].push_back(quds);
    }
  }

  LinearEncoding enc(q, 0, m, total_random);  // resized below
  std::vector<std::vector<Fel>> qudit_forms;  // filled as we go
  qudit_forms.resize(n_parties * w_total);

  std::size_t random_next = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    ConcatLayer& L = structure->layers[l];
    L.t = plan[l].t;
    L.z = plan[l].z;
    L.blocks = blocks[l];
    L.secret_on_top = plan[l].secret_on_top;
    std::size_t n_shares = plan[l].t + plan[l].z;  // built at full size, pure state
    L.points.assign(spec.points.begin(), spec.points.begin() + n_shares);
    L.V = vandermonde(L.points, L.t, q, /*allow_zero=*/true);
    L.shares.resize(n_shares);

    // share roles
    for (std::size_t j = 0; j < n_shares; ++j) {
      ConcatLayerShare& sh = L.shares[j];
      std::size_t jj = j - n_parties;  // position among the extra shares
      if (j < n_parties) {
        sh.role = ConcatLayerShare::Role::Party;
        sh.party = j;
        sh.qudits = layout.layers[j][l];
      } else if (plan[l].surplus != SurplusPolicy::None && jj < plan[l].surplus_count) {
        sh.role = ConcatLayerShare::Role::Surplus;
        sh.feeds_layer = plan[l].surplus == SurplusPolicy::AllToNext ? l + 1 : l + 1 + jj;
        if (sh.feeds_layer >= n_layers) throw ShapeError("surplus share feeds missing layer");
      } else {
        sh.role = ConcatLayerShare::Role::Environment;
        for (std::size_t b = 0; b < blocks[l]; ++b) {
          sh.qudits.push_back(n_parties * w_total + layout.environment.size());
          layout.environment.push_back(sh.qudits.back());
          qudit_forms.emplace_back();
        }
      }
    }

    // inputs
    if (l == 0) {
      for (std::size_t i = 0; i < m; ++i) {
        InputSource src;
        src.from_secret = true;
        src.secret_index = i;
        L.inputs.push_back(src);
        std::vector<Fel> f(nvars, 0);
        f[i] = 1;
        L.input_forms.push_back(f);
      }
    } else {
      for (std::size_t l2 = 0; l2 < l; ++l2) {
        const ConcatLayer& src_layer = structure->layers[l2];
        for (std::size_t j = 0; j < src_layer.shares.size(); ++j) {
          const ConcatLayerShare& sh = src_layer.shares[j];
          if (sh.role != ConcatLayerShare::Role::Surplus || sh.feeds_layer != l) continue;
          for (std::size_t b = 0; b < src_layer.blocks; ++b) {
            InputSource src;
            src.src_layer = l2;
            src.src_share = j;
            src.src_block = b;
            L.inputs.push_back(src);
            L.input_forms.push_back(src_layer.share_forms[j * src_layer.blocks + b]);
          }
        }
      }
      if (L.inputs.size() != plan[l].input_size)
        throw ShapeError("concat layer input wiring mismatch");
    }

    // register offsets for surplus shares (position of their blocks in the
    // destination layer's input list)
    // computed lazily below when shares are declared surplus in later passes;
    // here we can fill them for this layer's feeders already processed.

    // share forms
    std::size_t per_block = L.t - L.z;
    L.share_forms.assign(n_shares * L.blocks, {});
    for (std::size_t j = 0; j < n_shares; ++j) {
      for (std::size_t b = 0; b < L.blocks; ++b) {
        std::vector<Fel> f(nvars, 0);
        for (std::size_t i = 0; i < L.t; ++i) {
          Fel coeff = L.V.at(j, i);
          bool is_secret_slot = L.secret_on_top ? (i < per_block) : (i >= L.z);
          if (is_secret_slot) {
            std::size_t reg = b * per_block + (L.secret_on_top ? i : i - L.z);
            add_scaled(f, coeff, L.input_forms[reg], q);
          } else {
            std::size_t ridx = L.secret_on_top ? (i - per_block) : i;
            std::size_t rvar = m + random_next + b * L.z + ridx;
            f[rvar] = fadd(f[rvar], coeff, q);
          }
        }
        L.share_forms[j * L.blocks + b] = f;
        const ConcatLayerShare& sh = L.shares[j];
        if (sh.role == ConcatLayerShare::Role::Party)
          qudit_forms[sh.qudits[b]] = f;
        else if (sh.role == ConcatLayerShare::Role::Environment)
          qudit_forms[sh.qudits[b]] = f;
      }
    }
    random_next += L.blocks * L.z;
  }

  // fill surplus register offsets now that all layers exist
  for (std::size_t l = 0; l < n_layers; ++l) {
    ConcatLayer& L = structure->layers[l];
    for (std::size_t j = 0; j < L.shares.size(); ++j) {
      ConcatLayerShare& sh = L.shares[j];
      if (sh.role != ConcatLayerShare::Role::Surplus) continue;
      const ConcatLayer& dst = structure->layers[sh.feeds_layer];
      for (std::size_t r = 0; r < dst.inputs.size(); ++r) {
        const InputSource& src = dst.inputs[r];
        if (!src.from_secret && src.src_layer == l && src.src_share == j &&
            src.src_block == 0) {
          sh.reg_offset = r;
          break;
        }
      }
    }
  }

  std::size_t N = qudit_forms.size();
  layout.total_qudits = N;
  enc = LinearEncoding(q, N, m, total_random);
  for (std::size_t i = 0; i < N; ++i) {
    if (qudit_forms[i].empty()) throw ShapeError("unassigned qudit form");
    for (std::size_t j = 0; j < m; ++j) enc.Ms.at(i, j) = qudit_forms[i][j];
    for (std::size_t j = 0; j < total_random; ++j) enc.Mr.at(i, j) = qudit_forms[i][m + j];
  }

  return BuiltScheme{spec, enc, layout, nullptr, structure};
}

}  // namespace

BuiltScheme build_scheme(const SchemeSpec& spec) {
  switch (spec.variant) {
    case Variant::StaircaseFixed:
    case Variant::StaircaseUniversal:
      return build_from_assembly(spec, build_staircase_assembly(spec));
    case Variant::QTS: {
      // one Cleve layer, built at 2k-1 shares; extras go to the environment
      LayerPlanEntry L{spec.k, spec.k - 1, /*secret_on_top=*/false, spec.m,
                       SurplusPolicy::None, 0};
      return build_concat_like(spec, {L});
    }
    case Variant::RampQSS: {
      LayerPlanEntry L{spec.t, spec.z, /*secret_on_top=*/true, spec.m, SurplusPolicy::None, 0};
      return build_concat_like(spec, {L});
    }
    case Variant::ConcatFixed: {
      std::size_t k = spec.k, d = spec.d;
      std::vector<LayerPlanEntry> plan;
      std::size_t blocks1 = spec.m / (d - k + 1);
      plan.push_back({d, k - 1, true, spec.m,
                      d > k ? SurplusPolicy::AllToNext : SurplusPolicy::None, d - k});
      if (d > k)
        plan.push_back({k, k - 1, false, (d - k) * blocks1, SurplusPolicy::None, 0});
      return build_concat_like(spec, plan);
    }
    case Variant::ConcatUniversal: {
      std::size_t k = spec.k, n = spec.n;
      std::size_t h = n - k + 1;
      std::vector<LayerPlanEntry> plan;
      std::size_t blocks_so_far = 0;
      for (std::size_t i = 1; i <= h; ++i) {
        std::size_t di = n + 1 - i;
        std::size_t input = (i == 1) ? spec.m : blocks_so_far;
        if (input % (di - k + 1) != 0) throw ShapeError("universal concat sizing broke");
        std::size_t bl = input / (di - k + 1);
        plan.push_back({di, k - 1, true, input,
                        di > k ? SurplusPolicy::Chain : SurplusPolicy::None, di - k});
        blocks_so_far += bl;
      }
      return build_concat_like(spec, plan);
    }
  }
  throw ConfigError("unreachable variant");
}

void drop_shares(BuiltScheme& scheme, const std::vector<std::size_t>& parties_to_drop) {
  std::size_t active = scheme.layout.active_parties();
  std::size_t dropping = 0;
  for (std::size_t p : parties_to_drop) {
    if (p >= scheme.layout.n_parties) throw IndexError("party index out of range");
    if (!scheme.layout.dropped[p]) ++dropping;
  }
  std::size_t threshold =
      scheme.spec.variant == Variant::RampQSS ? scheme.spec.t : scheme.spec.k;
  if (active - dropping < threshold)
    throw AccessStructureViolation("dropping below the recovery threshold");
  for (std::size_t p : parties_to_drop) {
    if (scheme.layout.dropped[p]) continue;
    scheme.layout.dropped[p] = true;
    for (auto& layer : scheme.layout.layers[p])
      for (std::size_t qd : layer) scheme.layout.environment.push_back(qd);
  }
  std::sort(scheme.layout.environment.begin(), scheme.layout.environment.end());
}

Backend backend_from_name(const std::string& name) {
  if (name == "sparse") return Backend::Sparse;
  if (name == "coset") return Backend::Coset;
  throw ConfigError("unknown backend: " + name);
}

std::string backend_name(Backend b) { return b == Backend::Sparse ? "sparse" : "coset"; }

std::size_t EncodedState::n_qudits() const {
  return backend == Backend::Sparse ? sparse->n_qudits : coset->n_qudits;
}

CosetState encode_coset(const BuiltScheme& scheme, const SparseState& secret) {
  const LinearEncoding& enc = scheme.enc;
  if (secret.q != enc.q) throw ShapeError("secret modulus mismatch");
  if (secret.n_qudits != enc.m_secret) throw ShapeError("secret size mismatch");
  CosetState cs(enc.q, enc.n_qudits);
  cs.W = FMatrix(enc.n_random, enc.n_qudits, enc.q);
  for (std::size_t j = 0; j < enc.n_random; ++j)
    for (std::size_t i = 0; i < enc.n_qudits; ++i) cs.W.at(j, i) = enc.Mr.at(i, j);
  for (const auto& [w, a] : secret.terms) {
    CosetBranch br;
    br.label = w;
    br.amp = a;
    std::vector<Fel> svec(enc.m_secret);
    for (std::size_t i = 0; i < enc.m_secret; ++i)
      svec[i] = static_cast<unsigned char>(w[i]);
    br.offset = mat_vec(enc.Ms, svec);
    cs.branches.push_back(std::move(br));
  }
  cs.canonicalize();
  return cs;
}

EncodedState encode(const BuiltScheme& scheme, const SparseState& secret, Backend backend,
                    const Budgets& budgets) {
  CosetState cs = encode_coset(scheme, secret);
  EncodedState out;
  out.backend = backend;
  if (backend == Backend::Coset) {
    out.coset = std::move(cs);
  } else {
    out.sparse = to_sparse(cs, budgets);
  }
  return out;
}

CosetState encode_entangled_reference(const BuiltScheme& scheme) {
  const LinearEncoding& enc = scheme.enc;
  std::size_t m = enc.m_secret;
  std::size_t N = enc.n_qudits;
  CosetState cs(enc.q, m + N);
  cs.W = FMatrix(m + enc.n_random, m + N, enc.q);
  for (std::size_t j = 0; j < m; ++j) {
    cs.W.at(j, j) = 1;
    for (std::size_t i = 0; i < N; ++i) cs.W.at(j, m + i) = enc.Ms.at(i, j);
  }
  for (std::size_t j = 0; j < enc.n_random; ++j)
    for (std::size_t i = 0; i < N; ++i) cs.W.at(m + j, m + i) = enc.Mr.at(i, j);
  CosetBranch br;
  br.label = "";
  br.amp = 1.0;
  br.offset.assign(m + N, 0);
  cs.branches.push_back(br);
  cs.canonicalize();
  return cs;
}

}  // namespace ceqss
