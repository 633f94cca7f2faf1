#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ceqss/field.hpp"
#include "ceqss/state.hpp"

namespace ceqss {

enum class Variant {
  QTS,                 // Cleve ((k,n))
  RampQSS,             // Ogawa ((t,n;z))
  StaircaseFixed,      // ((k,n,d)) staircase
  StaircaseUniversal,  // ((k,n,*)) staircase
  ConcatFixed,         // ((k,n,d)) ramp + QTS concatenation
  ConcatUniversal      // ((k,n,*)) chained ramp concatenation
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct SchemeSpec {
  Variant variant = Variant::QTS;
  std::size_t k = 0, n = 0, d = 0;  // d used by fixed-d variants
  std::size_t t = 0, z = 0;         // ramp only
  FieldModulus q{2};
  std::vector<Fel> points;  // evaluation points for the primary matrix
  std::size_t m = 0;        // secret size in qudits

  // admissible recovery sizes, largest first, with per-d send amount
  // (columns for staircase, layers for concat, whole share otherwise)
  std::vector<std::size_t> d_list;
  std::vector<std::size_t> send_list;

  std::vector<std::size_t> a_list, b_list;  // universal staircase parameters

  // Worst-case qudits to the combiner when contacting d parties.
  std::size_t communication_formula(std::size_t d_value) const;
};

// Smallest admissible prime unless overridden; x_i = i by default (reduced
// mod q for QTS, where a zero point is allowed). For the universal staircase
// the floor prime can make some recovery matrices singular (e.g. q = 7 at
// k = 3, where {2,3,4,5} are the roots of x^4+x^2+1), so admissibility is
// probed against the planner and q grows until every accessed set works.
SchemeSpec derive_params(Variant v, std::size_t k, std::size_t n, std::size_t d = 0,
                         std::uint32_t q_override = 0);
SchemeSpec derive_ramp_params(std::size_t t, std::size_t n, std::size_t z,
                              std::uint32_t q_override = 0);

// Defined alongside the recovery planner: true iff every admissible (d, D)
// of this universal staircase spec produces a valid schedule.
bool universal_staircase_plans(const SchemeSpec& spec);

// ---------------------------------------------------------------------------
// Staircase assembly: V plus the symbolic Y template.

struct YEntry {
  enum Kind { Zero, Secret, Random } kind = Zero;
  std::size_t idx = 0;  // 0-based into s_* or r_*

  std::string name() const;  // "0", "s3", "r11" (1-based display)
  bool operator==(const YEntry& o) const { return kind == o.kind && idx == o.idx; }
};

struct StaircaseStage {
  std::size_t d = 0;     // parties contacted
  std::size_t cols = 0;  // leading Y columns each of them sends
};

struct StaircaseAssembly {
  FMatrix V;      // n_full x y_rows
  std::size_t y_rows = 0;
  std::size_t n_parties = 0;
  std::vector<std::vector<YEntry>> ycols;  // column-major template
  std::vector<StaircaseStage> stages;      // descending d
  std::size_t n_random = 0;

  std::size_t leading_zeros(std::size_t col) const;
  std::string y_to_string() const;  // rows of entry names, for golden tests
};

StaircaseAssembly build_staircase_assembly(const SchemeSpec& spec);

// The worked ((3,5,*)) m=3 example scheme; communication efficient at every
// d but not cost-optimal at d=4.
StaircaseAssembly example_universal_m3_assembly(FieldModulus q);

// ---------------------------------------------------------------------------
// Concatenation structure (also models standalone QTS / ramp as one layer).

struct ConcatLayerShare {
  enum class Role { Party, Surplus, Environment };
  Role role = Role::Party;
  std::size_t party = 0;           // Role::Party
  std::size_t feeds_layer = 0;     // Role::Surplus: destination layer
  std::size_t reg_offset = 0;      // Role::Surplus: first register there
  std::vector<std::size_t> qudits; // Party/Environment: one per block
};

struct InputSource {
  bool from_secret = false;
  std::size_t secret_index = 0;
  std::size_t src_layer = 0, src_share = 0, src_block = 0;
};

struct ConcatLayer {
  std::size_t t = 0, z = 0, blocks = 0;
  bool secret_on_top = true;  // Ogawa: low powers carry the input; Cleve: top power
  std::vector<Fel> points;
  FMatrix V;  // n_shares x t
  std::vector<ConcatLayerShare> shares;
  std::vector<InputSource> inputs;             // blocks * (t-z) registers
  std::vector<std::vector<Fel>> input_forms;   // register -> form over (m + rho)
  std::vector<std::vector<Fel>> share_forms;   // share*blocks, share-major
};

struct ConcatStructure {
  std::vector<ConcatLayer> layers;
};

// ---------------------------------------------------------------------------

struct ShareLayout {
  std::size_t n_parties = 0;
  std::vector<bool> dropped;
  std::vector<std::vector<std::vector<std::size_t>>> layers;  // party -> layer -> qudits
  std::vector<std::size_t> environment;
  std::size_t total_qudits = 0;
  std::size_t secret_size = 0;

  std::vector<std::size_t> party_qudits(std::size_t p) const;
  std::size_t share_size(std::size_t p) const;
  std::vector<std::size_t> sent_qudits(std::size_t p, std::size_t layers_sent) const;
  std::size_t active_parties() const;
};

// Linear description of the whole encoding: basis secret s maps to the
// uniform superposition over { Ms*s + Mr*r : r }.
struct LinearEncoding {
  FieldModulus q{2};
  std::size_t n_qudits = 0, m_secret = 0, n_random = 0;
  FMatrix Ms, Mr;

  LinearEncoding(FieldModulus q_, std::size_t n, std::size_t m, std::size_t rho)
      : q(q_), n_qudits(n), m_secret(m), n_random(rho), Ms(n, m, q_), Mr(n, rho, q_) {}

  std::vector<Fel> qudit_form(std::size_t qudit) const;  // length m + rho
  FMatrix form_matrix() const;                           // n_qudits x (m + rho)
};

struct BuiltScheme {
  SchemeSpec spec;
  LinearEncoding enc;
  ShareLayout layout;
  std::shared_ptr<StaircaseAssembly> assembly;  // staircase family
  std::shared_ptr<ConcatStructure> concat;      // concat family, qts, ramp
};

BuiltScheme build_scheme(const SchemeSpec& spec);
BuiltScheme build_from_assembly(const SchemeSpec& spec, const StaircaseAssembly& asmb);
BuiltScheme build_example_universal_m3(std::uint32_t q = 7);

// Move whole parties into the environment. Dropping below k active parties
// throws AccessStructureViolation.
void drop_shares(BuiltScheme& scheme, const std::vector<std::size_t>& parties_to_drop);

enum class Backend { Sparse, Coset };
Backend backend_from_name(const std::string& name);
std::string backend_name(Backend b);

struct EncodedState {
  Backend backend = Backend::Coset;
  std::optional<SparseState> sparse;
  std::optional<CosetState> coset;

  std::size_t n_qudits() const;
};

CosetState encode_coset(const BuiltScheme& scheme, const SparseState& secret);
EncodedState encode(const BuiltScheme& scheme, const SparseState& secret, Backend backend,
                    const Budgets& budgets = Budgets{});

// Prepend a reference register maximally entangled with the secret; the
// reference occupies qudits [0, m) and the scheme shifts up by m.
CosetState encode_entangled_reference(const BuiltScheme& scheme);

}  // namespace ceqss
