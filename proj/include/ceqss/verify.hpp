#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceqss/recovery.hpp"
#include "ceqss/scheme.hpp"

namespace ceqss {

struct CheckRecord {
  std::string name;
  std::string subject;
  double measured = 0;
  double expected = 0;
  double tolerance = 0;
  bool pass = false;
  std::string skipped_reason;  // nonempty means skipped, not failed

  bool skipped() const { return !skipped_reason.empty(); }
};

struct CheckReport {
  std::string check;  // recoverability / secrecy / costs / entropy-model
  std::vector<CheckRecord> records;

  bool all_pass() const;
  std::size_t failures() const;
  std::size_t skips() const;
};

struct Tolerances {
  double fidelity = 1e-9;
  double entrywise = 1e-9;
  double entropy = 1e-7;
};

struct VerifyOptions {
  Tolerances tol;
  Budgets budgets;
  std::uint64_t seed = 2024;
  std::size_t subset_cap = 64;   // exhaustive below, sampled above
  std::size_t sample_count = 32;
  std::size_t family_cap = 64;   // basis-secret family cap before sampling
  std::size_t family_basis_sample = 16;
  std::size_t family_pair_sample = 6;
  std::size_t dense_oracle_dim = 1024;
};

// Per-d cost audit row.
struct CostRow {
  std::size_t d = 0;
  std::size_t measured = 0;
  std::size_t bound_num = 0, bound_den = 1;  // dm/(d-k+1)
  bool meets_bound = false;
  bool saturates = false;  // equality with the bound
};

struct CostAudit {
  std::vector<CostRow> rows;
  bool strictly_decreasing = false;
  bool partial_bound_ok = false;  // sum_{j in F} |H_j| >= m for every F
  std::size_t partial_checks = 0;
  bool pass = false;
  std::vector<std::string> notes;
};

CheckReport check_recoverability(const BuiltScheme& scheme, const VerifyOptions& opt);
CheckReport check_secrecy(const BuiltScheme& scheme, const VerifyOptions& opt);
CostAudit audit_costs(const BuiltScheme& scheme);
CheckReport cost_audit_report(const BuiltScheme& scheme);
CheckReport entropy_model_check(const BuiltScheme& scheme, const VerifyOptions& opt);

struct SchemeVerdict {
  std::vector<CheckReport> reports;
  CostAudit costs;
  bool all_pass() const;
};

SchemeVerdict verify_scheme(const BuiltScheme& scheme, const VerifyOptions& opt = VerifyOptions{});

// Canned tampering hooks; each must trip at least one check.
enum class Mutation {
  ZeroYEntry,      // zero one Y template entry
  DuplicatePoint,  // duplicate an evaluation point, bypassing validation
  TruncateLayer,   // drop the last Y column / layer
  SwapDEntries,    // swap two carried symbols in the template
  SkipCtrlAdd      // drop one CtrlAdd from every executed schedule
};

Mutation mutation_from_name(const std::string& name);
std::string mutation_name(Mutation m);

// Verdict for a mutated scheme; mutations are applied to the encoded state
// (and for DuplicatePoint to the matrices), while recovery plans come from
// the pristine scheme. zero_y picks the Y cell to clear (0-based row, col);
// by default the first carried symbol outside column 1.
SchemeVerdict verify_mutated(const BuiltScheme& pristine, Mutation mutation,
                             const VerifyOptions& opt = VerifyOptions{},
                             std::optional<std::pair<std::size_t, std::size_t>> zero_y = {});

// Secret input family used across the checks.
std::vector<SparseState> spanning_secret_family(FieldModulus q, std::size_t m,
                                                const VerifyOptions& opt);

}  // namespace ceqss
