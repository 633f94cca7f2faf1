#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ceqss/recovery.hpp"
#include "ceqss/scheme.hpp"
#include "ceqss/verify.hpp"

#include "json.hpp"

namespace ceqss {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.2.0";
inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// demo registry: the worked examples

std::vector<std::string> demo_names();
BuiltScheme build_demo(const std::string& name);

// ---------------------------------------------------------------------------
// run configuration (TOML-like key = value document)

struct RunConfig {
  std::optional<std::string> demo;
  std::optional<SchemeSpec> spec;
  Backend backend = Backend::Coset;
  Budgets budgets;
  std::uint64_t seed = 2024;

  BuiltScheme build() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

Json spec_to_json(const SchemeSpec& spec);
Json config_echo(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// report documents

Json make_report_skeleton(const std::string& command, const RunConfig& cfg);
void stamp_wall_clock(Json& report, double wall_ms);

// Round-trip guard: parses the serialized document and checks the schema.
Json parse_report(const std::string& text);

Json verdict_to_json(const SchemeVerdict& verdict);
Json schedule_to_json(const GateSchedule& schedule);
Json transcript_to_json(const Transcript& t);

// fixed audit table: variant,k,n,d,q,m,cc_measured,cc_bound,verdict
std::string audit_csv(const BuiltScheme& scheme, const CostAudit& audit);

// Fig.-2 style staircase: d vs CC_n(d)/m
std::string plot_csv(const BuiltScheme& scheme);

}  // namespace ceqss
