#include "ceqss/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace ceqss {

std::vector<std::string> demo_names() {
  return {"2-3-qts",        "3-4-ramp",         "3-5-fixed",
          "3-5-universal",  "3-5-universal-m6", "2-3-3-concat-fixed",
          "2-3-concat-universal"};
}

BuiltScheme build_demo(const std::string& name) {
  if (name == "2-3-qts") return build_scheme(derive_params(Variant::QTS, 2, 3));
  if (name == "3-4-ramp") return build_scheme(derive_ramp_params(3, 4, 1));
  if (name == "3-5-fixed")
    return build_scheme(derive_params(Variant::StaircaseFixed, 3, 5, 5));
  if (name == "3-5-universal") return build_example_universal_m3();
  if (name == "3-5-universal-m6")
    return build_scheme(derive_params(Variant::StaircaseUniversal, 3, 5));
  if (name == "2-3-3-concat-fixed")
    return build_scheme(derive_params(Variant::ConcatFixed, 2, 3, 3));
  if (name == "2-3-concat-universal")
    return build_scheme(derive_params(Variant::ConcatUniversal, 2, 3));
  throw ConfigError("unknown demo: " + name + " (see `ceqss demos`)");
}

BuiltScheme RunConfig::build() const {
  if (demo) return build_demo(*demo);
  if (!spec) throw ConfigError("config names neither a demo nor a scheme");
  return build_scheme(*spec);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.budgets = budgets_from_env();
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto geti = [&](const std::string& key, std::size_t fallback) -> std::size_t {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stoull(it->second);
  };

  if (kv.count("demo")) {
    cfg.demo = kv["demo"];
  } else if (kv.count("variant")) {
    Variant v = variant_from_name(kv["variant"]);
    std::uint32_t q = static_cast<std::uint32_t>(geti("q", 0));
    SchemeSpec spec = v == Variant::RampQSS
                          ? derive_ramp_params(geti("t", 0), geti("n", 0), geti("z", 0), q)
                          : derive_params(v, geti("k", 0), geti("n", 0), geti("d", 0), q);
    if (kv.count("points")) {
      std::vector<Fel> pts;
      std::istringstream ps(kv["points"]);
      std::string tok;
      while (std::getline(ps, tok, ',')) pts.push_back(std::stoul(trim(tok)));
      if (pts.size() != spec.points.size())
        throw ConfigError("points list must have " + std::to_string(spec.points.size()) +
                          " entries");
      spec.points = pts;
    }
    cfg.spec = spec;
  }
  if (kv.count("backend")) cfg.backend = backend_from_name(kv["backend"]);
  cfg.seed = geti("seed", cfg.seed);
  cfg.budgets.max_terms = geti("term_budget", cfg.budgets.max_terms);
  cfg.budgets.max_dense_dim = geti("dense_budget", cfg.budgets.max_dense_dim);
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream body;
  body << in.rdbuf();
  return parse_config(body.str());
}

Json spec_to_json(const SchemeSpec& spec) {
  Json j;
  j["variant"] = variant_name(spec.variant);
  j["k"] = spec.k;
  j["n"] = spec.n;
  if (spec.variant == Variant::StaircaseFixed || spec.variant == Variant::ConcatFixed)
    j["d"] = spec.d;
  if (spec.variant == Variant::RampQSS) {
    j["t"] = spec.t;
    j["z"] = spec.z;
  }
  j["q"] = spec.q.q;
  j["m"] = spec.m;
  j["points"] = spec.points;
  j["d_list"] = spec.d_list;
  if (!spec.a_list.empty()) j["a_list"] = spec.a_list;
  if (!spec.b_list.empty()) j["b_list"] = spec.b_list;
  return j;
}

Json config_echo(const RunConfig& cfg) {
  Json j;
  if (cfg.demo) j["demo"] = *cfg.demo;
  if (cfg.spec) j["scheme"] = spec_to_json(*cfg.spec);
  j["backend"] = backend_name(cfg.backend);
  j["seed"] = cfg.seed;
  j["budgets"] = {{"max_terms", cfg.budgets.max_terms},
                  {"max_dense_dim", cfg.budgets.max_dense_dim}};
  return j;
}

Json make_report_skeleton(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config_echo(cfg);
  return j;
}

void stamp_wall_clock(Json& report, double wall_ms) { report["wall_ms"] = wall_ms; }

Json parse_report(const std::string& text) {
  Json j = Json::parse(text);
  if (!j.contains("schema_version") || j["schema_version"].get<int>() != kReportSchemaVersion)
    throw ConfigError("report schema version mismatch");
  if (!j.contains("tool_version") || !j.contains("command") || !j.contains("config"))
    throw ConfigError("report misses mandatory fields");
  return j;
}

Json verdict_to_json(const SchemeVerdict& verdict) {
  Json checks = Json::array();
  for (const auto& rep : verdict.reports) {
    Json jr;
    jr["check"] = rep.check;
    jr["pass"] = rep.all_pass();
    jr["failures"] = rep.failures();
    jr["skips"] = rep.skips();
    Json recs = Json::array();
    for (const auto& rec : rep.records) {
      Json r;
      r["name"] = rec.name;
      r["subject"] = rec.subject;
      if (rec.skipped()) {
        r["skipped_reason"] = rec.skipped_reason;
      } else {
        r["measured"] = rec.measured;
        r["expected"] = rec.expected;
        r["tolerance"] = rec.tolerance;
        r["verdict"] = rec.pass ? "pass" : "fail";
      }
      recs.push_back(std::move(r));
    }
    jr["records"] = std::move(recs);
    checks.push_back(std::move(jr));
  }
  Json j;
  j["all_pass"] = verdict.all_pass();
  j["checks"] = std::move(checks);
  Json cost;
  Json rows = Json::array();
  for (const auto& row : verdict.costs.rows) {
    rows.push_back({{"d", row.d},
                    {"cc_measured", row.measured},
                    {"cc_bound", std::to_string(row.bound_num) + "/" +
                                     std::to_string(row.bound_den)},
                    {"meets_bound", row.meets_bound},
                    {"saturates", row.saturates}});
  }
  cost["rows"] = std::move(rows);
  cost["strictly_decreasing"] = verdict.costs.strictly_decreasing;
  cost["partial_bound_ok"] = verdict.costs.partial_bound_ok;
  cost["partial_checks"] = verdict.costs.partial_checks;
  cost["notes"] = verdict.costs.notes;
  j["costs"] = std::move(cost);
  return j;
}

Json schedule_to_json(const GateSchedule& schedule) {
  Json steps = Json::array();
  for (const auto& st : schedule.steps) {
    Json s;
    switch (st.kind) {
      case GateStep::Kind::LinearMap:
        s["kind"] = "linear";
        s["qudits"] = st.indices;
        s["matrix"] = st.matrix.to_string();
        break;
      case GateStep::Kind::CtrlAdd:
        s["kind"] = "ctrl-add";
        s["alpha"] = st.alpha;
        s["control"] = st.control;
        s["target"] = st.target;
        break;
      case GateStep::Kind::Reorder:
        s["kind"] = "reorder";
        s["permutation"] = st.indices;
        break;
    }
    s["note"] = st.annotation;
    steps.push_back(std::move(s));
  }
  Json j;
  j["steps"] = std::move(steps);
  Json comm = Json::array();
  for (const auto& [p, quds] : schedule.communicated)
    comm.push_back({{"party", p + 1}, {"qudits", quds}});
  j["communicated"] = std::move(comm);
  j["secret_out"] = schedule.secret_out;
  j["cost"] = schedule.total_cost();
  return j;
}

Json transcript_to_json(const Transcript& t) {
  Json j;
  Json acc = Json::array();
  for (std::size_t p : t.accessed) acc.push_back(p + 1);
  j["accessed"] = std::move(acc);
  j["d"] = t.d;
  Json recv = Json::array();
  for (const auto& [p, c] : t.qudits_received)
    recv.push_back({{"party", p + 1}, {"qudits", c}});
  j["qudits_received"] = std::move(recv);
  j["communication_cost"] = t.communication_cost;
  j["secret_out"] = t.secret_out;
  return j;
}

std::string audit_csv(const BuiltScheme& scheme, const CostAudit& audit) {
  std::ostringstream os;
  os << "variant,k,n,d,q,m,cc_measured,cc_bound,verdict\n";
  const SchemeSpec& s = scheme.spec;
  for (const auto& row : audit.rows) {
    os << variant_name(s.variant) << ',' << s.k << ',' << s.n << ',' << row.d << ','
       << s.q.q << ',' << s.m << ',' << row.measured << ',' << row.bound_num << '/'
       << row.bound_den << ','
       << (row.meets_bound ? (row.saturates ? "optimal" : "above-bound") : "VIOLATION")
       << '\n';
  }
  return os.str();
}

std::string plot_csv(const BuiltScheme& scheme) {
  std::ostringstream os;
  os << "d,cc,cc_per_secret_qudit\n";
  std::vector<std::size_t> ds = scheme.spec.d_list;
  std::sort(ds.begin(), ds.end());
  for (std::size_t d : ds) {
    std::size_t cc = communication_cost(scheme, d);
    os << d << ',' << cc << ',' << double(cc) / double(scheme.spec.m) << '\n';
  }
  return os.str();
}

}  // namespace ceqss
