// Command-line front end: derive scheme parameters, run encode/recover
// round trips, audit communication costs, and verify the schemes.
//
// Exit codes: 0 success / all checks pass, 1 verification or engine
// failure, 2 usage or parameter error.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "ceqss/report.hpp"

using namespace ceqss;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::vector<std::size_t> parse_party_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    long v = std::stol(tok);
    if (v < 1) throw ConfigError("party indices are 1-based");
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  return out;
}

SparseState make_secret(const std::string& source, const BuiltScheme& scheme,
                        std::uint64_t seed) {
  FieldModulus q = scheme.spec.q;
  std::size_t m = scheme.spec.m;
  if (source.rfind("basis:", 0) == 0) {
    std::istringstream in(source.substr(6));
    std::string tok;
    Word w;
    while (std::getline(in, tok, ',')) w.push_back(static_cast<char>(std::stoul(tok) % q.q));
    if (w.size() != m)
      throw ConfigError("basis secret needs " + std::to_string(m) + " symbols");
    return state_from_secret({{w, 1.0}}, q);
  }
  if (source == "basis") {
    return state_from_secret({{Word(m, 0), 1.0}}, q);
  }
  if (source == "random") {
    std::mt19937_64 rng(seed);
    std::map<Word, Amp> amps;
    while (amps.size() < 4) {
      Word w(m, 0);
      for (auto& c : w) c = static_cast<char>(rng() % q.q);
      amps[w] = Amp(std::cos(double(rng() % 4096)), std::sin(double(rng() % 4096)));
    }
    return state_from_secret(amps, q);
  }
  throw ConfigError("unknown secret source: " + source +
                    " (use basis, basis:<symbols>, random, entangled)");
}

RunConfig config_from_cli(const std::string& demo, const std::string& config_path,
                          const std::string& backend, std::uint64_t seed, bool seed_set) {
  RunConfig cfg;
  if (!demo.empty() && !config_path.empty())
    throw ConfigError("give either --demo or --config, not both");
  if (!demo.empty()) {
    cfg.budgets = budgets_from_env();
    cfg.demo = demo;
  } else if (!config_path.empty()) {
    cfg = load_config_file(config_path);
  } else {
    throw ConfigError("need --demo or --config");
  }
  if (!backend.empty()) cfg.backend = backend_from_name(backend);
  if (seed_set) cfg.seed = seed;
  return cfg;
}

std::string schedule_text(const GateSchedule& sched) {
  return sched.dump();
}

int cmd_derive(const std::string& variant, std::size_t k, std::size_t n, std::size_t d,
               std::size_t t, std::size_t z, std::uint32_t q, bool as_json,
               const std::string& out) {
  SchemeSpec spec = variant == "ramp" ? derive_ramp_params(t, n, z, q)
                                      : derive_params(variant_from_name(variant), k, n, d, q);
  if (as_json) {
    Json j = spec_to_json(spec);
    Json cc = Json::array();
    for (std::size_t dv : spec.d_list)
      cc.push_back({{"d", dv}, {"cc", spec.communication_formula(dv)}});
    j["cc_formula"] = cc;
    write_output(out, j.dump(2));
    return 0;
  }
  std::ostringstream os;
  os << "variant: " << variant_name(spec.variant) << "\n";
  os << "q = " << spec.q.q << " (prime), m = " << spec.m << ", share size w_j = " << spec.m
     << "\n";
  os << "points:";
  for (Fel x : spec.points) os << ' ' << x;
  os << "\ncommunication (formula d*m/(d-k+1)):\n";
  for (std::size_t dv : spec.d_list) {
    std::size_t cc = spec.communication_formula(dv);
    os << "  d=" << dv << ": " << cc << " qudits  (" << double(cc) / double(spec.m)
       << " per secret qudit)\n";
  }
  switch (spec.variant) {
    case Variant::QTS: os << "table row: m=1, CC_n(k)/m=k, q >= 2k-1 (prime)\n"; break;
    case Variant::RampQSS: os << "table row: m=t-z, w_j=1 per block, q > t+z (prime)\n"; break;
    case Variant::StaircaseFixed:
      os << "table row: m=d-k+1, CC_n(d)/m=d/(d-k+1), q > 2k-1 (prime)\n";
      break;
    case Variant::StaircaseUniversal:
      os << "table row: m=lcm{1..k}, CC_n(d)/m=d/(d-k+1), q > 2k-1 (prime floor; chosen "
         << spec.q.q << " so every accessed set recovers at the default points)\n";
      break;
    case Variant::ConcatFixed:
      os << "table row: m=d-k+1, CC_n(d)/m=d/(d-k+1), q > d+k-1 (prime)\n";
      break;
    case Variant::ConcatUniversal:
      os << "table row: m=lcm{1..n-k+1}, CC_n(d)/m=d/(d-k+1), q > n+k-1 (prime)\n";
      break;
  }
  write_output(out, os.str());
  return 0;
}

int cmd_roundtrip(const RunConfig& cfg, const std::string& d_list, const std::string& secret_src,
                  bool explain, const std::string& report_path, const std::string& format) {
  Timer timer;
  Json report = make_report_skeleton("roundtrip", cfg);
  BuiltScheme scheme = cfg.build();
  std::vector<std::size_t> D = parse_party_list(d_list);
  int exit_code = 0;
  try {
    if (secret_src == "entangled") {
      double fid = entangled_reference_fidelity(scheme, D, cfg.budgets);
      GateSchedule sched = plan_recovery(scheme, D);
      report["fidelity"] = fid;
      report["communication_cost"] = sched.total_cost();
      if (explain) report["schedule"] = schedule_to_json(sched);
      if (fid < 1.0 - 1e-9) exit_code = 1;
    } else {
      SparseState secret = make_secret(secret_src, scheme, cfg.seed);
      EncodedState st = encode(scheme, secret, cfg.backend, cfg.budgets);
      RecoveryOutcome out = recover(scheme, st, D, cfg.budgets);
      DensityOperator rho = reduced_on_out(out.transcript, cfg.budgets);
      double fid = fidelity(rho, secret);
      report["fidelity"] = fid;
      report["output_purity"] = rho.purity();
      report["transcript"] = transcript_to_json(out.transcript);
      if (explain) report["schedule"] = schedule_to_json(out.schedule);
      if (fid < 1.0 - 1e-9) exit_code = 1;
      if (format == "text" && explain) {
        std::cout << schedule_text(out.schedule);
      }
    }
  } catch (const AccessStructureViolation&) {
    throw;  // parameter error, exit code 2
  } catch (const UnsupportedD&) {
    throw;
  } catch (const Error& e) {
    report["error"] = e.what();
    exit_code = 1;
  }
  stamp_wall_clock(report, timer.ms());
  if (format == "text") {
    std::ostringstream os;
    if (report.contains("error")) {
      os << "error: " << report["error"].get<std::string>() << "\n";
    } else {
      os << "fidelity: " << report["fidelity"].get<double>()
         << "  cost: " << (report.contains("communication_cost")
                               ? report["communication_cost"].get<std::size_t>()
                               : report["transcript"]["communication_cost"].get<std::size_t>())
         << " qudits\n";
    }
    write_output(report_path, os.str());
  } else {
    write_output(report_path, report.dump(2));
  }
  return exit_code;
}

int cmd_verify(const RunConfig& cfg, const std::string& mutate, const std::string& report_path,
               const std::string& format) {
  Timer timer;
  Json report = make_report_skeleton("verify", cfg);
  BuiltScheme scheme = cfg.build();
  VerifyOptions opt;
  opt.budgets = cfg.budgets;
  opt.seed = cfg.seed;

  SchemeVerdict verdict;
  if (mutate.empty()) {
    verdict = verify_scheme(scheme, opt);
  } else {
    std::string name = mutate;
    std::optional<std::pair<std::size_t, std::size_t>> cell;
    std::size_t colon = mutate.find(':');
    if (colon != std::string::npos) {
      name = mutate.substr(0, colon);
      std::string args = mutate.substr(colon + 1);
      std::size_t comma = args.find(',');
      if (comma == std::string::npos) throw ConfigError("expected --mutate zero-y:<row>,<col>");
      cell = {{std::stoul(args.substr(0, comma)) - 1, std::stoul(args.substr(comma + 1)) - 1}};
    }
    report["mutation"] = name;
    verdict = verify_mutated(scheme, mutation_from_name(name), opt, cell);
  }

  report["verdict"] = verdict_to_json(verdict);
  stamp_wall_clock(report, timer.ms());
  if (format == "csv") {
    write_output(report_path, audit_csv(scheme, mutate.empty() ? verdict.costs
                                                               : audit_costs(scheme)));
  } else if (format == "text") {
    std::ostringstream os;
    for (const auto& rep : verdict.reports)
      os << rep.check << ": " << (rep.all_pass() ? "pass" : "FAIL") << " ("
         << rep.records.size() << " records, " << rep.failures() << " failures, "
         << rep.skips() << " skipped)\n";
    os << "overall: " << (verdict.all_pass() ? "pass" : "FAIL") << "\n";
    write_output(report_path, os.str());
  } else {
    write_output(report_path, report.dump(2));
  }
  return verdict.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact simulator and verifier for communication efficient quantum threshold "
               "secret sharing"};
  app.require_subcommand(1);

  // derive
  auto* derive = app.add_subcommand("derive", "derive scheme parameters");
  std::string d_variant;
  std::size_t d_k = 0, d_n = 0, d_d = 0, d_t = 0, d_z = 0;
  std::uint32_t d_q = 0;
  bool d_json = false;
  std::string d_out;
  derive->add_option("variant", d_variant,
                     "qts | ramp | fixed-staircase | universal-staircase | concat-fixed | "
                     "concat-universal")
      ->required();
  derive->add_option("-k,--k", d_k, "threshold");
  derive->add_option("-n,--n", d_n, "parties")->required();
  derive->add_option("-d,--d", d_d, "fixed recovery count");
  derive->add_option("-t,--t", d_t, "ramp recovery threshold");
  derive->add_option("-z,--z", d_z, "ramp secrecy threshold");
  derive->add_option("--q", d_q, "modulus override (prime)");
  derive->add_flag("--json", d_json, "machine-readable output");
  derive->add_option("--out", d_out, "write to file instead of stdout");

  // roundtrip
  auto* rt = app.add_subcommand("roundtrip", "encode, recover, and report fidelity");
  std::string rt_demo, rt_config, rt_backend, rt_D, rt_secret = "basis", rt_report,
              rt_format = "json";
  std::uint64_t rt_seed = 2024;
  bool rt_explain = false;
  rt->add_option("--demo", rt_demo, "demo scheme name");
  rt->add_option("--config", rt_config, "config file");
  rt->add_option("--D", rt_D, "accessed parties, 1-based, comma separated")->required();
  rt->add_option("--secret", rt_secret, "basis | basis:<symbols> | random | entangled");
  rt->add_option("--backend", rt_backend, "sparse | coset");
  rt->add_option("--seed", rt_seed, "rng seed");
  bool rt_seed_set = false;
  rt->callback([&] { rt_seed_set = rt->count("--seed") > 0; });
  rt->add_flag("--explain", rt_explain, "include the annotated gate schedule");
  rt->add_option("--report", rt_report, "write the report to a file");
  rt->add_option("--format", rt_format, "json | text");

  // verify
  auto* vf = app.add_subcommand("verify", "run the full verification battery");
  std::string vf_demo, vf_config, vf_mutate, vf_report, vf_format = "json";
  std::uint64_t vf_seed = 2024;
  vf->add_option("--demo", vf_demo, "demo scheme name");
  vf->add_option("--config", vf_config, "config file");
  vf->add_option("--mutate", vf_mutate,
                 "tamper first: zero-y[:row,col] | dup-point | truncate-layer | swap-d | "
                 "skip-ctrladd");
  vf->add_option("--seed", vf_seed, "rng seed");
  bool vf_seed_set = false;
  vf->callback([&] { vf_seed_set = vf->count("--seed") > 0; });
  vf->add_option("--report", vf_report, "write the report to a file");
  vf->add_option("--format", vf_format, "json | csv | text");

  // plot-data
  auto* pd = app.add_subcommand("plot-data", "emit the d vs CC_n(d)/m staircase as CSV");
  std::string pd_demo, pd_config, pd_out;
  pd->add_option("--demo", pd_demo, "demo scheme name");
  pd->add_option("--config", pd_config, "config file");
  pd->add_option("--out", pd_out, "output file (default stdout)");

  // demos
  auto* dm = app.add_subcommand("demos", "list the built-in worked examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (derive->parsed())
      return cmd_derive(d_variant, d_k, d_n, d_d, d_t, d_z, d_q, d_json, d_out);
    if (rt->parsed()) {
      RunConfig cfg = config_from_cli(rt_demo, rt_config, rt_backend, rt_seed, rt_seed_set);
      return cmd_roundtrip(cfg, rt_D, rt_secret, rt_explain, rt_report, rt_format);
    }
    if (vf->parsed()) {
      RunConfig cfg = config_from_cli(vf_demo, vf_config, "", vf_seed, vf_seed_set);
      return cmd_verify(cfg, vf_mutate, vf_report, vf_format);
    }
    if (pd->parsed()) {
      RunConfig cfg = config_from_cli(pd_demo, pd_config, "", 0, false);
      write_output(pd_out, plot_csv(cfg.build()));
      return 0;
    }
    if (dm->parsed()) {
      for (const auto& name : demo_names()) std::cout << name << '\n';
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const BadModulus& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NoCloningViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedD& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const AccessStructureViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
