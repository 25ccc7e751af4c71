#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bostbc/codes.hpp"
#include "bostbc/decoder.hpp"
#include "bostbc/io.hpp"
#include "bostbc/sim.hpp"
#include "bostbc/structure.hpp"

using namespace bostbc;

namespace {

struct Common {
  std::string code = "golden";
  std::string ordering;
  std::uint64_t seed = kDefaultChannelSeed;
  std::string out;
  std::string format = "text";
  double tol = kStructuralZeroTolerance;
};

void add_common(CLI::App* app, Common& c, const std::vector<std::string>& formats, bool with_code = true) {
  if (with_code) {
    app->add_option("--code", c.code, "shipped code id or code JSON file")->capture_default_str();
    app->add_option("--ordering", c.ordering, "comma-separated symbol labels");
  }
  app->add_option("--seed", c.seed, "channel / trial seed")->capture_default_str();
  app->add_option("--out", c.out, "output file (default stdout)");
  app->add_option("--format", c.format, "output format")->check(CLI::IsMember(formats))->capture_default_str();
  app->add_option("--tol", c.tol, "relative structural-zero tolerance")->capture_default_str();
}

std::vector<std::string> split_labels(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

LinearSTBC load_code(const std::string& spec) {
  const auto& ids = shipped_code_ids();
  if (std::find(ids.begin(), ids.end(), spec) != ids.end()) return shipped_code(spec);
  if (std::filesystem::exists(spec)) return code_from_json(read_json_file(spec));
  throw Error(Errc::InvalidConfig, "'" + spec + "' is neither a shipped code nor a file");
}

LinearSTBC load_ordered_code(const Common& c) {
  const LinearSTBC code = load_code(c.code);
  const auto labels = split_labels(c.ordering);
  return labels.empty() ? code : reorder_by_labels(code, labels);
}

ComplexMatrix named_matrix(const std::string& name, unsigned a) {
  if (name == "identity") return ComplexMatrix::identity(std::size_t{1} << a);
  if (name == "bhv") return bhv_t_matrix() * default_bhv_rotation();
  if (name == "golden") return golden_m_matrix();
  if (name == "srinath-rajan") return srinath_rajan_m_matrix();
  if (name == "a2") return a2_m_matrix();
  if (std::filesystem::exists(name)) return matrix_from_json(read_json_file(name));
  throw Error(Errc::InvalidConfig, "unknown matrix '" + name + "'");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw Error(Errc::InvalidConfig, "cannot write '" + c.out + "'");
  f << text;
}

void print_config(const std::string& sub, Json cfg) {
  cfg["subcommand"] = sub;
  std::cerr << "config: " << cfg.dump() << '\n';
}

Json common_config(const Common& c) {
  return {{"code", c.code}, {"ordering", split_labels(c.ordering)}, {"seed", c.seed}, {"tol", c.tol},
          {"format", c.format}, {"out", c.out}};
}

std::string labels_line(const LinearSTBC& code) {
  std::string s;
  for (std::size_t i = 0; i < code.labels.size(); ++i) s += (i ? " " : "") + code.labels[i];
  return s;
}

// ---------------------------------------------------------------------------

struct ConstructArgs {
  std::string name;
  unsigned a = 1;
  std::string m;
  std::string design = "golden";
  int sign = 1;
};

LinearSTBC build(const ConstructArgs& x) {
  if (x.name == "golden") return golden_code();
  if (x.name == "bhv") return bhv_code();
  if (x.name == "srinath-rajan") return srinath_rajan_code();
  if (x.name == "alamouti") return alamouti_code();
  if (x.name == "cuwd") return to_code(cuwd_rate1_4group(x.a, x.sign));
  if (x.name == "ciod") return to_code(ciod(x.a));
  if (x.name == "cI") {
    const std::string m = x.m.empty() ? (x.a == 1 ? "bhv" : "a2") : x.m;
    return construction_i(cuwd_rate1_4group(x.a, x.sign), named_matrix(m, x.a));
  }
  if (x.name == "cII") {
    if (x.design == "golden") return construction_ii(golden_cda_design());
    if (x.design == "diagonal") return construction_ii(diagonal_cda_design());
    if (x.design == "scalar") return construction_ii(scalar_cda_design());
    throw Error(Errc::InvalidConfig, "unknown design '" + x.design + "'");
  }
  if (x.name == "cIII")
    return construction_iii(golden_diagonal_half(), named_matrix(x.m.empty() ? "golden" : x.m, 1));
  if (x.name == "cIV")
    return construction_iv(ciod(x.a), named_matrix(x.m.empty() ? (x.a == 1 ? "srinath-rajan" : "a2") : x.m, x.a));
  throw Error(Errc::InvalidConfig, "unknown construction '" + x.name + "'");
}

void run_construct(const Common& c, const ConstructArgs& x) {
  print_config("construct", {{"name", x.name}, {"a", x.a}, {"m", x.m}, {"design", x.design}, {"sign", x.sign},
                             {"format", c.format}, {"out", c.out}});
  const LinearSTBC code = build(x);
  if (c.format == "json") {
    emit(c, code_to_json(code).dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << x.name << ": n_t=" << code.n_t << " t=" << code.t << " K=" << code.k_real() << '\n';
  os << "labels: " << labels_line(code) << '\n';
  os << "declared profile: " << (code.declared_profile ? code.declared_profile->to_string() : "none") << '\n';
  emit(c, os.str());
}

void run_analyze(const Common& c, std::size_t channels, bool search) {
  Json cfg = common_config(c);
  cfg["channels"] = channels;
  cfg["search"] = search;
  print_config("analyze", cfg);
  LinearSTBC code = load_ordered_code(c);
  Json search_json;
  if (search) {
    const OrderingResult res = ordering_search(code, OrderingStrategy::Auto, 4, c.seed);
    code = reorder(code, res.permutation);
    search_json = {{"ordering", code.labels}, {"profile", profile_to_json(res.profile)}};
  }
  const StructureReport rep = analyze_code(code, channels, c.seed, c.tol);
  if (c.format == "json") {
    Json j = report_to_json(rep);
    j["labels"] = code.labels;
    if (search) j["search"] = search_json;
    emit(c, j.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << "ordering: " << labels_line(code) << '\n';
  os << pattern_to_grid(rep.pattern);
  os << "classification: " << rep.label() << '\n';
  if (rep.profile && rep.profile->gamma_blocks >= 2)
    os << "profile: " << rep.profile->to_string() << '\n';
  else
    os << "no block-orthogonal structure\n";
  for (const auto& cond : rep.conditions)
    os << "  " << (cond.pass ? "yes " : "no  ") << cond.name << " (" << cond.residual << ")\n";
  emit(c, os.str());
}

void run_verify(const Common& c, std::size_t channels, const std::string& check) {
  Json cfg = common_config(c);
  cfg["channels"] = channels;
  cfg["check"] = check;
  print_config("verify", cfg);
  const LinearSTBC code = load_ordered_code(c);
  const auto hs = sample_channels(code, channels, c.seed);
  auto profile = code.declared_profile;
  if (!profile) profile = detect_profile(structural_zero_pattern(code, hs, c.tol));
  std::vector<VerificationReport> reports;

  const bool want_two = check == "auto" || check == "two-block";
  const bool want_rec = check == "auto" || check == "recursive";
  const bool want_ci = check == "ci" || (check == "auto" && code.k_real() % 8 == 0 && profile &&
                                         *profile == BlockOrthogonalProfile{2, 4, code.k_real() / 8});
  if ((want_two || want_rec) && !profile) throw Error(Errc::InvalidProfile, "no profile declared or detected");
  if (want_two && profile->gamma_blocks == 2)
    reports.push_back(verify_two_block_premises(code, profile->k, profile->gamma, hs));
  if (want_rec) reports.push_back(verify_recursive_block_premises(code, *profile, hs));
  if (want_ci) {
    VerificationReport agg{"construction I R structure", {}, {}};
    for (const auto& h : hs) {
      const VerificationReport one = verify_construction_i_structure(code, h);
      if (agg.conditions.empty()) {
        agg = one;
        continue;
      }
      for (std::size_t i = 0; i < one.conditions.size(); ++i) {
        agg.conditions[i].pass = agg.conditions[i].pass && one.conditions[i].pass;
        agg.conditions[i].residual = std::max(agg.conditions[i].residual, one.conditions[i].residual);
      }
    }
    reports.push_back(agg);
  }
  if (reports.empty()) throw Error(Errc::InvalidConfig, "check '" + check + "' does not apply to this code");

  bool all = true;
  for (const auto& r : reports) all = all && r.passed();
  if (c.format == "json") {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(verification_to_json(r));
    emit(c, Json{{"profile", profile_to_json(profile)}, {"passed", all}, {"reports", arr}}.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << "profile: " << (profile ? profile->to_string() : "none") << '\n';
  for (const auto& r : reports) {
    os << r.name << ": " << (r.passed() ? "pass" : "FAIL") << '\n';
    for (const auto& cond : r.conditions)
      os << "  " << (cond.pass ? "yes " : "no  ") << cond.name << " (" << cond.residual << ")\n";
    for (const auto& n : r.notes) os << "  note: " << n << '\n';
  }
  emit(c, os.str());
}

void run_decode(const Common& c, unsigned m, double snr, const std::string& trace_path, bool exhaustive) {
  Json cfg = common_config(c);
  cfg["m"] = m;
  cfg["snr_db"] = snr;
  cfg["trace"] = trace_path;
  cfg["exhaustive"] = exhaustive;
  cfg["snr_convention"] = kSnrConvention;
  print_config("decode", cfg);
  const PamConstellation cons(m);
  const TrialSetup setup = make_trial_setup(load_code(c.code), split_labels(c.ordering));
  const Observation o = make_observation(setup, cons, snr, c.seed);

  DecoderOptions base_opt;
  base_opt.pattern_tol = c.tol;
  DecoderOptions memo_opt = base_opt;
  memo_opt.memoize = true;
  memo_opt.verify_cache = true;
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw Error(Errc::InvalidConfig, "cannot write '" + trace_path + "'");
    memo_opt.trace = &trace;
  }
  const DecoderStats base = sphere_decode(o.qr.r, o.y_prime, cons, setup.profile, base_opt);
  const DecoderStats memo = sphere_decode(o.qr.r, o.y_prime, cons, setup.profile, memo_opt);
  std::optional<std::vector<std::size_t>> oracle;
  if (exhaustive) oracle = exhaustive_ml(o.h_eq, o.y, cons);

  if (c.format == "json") {
    Json j = {{"profile", profile_to_json(setup.profile)},
              {"transmitted", o.transmitted},
              {"baseline", stats_to_json(base)},
              {"memoized", stats_to_json(memo)},
              {"agree", base.decoded == memo.decoded}};
    if (oracle) j["exhaustive"] = *oracle;
    emit(c, j.dump(2) + "\n");
    return;
  }
  auto vec = [](const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
  };
  std::ostringstream os;
  os << "profile: " << setup.profile << '\n';
  os << "transmitted: " << vec(o.transmitted) << '\n';
  os << "baseline:    " << vec(base.decoded) << "  ems=" << base.em_evaluations << " flops=" << base.flops << '\n';
  os << "memoized:    " << vec(memo.decoded) << "  ems=" << memo.em_evaluations << " flops=" << memo.flops
     << " hits=" << memo.cache_hits << " peak=" << memo.cache_entries_peak << '\n';
  if (oracle) os << "exhaustive:  " << vec(*oracle) << '\n';
  emit(c, os.str());
}

BlockOrthogonalProfile parse_profile(const std::string& s) {
  const auto parts = split_labels(s);
  if (parts.size() != 3) throw Error(Errc::InvalidConfig, "profile must be Gamma,k,gamma");
  try {
    BlockOrthogonalProfile p{std::stoul(parts[0]), std::stoul(parts[1]), std::stoul(parts[2])};
    p.validate();
    return p;
  } catch (const std::logic_error&) {
    throw Error(Errc::InvalidConfig, "profile must be Gamma,k,gamma");
  }
}

void run_bounds(const Common& c, const std::string& profile_text, unsigned m) {
  print_config("bounds", {{"profile", profile_text}, {"m", m}, {"format", c.format}, {"out", c.out}});
  const BlockOrthogonalProfile p = parse_profile(profile_text);
  const Json j = bounds_to_json(p, m);
  if (c.format == "json") {
    emit(c, j.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << "profile " << p << ", M=" << m << '\n';
  os << "  EMs above R1, baseline:  " << j["o_stbc"].get<std::uint64_t>() << '\n';
  os << "  EMs above R1, memoized:  " << j["o_bostbc"].get<std::uint64_t>() << '\n';
  os << "  EMRR:                    " << j["emrr"].get<std::string>() << " = " << j["emrr_value"].get<double>() << '\n';
  os << "  cache entries:           " << j["mem_entries"].get<std::uint64_t>() << '\n';
  os << "  QRDM ratio:              " << j["qrdm_ratio"].get<std::string>() << " = "
     << j["qrdm_ratio_value"].get<double>() << '\n';
  emit(c, os.str());
}

void run_simulate(const Common& c, const std::string& config, int workers, long trials) {
  SimulationCampaign camp = campaign_from_json(read_json_file(config));
  if (workers >= 0) camp.workers = static_cast<std::size_t>(workers);
  if (trials > 0) camp.trials_per_point = static_cast<std::size_t>(trials);
  camp.validate();
  Json cfg = campaign_to_json(camp);
  cfg["config"] = config;
  cfg["format"] = c.format;
  cfg["out"] = c.out;
  cfg["snr_convention"] = kSnrConvention;
  print_config("simulate", cfg);
  const TrialSetup setup = make_trial_setup(load_code(camp.code_id), camp.ordering);
  const SweepResult r = run_sweep(camp, setup);
  if (c.format == "json") {
    emit(c, sweep_to_json(camp, r).dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  write_sweep_csv(os, r);
  emit(c, os.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-orthogonal STBC toolkit"};
  app.require_subcommand(1);

  Common construct_c, analyze_c, verify_c, decode_c, bounds_c, simulate_c;
  construct_c.format = "json";
  simulate_c.format = "csv";

  ConstructArgs cx;
  auto* construct = app.add_subcommand("construct", "build a code and write its JSON");
  construct
      ->add_option("name", cx.name, "golden, bhv, srinath-rajan, alamouti, cuwd, ciod, cI, cII, cIII, cIV")
      ->required();
  construct->add_option("--a", cx.a, "log2 of the antenna count")->capture_default_str();
  construct->add_option("--m", cx.m, "M matrix: identity, bhv, golden, srinath-rajan, a2 or a JSON file");
  construct->add_option("--design", cx.design, "cII design: golden, diagonal, scalar")->capture_default_str();
  construct->add_option("--sign", cx.sign, "sign of R(gamma_1) in the CUWD")->check(CLI::IsMember({-1, 1}));
  add_common(construct, construct_c, {"json", "text"}, false);

  std::size_t analyze_channels = kPatternChannels;
  bool analyze_search = false;
  auto* analyze = app.add_subcommand("analyze", "print the R zero pattern and detected profile");
  add_common(analyze, analyze_c, {"text", "json"});
  analyze->add_option("--channels", analyze_channels, "random channels")->capture_default_str();
  analyze->add_flag("--search", analyze_search, "search for the ordering with the largest Gamma*k");

  std::size_t verify_channels = 50;
  std::string verify_check = "auto";
  auto* verify = app.add_subcommand("verify", "check construction premises and R structure");
  add_common(verify, verify_c, {"text", "json"});
  verify->add_option("--channels", verify_channels, "random channels")->capture_default_str();
  verify->add_option("--check", verify_check, "auto, two-block, recursive, ci")
      ->check(CLI::IsMember({"auto", "two-block", "recursive", "ci"}))
      ->capture_default_str();

  unsigned decode_m = 2;
  double decode_snr = 10.0;
  std::string decode_trace;
  bool decode_exhaustive = false;
  auto* decode = app.add_subcommand("decode", "decode one random trial with both decoders");
  add_common(decode, decode_c, {"text", "json"});
  decode->add_option("--m", decode_m, "PAM points per real dimension")->capture_default_str();
  decode->add_option("--snr", decode_snr, "SNR in dB")->capture_default_str();
  decode->add_option("--trace", decode_trace, "JSON-lines trace of the memoized search");
  decode->add_flag("--exhaustive", decode_exhaustive, "also run the brute-force oracle");

  std::string bounds_profile = "2,4,1";
  unsigned bounds_m = 2;
  auto* bounds = app.add_subcommand("bounds", "closed-form EM counts, EMRR, memory and QRDM ratio");
  add_common(bounds, bounds_c, {"text", "json"}, false);
  bounds->add_option("--profile", bounds_profile, "Gamma,k,gamma")->capture_default_str();
  bounds->add_option("--m", bounds_m, "PAM points per real dimension")->capture_default_str();

  std::string sim_config;
  int sim_workers = -1;
  long sim_trials = 0;
  auto* simulate = app.add_subcommand("simulate", "run an SNR sweep from a campaign JSON");
  add_common(simulate, simulate_c, {"csv", "json"}, false);
  simulate->add_option("config", sim_config, "campaign JSON file")->required();
  simulate->add_option("--workers", sim_workers, "override worker count (0 = all cores)");
  simulate->add_option("--trials", sim_trials, "override trials per point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (construct->parsed()) run_construct(construct_c, cx);
    if (analyze->parsed()) run_analyze(analyze_c, analyze_channels, analyze_search);
    if (verify->parsed()) run_verify(verify_c, verify_channels, verify_check);
    if (decode->parsed()) run_decode(decode_c, decode_m, decode_snr, decode_trace, decode_exhaustive);
    if (bounds->parsed()) run_bounds(bounds_c, bounds_profile, bounds_m);
    if (simulate->parsed()) run_simulate(simulate_c, sim_config, sim_workers, sim_trials);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::Internal ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
