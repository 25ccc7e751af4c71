#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bostbc/codes.hpp"
#include "bostbc/decoder.hpp"
#include "bostbc/random.hpp"
#include "bostbc/sim.hpp"
#include "bostbc/structure.hpp"

using namespace bostbc;

namespace {

// Pinned tolerances and run sizes.
constexpr double kPatternTolRel = 1e-9;
constexpr std::size_t kPatternChannelCount = 100;
constexpr double kPatternRuntimeLimitS = 5.0;
constexpr std::size_t kProfileChannelCount = 20;
constexpr std::size_t kMlTrials = 1000;
constexpr std::size_t kSweepTrials = 1000;
constexpr double kFlopBandLow = 15.0;
constexpr double kFlopBandHigh = 45.0;
constexpr double kFlopFloor222 = 8.0;
constexpr double kEmrrSlack = 0.02;
constexpr std::size_t kStructureChannels = 50;
constexpr double kStructureTol = 1e-9;
constexpr std::uint64_t kPatternSeed = 101;
constexpr std::uint64_t kProfileSeed = 202;
constexpr std::uint64_t kMlSeed = 303;
constexpr std::uint64_t kSweepSeed = 404;
constexpr std::uint64_t kStructureSeed = 505;

// Criteria that cannot pass as stated. A listed criterion still prints
// FAIL; only its remaining sub-checks gate the exit code.
const std::map<int, std::string> kKnownUnattainable = {
    {1,
     "first Golden display contradicts the second: r(1,3) there and r(1,2) in the second are both "
     "<h(s1I), h(s2I)>/|h(s1I)|, printed 0 and t respectively; the first display is the pattern of the "
     "ordering with s2 and s4 I/Q swapped"},
};

struct Outcome {
  bool pass = true;
  bool pass_excluding_waived = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what, bool waivable = false) {
    pass = pass && ok;
    if (!waivable) pass_excluding_waived = pass_excluding_waived && ok;
    if (!ok) notes.push_back(what);
  }
  void info(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << std::fixed << v;
  return os.str();
}

std::vector<std::string> diff_entries(const ZeroPattern& got, const ZeroPattern& want) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < want.rows(); ++i)
    for (std::size_t j = i + 1; j < want.cols(); ++j)
      if (got(i, j) != want(i, j))
        out.push_back("(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")=" + (got(i, j) ? "0" : "t"));
  return out;
}

std::string join(const std::vector<std::string>& v, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

// ---------------------------------------------------------------------------

Outcome golden_orderings() {
  struct Display {
    const char* name;
    std::vector<std::string> ordering;
    std::vector<std::string> grid;
    std::optional<BlockOrthogonalProfile> profile;
    bool waivable;
  };
  const std::vector<Display> displays = {
      {"A",
       {"s1I", "s1Q", "s2I", "s2Q", "s3I", "s3Q", "s4I", "s4Q"},
       {"t 0 0 t t t t t", "0 t t 0 t t t t", "0 0 t 0 t t t t", "0 0 0 t t t t t", "0 0 0 0 t 0 0 t",
        "0 0 0 0 0 t t 0", "0 0 0 0 0 0 t 0", "0 0 0 0 0 0 0 t"},
       BlockOrthogonalProfile{4, 2, 1},
       true},
      {"B",
       {"s1I", "s2I", "s1Q", "s2Q", "s3I", "s4I", "s3Q", "s4Q"},
       {"t t 0 0 t t t t", "0 t 0 0 t t t t", "0 0 t t t t t t", "0 0 0 t t t t t", "0 0 0 0 t t 0 0",
        "0 0 0 0 0 t 0 0", "0 0 0 0 0 0 t t", "0 0 0 0 0 0 0 t"},
       BlockOrthogonalProfile{2, 2, 2},
       false},
      {"C",
       {"s1I", "s1Q", "s4I", "s2Q", "s3I", "s3Q", "s2I", "s4Q"},
       {"t 0 t 0 t t t t", "0 t t t t t 0 t", "0 0 t t t t t 0", "0 0 0 t t t t t", "0 0 0 0 t t t t",
        "0 0 0 0 0 t t t", "0 0 0 0 0 0 t t", "0 0 0 0 0 0 0 t"},
       std::nullopt,
       false},
  };

  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& d : displays) {
    const LinearSTBC code = reorder_by_labels(golden_code(), d.ordering);
    const ZeroPattern want = pattern_from_grid(d.grid);
    const auto channels = sample_channels(code, kPatternChannelCount, kPatternSeed);
    std::size_t equal = 0;
    std::vector<std::string> first_diff;
    for (const auto& h : channels) {
      const ZeroPattern got = r_factorize(code, h, kPatternTolRel).zero_pattern;
      if (got == want) {
        ++equal;
      } else if (first_diff.empty()) {
        first_diff = diff_entries(got, want);
      }
    }
    out.check(equal == channels.size(),
              std::string("ordering ") + d.name + ": " + std::to_string(equal) + "/" +
                  std::to_string(channels.size()) + " channels equal display, measured " + join(first_diff),
              d.waivable);
    const auto prof = detect_profile(structural_zero_pattern(code, channels));
    out.check(prof == d.profile, std::string("ordering ") + d.name + ": profile " +
                                     (prof ? prof->to_string() : "none"));
  }
  // diagnostic only: display A is what the ordering with s2, s4 I/Q swapped produces
  const LinearSTBC swapped = reorder_by_labels(
      golden_code(), std::vector<std::string>{"s1I", "s1Q", "s2Q", "s2I", "s3I", "s3Q", "s4Q", "s4I"});
  if (structural_zero_pattern(swapped) == pattern_from_grid(displays.front().grid))
    out.info("display A equals the pattern of ordering s1I s1Q s2Q s2I s3I s3Q s4Q s4I");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.check(secs < kPatternRuntimeLimitS, "runtime " + fmt(secs, 2) + " s");
  out.info("runtime " + fmt(secs, 2) + " s");
  return out;
}

Outcome named_profiles() {
  struct Case {
    const char* name;
    LinearSTBC code;
    BlockOrthogonalProfile profile;
  };
  const std::vector<Case> cases = {
      {"BHV", bhv_code(), {2, 4, 1}},
      {"Srinath-Rajan", srinath_rajan_code(), {2, 2, 2}},
      {"Golden via CIII", shipped_code("golden-ciii"), {2, 2, 2}},
      {"Golden via CII", shipped_code("golden-cii"), {4, 2, 1}},
      {"CI a=2", shipped_code("ci-a2"), {2, 4, 2}},
      {"CIV a=1", shipped_code("civ-a1"), {2, 2, 2}},
  };
  Outcome out;
  for (const auto& c : cases) {
    const auto channels = sample_channels(c.code, kProfileChannelCount, kProfileSeed);
    std::size_t ok = 0;
    for (const auto& h : channels)
      if (pattern_matches_profile(r_factorize(c.code, h, kPatternTolRel).zero_pattern, c.profile)) ++ok;
    const auto detected = detect_profile(structural_zero_pattern(c.code, channels));
    out.check(ok == channels.size(), std::string(c.name) + ": " + std::to_string(ok) + "/20 channels show " +
                                         c.profile.to_string());
    out.info(std::string(c.name) + " max " + (detected ? detected->to_string() : "none"));
  }
  return out;
}

// Independent closed-form oracle: the memoized tree evaluates each of the
// k sub-block trees (M + ... + M^gamma EMs) once per upper-block prefix;
// the baseline evaluates M + ... + M^{k gamma} per upper-block prefix.
Rational emrr_oracle(const BlockOrthogonalProfile& p, std::uint64_t m) {
  std::uint64_t sub = 0, full = 0, pw = 1;
  for (std::size_t i = 1; i <= p.block_size(); ++i) {
    pw *= m;
    full += pw;
    if (i <= p.gamma) sub += pw;
  }
  return Rational::make(p.k * sub, full);
}

struct FullTreeCase {
  BlockOrthogonalProfile p;
  unsigned m;
  Rational expected;
};

const std::vector<FullTreeCase> kFullTreeCases = {
    {{2, 2, 1}, 2, Rational::make(2, 3)},
    {{2, 4, 1}, 4, Rational::make(12, 255)},
    {{2, 2, 2}, 2, Rational::make(2, 5)},
};

RealMatrix random_structured_r(Rng& rng, const BlockOrthogonalProfile& p) {
  const std::size_t k = p.symbols();
  RealMatrix r(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= j; ++i) r(i, j) = rng.gaussian();
  for (std::size_t i = 0; i < k; ++i) r(i, i) = 0.5 + std::abs(r(i, i));
  for (const auto& [i, j] : required_zeros(p)) r(i, j) = 0.0;
  return r;
}

std::vector<double> random_observation(Rng& rng, std::size_t n) {
  std::vector<double> y(n);
  for (auto& v : y) v = rng.gaussian();
  return y;
}

Outcome closed_form_counts(std::vector<std::pair<std::string, bool>>& peak_equalities) {
  Outcome out;
  Rng rng(kStructureSeed + 1);
  for (const auto& c : kFullTreeCases) {
    const PamConstellation cons(c.m);
    const RealMatrix r = random_structured_r(rng, c.p);
    const auto y = random_observation(rng, r.rows());
    const DecoderStats base = force_full_tree_decode(r, y, cons, c.p, false);
    const DecoderStats memo = force_full_tree_decode(r, y, cons, c.p, true);
    const std::size_t n = c.p.block_size();
    const Rational measured = Rational::make(memo.em_from(n), base.em_from(n));
    const std::string tag = c.p.to_string() + "/M=" + std::to_string(c.m);
    out.check(measured == c.expected, tag + " measured " + measured.to_string() + " expected " + c.expected.to_string());
    out.check(emrr_oracle(c.p, c.m) == c.expected, tag + " oracle " + emrr_oracle(c.p, c.m).to_string());
    out.check(em_count_bounds(c.p, c.m).emrr == c.expected, tag + " library " + em_count_bounds(c.p, c.m).emrr.to_string());
    out.info(tag + " = " + measured.to_string());
    peak_equalities.emplace_back(tag, memo.cache_entries_peak == em_count_bounds(c.p, c.m).mem_entries);
  }
  return out;
}

struct MlTally {
  std::size_t trials = 0;
  std::size_t mismatches = 0;
  std::uint64_t worst_peak_excess = 0;
  bool peak_ok = true;
};

MlTally ml_equivalence(const std::string& id, std::size_t code_index) {
  const TrialSetup setup = make_trial_setup(shipped_code(id));
  const PamConstellation cons(2);
  const std::uint64_t bound = em_count_bounds(setup.profile, 2).mem_entries;
  const std::vector<double> snrs = {0, 4, 8, 12, 16, 20};
  std::vector<int> mismatch(kMlTrials, 0), over(kMlTrials, 0);
  detail::parallel_for(kMlTrials, 0, [&](std::size_t t) {
    Rng rng(derive_seed(derive_seed(kMlSeed, code_index), t));
    const LinearSTBC& code = setup.code;
    const ComplexMatrix h = rng.complex_gaussian_matrix(setup.n_r, code.n_t);
    std::vector<double> x(code.k_real());
    for (auto& v : x) v = cons.point(rng.index(cons.size()));
    const RealMatrix h_eq = equivalent_channel(code, h);
    std::vector<double> y = matvec(h_eq, x);
    const double sigma = std::sqrt(snr_to_noise_variance(snrs[t % snrs.size()], code, cons) / 2.0);
    for (auto& v : y) v += sigma * rng.gaussian();

    const QrResult qr = gram_schmidt_qr(h_eq);
    std::vector<double> yp(qr.q.cols());
    for (std::size_t j = 0; j < yp.size(); ++j) yp[j] = dot(qr.q.column(j), y);
    DecoderOptions base_opt, memo_opt;
    memo_opt.memoize = true;
    memo_opt.verify_cache = true;
    const DecoderStats base = sphere_decode(qr.r, yp, cons, setup.profile, base_opt);
    const DecoderStats memo = sphere_decode(qr.r, yp, cons, setup.profile, memo_opt);
    const auto oracle = exhaustive_ml(h_eq, y, cons);
    mismatch[t] = !(base.decoded == oracle && memo.decoded == oracle);
    over[t] = memo.cache_entries_peak > bound;
  });
  MlTally tally;
  tally.trials = kMlTrials;
  for (std::size_t t = 0; t < kMlTrials; ++t) {
    tally.mismatches += mismatch[t];
    tally.peak_ok = tally.peak_ok && !over[t];
  }
  return tally;
}

SweepResult sweep(const TrialSetup& setup, const std::string& id, std::vector<double> grid, unsigned m = 2) {
  SimulationCampaign c;
  c.code_id = id;
  c.m = m;
  c.snr_grid_db = std::move(grid);
  c.trials_per_point = kSweepTrials;
  c.master_seed = kSweepSeed;
  return run_sweep(c, setup);
}

SweepResult sweep(const std::string& id, std::vector<double> grid, unsigned m = 2) {
  return sweep(make_trial_setup(shipped_code(id)), id, std::move(grid), m);
}

Outcome construction_structure() {
  Outcome out;
  struct Case {
    const char* name;
    LinearSTBC code;
  };
  const std::vector<Case> cases = {
      {"CI a=1", construction_i(cuwd_rate1_4group(1), bhv_t_matrix() * default_bhv_rotation())},
      {"CI a=2", shipped_code("ci-a2")},
  };
  for (const auto& c : cases) {
    double worst = 0.0;
    std::size_t passing = 0;
    for (const auto& h : sample_channels(c.code, kStructureChannels, kStructureSeed)) {
      const VerificationReport rep = verify_construction_i_structure(c.code, h);
      bool all = true;
      for (const auto& cond : rep.conditions) {
        worst = std::max(worst, cond.residual);
        all = all && cond.pass && cond.residual < kStructureTol;
      }
      passing += all;
    }
    out.check(passing == kStructureChannels,
              std::string(c.name) + ": " + std::to_string(passing) + "/50 channels");
    out.info(std::string(c.name) + " worst residual " + fmt(worst * 1e15, 1) + "e-15");
  }

  const LinearSTBC cii = shipped_code("golden-cii");
  std::size_t zero_pairs = 0, pairs = 0;
  for (const auto& h : sample_channels(cii, kStructureChannels, kStructureSeed)) {
    const auto f = r_factorize(cii, h, kPatternTolRel);
    for (std::size_t i = 0; i + 1 < cii.k_real(); i += 2) {
      ++pairs;
      zero_pairs += f.zero_pattern(i, i + 1);
    }
  }
  out.check(zero_pairs == pairs, "CII r(2i-1,2i): " + std::to_string(zero_pairs) + "/" + std::to_string(pairs) + " zero");
  return out;
}

Outcome qrdm_values() {
  Outcome out;
  // M^gamma / (k (M^gamma - 1)) evaluated by hand
  const std::vector<Rational> expected = {Rational::make(2, 2), Rational::make(4, 12), Rational::make(4, 6)};
  for (std::size_t i = 0; i < kFullTreeCases.size(); ++i) {
    const auto& c = kFullTreeCases[i];
    const Rational got = qrdm_bound(c.p.k, c.p.gamma, c.m);
    out.check(got == expected[i], c.p.to_string() + "/M=" + std::to_string(c.m) + " got " + got.to_string());
    out.info(c.p.to_string() + "/M=" + std::to_string(c.m) + " = " + got.to_string());
  }
  return out;
}

}  // namespace

int main() {
  std::map<int, std::pair<std::string, Outcome>> results;

  results[1] = {"Golden ordering patterns", golden_orderings()};
  results[2] = {"named-code profiles", named_profiles()};

  std::vector<std::pair<std::string, bool>> peak_equalities;
  results[3] = {"closed-form EM ratios", closed_form_counts(peak_equalities)};

  // ML equivalence (5) also feeds the per-trial cache bound (4).
  Outcome ml, cache;
  for (std::size_t i = 0; i < shipped_code_ids().size(); ++i) {
    const std::string& id = shipped_code_ids()[i];
    const MlTally t = ml_equivalence(id, i);
    ml.check(t.mismatches == 0, id + ": " + std::to_string(t.mismatches) + " mismatches");
    cache.check(t.peak_ok, id + ": cache peak above bound");
  }
  ml.info(std::to_string(shipped_code_ids().size()) + " codes x " + std::to_string(kMlTrials) + " trials at 4-QAM");

  const std::vector<double> low = {0, 2, 4};
  const SweepResult bhv_low = sweep("bhv", low);
  Outcome flops;
  for (const auto& r : bhv_low.rows) {
    flops.check(r.flop_reduction_pct >= kFlopBandLow && r.flop_reduction_pct <= kFlopBandHigh,
                "BHV " + fmt(r.snr_db, 0) + " dB reduction " + fmt(r.flop_reduction_pct, 1) + "%");
  }
  std::vector<std::string> flop_summary;
  for (const auto& r : bhv_low.rows) flop_summary.push_back(fmt(r.flop_reduction_pct, 1));
  flops.info("BHV " + join(flop_summary, "/") + "%");
  // Srinath-Rajan also has the finer (2,4,1) zeros; decode it with (2,2,2)
  // here so both codes exercise the (2,2,2) search.
  for (const std::string id : {"golden-ciii", "srinath-rajan"}) {
    TrialSetup setup = make_trial_setup(shipped_code(id));
    setup.profile = BlockOrthogonalProfile{2, 2, 2};
    const SweepResult s = sweep(setup, id, low);
    std::vector<std::string> vals;
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const double red = s.rows[i].flop_reduction_pct;
      vals.push_back(fmt(red, 1));
      flops.check(red < bhv_low.rows[i].flop_reduction_pct, id + " " + fmt(s.rows[i].snr_db, 0) + " dB not below BHV");
      flops.check(red >= kFlopFloor222, id + " " + fmt(s.rows[i].snr_db, 0) + " dB reduction " + fmt(red, 1) + "%");
    }
    flops.info(id + " " + join(vals, "/") + "%");
  }
  for (const auto& r : bhv_low.rows) cache.check(r.cache_entries_peak <= bhv_low.mem_bound, "BHV sweep cache peak");

  Outcome trends;
  const std::vector<double> grid = {0, 4, 8, 12, 16, 20};
  for (const std::string& id : shipped_code_ids()) {
    const TrialSetup s = make_trial_setup(shipped_code(id));
    if (s.profile.gamma_blocks < 2) continue;
    const SweepResult r = sweep(id, grid);
    std::vector<std::string> vals;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      vals.push_back(fmt(r.rows[i].emrr, 3));
      if (i > 0)
        trends.check(r.rows[i].emrr >= r.rows[i - 1].emrr - kEmrrSlack,
                     id + " EMRR drops at " + fmt(r.rows[i].snr_db, 0) + " dB");
      cache.check(r.rows[i].cache_entries_peak <= r.mem_bound, id + " sweep cache peak");
      cache.check(r.rows[i].mismatches == 0, id + " sweep decoder mismatch");
    }
    trends.check(r.rows.back().emrr > r.rows.front().emrr && r.rows.back().emrr <= 1.0, id + " EMRR not rising toward 1");
    trends.info(id + " " + join(vals, "/"));
  }
  const SweepResult q16 = sweep("bhv", {0}, 4);
  const double q4_emrr = bhv_low.rows.front().emrr;
  trends.check(q16.rows[0].emrr < q4_emrr, "16-QAM EMRR " + fmt(q16.rows[0].emrr, 3) + " not below 4-QAM");
  trends.info("BHV 0 dB 4-QAM " + fmt(q4_emrr, 3) + " 16-QAM " + fmt(q16.rows[0].emrr, 3));
  for (const auto& r : q16.rows) cache.check(r.cache_entries_peak <= q16.mem_bound, "BHV 16-QAM cache peak");

  bool any_equal = false;
  for (const auto& [tag, eq] : peak_equalities) any_equal = any_equal || eq;
  // full tree of a (2,4,2) code at M=2
  {
    Rng rng(kStructureSeed + 2);
    const BlockOrthogonalProfile p{2, 4, 2};
    const RealMatrix r = random_structured_r(rng, p);
    const auto y = random_observation(rng, r.rows());
    const DecoderStats memo = force_full_tree_decode(r, y, PamConstellation(2), p, true);
    const bool eq = memo.cache_entries_peak == em_count_bounds(p, 2).mem_entries;
    peak_equalities.emplace_back("(2,4,2)/M=2", eq);
    any_equal = any_equal || eq;
  }
  cache.check(any_equal, "bound never reached on a full-tree run");
  std::vector<std::string> eq_tags;
  for (const auto& [tag, eq] : peak_equalities)
    if (eq) eq_tags.push_back(tag);
  cache.info("bound reached on " + join(eq_tags, ", "));

  results[4] = {"cache memory bound", cache};
  results[5] = {"ML equivalence", ml};
  results[6] = {"low-SNR FLOP reduction", flops};
  results[7] = {"EMRR trends", trends};
  results[8] = {"Construction I/II R structure", construction_structure()};
  results[9] = {"QRDM bound values", qrdm_values()};

  int blocking = 0;
  for (const auto& [n, entry] : results) {
    const auto& [name, o] = entry;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), join(o.notes, "; ").c_str());
    const auto waived = kKnownUnattainable.find(n);
    if (!o.pass && waived != kKnownUnattainable.end()) {
      std::printf("     known unattainable: %s\n", waived->second.c_str());
      if (!o.pass_excluding_waived) ++blocking;
    } else if (!o.pass) {
      ++blocking;
    }
  }
  std::printf("%s\n", blocking ? "acceptance: FAILED" : "acceptance: all attainable criteria pass");
  return blocking ? 1 : 0;
}
