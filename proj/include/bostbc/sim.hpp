#pragma once

// Monte Carlo harness: Rayleigh channel, PAM codeword, AWGN, and paired
// baseline / memoized decoding of the same received vector.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bostbc/codes.hpp"
#include "bostbc/decoder.hpp"
#include "bostbc/random.hpp"
#include "bostbc/structure.hpp"

namespace bostbc {

inline constexpr const char* kSnrConvention =
    "per-receive-antenna SNR; N0 = E[||X||_F^2] / t / 10^(snr_db/10), unit-energy QAM symbols";

/// Average codeword energy per channel use, E[||X||_F^2] / t.
inline double average_codeword_energy(const LinearSTBC& code, const PamConstellation& cons) {
  double s = 0.0;
  for (const auto& a : code.weights) {
    const double f = a.frobenius_norm();
    s += f * f;
  }
  return cons.real_energy() * s / static_cast<double>(code.t);
}

/// Complex noise variance per receive antenna and channel use.
inline double snr_to_noise_variance(double snr_db, const LinearSTBC& code, const PamConstellation& cons) {
  return average_codeword_energy(code, cons) / std::pow(10.0, snr_db / 10.0);
}

struct TrialResult {
  DecoderStats baseline;
  DecoderStats memoized;
  std::vector<std::size_t> transmitted;
  bool decoders_agree = false;
};

struct TrialSetup {
  LinearSTBC code;
  BlockOrthogonalProfile profile;
  std::size_t n_r = 1;
};

/// Applies the label ordering (if any) and detects the profile the memoized
/// decoder will exploit.
inline TrialSetup make_trial_setup(const LinearSTBC& code, const std::vector<std::string>& ordering = {}) {
  TrialSetup s{ordering.empty() ? code : reorder_by_labels(code, ordering), {}, 0};
  const auto prof = detect_profile(structural_zero_pattern(s.code));
  if (!prof) throw Error(Errc::InvalidProfile, "code has no block-orthogonal structure under this ordering");
  s.profile = *prof;
  s.n_r = default_receive_antennas(s.code);
  return s;
}

/// Received signal of one quasi-static Rayleigh trial, before and after
/// the QR rotation.
struct Observation {
  ComplexMatrix h;
  RealMatrix h_eq;
  std::vector<double> y;
  QrResult qr;
  std::vector<double> y_prime;
  std::vector<std::size_t> transmitted;
};

inline Observation make_observation(const TrialSetup& setup, const PamConstellation& cons, double snr_db,
                                    std::uint64_t seed) {
  const LinearSTBC& code = setup.code;
  Rng rng(seed);
  Observation o;
  o.h = rng.complex_gaussian_matrix(setup.n_r, code.n_t);
  o.transmitted.resize(code.k_real());
  for (auto& s : o.transmitted) s = rng.index(cons.size());

  o.h_eq = equivalent_channel(code, o.h);
  o.y.assign(o.h_eq.rows(), 0.0);
  for (std::size_t j = 0; j < o.h_eq.cols(); ++j) {
    const double v = cons.point(o.transmitted[j]);
    for (std::size_t i = 0; i < o.h_eq.rows(); ++i) o.y[i] += o.h_eq(i, j) * v;
  }
  const double n0 = snr_to_noise_variance(snr_db, code, cons);
  const double sigma = std::sqrt(n0 / 2.0);
  for (auto& v : o.y) v += sigma * rng.gaussian();

  o.qr = gram_schmidt_qr(o.h_eq);
  o.y_prime.assign(o.qr.q.cols(), 0.0);
  for (std::size_t j = 0; j < o.qr.q.cols(); ++j) o.y_prime[j] = dot(o.qr.q.column(j), o.y);
  return o;
}

/// One quasi-static Rayleigh realization decoded by both decoders.
inline TrialResult run_trial(const TrialSetup& setup, const PamConstellation& cons, double snr_db, std::uint64_t seed,
                             bool verify_cache = false) {
  const Observation o = make_observation(setup, cons, snr_db, seed);
  TrialResult out;
  out.transmitted = o.transmitted;
  DecoderOptions base_opt;
  base_opt.memoize = false;
  DecoderOptions memo_opt;
  memo_opt.memoize = true;
  memo_opt.verify_cache = verify_cache;
  out.baseline = sphere_decode(o.qr.r, o.y_prime, cons, setup.profile, base_opt);
  out.memoized = sphere_decode(o.qr.r, o.y_prime, cons, setup.profile, memo_opt);
  out.decoders_agree = out.baseline.decoded == out.memoized.decoded;
  return out;
}

struct SimulationCampaign {
  std::string code_id;
  std::vector<std::string> ordering;  ///< empty = code's own ordering
  unsigned m = 2;                     ///< PAM points per real dimension
  std::vector<double> snr_grid_db{0, 4, 8, 12, 16, 20};
  std::size_t trials_per_point = 1000;
  std::uint64_t master_seed = 1;
  std::size_t workers = 0;  ///< 0 = hardware concurrency

  void validate() const {
    if (trials_per_point < 1) throw Error(Errc::InvalidConfig, "trials_per_point must be >= 1");
    if (snr_grid_db.empty()) throw Error(Errc::InvalidConfig, "snr grid is empty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
      if (!(snr_grid_db[i] > snr_grid_db[i - 1])) throw Error(Errc::InvalidConfig, "snr grid must be strictly increasing");
    for (double s : snr_grid_db)
      if (!std::isfinite(s)) throw Error(Errc::InvalidConfig, "snr grid must be finite");
    (void)PamConstellation(m);
  }
};

struct SweepRow {
  double snr_db = 0.0;
  std::size_t trials = 0;
  double mean_em_baseline = 0.0;  ///< EMs above R_1
  double mean_em_memoized = 0.0;
  double emrr = 1.0;
  double mean_flops_baseline = 0.0;  ///< all levels
  double mean_flops_memoized = 0.0;
  double flop_reduction_pct = 0.0;
  std::uint64_t seed = 0;  ///< per-SNR seed, parent of the trial seeds
  std::uint64_t cache_entries_peak = 0;
  std::uint64_t mismatches = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  BlockOrthogonalProfile profile;
  std::uint64_t mem_bound = 0;
};

inline std::uint64_t snr_seed(std::uint64_t master, std::size_t snr_index) { return derive_seed(master, snr_index); }
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t snr_index, std::size_t trial) {
  return derive_seed(snr_seed(master, snr_index), trial);
}

namespace detail {

struct TrialSummary {
  std::uint64_t em_base = 0;
  std::uint64_t em_memo = 0;
  std::uint64_t flops_base = 0;
  std::uint64_t flops_memo = 0;
  std::uint64_t cache_peak = 0;
  bool agree = true;
};

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed) return;
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Runs every SNR point; trial seeds depend only on (master, snr index,
/// trial index) and aggregation is an ordered fold, so results do not
/// depend on the worker count.
inline SweepResult run_sweep(const SimulationCampaign& campaign, const TrialSetup& setup) {
  campaign.validate();
  if (campaign.m > 4 && setup.profile.symbols() > 8)
    throw Error(Errc::InvalidConfig, "64-QAM campaigns are limited to codes with at most 8 real symbols");
  const PamConstellation cons(campaign.m);
  SweepResult result;
  result.profile = setup.profile;
  result.mem_bound = em_count_bounds(setup.profile, campaign.m).mem_entries;
  const std::size_t measured_from = setup.profile.block_size();

  for (std::size_t si = 0; si < campaign.snr_grid_db.size(); ++si) {
    const double snr = campaign.snr_grid_db[si];
    std::vector<detail::TrialSummary> trials(campaign.trials_per_point);
    detail::parallel_for(trials.size(), campaign.workers, [&](std::size_t t) {
      const TrialResult tr = run_trial(setup, cons, snr, trial_seed(campaign.master_seed, si, t));
      trials[t] = {tr.baseline.em_from(measured_from), tr.memoized.em_from(measured_from), tr.baseline.flops,
                   tr.memoized.flops, tr.memoized.cache_entries_peak, tr.decoders_agree};
    });

    SweepRow row;
    row.snr_db = snr;
    row.trials = trials.size();
    row.seed = snr_seed(campaign.master_seed, si);
    std::uint64_t em_b = 0, em_m = 0, fl_b = 0, fl_m = 0;
    for (const auto& t : trials) {
      em_b += t.em_base;
      em_m += t.em_memo;
      fl_b += t.flops_base;
      fl_m += t.flops_memo;
      row.cache_entries_peak = std::max(row.cache_entries_peak, t.cache_peak);
      row.mismatches += t.agree ? 0 : 1;
    }
    const double n = static_cast<double>(trials.size());
    row.mean_em_baseline = static_cast<double>(em_b) / n;
    row.mean_em_memoized = static_cast<double>(em_m) / n;
    row.emrr = em_b ? static_cast<double>(em_m) / static_cast<double>(em_b) : 1.0;
    row.mean_flops_baseline = static_cast<double>(fl_b) / n;
    row.mean_flops_memoized = static_cast<double>(fl_m) / n;
    row.flop_reduction_pct = fl_b ? 100.0 * (1.0 - static_cast<double>(fl_m) / static_cast<double>(fl_b)) : 0.0;
    result.rows.push_back(row);
  }
  return result;
}

inline constexpr const char* kSweepCsvHeader =
    "snr_db,trials,mean_em_baseline,mean_em_memoized,emrr,mean_flops_baseline,mean_flops_memoized,"
    "flop_reduction_pct,seed";

inline void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : result.rows) {
    os << std::setprecision(17) << r.snr_db << ',' << r.trials << ',' << r.mean_em_baseline << ','
       << r.mean_em_memoized << ',' << r.emrr << ',' << r.mean_flops_baseline << ',' << r.mean_flops_memoized << ','
       << r.flop_reduction_pct << ',' << r.seed << '\n';
  }
}

}  // namespace bostbc
