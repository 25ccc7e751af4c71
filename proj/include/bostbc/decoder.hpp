#pragma once

// Depth-first Schnorr-Euchner sphere decoder over real PAM alphabets, with
// optional memoization of sub-block metrics for block-orthogonal R factors.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bostbc/error.hpp"
#include "bostbc/matrix.hpp"
#include "bostbc/profile.hpp"
#include "bostbc/structure.hpp"

namespace bostbc {

/// M-PAM alphabet {-(M-1), ..., -1, +1, ..., M-1} scaled so that two real
/// dimensions (one QAM symbol) carry unit average energy.
class PamConstellation {
 public:
  explicit PamConstellation(unsigned m) : m_(m) {
    if (m != 2 && m != 4 && m != 8) throw Error(Errc::InvalidConfig, "PAM size must be 2, 4 or 8");
    scale_ = std::sqrt(3.0 / (2.0 * (static_cast<double>(m) * m - 1.0)));
    for (unsigned i = 0; i < m; ++i) levels_.push_back(scale_ * (2.0 * i + 1.0 - m));
  }

  unsigned size() const noexcept { return m_; }
  double scale() const noexcept { return scale_; }
  double point(std::size_t index) const { return levels_.at(index); }
  std::span<const double> levels() const noexcept { return levels_; }

  /// Average energy of one real coordinate (1/2).
  double real_energy() const noexcept {
    double e = 0.0;
    for (double v : levels_) e += v * v;
    return e / m_;
  }

  /// Nearest level index; ties go to the lower level.
  std::size_t nearest(double v) const noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < levels_.size(); ++i)
      if (std::abs(v - levels_[i]) < std::abs(v - levels_[best])) best = i;
    return best;
  }

  std::string qam_name() const { return std::to_string(m_ * m_) + "-QAM"; }

 private:
  unsigned m_;
  double scale_ = 1.0;
  std::vector<double> levels_;
};

struct DecoderStats {
  std::uint64_t em_evaluations = 0;
  std::uint64_t nodes_visited = 0;
  std::uint64_t flops = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_entries_peak = 0;
  double best_metric = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> decoded;
  std::vector<std::uint64_t> em_per_level;  ///< indexed by symbol position

  /// EM evaluations at positions >= first (the blocks above R_1).
  std::uint64_t em_from(std::size_t first) const {
    std::uint64_t s = 0;
    for (std::size_t i = first; i < em_per_level.size(); ++i) s += em_per_level[i];
    return s;
  }
};

struct DecoderOptions {
  bool memoize = false;
  bool prune = true;
  /// Decode the R_1 sub-blocks independently given the upper blocks.
  bool group_first_block = true;
  /// Recompute every cache hit and throw on a bitwise mismatch.
  bool verify_cache = false;
  std::ostream* trace = nullptr;
  double pattern_tol = kStructuralZeroTolerance;
};

/// Per-sub-block table of child metric sets keyed by the sub-block prefix.
class MetricCache {
 public:
  MetricCache() = default;
  MetricCache(std::size_t gamma, std::size_t m) : m_(m) {
    std::size_t nodes = 0;
    std::size_t width = 1;
    for (std::size_t d = 0; d < gamma; ++d) {
      offsets_.push_back(nodes);
      nodes += width;
      width *= m;
    }
    values_.assign(nodes * m, 0.0);
    filled_.assign(nodes, 0);
  }

  /// Node id for a prefix of `depth` symbols given as base-M digits.
  std::size_t node(std::size_t depth, std::size_t prefix_code) const { return offsets_[depth] + prefix_code; }
  bool has(std::size_t node_id) const { return filled_[node_id] != 0; }
  std::span<const double> get(std::size_t node_id) const { return {values_.data() + node_id * m_, m_}; }

  void put(std::size_t node_id, std::span<const double> metrics) {
    std::copy(metrics.begin(), metrics.end(), values_.begin() + static_cast<std::ptrdiff_t>(node_id * m_));
    if (!filled_[node_id]) {
      filled_[node_id] = 1;
      entries_ += m_;
    }
  }

  void clear() {
    std::fill(filled_.begin(), filled_.end(), 0);
    entries_ = 0;
  }

  std::size_t entries() const noexcept { return entries_; }
  std::size_t capacity() const noexcept { return filled_.size() * m_; }

 private:
  std::size_t m_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
  std::vector<unsigned char> filled_;
  std::size_t entries_ = 0;
};

namespace detail {

inline bool lex_less(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline void require_upper_triangular(const RealMatrix& r) {
  if (r.rows() != r.cols()) throw Error(Errc::NotUpperTriangular, "R must be square");
  for (std::size_t j = 0; j < r.cols(); ++j) {
    for (std::size_t i = j + 1; i < r.rows(); ++i)
      if (r(i, j) != 0.0) throw Error(Errc::NotUpperTriangular, "nonzero entry below the diagonal");
    if (!(r(j, j) != 0.0) || !std::isfinite(r(j, j))) throw Error(Errc::RankDeficient, "zero diagonal in R");
  }
}

class SphereSearch {
 public:
  SphereSearch(const RealMatrix& r, std::span<const double> y, const PamConstellation& cons,
               const std::optional<BlockOrthogonalProfile>& profile, const DecoderOptions& opt)
      : r_(r), y_(y.begin(), y.end()), cons_(cons), opt_(opt), k_(r.rows()), m_(cons.size()) {
    require_upper_triangular(r_);
    if (y_.size() != k_) throw Error(Errc::DimensionMismatch, "y' length must equal K");
    if (opt_.memoize && !profile) throw Error(Errc::InvalidProfile, "memoized decoding needs a profile");
    if (profile) {
      profile->validate();
      if (profile->symbols() != k_) throw Error(Errc::InvalidProfile, "profile does not match K");
      apply_profile(*profile);
      prof_ = *profile;
    }
    build_columns();
    x_.assign(k_, 0);
    best_.assign(k_, 0);
    stats_.em_per_level.assign(k_, 0);
    child_metric_.assign(k_, std::vector<double>(m_));
    order_.assign(k_, std::vector<std::size_t>(m_));
    if (opt_.memoize) {
      caches_.assign(prof_->gamma_blocks, std::vector<MetricCache>(prof_->k));
      for (auto& blk : caches_)
        for (auto& c : blk) c = MetricCache(prof_->gamma, m_);
    }
  }

  DecoderStats run() {
    const std::size_t stop = grouped() ? prof_->block_size() : 0;
    if (stop >= k_) {
      group_decode_leaf(0.0);
    } else {
      descend(k_ - 1, stop, 0.0);
    }
    stats_.best_metric = best_metric_;
    stats_.decoded = best_;
    return stats_;
  }

  const RealMatrix& r() const noexcept { return r_; }

 private:
  bool grouped() const noexcept { return prof_ && opt_.group_first_block; }

  // Structural zeros of the profile are validated and then set to exact 0.
  void apply_profile(const BlockOrthogonalProfile& p) {
    const double scale = r_.max_abs();
    const double tol = opt_.pattern_tol * scale;
    for (const auto& [i, j] : required_zeros(p)) {
      if (std::abs(r_(i, j)) >= tol)
        throw Error(Errc::InvalidProfile, "R does not match profile " + p.to_string() + " at (" +
                                              std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
      r_(i, j) = 0.0;
    }
  }

  std::size_t block_of(std::size_t l) const { return l / prof_->block_size(); }
  std::size_t sub_of(std::size_t l) const { return (l % prof_->block_size()) / prof_->gamma; }
  std::size_t sub_start(std::size_t l) const { return l - (l % prof_->block_size()) % prof_->gamma; }

  // Columns that enter the interference sum of each row.
  void build_columns() {
    cols_.assign(k_, {});
    for (std::size_t l = 0; l < k_; ++l) {
      if (!prof_) {
        for (std::size_t j = l + 1; j < k_; ++j) cols_[l].push_back(j);
        continue;
      }
      const std::size_t n = prof_->block_size();
      const std::size_t b = block_of(l);
      const bool structured = b == 0 ? grouped() : opt_.memoize;
      if (!structured) {
        for (std::size_t j = l + 1; j < k_; ++j) cols_[l].push_back(j);
        continue;
      }
      const std::size_t sub_end = sub_start(l) + prof_->gamma;
      for (std::size_t j = l + 1; j < sub_end; ++j) cols_[l].push_back(j);
      for (std::size_t j = (b + 1) * n; j < k_; ++j) cols_[l].push_back(j);
    }
  }

  // Fills child_metric_[l] for the current upper assignment.
  void compute_metrics(std::size_t l) {
    double target = y_[l];
    for (std::size_t j : cols_[l]) target -= r_(l, j) * cons_.point(x_[j]);
    const double diag = r_(l, l);
    auto& out = child_metric_[l];
    for (std::size_t v = 0; v < m_; ++v) {
      const double d = target - diag * cons_.point(v);
      out[v] = d * d;
    }
    stats_.flops += 2 * cols_[l].size() + 3 * m_;
    stats_.em_evaluations += m_;
    stats_.em_per_level[l] += m_;
  }

  // Metrics for the children of the node at level l; returns true on a cache hit.
  bool expand(std::size_t l) {
    if (!opt_.memoize || block_of(l) == 0) {
      compute_metrics(l);
      return false;
    }
    const std::size_t b = block_of(l);
    const std::size_t n = prof_->block_size();
    if (l == (b + 1) * n - 1) {
      for (auto& c : caches_[b]) c.clear();
    }
    const std::size_t s = sub_of(l);
    if (s + 1 == prof_->k) {
      compute_metrics(l);
      return false;
    }
    const std::size_t top = sub_start(l) + prof_->gamma - 1;
    std::size_t code = 0;
    for (std::size_t j = top; j > l; --j) code = code * m_ + x_[j];
    MetricCache& cache = caches_[b][s];
    const std::size_t id = cache.node(top - l, code);
    if (cache.has(id)) {
      const auto stored = cache.get(id);
      std::copy(stored.begin(), stored.end(), child_metric_[l].begin());
      ++stats_.cache_hits;
      if (opt_.verify_cache) {
        const auto saved = stats_;
        compute_metrics(l);
        stats_ = saved;
        for (std::size_t v = 0; v < m_; ++v)
          if (std::bit_cast<std::uint64_t>(child_metric_[l][v]) != std::bit_cast<std::uint64_t>(stored[v]))
            throw Error(Errc::Internal, "cache hit differs from recomputation at level " + std::to_string(l));
      }
      return true;
    }
    compute_metrics(l);
    cache.put(id, child_metric_[l]);
    std::size_t total = 0;
    for (const auto& blk : caches_)
      for (const auto& c : blk) total += c.entries();
    stats_.cache_entries_peak = std::max<std::uint64_t>(stats_.cache_entries_peak, total);
    return false;
  }

  void sort_children(std::size_t l) {
    auto& ord = order_[l];
    std::iota(ord.begin(), ord.end(), std::size_t{0});
    const auto& metric = child_metric_[l];
    std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return metric[a] < metric[b]; });
  }

  void emit_trace(std::size_t l, double partial, std::size_t v, bool hit) {
    if (!opt_.trace) return;
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, partial).ptr;
    *opt_.trace << "{\"level\":" << l << ",\"partial_metric\":" << std::string_view(buf, end) << ",\"symbol_index\":" << v
                << ",\"cache_hit\":" << (hit ? "true" : "false") << "}\n";
  }

  void descend(std::size_t l, std::size_t stop, double partial) {
    const bool hit = expand(l);
    sort_children(l);
    for (std::size_t v : order_[l]) {
      const double metric = partial + child_metric_[l][v];
      ++stats_.flops;
      if (opt_.prune && metric > best_metric_) break;
      ++stats_.nodes_visited;
      x_[l] = v;
      emit_trace(l, metric, v, hit);
      if (l == stop) {
        if (stop == 0) {
          consider_leaf(metric);
        } else {
          group_decode_leaf(metric);
        }
      } else {
        descend(l - 1, stop, metric);
      }
    }
  }

  void consider_leaf(double metric) {
    if (metric < best_metric_ || (metric == best_metric_ && lex_less(x_, best_))) {
      best_metric_ = metric;
      best_ = x_;
    }
  }

  // Independent searches over the R_1 sub-blocks, conditioned on the
  // symbols already fixed above R_1.
  void group_decode_leaf(double partial) {
    const std::size_t gamma = prof_->gamma;
    double total = partial;
    for (std::size_t s = 0; s < prof_->k; ++s) {
      const std::size_t lo = s * gamma;
      const std::size_t hi = lo + gamma - 1;
      sub_best_metric_ = std::numeric_limits<double>::infinity();
      sub_radius_ = best_metric_ - total;
      sub_found_ = false;
      sub_best_.assign(gamma, 0);
      sub_search(hi, lo, 0.0);
      if (!sub_found_) return;
      for (std::size_t l = lo; l <= hi; ++l) x_[l] = sub_best_[l - lo];
      total += sub_best_metric_;
      ++stats_.flops;
    }
    consider_leaf(total);
  }

  void sub_search(std::size_t l, std::size_t lo, double partial) {
    compute_metrics(l);
    sort_children(l);
    for (std::size_t v : order_[l]) {
      const double metric = partial + child_metric_[l][v];
      ++stats_.flops;
      if (opt_.prune && (metric > sub_best_metric_ || metric > sub_radius_)) break;
      ++stats_.nodes_visited;
      x_[l] = v;
      emit_trace(l, metric, v, false);
      if (l == lo) {
        const std::span<const std::size_t> cur(x_.data() + lo, sub_best_.size());
        if (!sub_found_ || metric < sub_best_metric_ || (metric == sub_best_metric_ && lex_less(cur, sub_best_))) {
          sub_best_metric_ = metric;
          sub_best_.assign(cur.begin(), cur.end());
          sub_found_ = true;
        }
      } else {
        sub_search(l - 1, lo, metric);
      }
    }
  }

  RealMatrix r_;
  std::vector<double> y_;
  const PamConstellation& cons_;
  DecoderOptions opt_;
  std::size_t k_;
  std::size_t m_;
  std::optional<BlockOrthogonalProfile> prof_;
  std::vector<std::vector<std::size_t>> cols_;
  std::vector<std::size_t> x_;
  std::vector<std::size_t> best_;
  double best_metric_ = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> child_metric_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::vector<MetricCache>> caches_;
  DecoderStats stats_;

  std::vector<std::size_t> sub_best_;
  double sub_best_metric_ = 0.0;
  double sub_radius_ = 0.0;
  bool sub_found_ = false;
};

}  // namespace detail

/// ML estimate argmin ||y' - R x||^2 over the PAM grid, as level indices.
/// With a profile, the structural zeros are validated and the R_1
/// sub-blocks are decoded independently; memoization is controlled by
/// options.memoize.
inline DecoderStats sphere_decode(const RealMatrix& r, std::span<const double> y_prime, const PamConstellation& cons,
                                  const std::optional<BlockOrthogonalProfile>& profile, DecoderOptions options) {
  return detail::SphereSearch(r, y_prime, cons, profile, options).run();
}

/// Baseline when no profile is given, memoized otherwise.
inline DecoderStats sphere_decode(const RealMatrix& r, std::span<const double> y_prime, const PamConstellation& cons,
                                  const std::optional<BlockOrthogonalProfile>& profile = std::nullopt) {
  DecoderOptions opt;
  opt.memoize = profile.has_value();
  return sphere_decode(r, y_prime, cons, profile, opt);
}

inline constexpr std::uint64_t kExhaustiveLimit = std::uint64_t{1} << 20;

namespace detail {

inline std::uint64_t grid_size(unsigned m, std::size_t k) {
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (total > kExhaustiveLimit / m) return kExhaustiveLimit + 1;
    total *= m;
  }
  return total;
}

}  // namespace detail

/// Brute-force argmin ||y - H x||^2 over the PAM grid. Walks the grid in
/// reflected mixed-radix Gray order so each step touches one column.
inline std::vector<std::size_t> exhaustive_ml(const RealMatrix& h_eq, std::span<const double> y,
                                              const PamConstellation& cons) {
  const std::size_t k = h_eq.cols();
  const std::size_t n = h_eq.rows();
  if (y.size() != n) throw Error(Errc::DimensionMismatch, "y length must equal rows of H_eq");
  const unsigned m = cons.size();
  const std::uint64_t total = detail::grid_size(m, k);
  if (total > kExhaustiveLimit) throw Error(Errc::TooLarge, "exhaustive search limited to 2^20 grid points");

  std::vector<std::size_t> x(k, 0);
  std::vector<int> dir(k, 1);
  std::vector<double> resid(y.begin(), y.end());
  for (std::size_t j = 0; j < k; ++j) {
    const double v = cons.point(0);
    for (std::size_t i = 0; i < n; ++i) resid[i] -= h_eq(i, j) * v;
  }
  auto norm2 = [&] {
    double s = 0.0;
    for (double v : resid) s += v * v;
    return s;
  };
  std::vector<std::size_t> best = x;
  double best_metric = norm2();
  for (std::uint64_t step = 1; step < total; ++step) {
    // Lowest digit that can move in its current direction.
    std::size_t j = k - 1;
    for (;;) {
      const long next = static_cast<long>(x[j]) + dir[j];
      if (next >= 0 && next < static_cast<long>(m)) break;
      dir[j] = -dir[j];
      --j;
    }
    const double delta = cons.point(x[j] + dir[j]) - cons.point(x[j]);
    x[j] += dir[j];
    for (std::size_t i = 0; i < n; ++i) resid[i] -= h_eq(i, j) * delta;
    const double metric = norm2();
    if (metric < best_metric || (metric == best_metric && detail::lex_less(x, best))) {
      best_metric = metric;
      best = x;
    }
  }
  return best;
}

/// Exact rational number with 64-bit parts, kept in lowest terms.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw Error(Errc::InvalidConfig, "zero denominator");
    const std::uint64_t g = std::gcd(n, d);
    return {n / (g ? g : 1), d / (g ? g : 1)};
  }
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(Errc::Overflow, "closed form exceeds 64 bits");
  return out;
}

inline std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

/// M + M^2 + ... + M^e.
inline std::uint64_t geometric_sum(std::uint64_t m, std::uint64_t e) {
  return checked_mul(m, checked_pow(m, e) - 1) / (m - 1);
}

}  // namespace detail

struct EmCountBounds {
  std::uint64_t o_stbc = 0;    ///< full-tree EMs above R_1 without memoization
  std::uint64_t o_bostbc = 0;  ///< same with memoization
  Rational emrr;               ///< k (M^gamma - 1) / (M^{k gamma} - 1)
  std::uint64_t mem_entries = 0;
};

inline EmCountBounds em_count_bounds(const BlockOrthogonalProfile& p, std::uint64_t m) {
  p.validate();
  if (m < 2) throw Error(Errc::InvalidConfig, "constellation size must be at least 2");
  using namespace detail;
  const std::uint64_t n = p.block_size();
  EmCountBounds out;
  // Fails on M^{Gamma k gamma} overflow even where smaller terms would fit.
  (void)checked_pow(m, checked_mul(p.gamma_blocks, n));
  out.o_stbc = geometric_sum(m, (p.gamma_blocks - 1) * n);
  const std::uint64_t sub = geometric_sum(m, p.gamma);
  // sum_{i=2}^{Gamma} M^{(Gamma-i) k gamma}
  std::uint64_t repeats = 0;
  for (std::uint64_t i = 2; i <= p.gamma_blocks; ++i) repeats += checked_pow(m, (p.gamma_blocks - i) * n);
  out.o_bostbc = checked_mul(checked_mul(p.k, sub), repeats);
  out.emrr = Rational::make(checked_mul(p.k, checked_pow(m, p.gamma) - 1), checked_pow(m, n) - 1);
  out.mem_entries = checked_mul(checked_mul(p.gamma_blocks - 1, p.k - 1), sub);
  return out;
}

/// Breadth-first (QRDM) complexity ratio M^gamma / (k (M^gamma - 1)).
inline Rational qrdm_bound(std::uint64_t k, std::uint64_t gamma, std::uint64_t m) {
  if (k < 1 || gamma < 1 || m < 2) throw Error(Errc::InvalidConfig, "qrdm_bound parameters out of range");
  const std::uint64_t mg = detail::checked_pow(m, gamma);
  return Rational::make(mg, detail::checked_mul(k, mg - 1));
}

/// Decode with pruning disabled so every node of the tree is visited.
inline DecoderStats force_full_tree_decode(const RealMatrix& r, std::span<const double> y_prime,
                                           const PamConstellation& cons,
                                           const std::optional<BlockOrthogonalProfile>& profile, bool memoize) {
  if (detail::grid_size(cons.size(), r.cols()) > kExhaustiveLimit)
    throw Error(Errc::TooLarge, "full-tree decoding limited to 2^20 leaves");
  DecoderOptions opt;
  opt.memoize = memoize;
  opt.prune = false;
  return sphere_decode(r, y_prime, cons, profile, opt);
}

}  // namespace bostbc
