#pragma once

// Equivalent channel, R-factor zero patterns, block-orthogonal profile
// detection, classification of R shapes, and numerical premise checks.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bostbc/codes.hpp"
#include "bostbc/error.hpp"
#include "bostbc/linalg.hpp"
#include "bostbc/profile.hpp"
#include "bostbc/random.hpp"

namespace bostbc {

/// Relative tolerance for structural zeros of R (relative to max |R|).
inline constexpr double kStructuralZeroTolerance = 1e-9;
/// Independent channels a zero must survive to count as structural.
inline constexpr std::size_t kPatternChannels = 20;
/// Absolute tolerance for Hurwitz-Radon products of weight matrices.
inline constexpr double kHurwitzRadonTolerance = 1e-12;
inline constexpr std::uint64_t kDefaultChannelSeed = 20240601;

/// Smallest receive-antenna count with 2 n_r t >= K.
inline std::size_t default_receive_antennas(const LinearSTBC& code) {
  const std::size_t per_antenna = 2 * code.t;
  return std::max<std::size_t>(1, (code.k_real() + per_antenna - 1) / per_antenna);
}

/// I.i.d. unit-variance complex Gaussian n_r x n_t channels.
inline std::vector<ComplexMatrix> sample_channels(std::size_t n_r, std::size_t n_t, std::size_t count,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ComplexMatrix> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(rng.complex_gaussian_matrix(n_r, n_t));
  return out;
}

inline std::vector<ComplexMatrix> sample_channels(const LinearSTBC& code, std::size_t count,
                                                  std::uint64_t seed = kDefaultChannelSeed) {
  return sample_channels(default_receive_antennas(code), code.n_t, count, seed);
}

/// H_eq = (I_t (x) H^) G.
inline RealMatrix equivalent_channel(const LinearSTBC& code, const ComplexMatrix& h) {
  if (h.cols() != code.n_t) throw Error(Errc::DimensionMismatch, "channel must have n_t columns");
  if (2 * h.rows() * code.t < code.k_real())
    throw Error(Errc::TooFewReceiveAntennas,
                "2 n_r t = " + std::to_string(2 * h.rows() * code.t) + " < K = " + std::to_string(code.k_real()));
  return kron(RealMatrix::identity(code.t), check_expand(h)) * code.generator();
}

/// Column i is vec~(H A_i); agrees with equivalent_channel.
inline RealMatrix equivalent_channel_by_columns(const LinearSTBC& code, const ComplexMatrix& h) {
  if (2 * h.rows() * code.t < code.k_real()) throw Error(Errc::TooFewReceiveAntennas, "receive antennas");
  RealMatrix out(2 * h.rows() * code.t, code.k_real());
  for (std::size_t i = 0; i < code.k_real(); ++i) {
    const RealVector col = tilde_vec((h * code.weights[i]).data());
    std::copy(col.begin(), col.end(), out.column(i).begin());
  }
  return out;
}

struct EquivalentChannelFactorization {
  RealMatrix h_eq;
  QrResult qr;
  ZeroPattern zero_pattern;  ///< true = below tolerance on this channel
  double tol_used = 0.0;     ///< absolute threshold, tol_rel * max |R|
};

inline ZeroPattern threshold_pattern(const RealMatrix& r, double abs_tol) {
  ZeroPattern p(r.rows(), r.cols());
  for (std::size_t j = 0; j < r.cols(); ++j)
    for (std::size_t i = 0; i < r.rows(); ++i) p(i, j) = std::abs(r(i, j)) < abs_tol ? 1 : 0;
  return p;
}

inline EquivalentChannelFactorization r_factorize(const LinearSTBC& code, const ComplexMatrix& h,
                                                  double tol_rel = kStructuralZeroTolerance) {
  EquivalentChannelFactorization f;
  f.h_eq = equivalent_channel(code, h);
  f.qr = gram_schmidt_qr(f.h_eq);
  f.tol_used = tol_rel * f.qr.r.max_abs();
  f.zero_pattern = threshold_pattern(f.qr.r, f.tol_used);
  return f;
}

/// Entry is structural zero iff it is below tolerance on every channel.
inline ZeroPattern structural_zero_pattern(const LinearSTBC& code, const std::vector<ComplexMatrix>& channels,
                                           double tol_rel = kStructuralZeroTolerance) {
  if (channels.empty()) throw Error(Errc::InvalidConfig, "need at least one channel");
  ZeroPattern acc;
  for (const auto& h : channels) {
    const ZeroPattern p = r_factorize(code, h, tol_rel).zero_pattern;
    if (acc.empty()) {
      acc = p;
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] = acc.data()[i] && p.data()[i];
    }
  }
  return acc;
}

inline ZeroPattern structural_zero_pattern(const LinearSTBC& code, std::size_t n_channels = kPatternChannels,
                                           std::uint64_t seed = kDefaultChannelSeed,
                                           double tol_rel = kStructuralZeroTolerance) {
  return structural_zero_pattern(code, sample_channels(code, n_channels, seed), tol_rel);
}

/// Parse a grid of 't' / '0' rows (whitespace separated cells allowed).
inline ZeroPattern pattern_from_grid(const std::vector<std::string>& rows) {
  std::vector<std::vector<unsigned char>> cells;
  for (const auto& row : rows) {
    std::vector<unsigned char> r;
    for (char c : row) {
      if (c == 't' || c == 'T') r.push_back(0);
      else if (c == '0') r.push_back(1);
    }
    cells.push_back(std::move(r));
  }
  ZeroPattern p(cells.size(), cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != cells.size()) throw Error(Errc::Parse, "pattern grid must be square");
    for (std::size_t j = 0; j < cells.size(); ++j) p(i, j) = cells[i][j];
  }
  return p;
}

/// Render as rows of space-separated 't' / '0'.
inline std::string pattern_to_grid(const ZeroPattern& p) {
  std::string out;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (j) out += ' ';
      out += p(i, j) ? '0' : 't';
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline bool upper_block_has_nonzero(const ZeroPattern& p, std::size_t r0, std::size_t r1, std::size_t c0,
                                    std::size_t c1) {
  for (std::size_t i = r0; i < r1; ++i)
    for (std::size_t j = c0; j < c1; ++j)
      if (!p(i, j)) return true;
  return false;
}

}  // namespace detail

/// Positions (i < j) that the profile requires to be zero: entries inside a
/// diagonal block R_b that couple two different sub-blocks.
inline std::vector<std::pair<std::size_t, std::size_t>> required_zeros(const BlockOrthogonalProfile& profile) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = profile.block_size();
  for (std::size_t b = 0; b < profile.gamma_blocks; ++b)
    for (std::size_t i = b * n; i < (b + 1) * n; ++i)
      for (std::size_t j = i + 1; j < (b + 1) * n; ++j)
        if ((i - b * n) / profile.gamma != (j - b * n) / profile.gamma) out.emplace_back(i, j);
  return out;
}

/// Checks a zero pattern against a profile: every R_b is block diagonal with
/// k sub-blocks, the diagonal is nonzero, and every coupling block B_bc
/// (b < c) has at least one nonzero entry.
inline bool pattern_matches_profile(const ZeroPattern& p, const BlockOrthogonalProfile& profile) {
  const std::size_t kk = p.rows();
  if (p.cols() != kk || profile.symbols() != kk) return false;
  for (std::size_t i = 0; i < kk; ++i)
    if (p(i, i)) return false;
  for (const auto& [i, j] : required_zeros(profile))
    if (!p(i, j)) return false;
  const std::size_t n = profile.block_size();
  for (std::size_t b = 0; b < profile.gamma_blocks; ++b)
    for (std::size_t c = b + 1; c < profile.gamma_blocks; ++c)
      if (!detail::upper_block_has_nonzero(p, b * n, (b + 1) * n, c * n, (c + 1) * n)) return false;
  return true;
}

/// Max |r_ij| / max |R| over the entries the profile requires to be zero.
inline double profile_residual(const RealMatrix& r, const BlockOrthogonalProfile& profile) {
  const double scale = r.max_abs();
  double worst = 0.0;
  for (const auto& [i, j] : required_zeros(profile)) worst = std::max(worst, std::abs(r(i, j)));
  return scale > 0 ? worst / scale : worst;
}

inline std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t d = 1; d <= n; ++d)
    if (n % d == 0) out.push_back(d);
  return out;
}

/// Largest-Gamma (then largest-k) uniform profile with k >= 2 that the
/// pattern satisfies; none when only the trivial (1, 1, K) reading fits.
inline std::optional<BlockOrthogonalProfile> detect_profile(const ZeroPattern& p) {
  const std::size_t kk = p.rows();
  auto ds = divisors(kk);
  std::reverse(ds.begin(), ds.end());
  for (std::size_t gamma_blocks : ds) {
    auto ks = divisors(kk / gamma_blocks);
    for (auto it = ks.rbegin(); it != ks.rend(); ++it) {
      const std::size_t k = *it;
      if (k < 2) continue;
      const BlockOrthogonalProfile cand{gamma_blocks, k, kk / (gamma_blocks * k)};
      if (pattern_matches_profile(p, cand)) return cand;
    }
  }
  return std::nullopt;
}

/// Boundaries of the finest contiguous block-diagonal partition of the
/// leading n x n part of the pattern: returns block sizes.
inline std::vector<std::size_t> block_diagonal_partition(const ZeroPattern& p, std::size_t n) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  for (std::size_t cut = 1; cut <= n; ++cut) {
    bool separable = cut == n;
    if (!separable) separable = !detail::upper_block_has_nonzero(p, 0, cut, cut, n);
    if (separable) {
      sizes.push_back(cut - start);
      start = cut;
    }
  }
  return sizes;
}

enum class Classification { BlockOrthogonal, FastGroup, FastDecodable, MultiGroup, Unstructured };

inline const char* classification_name(Classification c) {
  switch (c) {
    case Classification::BlockOrthogonal: return "block-orthogonal";
    case Classification::FastGroup: return "fast-group";
    case Classification::FastDecodable: return "fast-decodable";
    case Classification::MultiGroup: return "multi-group";
    case Classification::Unstructured: return "unstructured";
  }
  return "unknown";
}

struct ConditionResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
};

struct StructureReport {
  Classification classification = Classification::Unstructured;
  std::size_t groups = 0;              ///< g for multi-group / fast-group / fast-decodable
  std::size_t fast_decodable_size = 0; ///< L for fast-decodable
  std::optional<BlockOrthogonalProfile> profile;
  ZeroPattern pattern;
  std::vector<ConditionResult> conditions;
  double tol = kStructuralZeroTolerance;
  std::vector<std::uint64_t> seeds;

  std::string label() const {
    std::string s = classification_name(classification);
    switch (classification) {
      case Classification::BlockOrthogonal: return s + " " + profile->to_string();
      case Classification::MultiGroup:
      case Classification::FastGroup: return s + " g=" + std::to_string(groups);
      case Classification::FastDecodable:
        return s + " L=" + std::to_string(fast_decodable_size) + " g=" + std::to_string(groups);
      case Classification::Unstructured: return s;
    }
    return s;
  }
};

/// Size L and group count of the largest leading L x L (L < n) that splits
/// into at least two diagonal blocks, restricted to rows/cols [r0, r0 + n).
inline std::optional<std::pair<std::size_t, std::size_t>> fast_decodable_split(const ZeroPattern& p, std::size_t r0,
                                                                               std::size_t n) {
  const ZeroPattern sub = p.block(r0, r0, n, n);
  for (std::size_t l = n - 1; l >= 2; --l) {
    const auto parts = block_diagonal_partition(sub, l);
    if (parts.size() >= 2) return std::make_pair(l, parts.size());
  }
  return std::nullopt;
}

/// Labels a pattern with the most specific R shape that fits.
inline StructureReport classify(const ZeroPattern& p) {
  StructureReport rep;
  rep.pattern = p;
  rep.profile = detect_profile(p);
  const std::size_t kk = p.rows();

  const auto parts = block_diagonal_partition(p, kk);
  rep.conditions.push_back({"block_diagonal_groups", parts.size() >= 2, static_cast<double>(parts.size())});
  if (parts.size() >= 2) {
    rep.groups = parts.size();
    bool any_fast = false;
    std::size_t offset = 0;
    for (std::size_t size : parts) {
      if (size >= 3 && fast_decodable_split(p, offset, size)) any_fast = true;
      offset += size;
    }
    rep.classification = any_fast ? Classification::FastGroup : Classification::MultiGroup;
    return rep;
  }
  if (rep.profile && rep.profile->gamma_blocks >= 2) {
    rep.conditions.push_back({"block_orthogonal_profile", true, 0.0});
    rep.classification = Classification::BlockOrthogonal;
    return rep;
  }
  rep.conditions.push_back({"block_orthogonal_profile", false, 0.0});
  if (kk >= 3) {
    if (auto split = fast_decodable_split(p, 0, kk)) {
      rep.classification = Classification::FastDecodable;
      rep.fast_decodable_size = split->first;
      rep.groups = split->second;
      rep.conditions.push_back({"fast_decodable_prefix", true, static_cast<double>(split->first)});
      return rep;
    }
  }
  rep.conditions.push_back({"fast_decodable_prefix", false, 0.0});
  rep.classification = Classification::Unstructured;
  return rep;
}

inline StructureReport classify(const EquivalentChannelFactorization& f) { return classify(f.zero_pattern); }

/// Full analysis over seeded random channels: structural pattern,
/// classification, and residual / channel-independence conditions.
inline StructureReport analyze_code(const LinearSTBC& code, std::size_t n_channels = kPatternChannels,
                                    std::uint64_t seed = kDefaultChannelSeed,
                                    double tol_rel = kStructuralZeroTolerance) {
  const auto channels = sample_channels(code, n_channels, seed);
  std::vector<EquivalentChannelFactorization> facts;
  for (const auto& h : channels) facts.push_back(r_factorize(code, h, tol_rel));
  ZeroPattern acc = facts.front().zero_pattern;
  bool independent = true;
  for (const auto& f : facts) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
      independent = independent && acc.data()[i] == f.zero_pattern.data()[i];
      acc.data()[i] = acc.data()[i] && f.zero_pattern.data()[i];
    }
  }
  StructureReport rep = classify(acc);
  rep.tol = tol_rel;
  rep.seeds = {seed};
  rep.conditions.push_back({"full_rank", true, 0.0});
  rep.conditions.push_back({"channel_independent_pattern", independent, 0.0});
  if (rep.profile) {
    double worst = 0.0;
    for (const auto& f : facts) worst = std::max(worst, profile_residual(f.qr.r, *rep.profile));
    rep.conditions.push_back({"profile_zero_residual", worst < tol_rel, worst});
  }
  if (code.declared_profile) {
    rep.conditions.push_back({"declared_profile_matches", pattern_matches_profile(acc, *code.declared_profile), 0.0});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hurwitz-Radon checks

inline double hr_residual(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a * b.adjoint() + b * a.adjoint()).max_abs();
}

using Grouping = std::vector<std::vector<std::size_t>>;

/// Contiguous groups of `group_size` indices starting at `offset`.
inline Grouping contiguous_grouping(std::size_t offset, std::size_t count, std::size_t group_size) {
  Grouping g;
  for (std::size_t s = 0; s < count; s += group_size) {
    std::vector<std::size_t> group;
    for (std::size_t i = s; i < std::min(count, s + group_size); ++i) group.push_back(offset + i);
    g.push_back(std::move(group));
  }
  return g;
}

/// Worst cross-group |A_l A_m^H + A_m A_l^H| entry.
inline double hr_grouping_residual(std::span<const ComplexMatrix> weights, const Grouping& grouping) {
  double worst = 0.0;
  for (std::size_t g1 = 0; g1 < grouping.size(); ++g1)
    for (std::size_t g2 = g1 + 1; g2 < grouping.size(); ++g2)
      for (std::size_t l : grouping[g1])
        for (std::size_t m : grouping[g2]) worst = std::max(worst, hr_residual(weights[l], weights[m]));
  return worst;
}

/// True iff `grouping` partitions 0..K-1 and all cross-group pairs are
/// Hurwitz-Radon orthogonal.
inline bool verify_hr_grouping(const LinearSTBC& code, const Grouping& grouping) {
  std::vector<int> seen(code.k_real(), 0);
  for (const auto& g : grouping)
    for (std::size_t i : g) {
      if (i >= seen.size()) return false;
      ++seen[i];
    }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) return false;
  return hr_grouping_residual(code.weights, grouping) < kHurwitzRadonTolerance;
}

// ---------------------------------------------------------------------------
// Premise verifiers

struct VerificationReport {
  std::string name;
  std::vector<ConditionResult> conditions;
  std::vector<std::string> notes;

  bool passed() const {
    return !conditions.empty() &&
           std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.pass; });
  }
  const ConditionResult* find(const std::string& n) const {
    for (const auto& c : conditions)
      if (c.name == n) return &c;
    return nullptr;
  }
};

/// Relative size of entries outside k diagonal gamma x gamma blocks.
inline double off_block_residual(const RealMatrix& m, std::size_t gamma) {
  const double scale = m.max_abs();
  double worst = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i)
      if (i / gamma != j / gamma) worst = std::max(worst, std::abs(m(i, j)));
  return scale > 0 ? worst / scale : worst;
}

/// Relative Frobenius residual of H2^T H2 - E^T E - R2^T R2 for R = [[R1, E], [0, R2]].
inline double gram_identity_residual(const RealMatrix& h_eq, const RealMatrix& r, std::size_t split) {
  const std::size_t kk = r.cols();
  const std::size_t l = kk - split;
  const RealMatrix h2 = h_eq.block(0, split, h_eq.rows(), l);
  const RealMatrix e = r.block(0, split, split, l);
  const RealMatrix r2 = r.block(split, split, l, l);
  const RealMatrix g = h2.transpose() * h2;
  return (g - e.transpose() * e - r2.transpose() * r2).frobenius_norm() / g.frobenius_norm();
}

inline constexpr double kPremiseTolerance = 1e-9;

/// Two-block premises for a (2, k, gamma) structure with A-half = first K/2
/// weights and B-half = the rest, on the given channels.
inline VerificationReport verify_two_block_premises(const LinearSTBC& code, std::size_t k, std::size_t gamma,
                                                 const std::vector<ComplexMatrix>& channels) {
  VerificationReport rep{"two-block premises", {}, {}};
  const std::size_t kk = code.k_real();
  const std::size_t l = kk / 2;
  if (kk % 2 != 0 || k * gamma != l) throw Error(Errc::InvalidProfile, "need K even and k*gamma = K/2");

  const double a_res = hr_grouping_residual(code.weights, contiguous_grouping(0, l, gamma));
  const double b_res = hr_grouping_residual(code.weights, contiguous_grouping(l, l, gamma));
  rep.conditions.push_back({"a_half_group_decodable", a_res < kHurwitzRadonTolerance, a_res});
  rep.conditions.push_back({"b_half_group_decodable", b_res < kHurwitzRadonTolerance, b_res});

  bool full_rank = true;
  double ete = 0.0;
  double identity = 0.0;
  double r2 = 0.0;
  for (const auto& h : channels) {
    try {
      const auto f = r_factorize(code, h);
      const RealMatrix e = f.qr.r.block(0, l, l, l);
      ete = std::max(ete, off_block_residual(e.transpose() * e, gamma));
      identity = std::max(identity, gram_identity_residual(f.h_eq, f.qr.r, l));
      r2 = std::max(r2, off_block_residual(f.qr.r.block(l, l, l, l), gamma));
    } catch (const Error& err) {
      if (err.code() != Errc::RankDeficient) throw;
      full_rank = false;
    }
  }
  rep.conditions.push_back({"r_full_rank", full_rank, 0.0});
  rep.conditions.push_back({"ete_block_diagonal", full_rank && ete < kPremiseTolerance, ete});
  rep.conditions.push_back({"gram_identity", full_rank && identity < kPremiseTolerance, identity});
  rep.conditions.push_back({"r2_block_diagonal", full_rank && r2 < kPremiseTolerance, r2});
  return rep;
}

/// Recursive premises for a (Gamma, k, gamma) structure: the first block is
/// k-group decodable, and at every split L = s k gamma the next k gamma
/// weights are k-group decodable with E^T E block diagonal.
inline VerificationReport verify_recursive_block_premises(const LinearSTBC& code, const BlockOrthogonalProfile& profile,
                                                 const std::vector<ComplexMatrix>& channels) {
  profile.validate();
  if (profile.symbols() != code.k_real()) throw Error(Errc::InvalidProfile, "profile does not match K");
  VerificationReport rep{"recursive block premises", {}, {}};
  const std::size_t n = profile.block_size();
  const double base = hr_grouping_residual(code.weights, contiguous_grouping(0, n, profile.gamma));
  rep.conditions.push_back({"first_block_group_decodable", base < kHurwitzRadonTolerance, base});

  std::vector<EquivalentChannelFactorization> facts;
  bool full_rank = true;
  for (const auto& h : channels) {
    try {
      facts.push_back(r_factorize(code, h));
    } catch (const Error& err) {
      if (err.code() != Errc::RankDeficient) throw;
      full_rank = false;
    }
  }
  rep.conditions.push_back({"r_full_rank", full_rank, 0.0});

  for (std::size_t s = 1; s < profile.gamma_blocks; ++s) {
    const std::size_t split = s * n;
    const std::string tag = "split@" + std::to_string(split) + ":";
    const double b_res = hr_grouping_residual(code.weights, contiguous_grouping(split, n, profile.gamma));
    rep.conditions.push_back({tag + "b_group_decodable", b_res < kHurwitzRadonTolerance, b_res});
    double ete = 0.0;
    for (const auto& f : facts) {
      const RealMatrix e = f.qr.r.block(0, split, split, n);
      ete = std::max(ete, off_block_residual(e.transpose() * e, profile.gamma));
    }
    rep.conditions.push_back({tag + "ete_block_diagonal", full_rank && ete < kPremiseTolerance, ete});
  }
  return rep;
}

/// Hurwitz-Radon orthogonality of the B weights and para-unitarity of E.
/// Also reports (without gating) how far E^T E is from diagonal.
inline VerificationReport verify_para_unitary_premises(std::span<const ComplexMatrix> b_half, const RealMatrix& e) {
  VerificationReport rep{"para-unitary premises", {}, {}};
  double hr = 0.0;
  for (std::size_t i = 0; i < b_half.size(); ++i)
    for (std::size_t j = i + 1; j < b_half.size(); ++j) hr = std::max(hr, hr_residual(b_half[i], b_half[j]));
  rep.conditions.push_back({"b_hurwitz_radon", hr < kHurwitzRadonTolerance, hr});
  const RealMatrix ete = e.transpose() * e;
  const double para = max_abs_diff(ete, RealMatrix::identity(ete.rows()));
  rep.conditions.push_back({"e_para_unitary", para < kPremiseTolerance, para});
  return rep;
}

inline double ete_diagonal_residual(const RealMatrix& e) { return off_block_residual(e.transpose() * e, 1); }

/// Reversal permutation matrix.
inline RealMatrix reversal_permutation(std::size_t n) {
  RealMatrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) p(i, n - 1 - i) = 1.0;
  return p;
}

/// For a Construction-I code (K = 8 lambda) on channel h:
/// (a) the four lambda x lambda diagonal blocks of R_1 coincide,
/// (b) E has the signed block layout
///     [[E1, -E2, -E3, -E4], [E2, E1, -E4 P, E3 P], [E3, E4 P, E1, -E2 P], [E4, -E3 P, E2 P, E1]]
///     or its mirror with the P-blocks negated,
/// (c) R_2 is block diagonal with 4 blocks.
inline VerificationReport verify_construction_i_structure(const LinearSTBC& code, const ComplexMatrix& h) {
  if (code.k_real() % 8 != 0) throw Error(Errc::PremiseViolated, "K must be a multiple of 8");
  const std::size_t lambda = code.k_real() / 8;
  const std::size_t half = 4 * lambda;
  const auto f = r_factorize(code, h);
  const RealMatrix& r = f.qr.r;
  const double scale = r.max_abs();
  VerificationReport rep{"construction I R structure", {}, {}};

  const RealMatrix r1 = r.block(0, 0, half, half);
  const RealMatrix r11 = r1.block(0, 0, lambda, lambda);
  double blocks_equal = 0.0;
  for (std::size_t i = 1; i < 4; ++i)
    blocks_equal = std::max(blocks_equal, max_abs_diff(r11, r1.block(i * lambda, i * lambda, lambda, lambda)));
  blocks_equal /= scale;
  rep.conditions.push_back({"r1_block_diagonal", off_block_residual(r1, lambda) < kPremiseTolerance,
                            off_block_residual(r1, lambda)});
  rep.conditions.push_back({"r1_blocks_equal", blocks_equal < kPremiseTolerance, blocks_equal});

  const RealMatrix e = r.block(0, half, half, half);
  auto eb = [&](std::size_t i, std::size_t j) { return e.block(i * lambda, j * lambda, lambda, lambda); };
  const RealMatrix p = reversal_permutation(lambda);
  const RealMatrix e1 = eb(0, 0), e2 = eb(1, 0), e3 = eb(2, 0), e4 = eb(3, 0);
  // The reversal-twisted blocks flip sign together with the sign of R(gamma_1).
  auto layout_residual = [&](double s) {
    const RealMatrix expected[4][4] = {
        {e1, -e2, -e3, -e4},
        {e2, e1, (e4 * p) * -s, (e3 * p) * s},
        {e3, (e4 * p) * s, e1, (e2 * p) * -s},
        {e4, (e3 * p) * -s, (e2 * p) * s, e1},
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, max_abs_diff(eb(i, j), expected[i][j]));
    return worst / scale;
  };
  const double printed = layout_residual(1.0);
  const double mirrored = layout_residual(-1.0);
  const double e_struct = std::min(printed, mirrored);
  rep.conditions.push_back({"e_signed_permutation_structure", e_struct < kPremiseTolerance, e_struct});
  if (e_struct < kPremiseTolerance)
    rep.notes.push_back(printed <= mirrored ? "E orientation: printed" : "E orientation: mirrored");

  const double r2 = off_block_residual(r.block(half, half, half, half), lambda);
  rep.conditions.push_back({"r2_block_diagonal", r2 < kPremiseTolerance, r2});
  return rep;
}

// ---------------------------------------------------------------------------
// Ordering search

enum class OrderingStrategy { Auto, Exhaustive, Structured };

struct OrderingResult {
  std::vector<std::size_t> permutation;
  std::optional<BlockOrthogonalProfile> profile;
};

namespace detail {

inline std::size_t profile_score(const std::optional<BlockOrthogonalProfile>& p) {
  return p ? p->gamma_blocks * p->k : 0;
}

/// Pattern of the column-permuted equivalent channels.
inline ZeroPattern permuted_pattern(const std::vector<RealMatrix>& h_eqs, std::span<const std::size_t> perm) {
  ZeroPattern acc;
  for (const auto& h : h_eqs) {
    RealMatrix hp(h.rows(), perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) std::copy_n(h.column(perm[i]).begin(), h.rows(), hp.column(i).begin());
    const QrResult qr = gram_schmidt_qr(hp);
    const ZeroPattern p = threshold_pattern(qr.r, kStructuralZeroTolerance * qr.r.max_abs());
    if (acc.empty()) {
      acc = p;
    } else {
      for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] = acc.data()[i] && p.data()[i];
    }
  }
  return acc;
}

/// Label-driven candidates: symbols are parsed as <stem><number><I|Q>.
inline std::vector<std::vector<std::size_t>> structured_candidates(const LinearSTBC& code) {
  const std::size_t kk = code.k_real();
  std::vector<std::vector<std::size_t>> out = {identity_permutation(kk)};

  struct Parsed {
    std::size_t index;
    long number;
    int part;  // 0 = I, 1 = Q
  };
  std::vector<Parsed> parsed;
  for (std::size_t i = 0; i < kk; ++i) {
    const std::string& l = code.labels[i];
    if (l.size() < 2 || (l.back() != 'I' && l.back() != 'Q')) return out;
    std::size_t d = l.size() - 1;
    std::size_t s = d;
    while (s > 0 && std::isdigit(static_cast<unsigned char>(l[s - 1]))) --s;
    if (s == d) return out;
    parsed.push_back({i, std::stol(l.substr(s, d - s)), l.back() == 'Q' ? 1 : 0});
  }
  // Symbol-major, I before Q.
  auto by_symbol = parsed;
  std::stable_sort(by_symbol.begin(), by_symbol.end(), [](const Parsed& a, const Parsed& b) {
    return a.number != b.number ? a.number < b.number : a.part < b.part;
  });
  std::vector<std::size_t> interleaved;
  for (const auto& p : by_symbol) interleaved.push_back(p.index);
  out.push_back(interleaved);

  // Blocks of g symbols: all I parts, then all Q parts, per block.
  const std::size_t symbols = by_symbol.size() / 2;
  if (by_symbol.size() % 2 == 0) {
    for (std::size_t g : divisors(symbols)) {
      if (g < 2) continue;
      std::vector<std::size_t> perm;
      for (std::size_t b = 0; b < symbols; b += g)
        for (int part = 0; part < 2; ++part)
          for (std::size_t s = b; s < b + g; ++s) perm.push_back(by_symbol[2 * s + part].index);
      out.push_back(perm);
    }
  }
  return out;
}

}  // namespace detail

/// Searches symbol orderings for the one whose R exposes the largest
/// Gamma * k. Exhaustive for K <= 8; otherwise label-driven candidates.
/// Ties keep the earliest candidate (identity first).
inline OrderingResult ordering_search(const LinearSTBC& code, OrderingStrategy strategy = OrderingStrategy::Auto,
                                      std::size_t n_channels = 4, std::uint64_t seed = kDefaultChannelSeed) {
  const std::size_t kk = code.k_real();
  if (kk > 16) throw Error(Errc::TooLarge, "ordering search supports K <= 16");
  if (strategy == OrderingStrategy::Auto)
    strategy = kk <= 8 ? OrderingStrategy::Exhaustive : OrderingStrategy::Structured;
  if (strategy == OrderingStrategy::Exhaustive && kk > 8)
    throw Error(Errc::TooLarge, "exhaustive ordering search supports K <= 8");

  std::vector<RealMatrix> h_eqs;
  for (const auto& h : sample_channels(code, n_channels, seed)) h_eqs.push_back(equivalent_channel(code, h));

  OrderingResult best{identity_permutation(kk), std::nullopt};
  std::size_t best_score = 0;
  bool first = true;
  auto consider = [&](const std::vector<std::size_t>& perm) {
    const auto prof = detect_profile(detail::permuted_pattern(h_eqs, perm));
    const std::size_t score = detail::profile_score(prof);
    if (first || score > best_score) {
      best = {perm, prof};
      best_score = score;
      first = false;
    }
  };

  if (strategy == OrderingStrategy::Exhaustive) {
    std::vector<std::size_t> perm = identity_permutation(kk);
    do {
      consider(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    for (const auto& perm : detail::structured_candidates(code)) consider(perm);
  }

  // Confirm on the full channel set.
  if (best.profile) {
    const LinearSTBC reordered = reorder(code, best.permutation);
    best.profile = detect_profile(structural_zero_pattern(reordered, kPatternChannels, seed));
  }
  return best;
}

}  // namespace bostbc
