#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "json.hpp"

#include "bostbc/decoder.hpp"
#include "bostbc/random.hpp"

using namespace bostbc;

namespace {

// Random upper-triangular R with the structural zeros of `p` and a
// comfortably positive diagonal.
RealMatrix random_r(Rng& rng, const BlockOrthogonalProfile& p) {
  const std::size_t k = p.symbols();
  RealMatrix r(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= j; ++i) r(i, j) = rng.gaussian();
  for (std::size_t i = 0; i < k; ++i) r(i, i) = 0.5 + std::abs(r(i, i));
  for (const auto& [i, j] : required_zeros(p)) r(i, j) = 0.0;
  return r;
}

std::vector<double> noisy_observation(Rng& rng, const RealMatrix& r, const PamConstellation& cons, double sigma) {
  std::vector<double> x(r.cols());
  for (auto& v : x) v = cons.point(rng.index(cons.size()));
  std::vector<double> y = matvec(r, x);
  for (auto& v : y) v += sigma * rng.gaussian();
  return y;
}

}  // namespace

TEST(Pam, Levels) {
  const PamConstellation c2(2);
  EXPECT_NEAR(c2.real_energy(), 0.5, 1e-15);
  EXPECT_NEAR(PamConstellation(4).real_energy(), 0.5, 1e-15);
  EXPECT_NEAR(PamConstellation(8).real_energy(), 0.5, 1e-15);
  EXPECT_EQ(PamConstellation(4).qam_name(), "16-QAM");
  EXPECT_LT(c2.point(0), 0.0);
  EXPECT_THROW(PamConstellation(3), Error);
}

TEST(SphereDecode, SlicingOnIdentity) {
  const PamConstellation c(2);
  const std::vector<double> y = {0.9, -1.1};
  const DecoderStats s = sphere_decode(RealMatrix::identity(2), y, c);
  EXPECT_EQ(s.decoded, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(s.cache_hits, 0u);
}

TEST(SphereDecode, ToyEdgeMetricsIndependentOfUpperSymbol) {
  Rng rng(61);
  const BlockOrthogonalProfile p{2, 2, 1};
  const RealMatrix r = random_r(rng, p);
  const PamConstellation c(2);
  const auto y = noisy_observation(rng, r, c, 0.3);

  std::ostringstream trace;
  DecoderOptions opt;
  opt.prune = false;
  opt.trace = &trace;
  sphere_decode(r, y, c, p, opt);

  // increment of x3 (level 2) under each value of x4 (level 3)
  std::map<std::size_t, std::vector<double>> increments;
  double parent = 0.0;
  std::istringstream lines(trace.str());
  for (std::string line; std::getline(lines, line);) {
    const auto j = nlohmann::json::parse(line);
    const auto level = j["level"].get<std::size_t>();
    if (level == 3) parent = j["partial_metric"].get<double>();
    if (level == 2) increments[j["symbol_index"].get<std::size_t>()].push_back(j["partial_metric"].get<double>() - parent);
  }
  ASSERT_EQ(increments.size(), 2u);
  for (const auto& [v, inc] : increments) {
    ASSERT_EQ(inc.size(), 2u);
    EXPECT_NEAR(inc[0], inc[1], 1e-12);
  }

  opt.memoize = true;
  opt.verify_cache = true;
  opt.trace = nullptr;
  const DecoderStats memo = sphere_decode(r, y, c, p, opt);
  EXPECT_EQ(memo.cache_hits, 1u);
}

TEST(SphereDecode, MatchesExhaustiveAtFourPam) {
  Rng rng(62);
  const PamConstellation c(4);
  for (const BlockOrthogonalProfile p : {BlockOrthogonalProfile{2, 4, 1}, BlockOrthogonalProfile{2, 2, 2}}) {
    for (int trial = 0; trial < 100; ++trial) {
      const RealMatrix r = random_r(rng, p);
      const auto y = noisy_observation(rng, r, c, 0.4);
      const auto oracle = exhaustive_ml(r, y, c);
      DecoderOptions memo;
      memo.memoize = true;
      memo.verify_cache = true;
      const DecoderStats base = sphere_decode(r, y, c, p, DecoderOptions{});
      const DecoderStats m = sphere_decode(r, y, c, p, memo);
      const DecoderStats plain = sphere_decode(r, y, c);
      EXPECT_EQ(base.decoded, oracle);
      EXPECT_EQ(m.decoded, oracle);
      EXPECT_EQ(plain.decoded, oracle);
      EXPECT_LE(m.cache_entries_peak, em_count_bounds(p, 4).mem_entries);
      EXPECT_EQ(base.cache_hits, 0u);
    }
  }
}

TEST(SphereDecode, PruningOnlyReducesWork) {
  Rng rng(63);
  const PamConstellation c(2);
  const BlockOrthogonalProfile p{2, 4, 1};
  for (int trial = 0; trial < 50; ++trial) {
    const RealMatrix r = random_r(rng, p);
    const auto y = noisy_observation(rng, r, c, 0.8);
    for (bool memo : {false, true}) {
      DecoderOptions on;
      on.memoize = memo;
      DecoderOptions off = on;
      off.prune = false;
      const DecoderStats a = sphere_decode(r, y, c, p, on);
      const DecoderStats b = sphere_decode(r, y, c, p, off);
      EXPECT_EQ(a.decoded, b.decoded);
      EXPECT_LE(a.nodes_visited, b.nodes_visited);
      EXPECT_LE(a.em_evaluations, b.em_evaluations);
    }
  }
}

TEST(SphereDecode, Errors) {
  const PamConstellation c(2);
  RealMatrix r = RealMatrix::identity(2);
  r(1, 0) = 0.5;
  const std::vector<double> y = {0.0, 0.0};
  try {
    sphere_decode(r, y, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotUpperTriangular);
  }
  RealMatrix dense = RealMatrix::identity(4);
  dense(0, 1) = 1.0;
  try {
    sphere_decode(dense, std::vector<double>(4, 0.0), c, BlockOrthogonalProfile{2, 2, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidProfile);
  }
}

TEST(Exhaustive, Basics) {
  const PamConstellation c(4);
  const RealMatrix one = RealMatrix::identity(1);
  for (double v : {-2.0, -0.3, 0.1, 0.9}) {
    const std::vector<double> y = {v};
    EXPECT_EQ(exhaustive_ml(one, y, c), (std::vector<std::size_t>{c.nearest(v)}));
  }
  Rng rng(64);
  const PamConstellation c2(2);
  for (int trial = 0; trial < 20; ++trial) {
    RealMatrix h(6, 4);
    for (auto& v : h.data()) v = rng.gaussian();
    std::vector<std::size_t> x(4);
    std::vector<double> xv(4);
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] = rng.index(2);
      xv[i] = c2.point(x[i]);
    }
    const auto y0 = matvec(h, xv);
    EXPECT_EQ(exhaustive_ml(h, y0, c2), x);

    std::vector<double> y = y0;
    for (auto& v : y) v += 0.7 * rng.gaussian();
    const QrResult qr = gram_schmidt_qr(h);
    std::vector<double> yp(4);
    for (std::size_t j = 0; j < 4; ++j) yp[j] = dot(qr.q.column(j), y);
    EXPECT_EQ(exhaustive_ml(h, y, c2), sphere_decode(qr.r, yp, c2).decoded);
  }
}

TEST(Exhaustive, TooLarge) {
  const RealMatrix h = RealMatrix::identity(21);
  const std::vector<double> y(21, 0.0);
  try {
    exhaustive_ml(h, y, PamConstellation(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooLarge);
  }
}

TEST(Bounds, ClosedForms) {
  const auto a = em_count_bounds({2, 2, 1}, 2);
  EXPECT_EQ(a.emrr, Rational::make(2, 3));
  EXPECT_EQ(a.o_stbc, 6u);
  EXPECT_EQ(a.o_bostbc, 4u);
  const auto b = em_count_bounds({2, 4, 1}, 4);
  EXPECT_EQ(b.emrr, Rational::make(12, 255));
  EXPECT_EQ(b.mem_entries, 12u);
  EXPECT_NEAR(b.emrr.value(), 0.0471, 1e-4);
  EXPECT_EQ(em_count_bounds({2, 4, 2}, 4).mem_entries, 60u);
  EXPECT_EQ(em_count_bounds({2, 2, 2}, 2).emrr, Rational::make(2, 5));
  EXPECT_THROW(em_count_bounds({8, 4, 2}, 8), Error);
}

TEST(Bounds, Qrdm) {
  EXPECT_EQ(qrdm_bound(4, 1, 4), Rational::make(1, 3));
  EXPECT_EQ(qrdm_bound(1, 1, 2), Rational::make(2, 1));
  EXPECT_EQ(qrdm_bound(2, 2, 4), Rational::make(16, 30));
  EXPECT_EQ(Rational::make(16, 30).to_string(), "8/15");
}

TEST(FullTree, CountsMatchClosedForms) {
  struct Case {
    BlockOrthogonalProfile p;
    unsigned m;
  };
  Rng rng(65);
  for (const Case& cs : {Case{{2, 2, 1}, 2}, Case{{2, 4, 1}, 4}, Case{{2, 2, 2}, 2}, Case{{4, 2, 1}, 2},
                         Case{{3, 2, 2}, 2}, Case{{2, 2, 2}, 4}}) {
    const PamConstellation c(cs.m);
    const RealMatrix r = random_r(rng, cs.p);
    const auto y = noisy_observation(rng, r, c, 0.5);
    const DecoderStats base = force_full_tree_decode(r, y, c, cs.p, false);
    const DecoderStats memo = force_full_tree_decode(r, y, c, cs.p, true);
    const auto bounds = em_count_bounds(cs.p, cs.m);
    const std::size_t n = cs.p.block_size();
    EXPECT_EQ(base.em_from(n), bounds.o_stbc) << cs.p;
    EXPECT_EQ(memo.em_from(n), bounds.o_bostbc) << cs.p;
    if (cs.p.gamma_blocks == 2) {
      EXPECT_EQ(Rational::make(memo.em_from(n), base.em_from(n)), bounds.emrr) << cs.p;
    }
    EXPECT_EQ(memo.cache_entries_peak, bounds.mem_entries) << cs.p;
    EXPECT_EQ(base.decoded, memo.decoded);
  }
}
