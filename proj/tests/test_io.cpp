#include <gtest/gtest.h>

#include <bit>

#include "bostbc/io.hpp"

using namespace bostbc;

TEST(CodeJson, BitExactRoundTrip) {
  for (const auto& id : shipped_code_ids()) {
    const LinearSTBC c = shipped_code(id);
    const std::string text = code_to_json(c).dump();
    const LinearSTBC back = code_from_json(Json::parse(text));
    EXPECT_EQ(back.n_t, c.n_t);
    EXPECT_EQ(back.labels, c.labels);
    EXPECT_EQ(back.ordering, c.ordering);
    EXPECT_EQ(back.declared_profile, c.declared_profile);
    ASSERT_EQ(back.k_real(), c.k_real());
    for (std::size_t i = 0; i < c.k_real(); ++i)
      for (std::size_t e = 0; e < c.weights[i].size(); ++e) {
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back.weights[i].data()[e].real()),
                  std::bit_cast<std::uint64_t>(c.weights[i].data()[e].real()));
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back.weights[i].data()[e].imag()),
                  std::bit_cast<std::uint64_t>(c.weights[i].data()[e].imag()));
      }
  }
}

TEST(CodeJson, Layout) {
  const Json j = code_to_json(alamouti_code());
  EXPECT_EQ(j["k_real"], 4);
  EXPECT_EQ(j["weights"][0][1][1][0], 1.0);
  EXPECT_TRUE(j["declared_profile"].is_array());
}

TEST(CodeJson, Rejects) {
  Json j = code_to_json(golden_code());
  j["k_real"] = 7;
  EXPECT_THROW(code_from_json(j), Error);
  Json bad = code_to_json(golden_code());
  bad["weights"][0][0] = Json::array({Json::array({1.0})});
  EXPECT_THROW(code_from_json(bad), Error);
  EXPECT_THROW(code_from_json(Json::object()), Error);
}

TEST(ReportJson, Fields) {
  const Json j = report_to_json(analyze_code(golden_code()));
  EXPECT_EQ(j["classification"], "block-orthogonal");
  EXPECT_EQ(j["profile"], Json::array({4, 2, 1}));
  EXPECT_EQ(j["tol"], 1e-9);
  EXPECT_EQ(j["pattern"].size(), 8u);
  EXPECT_EQ(j["seeds"][0], kDefaultChannelSeed);
  for (const auto& c : j["conditions"]) {
    EXPECT_TRUE(c.contains("name"));
    EXPECT_EQ(c["pass"].get<bool>(), c["name"] != "block_diagonal_groups");
  }
  EXPECT_TRUE(report_to_json(analyze_code(reorder_by_labels(
                  golden_code(), std::vector<std::string>{"s1I", "s1Q", "s4I", "s2Q", "s3I", "s3Q", "s2I", "s4Q"})))["profile"]
                  .is_null());
}

TEST(CampaignJson, ParseAndDefaults) {
  const SimulationCampaign c = campaign_from_json(Json{{"code", "bhv"}, {"trials_per_point", 10}});
  EXPECT_EQ(c.code_id, "bhv");
  EXPECT_EQ(c.m, 2u);
  EXPECT_EQ(c.snr_grid_db, (std::vector<double>{0, 4, 8, 12, 16, 20}));
  const SimulationCampaign back = campaign_from_json(campaign_to_json(c));
  EXPECT_EQ(back.trials_per_point, 10u);
}

TEST(CampaignJson, Rejects) {
  EXPECT_THROW(campaign_from_json(Json{{"code", "bhv"}, {"snr_grid_db", {4, 0}}}), Error);
  EXPECT_THROW(campaign_from_json(Json{{"code", "bhv"}, {"trials", 3}}), Error);
  EXPECT_THROW(campaign_from_json(Json{{"trials_per_point", 3}}), Error);
  try {
    campaign_from_json(Json{{"code", "bhv"}, {"m", "two"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidConfig);
  }
}

TEST(BoundsJson, Values) {
  const Json j = bounds_to_json({2, 4, 1}, 4);
  EXPECT_EQ(j["emrr"], "4/85");
  EXPECT_EQ(j["mem_entries"], 12);
  EXPECT_EQ(j["qrdm_ratio"], "1/3");
}
