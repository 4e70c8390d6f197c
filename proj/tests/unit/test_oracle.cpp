#include "helpers.hpp"

#include <fstream>

#include <json.hpp>

#include "ribound/combinatorics.hpp"
#include "ribound/oracle.hpp"

using namespace ribound;

TEST_CASE("subset count examples") {
  const std::vector<double> tied(7, 3.0);
  const Schedule s = Schedule::make(tied, tied);
  const Assignment w{1, 1, 0, 0, 0, 0, 0};
  for (std::size_t k = 2; k <= 7; ++k)
    CHECK(oracle::stephenson_subset_count(w, s, k) == *checked_binomial(7, k) - *checked_binomial(5, k));

  const Schedule t = Schedule::make({1.0, 2.0, 9.0}, {1.0, 2.0, 9.0});
  CHECK(oracle::stephenson_subset_count(Assignment{1, 1, 0}, t, 3) == 0);
  CHECK(oracle::stephenson_subset_count(Assignment{0, 0, 1}, t, 3) == 1);

  const std::vector<double> big(21, 0.0);
  CHECK_ERRC(oracle::stephenson_subset_count(Assignment(21, 0), Schedule::make(big, big), 2), Errc::TooLargeForOracle);
}

TEST_CASE("exhaustive_p hand count, n = 4") {
  // treated {3, 4}, control {1, 2}: rank sums over the 6 assignments are 3,4,5,5,6,7
  const Dataset d = make_dataset(std::vector<std::uint8_t>{1, 1, 0, 0}, std::vector<double>{3, 4, 1, 2});
  const auto p = oracle::exhaustive_p(d, EffectSpec::constant(0.0), Statistic::rank_sum(), Design::from_dataset(d));
  CHECK(p.count == 1);
  CHECK(p.total == 6);
  const auto lower = oracle::exhaustive_p(d, EffectSpec::constant(0.0), Statistic::rank_sum(),
                                          Design::from_dataset(d), Tail::Lower);
  CHECK(lower.count == 6);
}

TEST_CASE("exhaustive_p reproduces the illustration goldens") {
  const Dataset d = fixtures::example16();
  const Design design = Design::from_dataset(d);
  const auto stat = Statistic::diff_means();
  CHECK(oracle::exhaustive_p(d, EffectSpec::constant(0.0), stat, design).count == 522);
  CHECK(oracle::exhaustive_p(d, EffectSpec::constant(-1.0), stat, design).count == 27);
  CHECK(oracle::exhaustive_p(d, fixtures::example16_bound(), stat, design).count == 349);
  CHECK_ERRC(oracle::exhaustive_p(make_dataset(Assignment(fixtures::alternating(30)), std::vector<double>(30, 0.0)),
                                  EffectSpec::constant(0.0), stat, Design::complete(30, 15)),
             Errc::TooLargeForOracle);
}

TEST_CASE("naive statistics agree with the optimized ones") {
  const Schedule s = Schedule::make({0.1, 0.5, 0.5, 0.9, 0.2, 0.3}, {0.4, 0.5, 0.7, 0.9, 0.6, 0.3});
  const Assignment w{1, 0, 1, 0, 1, 0};
  for (const auto& stat : {Statistic::diff_means(), Statistic::rank_sum(), Statistic::stephenson(3),
                           Statistic::threshold_proportion(0.45), Statistic::welch_t()}) {
    CHECK(oracle::values_agree(stat.evaluate(w, s), oracle::naive_statistic(stat, w, s), stat.exact_valued()));
  }
  CHECK(oracle::values_agree(1.0, 1.0 + 1e-12, false));
  CHECK_FALSE(oracle::values_agree(1.0, 1.0 + 1e-12, true));
}

TEST_CASE("differential checks") {
  const auto st = oracle::check_stephenson(100, 12, 6, 61);
  CHECK(st.cases == 100);
  CHECK(st.violations == 0);
  CHECK(st.agree);
  const auto pv = oracle::check_p_values(60, 67);
  CHECK(pv.violations == 0);
  const auto ei = oracle::ei_property_check(Statistic::stephenson(4), 100, Design::complete(8, 4), 71, true);
  CHECK(ei.violations == 0);
  CHECK_FALSE(ei.witness.has_value());
  const auto paired = oracle::ei_property_check(Statistic::rank_sum(), 50,
                                                Design::paired(8, {{0, 1}, {2, 3}, {4, 5}, {6, 7}}), 73, true);
  CHECK(paired.violations == 0);
}

TEST_CASE("stored welch-t witness still breaks the ordering") {
  std::ifstream in(std::string(RIBOUND_SOURCE_DIR) + "/tests/fixtures/welch_witness.json");
  REQUIRE(in);
  const auto j = nlohmann::json::parse(in)["result"]["witness"];
  const auto lower = Schedule::make(j["lower"]["y0"], j["lower"]["y1"]);
  const auto upper = Schedule::make(j["upper"]["y0"], j["upper"]["y1"]);
  const Assignment w = j["w"].get<Assignment>();
  const auto order = compare_schedules(lower, upper);
  CHECK((order == ScheduleOrdering::LessOrEqual || order == ScheduleOrdering::Equal));
  const auto welch = Statistic::welch_t();
  CHECK(welch.evaluate(w, lower) > welch.evaluate(w, upper));
  CHECK(welch.evaluate(w, lower) == doctest::Approx(j["t_lower"].get<double>()));
  for (const auto& stat : {Statistic::diff_means(), Statistic::rank_sum(), Statistic::stephenson(3)})
    CHECK(stat.evaluate(w, lower) <= stat.evaluate(w, upper));
}
