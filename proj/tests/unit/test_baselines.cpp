#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "framecast/baselines.hpp"

using namespace framecast;

TEST_SUITE("baselines") {

TEST_CASE("average allocation splits the budget exactly") {
  auto p = average_allocation(8, 0.5);
  REQUIRE(p.size() == 8);
  for (double x : p) CHECK(x == 0.0625);
  double sum = 0.0;
  for (double x : p) sum += x;
  CHECK(sum == 0.5);

  auto single = average_allocation(1, 0.25);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == 0.25);

  auto odd = average_allocation(3, 0.1);
  double osum = 0.0;
  for (double x : odd) osum += x;
  CHECK(osum == doctest::Approx(0.1).epsilon(1e-15));

  CHECK_THROWS_AS(average_allocation(0, 0.5), std::invalid_argument);
}

TEST_CASE("equal split failure rates stay inside the calibration band") {
  ScenarioConfig cfg;
  Rng rng(1);
  auto summary = run_baseline(cfg, make_average_policy(cfg), 1000, rng);
  REQUIRE(summary.per_user_failure_rate.size() == 8);
  for (double rate : summary.per_user_failure_rate) {
    CHECK(rate >= 0.02);
    CHECK(rate <= 0.10);
  }
  CHECK(summary.episodes == 1000);
  CHECK(summary.fps_non_mean > 0.0);
  CHECK(summary.fps_vr_mean > 0.0);
}

TEST_CASE("an unconstrained budget reaches the full frame rate") {
  ScenarioConfig cfg;
  cfg.p_max = 1e6;
  Rng rng(2);
  auto summary = run_baseline(cfg, make_average_policy(cfg), 50, rng);
  CHECK(summary.fps_non_mean == doctest::Approx(cfg.frames_per_second));
  CHECK(summary.fps_vr_mean == doctest::Approx(cfg.frames_per_second));
  CHECK(summary.episode_length_mean == doctest::Approx(cfg.frames_per_second));
  CHECK(summary.delay_std_vr_mean < 0.01);
  for (double rate : summary.per_user_failure_rate) CHECK(rate == 0.0);
}

TEST_CASE("summaries are deterministic for a fixed seed") {
  ScenarioConfig cfg;
  cfg.n_users = 4;
  cfg.n_vr = 2;
  Rng rng_a(7), rng_b(7);
  auto a = run_baseline(cfg, make_average_policy(cfg), 100, rng_a);
  auto b = run_baseline(cfg, make_average_policy(cfg), 100, rng_b);
  CHECK(a.reward_mean == b.reward_mean);
  CHECK(a.reward_std == b.reward_std);
  CHECK(a.fps_non_mean == b.fps_non_mean);
  CHECK(a.delay_std_vr_mean == b.delay_std_vr_mean);
  CHECK(a.per_user_failure_rate == b.per_user_failure_rate);
}

TEST_CASE("baseline log carries constant rows on the evaluation grid") {
  ScenarioConfig cfg;
  cfg.n_users = 2;
  cfg.n_vr = 1;
  cfg.frames_per_second = 10;
  cfg.min_fps_non = 5;
  cfg.min_fps_vr = 5;
  cfg.resolution_pixels = 1000;
  cfg.bits_per_pixel = 1;
  TrainingLog log = baseline_training_log(cfg, make_average_policy(cfg), "average",
                                          300, 50, 3, 4);
  REQUIRE(log.records.size() == 6);
  for (const auto& rec : log.records) {
    CHECK(rec.variant == "average");
    CHECK(rec.seed == 4);
    CHECK(rec.eval_reward_total == log.records[0].eval_reward_total);
    CHECK(rec.episode_length_mean == log.records[0].episode_length_mean);
  }
  CHECK(log.records[0].step == 50);
  CHECK(log.records[5].step == 300);
}

}  // TEST_SUITE
