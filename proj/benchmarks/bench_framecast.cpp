#include <benchmark/benchmark.h>

#include <vector>

#include "framecast/baselines.hpp"
#include "framecast/channel.hpp"
#include "framecast/dirichlet.hpp"
#include "framecast/env.hpp"
#include "framecast/ppo.hpp"

namespace {

using namespace framecast;

ScenarioConfig desk_config() {
  ScenarioConfig cfg;
  cfg.n_users = 4;
  cfg.n_vr = 2;
  cfg.frames_per_second = 30;
  cfg.min_fps_non = 20;
  cfg.min_fps_vr = 25;
  cfg.p_max = 2e-5;
  return cfg;
}

TrainerParams bench_params() {
  TrainerParams p;
  p.hidden_sizes = {64, 64};
  p.rollout_length = 256;
  p.minibatch_size = 64;
  p.epochs_per_batch = 1;
  return p;
}

std::vector<Transition> bench_batch(ActorPolicy& actor, int n, int d_non, int d_vr) {
  Rng rng(7);
  std::vector<Transition> batch(n);
  for (auto& tr : batch) {
    tr.s_non.resize(d_non);
    tr.s_vr.resize(d_vr);
    for (double& x : tr.s_non) x = rng.uniform(-1.0, 1.0);
    for (double& x : tr.s_vr) x = rng.uniform(-1.0, 1.0);
    auto a = actor.sample(tr.global_state(), rng);
    tr.fractions = a.fractions;
    tr.log_prob = a.log_prob;
    tr.reward_non = rng.uniform(-1.0, 1.0);
    tr.reward_vr = rng.uniform(-1.0, 1.0);
    tr.done = rng.uniform() < 0.1;
  }
  return batch;
}

void BM_ShannonRate(benchmark::State& state) {
  double p = 1e-5, g = 1.6e-7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(shannon_rate(p, g, 1e6, 4e-21));
  }
}
BENCHMARK(BM_ShannonRate);

void BM_EnvStep(benchmark::State& state) {
  ScenarioConfig cfg = desk_config();
  auto users = build_scenario(cfg);
  Environment env(cfg, users, 1);
  env.reset();
  auto powers = average_allocation(cfg.n_users, cfg.p_max);
  for (auto _ : state) {
    if (env.episode_done()) env.reset();
    benchmark::DoNotOptimize(env.step(powers));
  }
}
BENCHMARK(BM_EnvStep);

void BM_PolicyExec(benchmark::State& state) {
  ScenarioConfig cfg = desk_config();
  auto users = build_scenario(cfg);
  Environment env(cfg, users, 2);
  GroupedState s = env.reset();
  Rng rng(3);
  ActorPolicy actor(GroupedState::non_vr_dim(cfg.n_non()) +
                        GroupedState::vr_dim(cfg.n_vr),
                    cfg.n_users, {64, 64}, rng);
  for (auto _ : state) {
    auto fractions = actor.mean_action(s.global_vector(cfg));
    std::vector<double> powers(fractions.size());
    for (std::size_t i = 0; i < powers.size(); ++i) {
      powers[i] = fractions[i] * cfg.p_max;
    }
    auto res = env.step(powers);
    s = res.done ? env.reset() : res.state;
  }
}
BENCHMARK(BM_PolicyExec);

void BM_DirichletSample(benchmark::State& state) {
  Rng rng(4);
  std::vector<double> alpha(8, 1.7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dirichlet_sample(alpha, rng));
  }
}
BENCHMARK(BM_DirichletSample);

void BM_GaeAdvantages(benchmark::State& state) {
  Rng rng(5);
  const int n = 2048;
  std::vector<double> r(n), v(n), nv(n);
  std::vector<int> done(n);
  for (int i = 0; i < n; ++i) {
    r[i] = rng.uniform(-1.0, 1.0);
    v[i] = rng.uniform(-1.0, 1.0);
    nv[i] = rng.uniform(-1.0, 1.0);
    done[i] = rng.uniform() < 0.05;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(gae_advantages(r, v, nv, done, 0.99, 0.95));
  }
}
BENCHMARK(BM_GaeAdvantages);

// One epoch of critic regression per variant; the relative costs mirror
// the per-variant single-step train times.
void BM_CriticUpdate(benchmark::State& state) {
  ScenarioConfig cfg = desk_config();
  const CriticKind kind = static_cast<CriticKind>(state.range(0));
  Trainer trainer(cfg, kind, bench_params(), 11);
  auto batch = bench_batch(trainer.actor(), 256, GroupedState::non_vr_dim(2),
                           GroupedState::vr_dim(2));
  auto adv = grouped_advantages(batch, kind, 0.99, 0.95);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.critic_update(batch, adv));
  }
}
BENCHMARK(BM_CriticUpdate)
    ->Arg(static_cast<int>(CriticKind::kStandard))
    ->Arg(static_cast<int>(CriticKind::kSido))
    ->Arg(static_cast<int>(CriticKind::kMido));

void BM_ActorUpdate(benchmark::State& state) {
  ScenarioConfig cfg = desk_config();
  Trainer trainer(cfg, CriticKind::kMido, bench_params(), 12);
  auto batch = bench_batch(trainer.actor(), 256, GroupedState::non_vr_dim(2),
                           GroupedState::vr_dim(2));
  std::vector<double> adv(batch.size());
  Rng rng(13);
  for (double& a : adv) a = rng.uniform(-1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.actor_update(batch, adv));
  }
}
BENCHMARK(BM_ActorUpdate);

}  // namespace

BENCHMARK_MAIN();
