#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "framecast/ppo.hpp"

using namespace framecast;

namespace {

ScenarioConfig small_cfg() {
  ScenarioConfig cfg;
  cfg.n_users = 2;
  cfg.n_vr = 1;
  cfg.frames_per_second = 10;
  cfg.min_fps_non = 5;
  cfg.min_fps_vr = 6;
  cfg.p_max = 5e-5;
  return cfg;
}

TrainerParams small_params() {
  TrainerParams p;
  p.hidden_sizes = {8};
  p.rollout_length = 64;
  p.minibatch_size = 64;
  p.epochs_per_batch = 1;
  p.eval_episodes = 2;
  return p;
}

// Forward-sum GAE oracle: literal truncated sums of (gamma*lambda)^k
// delta^{t+k}, stopping after the first done at or beyond t.
std::vector<double> gae_oracle(const std::vector<double>& r,
                               const std::vector<double>& v,
                               const std::vector<double>& nv,
                               const std::vector<int>& done, double gamma,
                               double lambda) {
  const std::size_t n = r.size();
  std::vector<double> delta(n), adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    delta[t] = r[t] + gamma * (done[t] ? 0.0 : nv[t]) - v[t];
  }
  for (std::size_t t = 0; t < n; ++t) {
    double w = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      adv[t] += w * delta[k];
      if (done[k]) break;
      w *= gamma * lambda;
    }
  }
  return adv;
}

// Random but internally consistent transitions under a given actor.
std::vector<Transition> synthetic_batch(ActorPolicy& actor, int n, int d_non,
                                        int d_vr, Rng& rng) {
  std::vector<Transition> batch(n);
  for (auto& tr : batch) {
    tr.s_non.resize(d_non);
    tr.s_vr.resize(d_vr);
    for (double& x : tr.s_non) x = rng.uniform(-1.0, 1.0);
    for (double& x : tr.s_vr) x = rng.uniform(-1.0, 1.0);
    auto action = actor.sample(tr.global_state(), rng);
    tr.fractions = action.fractions;
    tr.log_prob = action.log_prob;
    tr.reward_non = rng.uniform(-1.0, 1.0);
    tr.reward_vr = rng.uniform(-1.0, 1.0);
    tr.value_non = rng.uniform(-1.0, 1.0);
    tr.value_vr = rng.uniform(-1.0, 1.0);
    tr.next_value_non = rng.uniform(-1.0, 1.0);
    tr.next_value_vr = rng.uniform(-1.0, 1.0);
    tr.done = rng.uniform() < 0.1;
  }
  return batch;
}

}  // namespace

TEST_SUITE("ppo") {

TEST_CASE("gae: lambda zero collapses to the one-step residual") {
  std::vector<double> r{1.0, -0.5, 2.0};
  std::vector<double> v{0.3, 0.1, -0.2};
  std::vector<double> nv{0.1, -0.2, 0.0};
  std::vector<int> done{0, 0, 1};
  auto adv = gae_advantages(r, v, nv, done, 0.9, 1e-12);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double delta = r[t] + 0.9 * (done[t] ? 0.0 : nv[t]) - v[t];
    CHECK(adv[t] == doctest::Approx(delta).epsilon(1e-9));
  }
}

TEST_CASE("gae: terminal step with zero value is the raw reward") {
  std::vector<double> r{1.0};
  std::vector<double> v{0.0}, nv{123.0};  // bootstrap must be ignored
  std::vector<int> done{1};
  auto adv = gae_advantages(r, v, nv, done, 0.99, 0.95);
  CHECK(adv[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gae: worked two-step example") {
  // delta0 = 1 + 0.99*0.2 - 0.5 = 0.698, delta1 = 1 - 0.2 = 0.8,
  // A0 = 0.698 + 0.9405*0.8 = 1.4504, A1 = 0.8.
  std::vector<double> r{1.0, 1.0};
  std::vector<double> v{0.5, 0.2};
  std::vector<double> nv{0.2, 0.0};
  std::vector<int> done{0, 1};
  auto adv = gae_advantages(r, v, nv, done, 0.99, 0.95);
  CHECK(adv[0] == doctest::Approx(1.4504).epsilon(1e-12));
  CHECK(adv[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("gae: backward recursion matches the forward-sum oracle") {
  Rng rng(100);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 24);
    std::vector<double> r(n), v(n), nv(n);
    std::vector<int> done(n);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.uniform(-2.0, 2.0);
      v[i] = rng.uniform(-2.0, 2.0);
      nv[i] = rng.uniform(-2.0, 2.0);
      done[i] = rng.uniform() < 0.2 ? 1 : 0;
    }
    const double gamma = rng.uniform(0.5, 1.0);
    const double lambda = rng.uniform(0.5, 1.0);
    auto fast = gae_advantages(r, v, nv, done, gamma, lambda);
    auto slow = gae_oracle(r, v, nv, done, gamma, lambda);
    for (int i = 0; i < n; ++i) {
      CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("grouped advantages: standard variant sums the streams") {
  Rng rng(7);
  ActorPolicy actor(9, 2, {8}, rng);
  auto batch = synthetic_batch(actor, 32, 4, 5, rng);
  auto grouped = grouped_advantages(batch, CriticKind::kStandard, 0.99, 0.95);
  REQUIRE(grouped.vr.size() == batch.size());
  for (double a : grouped.vr) CHECK(a == 0.0);
  // Against a manual run on the summed stream.
  std::vector<double> r, v, nv;
  std::vector<int> done;
  for (const auto& tr : batch) {
    r.push_back(tr.reward_non + tr.reward_vr);
    v.push_back(tr.value_non);
    nv.push_back(tr.next_value_non);
    done.push_back(tr.done ? 1 : 0);
  }
  auto direct = gae_advantages(r, v, nv, done, 0.99, 0.95);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(grouped.non[i] == doctest::Approx(direct[i]).epsilon(1e-12));
  }
}

TEST_CASE("grouped advantages: per-group streams are independent GAE runs") {
  Rng rng(8);
  ActorPolicy actor(9, 2, {8}, rng);
  auto batch = synthetic_batch(actor, 24, 4, 5, rng);
  auto grouped = grouped_advantages(batch, CriticKind::kMido, 0.99, 0.95);
  std::vector<double> r, v, nv;
  std::vector<int> done;
  for (const auto& tr : batch) {
    r.push_back(tr.reward_vr);
    v.push_back(tr.value_vr);
    nv.push_back(tr.next_value_vr);
    done.push_back(tr.done ? 1 : 0);
  }
  auto direct = gae_advantages(r, v, nv, done, 0.99, 0.95);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(grouped.vr[i] == doctest::Approx(direct[i]).epsilon(1e-12));
  }
  // Identical streams give identical advantages.
  for (auto& tr : batch) {
    tr.reward_vr = tr.reward_non;
    tr.value_vr = tr.value_non;
    tr.next_value_vr = tr.next_value_non;
  }
  auto sym = grouped_advantages(batch, CriticKind::kSido, 0.99, 0.95);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(sym.non[i] == doctest::Approx(sym.vr[i]).epsilon(1e-12));
  }
}

TEST_CASE("grouped advantages: an all-zero VR stream stays zero") {
  Rng rng(9);
  ActorPolicy actor(9, 2, {8}, rng);
  auto batch = synthetic_batch(actor, 16, 4, 5, rng);
  for (auto& tr : batch) {
    tr.reward_vr = 0.0;
    tr.value_vr = 0.0;
    tr.next_value_vr = 0.0;
  }
  auto grouped = grouped_advantages(batch, CriticKind::kMido, 0.99, 0.95);
  for (double a : grouped.vr) CHECK(a == 0.0);
  // Degenerate equivalence: with no VR signal, the standard variant's
  // summed stream reproduces the differentiated non-VR advantages.
  auto standard = grouped_advantages(batch, CriticKind::kStandard, 0.99, 0.95);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(standard.non[i] == doctest::Approx(grouped.non[i]).epsilon(1e-12));
    CHECK(standard.non[i] + standard.vr[i] ==
          doctest::Approx(grouped.non[i] + grouped.vr[i]).epsilon(1e-12));
  }
}

TEST_CASE("actor log-prob gradient matches finite differences") {
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    ActorPolicy actor(6, 3, {7}, rng);
    std::vector<double> state(6);
    for (double& x : state) x = rng.uniform(-1.0, 1.0);
    auto action = actor.sample(state, rng);
    actor.net().zero_grad();
    actor.accumulate_log_prob_grad(state, action.fractions, 1.0);
    auto analytic = actor.net().flatten_grads();
    auto theta = actor.net().flatten_params();
    std::vector<double> numeric(theta.size());
    const double h = 1e-5;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto tp = theta;
      tp[i] = theta[i] + h;
      actor.net().set_params(tp);
      const double up = actor.log_prob(state, action.fractions);
      tp[i] = theta[i] - h;
      actor.net().set_params(tp);
      const double down = actor.log_prob(state, action.fractions);
      numeric[i] = (up - down) / (2.0 * h);
    }
    actor.net().set_params(theta);
    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("freshly initialized policy is close to the uniform split") {
  Rng rng(3);
  ActorPolicy actor(9, 4, {16, 16}, rng);
  std::vector<double> state(9, 0.4);
  auto mean = actor.mean_action(state);
  for (double f : mean) CHECK(f == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("sido critic: value isolation between branches is exact") {
  Rng rng(11);
  Critic critic(CriticKind::kSido, 8, 10, {12, 12}, true, rng);
  Rng xr(12);
  std::vector<double> s_non(8), s_vr(10);
  for (double& x : s_non) x = xr.uniform(-1.0, 1.0);
  for (double& x : s_vr) x = xr.uniform(-1.0, 1.0);
  auto [v_non, v_vr] = sido_values(critic, s_non, s_vr);
  // Any perturbation of the VR state leaves V_non bit-identical.
  for (int i = 0; i < 10; ++i) {
    auto pert = s_vr;
    pert[i] += 0.37;
    auto [p_non, p_vr] = sido_values(critic, s_non, pert);
    CHECK(p_non == v_non);
  }
  for (int i = 0; i < 8; ++i) {
    auto pert = s_non;
    pert[i] -= 0.21;
    auto [p_non, p_vr] = sido_values(critic, pert, s_vr);
    CHECK(p_vr == v_vr);
  }
  // Swapping the two VR user blocks (5 elements each) leaves V_non alone.
  std::vector<double> swapped(s_vr.begin() + 5, s_vr.end());
  swapped.insert(swapped.end(), s_vr.begin(), s_vr.begin() + 5);
  CHECK(sido_values(critic, s_non, swapped).first == v_non);
}

TEST_CASE("mido critic: the value head sees the whole state") {
  Rng rng(13);
  Critic critic(CriticKind::kMido, 8, 10, {12, 12}, true, rng);
  Rng xr(14);
  std::vector<double> sg(18);
  for (double& x : sg) x = xr.uniform(-1.0, 1.0);
  auto [v_non, v_vr] = mido_values(critic, sg);
  auto [again_non, again_vr] = mido_values(critic, sg);
  CHECK(v_non == again_non);
  CHECK(v_vr == again_vr);
  // Generic dependence of V_non on VR components.
  double max_change = 0.0;
  for (int i = 8; i < 18; ++i) {
    auto pert = sg;
    pert[i] += 1e-3;
    max_change = std::max(max_change,
                          std::abs(mido_values(critic, pert).first - v_non));
  }
  CHECK(max_change > 1e-9);
  CHECK_THROWS_AS(sido_values(critic, std::vector<double>(8, 0.0),
                              std::vector<double>(10, 0.0)),
                  std::logic_error);
}

TEST_CASE("zeroed critics report their head biases") {
  Rng rng(15);
  const int width = 6;
  Critic sido(CriticKind::kSido, 4, 5, {width}, true, rng);
  std::vector<double> flat(sido.flatten_params().size(), 0.0);
  // Flatten order ends with head_non (w, b) then head_vr (w, b).
  flat[flat.size() - 1] = 0.7;              // head_vr bias
  flat[flat.size() - 1 - 1 - width] = 0.3;  // head_non bias
  sido.set_params(flat);
  auto [v_non, v_vr] = sido.values(std::vector<double>(4, 0.9),
                                   std::vector<double>(5, -0.4));
  CHECK(v_non == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(v_vr == doctest::Approx(0.7).epsilon(1e-12));

  Critic mido(CriticKind::kMido, 4, 5, {width}, true, rng);
  std::vector<double> mflat(mido.flatten_params().size(), 0.0);
  mflat[mflat.size() - 2] = -1.1;
  mflat[mflat.size() - 1] = 2.2;
  mido.set_params(mflat);
  auto [m_non, m_vr] = mido.values(std::vector<double>(4, 0.1),
                                   std::vector<double>(5, 0.2));
  CHECK(m_non == doctest::Approx(-1.1).epsilon(1e-12));
  CHECK(m_vr == doctest::Approx(2.2).epsilon(1e-12));
}

TEST_CASE("critic value gradients match finite differences for all variants") {
  for (CriticKind kind :
       {CriticKind::kStandard, CriticKind::kSido, CriticKind::kMido}) {
    for (int seed = 0; seed < 4; ++seed) {
      Rng rng(40 + seed);
      Critic critic(kind, 4, 5, {6, 5}, true, rng);
      std::vector<double> s_non(4), s_vr(5);
      for (double& x : s_non) x = rng.uniform(-1.0, 1.0);
      for (double& x : s_vr) x = rng.uniform(-1.0, 1.0);
      const double a = 0.8, b = kind == CriticKind::kStandard ? 0.0 : -1.3;
      critic.zero_grad();
      critic.accumulate_value_grad(s_non, s_vr, a, b);
      auto analytic = critic.flatten_grads();
      auto theta = critic.flatten_params();
      std::vector<double> numeric(theta.size());
      const double h = 1e-5;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        auto tp = theta;
        tp[i] = theta[i] + h;
        critic.set_params(tp);
        auto [un, uv] = critic.values(s_non, s_vr);
        tp[i] = theta[i] - h;
        critic.set_params(tp);
        auto [dn, dv] = critic.values(s_non, s_vr);
        numeric[i] = (a * (un - dn) + b * (uv - dv)) / (2.0 * h);
      }
      critic.set_params(theta);
      double worst = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("actor update: untouched policy gives unit ratios") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.actor_lr = 0.0;
  Trainer trainer(cfg, CriticKind::kMido, params, 5);
  Rng rng(6);
  auto batch = synthetic_batch(trainer.actor(), 32, 4, 5, rng);
  std::vector<double> adv(batch.size());
  for (double& a : adv) a = rng.uniform(-1.0, 1.0);
  auto diag = trainer.actor_update(batch, adv);
  CHECK(diag.mean_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(diag.clip_fraction == 0.0);
}

TEST_CASE("actor update: zero advantages leave the policy untouched") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.epochs_per_batch = 3;
  Trainer trainer(cfg, CriticKind::kMido, params, 6);
  Rng rng(7);
  auto batch = synthetic_batch(trainer.actor(), 32, 4, 5, rng);
  std::vector<double> adv(batch.size(), 0.0);
  auto before = trainer.actor().net().flatten_params();
  trainer.actor_update(batch, adv);
  CHECK(trainer.actor().net().flatten_params() == before);
}

TEST_CASE("actor update: the clip gate zeroes the pushed-out gradient") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.minibatch_size = 1;
  Trainer trainer(cfg, CriticKind::kMido, params, 8);
  Rng rng(9);
  auto batch = synthetic_batch(trainer.actor(), 1, 4, 5, rng);
  const double eps = params.clip;
  // Stored log-prob shifted so the current ratio is exactly 1 + 2*eps.
  batch[0].log_prob -= std::log(1.0 + 2.0 * eps);
  std::vector<double> adv{1.0};
  auto before = trainer.actor().net().flatten_params();
  auto diag = trainer.actor_update(batch, adv);
  CHECK(diag.clip_fraction == 1.0);
  CHECK(trainer.actor().net().flatten_params() == before);
  for (double g : trainer.actor().net().flatten_grads()) CHECK(g == 0.0);
  // The same ratio with a negative advantage is not clipped.
  std::vector<double> neg{-1.0};
  trainer.actor_update(batch, neg);
  CHECK(trainer.actor().net().flatten_params() != before);
}

TEST_CASE("actor update gradient equals the importance-weighted surrogate") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.actor_lr = 0.0;       // keep parameters fixed, inspect gradients
  params.clip = 0.99;          // wide clip: nothing gated in this batch
  Trainer trainer(cfg, CriticKind::kMido, params, 10);
  Rng rng(11);
  const int n = 8;
  auto batch = synthetic_batch(trainer.actor(), n, 4, 5, rng);
  std::vector<double> adv(n);
  for (auto& a : adv) a = rng.uniform(-1.0, 1.0);
  for (auto& tr : batch) tr.log_prob += rng.uniform(-0.05, 0.05);
  trainer.actor_update(batch, adv);
  auto analytic = trainer.actor().net().flatten_grads();  // grad of -surrogate
  auto theta = trainer.actor().net().flatten_params();
  auto surrogate = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lp = trainer.actor().log_prob(batch[i].global_state(),
                                                 batch[i].fractions);
      s += std::exp(lp - batch[i].log_prob) * adv[i];
    }
    return s / n;
  };
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    auto tp = theta;
    tp[i] = theta[i] + h;
    trainer.actor().net().set_params(tp);
    const double up = surrogate();
    tp[i] = theta[i] - h;
    trainer.actor().net().set_params(tp);
    const double down = surrogate();
    const double numeric = -(up - down) / (2.0 * h);
    double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  trainer.actor().net().set_params(theta);
  CHECK(worst < 1e-3);
}

TEST_CASE("critic update: zero error means zero loss and no movement") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  Trainer trainer(cfg, CriticKind::kMido, params, 12);
  Rng rng(13);
  auto batch = synthetic_batch(trainer.actor(), 16, 4, 5, rng);
  // Targets A + V' with A = 0 and stored V' = current critic values.
  GroupedAdvantages adv;
  adv.non.assign(batch.size(), 0.0);
  adv.vr.assign(batch.size(), 0.0);
  for (auto& tr : batch) {
    auto [vn, vv] = trainer.critic().values(tr.s_non, tr.s_vr);
    tr.value_non = vn;
    tr.value_vr = vv;
  }
  auto before = trainer.critic().flatten_params();
  auto diag = trainer.critic_update(batch, adv);
  CHECK(diag.loss == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(trainer.critic().flatten_params() == before);
}

TEST_CASE("critic update: reported loss is the mean squared group error") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.critic_lr = 0.0;
  Trainer trainer(cfg, CriticKind::kMido, params, 14);
  Rng rng(15);
  auto batch = synthetic_batch(trainer.actor(), 2, 4, 5, rng);
  GroupedAdvantages adv;
  adv.non = {0.4, -0.3};
  adv.vr = {0.1, 0.9};
  double expected = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto [vn, vv] = trainer.critic().values(batch[i].s_non, batch[i].s_vr);
    const double en = vn - (adv.non[i] + batch[i].value_non);
    const double ev = vv - (adv.vr[i] + batch[i].value_vr);
    expected += en * en + ev * ev;
  }
  expected /= batch.size();
  auto diag = trainer.critic_update(batch, adv);
  CHECK(diag.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("critic targets are frozen between synchronizations") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.target_update_period = 1000;  // never sync in this test
  params.epochs_per_batch = 3;
  Trainer trainer(cfg, CriticKind::kSido, params, 16);
  Rng rng(17);
  auto batch = synthetic_batch(trainer.actor(), 16, 4, 5, rng);
  std::vector<std::pair<double, double>> before;
  for (const auto& tr : batch) {
    before.push_back(trainer.critic().target_values(tr.s_non, tr.s_vr));
  }
  GroupedAdvantages adv;
  adv.non.assign(batch.size(), 0.7);
  adv.vr.assign(batch.size(), -0.2);
  trainer.critic_update(batch, adv);
  // Live values moved, target values did not.
  bool live_moved = false;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto t = trainer.critic().target_values(batch[i].s_non, batch[i].s_vr);
    CHECK(t.first == before[i].first);
    CHECK(t.second == before[i].second);
    auto l = trainer.critic().values(batch[i].s_non, batch[i].s_vr);
    if (l.first != before[i].first || l.second != before[i].second) live_moved = true;
  }
  CHECK(live_moved);
  trainer.critic().sync_target();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto t = trainer.critic().target_values(batch[i].s_non, batch[i].s_vr);
    auto l = trainer.critic().values(batch[i].s_non, batch[i].s_vr);
    CHECK(t.first == l.first);
    CHECK(t.second == l.second);
  }
}

TEST_CASE("train: evaluation cadence and log shape") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  Trainer trainer(cfg, CriticKind::kMido, params, 18);
  TrainingLog log = trainer.train(500, 50);
  REQUIRE(log.records.size() == 10);
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    CHECK(log.records[i].step == static_cast<long>(50 * (i + 1)));
    CHECK(log.records[i].variant == "mido");
    CHECK(log.records[i].seed == 18);
    CHECK(std::isfinite(log.records[i].eval_reward_total));
  }
}

TEST_CASE("train: zero learning rates freeze the evaluation metrics") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.actor_lr = 0.0;
  params.critic_lr = 0.0;
  Trainer trainer(cfg, CriticKind::kStandard, params, 19);
  TrainingLog log = trainer.train(400, 50);
  REQUIRE(log.records.size() == 8);
  for (const auto& rec : log.records) {
    CHECK(rec.eval_reward_total == log.records[0].eval_reward_total);
    CHECK(rec.fps_non_mean == log.records[0].fps_non_mean);
    CHECK(rec.fps_vr_mean == log.records[0].fps_vr_mean);
    CHECK(rec.delay_std_vr_mean == log.records[0].delay_std_vr_mean);
    CHECK(rec.episode_length_mean == log.records[0].episode_length_mean);
  }
}

TEST_CASE("train: same seed reproduces the log exactly") {
  ScenarioConfig cfg = small_cfg();
  TrainerParams params = small_params();
  params.epochs_per_batch = 2;
  TrainingLog a = Trainer(cfg, CriticKind::kSido, params, 20).train(300, 50);
  TrainingLog b = Trainer(cfg, CriticKind::kSido, params, 20).train(300, 50);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].eval_reward_total == b.records[i].eval_reward_total);
    CHECK(a.records[i].eval_reward_non == b.records[i].eval_reward_non);
    CHECK(a.records[i].eval_reward_vr == b.records[i].eval_reward_vr);
    CHECK(a.records[i].fps_non_mean == b.records[i].fps_non_mean);
    CHECK(a.records[i].delay_std_vr_mean == b.records[i].delay_std_vr_mean);
  }
}

TEST_CASE("all variants train with an empty VR group") {
  ScenarioConfig cfg = small_cfg();
  cfg.n_vr = 0;
  TrainerParams params = small_params();
  for (CriticKind kind :
       {CriticKind::kStandard, CriticKind::kSido, CriticKind::kMido}) {
    Trainer trainer(cfg, kind, params, 21);
    TrainingLog log = trainer.train(150, 50);
    REQUIRE(log.records.size() == 3);
    for (const auto& rec : log.records) {
      CHECK(rec.eval_reward_vr == 0.0);
      CHECK(rec.fps_vr_mean == 0.0);
      CHECK(std::isfinite(rec.eval_reward_total));
    }
  }
}

TEST_CASE("critic kind names round-trip") {
  CHECK(critic_kind_from_string("sido") == CriticKind::kSido);
  CHECK(critic_kind_from_string("mido") == CriticKind::kMido);
  CHECK(critic_kind_from_string("standard_ppo") == CriticKind::kStandard);
  CHECK(to_string(CriticKind::kSido) == "sido");
  CHECK_THROWS_AS(critic_kind_from_string("a2c"), std::invalid_argument);
}

}  // TEST_SUITE
