#include "framecast/ppo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "framecast/errors.hpp"

namespace framecast {

namespace {

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> concentrations_from_raw(std::span<const double> raw) {
  std::vector<double> alpha(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) alpha[i] = softplus(raw[i]) + 1.0;
  return alpha;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void TrainerParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid trainer params: ") + what);
  };
  require(gamma > 0.0 && gamma <= 1.0, "gamma in (0,1]");
  require(lambda > 0.0 && lambda <= 1.0, "lambda in (0,1]");
  require(clip > 0.0 && clip < 1.0, "clip in (0,1)");
  require(epochs_per_batch >= 1, "epochs_per_batch >= 1");
  require(rollout_length >= 1, "rollout_length >= 1");
  require(minibatch_size >= 1, "minibatch_size >= 1");
  require(target_update_period >= 1, "target_update_period >= 1");
  require(actor_lr >= 0.0, "actor_lr >= 0");
  require(critic_lr >= 0.0, "critic_lr >= 0");
  require(!hidden_sizes.empty(), "hidden_sizes nonempty");
  for (int h : hidden_sizes) require(h >= 1, "hidden sizes >= 1");
  for (int h : critic_hidden_sizes) require(h >= 1, "critic hidden sizes >= 1");
  require(eval_episodes >= 1, "eval_episodes >= 1");
}

CriticKind critic_kind_from_string(const std::string& name) {
  if (name == "standard_ppo" || name == "standard" || name == "ppo") {
    return CriticKind::kStandard;
  }
  if (name == "sido") return CriticKind::kSido;
  if (name == "mido") return CriticKind::kMido;
  throw std::invalid_argument("unknown critic variant: " + name);
}

std::string to_string(CriticKind kind) {
  switch (kind) {
    case CriticKind::kStandard: return "standard_ppo";
    case CriticKind::kSido: return "sido";
    case CriticKind::kMido: return "mido";
  }
  return "?";
}

// ---------------- ActorPolicy ----------------

ActorPolicy::ActorPolicy(int state_dim, int n_users, const std::vector<int>& hidden,
                         Rng& rng)
    : n_users_(n_users) {
  NetworkArchitecture arch;
  arch.input_dim = state_dim;
  arch.hidden_sizes = hidden;
  arch.output_dim = n_users;
  // Small head gain keeps the initial policy near the uniform split.
  net_ = Mlp(arch, rng, 0.01);
}

std::vector<double> ActorPolicy::concentrations(std::span<const double> state) const {
  return concentrations_from_raw(net_.forward(state));
}

ActorPolicy::ActionSample ActorPolicy::sample(std::span<const double> state,
                                              Rng& rng) const {
  auto alpha = concentrations(state);
  DirichletSample s = dirichlet_sample(alpha, rng);
  return {std::move(s.fractions), s.log_prob};
}

std::vector<double> ActorPolicy::mean_action(std::span<const double> state) const {
  auto alpha = concentrations(state);
  double sum = 0.0;
  for (double a : alpha) sum += a;
  for (double& a : alpha) a /= sum;
  return alpha;
}

double ActorPolicy::log_prob(std::span<const double> state,
                             std::span<const double> fractions) const {
  return dirichlet_log_prob(concentrations(state), fractions);
}

double ActorPolicy::accumulate_log_prob_grad(std::span<const double> state,
                                             std::span<const double> fractions,
                                             double coef) {
  Mlp::Tape tape = net_.forward_tape(state);
  const std::vector<double>& raw = tape.acts.back();
  auto alpha = concentrations_from_raw(raw);
  const double logp = dirichlet_log_prob(alpha, fractions);
  std::vector<double> dalpha(alpha.size());
  dirichlet_log_prob_grad(alpha, fractions, dalpha);
  std::vector<double> dz(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    dz[i] = coef * dalpha[i] * sigmoid(raw[i]);
  }
  net_.backward(tape, dz);
  return logp;
}

double ActorPolicy::entropy(std::span<const double> state) const {
  return dirichlet_entropy(concentrations(state));
}

// ---------------- Critic ----------------

Critic::Critic(CriticKind kind, int non_dim, int vr_dim,
               const std::vector<int>& hidden, bool shared_trunk, Rng& rng)
    : kind_(kind), non_dim_(non_dim), vr_dim_(vr_dim), shared_trunk_(shared_trunk) {
  if (hidden.empty()) throw std::invalid_argument("Critic: hidden_sizes nonempty");
  const int global_dim = non_dim + vr_dim;
  if (global_dim < 1) throw std::invalid_argument("Critic: empty state");
  if (kind_ == CriticKind::kStandard || kind_ == CriticKind::kMido) {
    NetworkArchitecture arch;
    arch.input_dim = global_dim;
    arch.hidden_sizes = hidden;
    arch.output_dim = kind_ == CriticKind::kMido ? 2 : 1;
    net_ = Mlp(arch, rng, 1.0);
    target_net_ = net_;
    return;
  }
  // sido: per-branch adapter into (shared) trunk into per-branch head.
  const int width = hidden.front();
  if (non_dim_ > 0) sido_.adapter_non.init(non_dim_, width, Activation::kTanh, rng, std::sqrt(2.0));
  if (vr_dim_ > 0) sido_.adapter_vr.init(vr_dim_, width, Activation::kTanh, rng, std::sqrt(2.0));
  for (std::size_t l = 1; l < hidden.size(); ++l) {
    DenseLayer layer;
    layer.init(hidden[l - 1], hidden[l], Activation::kTanh, rng, std::sqrt(2.0));
    sido_.trunk_non.push_back(std::move(layer));
  }
  if (!shared_trunk_) {
    for (std::size_t l = 1; l < hidden.size(); ++l) {
      DenseLayer layer;
      layer.init(hidden[l - 1], hidden[l], Activation::kTanh, rng, std::sqrt(2.0));
      sido_.trunk_vr.push_back(std::move(layer));
    }
  }
  if (non_dim_ > 0) sido_.head_non.init(hidden.back(), 1, Activation::kIdentity, rng, 1.0);
  if (vr_dim_ > 0) sido_.head_vr.init(hidden.back(), 1, Activation::kIdentity, rng, 1.0);
  sido_target_ = sido_;
}

double Critic::branch_value(const Stack& s, bool vr_branch,
                            std::span<const double> input) const {
  const DenseLayer& adapter = vr_branch ? s.adapter_vr : s.adapter_non;
  const std::vector<DenseLayer>& trunk =
      (vr_branch && !shared_trunk_) ? s.trunk_vr : s.trunk_non;
  const DenseLayer& head = vr_branch ? s.head_vr : s.head_non;
  std::vector<double> cur, next;
  adapter.forward(input, cur);
  for (const auto& layer : trunk) {
    layer.forward(cur, next);
    cur.swap(next);
  }
  head.forward(cur, next);
  return next[0];
}

void Critic::branch_backward(Stack& s, bool vr_branch,
                             std::span<const double> input, double dv) {
  DenseLayer& adapter = vr_branch ? s.adapter_vr : s.adapter_non;
  std::vector<DenseLayer>& trunk =
      (vr_branch && !shared_trunk_) ? s.trunk_vr : s.trunk_non;
  DenseLayer& head = vr_branch ? s.head_vr : s.head_non;

  std::vector<std::vector<double>> acts;
  acts.emplace_back(input.begin(), input.end());
  std::vector<double> cur;
  adapter.forward(acts.back(), cur);
  acts.push_back(cur);
  for (const auto& layer : trunk) {
    std::vector<double> y;
    layer.forward(acts.back(), y);
    acts.push_back(std::move(y));
  }
  std::vector<double> out;
  head.forward(acts.back(), out);

  std::vector<double> dy{dv};
  std::vector<double> dx;
  head.backward(acts.back(), out, dy, dx);
  dy.swap(dx);
  for (std::size_t l = trunk.size(); l-- > 0;) {
    trunk[l].backward(acts[l + 1], acts[l + 2], dy, dx);
    dy.swap(dx);
  }
  adapter.backward(acts[0], acts[1], dy, dx);
}

std::pair<double, double> Critic::values(std::span<const double> s_non,
                                         std::span<const double> s_vr) const {
  if (static_cast<int>(s_non.size()) != non_dim_ ||
      static_cast<int>(s_vr.size()) != vr_dim_) {
    throw std::invalid_argument("Critic::values: state dimension mismatch");
  }
  if (kind_ == CriticKind::kStandard || kind_ == CriticKind::kMido) {
    std::vector<double> sg(s_non.begin(), s_non.end());
    sg.insert(sg.end(), s_vr.begin(), s_vr.end());
    auto out = net_.forward(sg);
    if (kind_ == CriticKind::kStandard) return {out[0], 0.0};
    return {non_dim_ > 0 ? out[0] : 0.0, vr_dim_ > 0 ? out[1] : 0.0};
  }
  double v_non = non_dim_ > 0 ? branch_value(sido_, false, s_non) : 0.0;
  double v_vr = vr_dim_ > 0 ? branch_value(sido_, true, s_vr) : 0.0;
  return {v_non, v_vr};
}

std::pair<double, double> Critic::target_values(std::span<const double> s_non,
                                                std::span<const double> s_vr) const {
  if (static_cast<int>(s_non.size()) != non_dim_ ||
      static_cast<int>(s_vr.size()) != vr_dim_) {
    throw std::invalid_argument("Critic::target_values: state dimension mismatch");
  }
  if (kind_ == CriticKind::kStandard || kind_ == CriticKind::kMido) {
    std::vector<double> sg(s_non.begin(), s_non.end());
    sg.insert(sg.end(), s_vr.begin(), s_vr.end());
    auto out = target_net_.forward(sg);
    if (kind_ == CriticKind::kStandard) return {out[0], 0.0};
    return {non_dim_ > 0 ? out[0] : 0.0, vr_dim_ > 0 ? out[1] : 0.0};
  }
  double v_non = non_dim_ > 0 ? branch_value(sido_target_, false, s_non) : 0.0;
  double v_vr = vr_dim_ > 0 ? branch_value(sido_target_, true, s_vr) : 0.0;
  return {v_non, v_vr};
}

void Critic::sync_target() {
  if (kind_ == CriticKind::kSido) {
    sido_target_ = sido_;
  } else {
    target_net_ = net_;
  }
}

void Critic::zero_grad() {
  if (kind_ == CriticKind::kSido) {
    if (non_dim_ > 0) {
      sido_.adapter_non.zero_grad();
      sido_.head_non.zero_grad();
    }
    if (vr_dim_ > 0) {
      sido_.adapter_vr.zero_grad();
      sido_.head_vr.zero_grad();
    }
    for (auto& l : sido_.trunk_non) l.zero_grad();
    for (auto& l : sido_.trunk_vr) l.zero_grad();
  } else {
    net_.zero_grad();
  }
}

void Critic::accumulate_value_grad(std::span<const double> s_non,
                                   std::span<const double> s_vr, double d_non,
                                   double d_vr) {
  if (kind_ == CriticKind::kStandard || kind_ == CriticKind::kMido) {
    std::vector<double> sg(s_non.begin(), s_non.end());
    sg.insert(sg.end(), s_vr.begin(), s_vr.end());
    Mlp::Tape tape = net_.forward_tape(sg);
    std::vector<double> dy;
    if (kind_ == CriticKind::kStandard) {
      dy = {d_non};
    } else {
      dy = {d_non, d_vr};
    }
    net_.backward(tape, dy);
    return;
  }
  if (non_dim_ > 0 && d_non != 0.0) branch_backward(sido_, false, s_non, d_non);
  if (vr_dim_ > 0 && d_vr != 0.0) branch_backward(sido_, true, s_vr, d_vr);
}

void Critic::adam_update(double lr) {
  if (kind_ == CriticKind::kSido) {
    auto check = [](const DenseLayer& l) {
      for (double g : l.gw) {
        if (!std::isfinite(g)) throw numeric_error("Critic::adam_update: non-finite gradient");
      }
      for (double g : l.gb) {
        if (!std::isfinite(g)) throw numeric_error("Critic::adam_update: non-finite gradient");
      }
    };
    ++sido_adam_t_;
    auto step_layer = [&](DenseLayer& l) {
      check(l);
      adam_step(l.w, l.gw, l.mw, l.vw, sido_adam_t_, lr);
      adam_step(l.b, l.gb, l.mb, l.vb, sido_adam_t_, lr);
    };
    if (non_dim_ > 0) {
      step_layer(sido_.adapter_non);
      step_layer(sido_.head_non);
    }
    if (vr_dim_ > 0) {
      step_layer(sido_.adapter_vr);
      step_layer(sido_.head_vr);
    }
    for (auto& l : sido_.trunk_non) step_layer(l);
    for (auto& l : sido_.trunk_vr) step_layer(l);
  } else {
    net_.adam_update(lr);
  }
}

long Critic::parameter_count() const {
  long count = 0;
  for (const DenseLayer* l : layer_view()) {
    count += static_cast<long>(l->w.size() + l->b.size());
  }
  return count;
}

std::vector<const DenseLayer*> Critic::layer_view() const {
  std::vector<const DenseLayer*> view;
  if (kind_ != CriticKind::kSido) {
    for (const auto& l : net_.layers()) view.push_back(&l);
    return view;
  }
  if (non_dim_ > 0) view.push_back(&sido_.adapter_non);
  if (vr_dim_ > 0) view.push_back(&sido_.adapter_vr);
  for (const auto& l : sido_.trunk_non) view.push_back(&l);
  for (const auto& l : sido_.trunk_vr) view.push_back(&l);
  if (non_dim_ > 0) view.push_back(&sido_.head_non);
  if (vr_dim_ > 0) view.push_back(&sido_.head_vr);
  return view;
}

std::vector<DenseLayer*> Critic::layer_view() {
  std::vector<DenseLayer*> view;
  for (const DenseLayer* l : const_cast<const Critic*>(this)->layer_view()) {
    view.push_back(const_cast<DenseLayer*>(l));
  }
  return view;
}

std::vector<double> Critic::flatten_params() const {
  std::vector<double> flat;
  for (const DenseLayer* l : layer_view()) {
    flat.insert(flat.end(), l->w.begin(), l->w.end());
    flat.insert(flat.end(), l->b.begin(), l->b.end());
  }
  return flat;
}

void Critic::set_params(std::span<const double> flat) {
  std::size_t k = 0;
  for (DenseLayer* l : layer_view()) {
    for (double& x : l->w) x = flat[k++];
    for (double& x : l->b) x = flat[k++];
  }
  if (k != flat.size()) {
    throw std::invalid_argument("Critic::set_params: size mismatch");
  }
}

std::vector<double> Critic::flatten_grads() const {
  std::vector<double> flat;
  for (const DenseLayer* l : layer_view()) {
    flat.insert(flat.end(), l->gw.begin(), l->gw.end());
    flat.insert(flat.end(), l->gb.begin(), l->gb.end());
  }
  return flat;
}

std::pair<double, double> sido_values(const Critic& critic,
                                      std::span<const double> s_non,
                                      std::span<const double> s_vr) {
  if (critic.kind() != CriticKind::kSido) {
    throw std::logic_error("sido_values: critic variant is not sido");
  }
  return critic.values(s_non, s_vr);
}

std::pair<double, double> mido_values(const Critic& critic,
                                      std::span<const double> global_state) {
  if (critic.kind() != CriticKind::kMido) {
    throw std::logic_error("mido_values: critic variant is not mido");
  }
  std::span<const double> s_non = global_state.subspan(0, critic.non_dim());
  std::span<const double> s_vr = global_state.subspan(critic.non_dim());
  return critic.values(s_non, s_vr);
}

// ---------------- advantages ----------------

std::vector<double> Transition::global_state() const {
  std::vector<double> sg(s_non.begin(), s_non.end());
  sg.insert(sg.end(), s_vr.begin(), s_vr.end());
  return sg;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   std::span<const double> values,
                                   std::span<const double> next_values,
                                   std::span<const int> dones, double gamma,
                                   double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || next_values.size() != n || dones.size() != n) {
    throw std::invalid_argument("gae_advantages: length mismatch");
  }
  std::vector<double> adv(n, 0.0);
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * not_done * next_values[i] - values[i];
    carry = delta + gamma * lambda * not_done * carry;
    adv[i] = carry;
  }
  return adv;
}

GroupedAdvantages grouped_advantages(const std::vector<Transition>& batch,
                                     CriticKind kind, double gamma, double lambda) {
  const std::size_t n = batch.size();
  std::vector<double> rewards(n), values(n), next_values(n);
  std::vector<int> dones(n);
  GroupedAdvantages out;
  for (std::size_t i = 0; i < n; ++i) dones[i] = batch[i].done ? 1 : 0;
  if (kind == CriticKind::kStandard) {
    for (std::size_t i = 0; i < n; ++i) {
      rewards[i] = batch[i].reward_non + batch[i].reward_vr;
      values[i] = batch[i].value_non;
      next_values[i] = batch[i].next_value_non;
    }
    out.non = gae_advantages(rewards, values, next_values, dones, gamma, lambda);
    out.vr.assign(n, 0.0);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = batch[i].reward_non;
    values[i] = batch[i].value_non;
    next_values[i] = batch[i].next_value_non;
  }
  out.non = gae_advantages(rewards, values, next_values, dones, gamma, lambda);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = batch[i].reward_vr;
    values[i] = batch[i].value_vr;
    next_values[i] = batch[i].next_value_vr;
  }
  out.vr = gae_advantages(rewards, values, next_values, dones, gamma, lambda);
  return out;
}

// ---------------- training log ----------------

void write_training_log_csv(const TrainingLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << "step,seed,variant,eval_reward_total,eval_reward_non,eval_reward_vr,"
         "fps_non_mean,fps_vr_mean,delay_std_vr_mean,episode_length_mean\n";
  char buf[400];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof(buf),
                  "%ld,%llu,%s,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.step,
                  static_cast<unsigned long long>(r.seed), r.variant.c_str(),
                  r.eval_reward_total, r.eval_reward_non, r.eval_reward_vr,
                  r.fps_non_mean, r.fps_vr_mean, r.delay_std_vr_mean,
                  r.episode_length_mean);
    out << buf;
  }
}

TrainingLog read_training_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open training log: " + path);
  TrainingLog log;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty training log: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    EvalRecord r;
    auto next_field = [&]() {
      if (!std::getline(ls, field, ',')) {
        throw std::runtime_error("malformed training log row in " + path);
      }
      return field;
    };
    r.step = std::stol(next_field());
    r.seed = std::stoull(next_field());
    r.variant = next_field();
    r.eval_reward_total = std::stod(next_field());
    r.eval_reward_non = std::stod(next_field());
    r.eval_reward_vr = std::stod(next_field());
    r.fps_non_mean = std::stod(next_field());
    r.fps_vr_mean = std::stod(next_field());
    r.delay_std_vr_mean = std::stod(next_field());
    r.episode_length_mean = std::stod(next_field());
    log.records.push_back(std::move(r));
  }
  return log;
}

// ---------------- Trainer ----------------

Trainer::Trainer(ScenarioConfig config, CriticKind kind, TrainerParams params,
                 std::uint64_t seed)
    : config_(std::move(config)),
      kind_(kind),
      params_(std::move(params)),
      users_(build_scenario(config_)),
      env_(config_, users_, substream_seed(seed, "env")),
      policy_rng_(substream_seed(seed, "policy")),
      shuffle_rng_(substream_seed(seed, "shuffle")),
      seed_(seed) {
  params_.validate();
  const int d_non = GroupedState::non_vr_dim(config_.n_non());
  const int d_vr = GroupedState::vr_dim(config_.n_vr);
  Rng actor_rng(substream_seed(seed, "actor-init"));
  actor_ = ActorPolicy(d_non + d_vr, config_.n_users, params_.hidden_sizes, actor_rng);
  Rng critic_rng(substream_seed(seed, "critic-init"));
  critic_ = Critic(kind_, d_non, d_vr, params_.critic_hidden(),
                   params_.sido_shared_trunk, critic_rng);
}

void Trainer::collect_step(std::vector<Transition>& buffer) {
  if (!episode_open_) {
    current_state_ = env_.reset();
    episode_open_ = true;
  }
  Transition tr;
  tr.s_non = current_state_.non_vr_vector(config_);
  tr.s_vr = current_state_.vr_vector(config_);
  tr.slot_index = env_.slot();
  auto [v_non, v_vr] = critic_.target_values(tr.s_non, tr.s_vr);
  tr.value_non = v_non;
  tr.value_vr = v_vr;

  std::vector<double> sg = tr.global_state();
  ActorPolicy::ActionSample action = actor_.sample(sg, policy_rng_);
  tr.fractions = action.fractions;
  tr.log_prob = action.log_prob;

  std::vector<double> powers(tr.fractions.size());
  for (std::size_t i = 0; i < powers.size(); ++i) {
    powers[i] = tr.fractions[i] * config_.p_max;
  }
  Environment::StepResult res = env_.step(powers);
  tr.reward_non = res.reward.non_vr;
  tr.reward_vr = res.reward.vr;
  tr.done = res.done;
  if (!res.done) {
    std::vector<double> ns_non = res.state.non_vr_vector(config_);
    std::vector<double> ns_vr = res.state.vr_vector(config_);
    auto [nv_non, nv_vr] = critic_.target_values(ns_non, ns_vr);
    tr.next_value_non = nv_non;
    tr.next_value_vr = nv_vr;
    current_state_ = res.state;
  } else {
    episode_open_ = false;
  }
  buffer.push_back(std::move(tr));
  ++global_step_;
}

namespace {

// In-place zero-mean unit-variance rescale; all-zero streams stay zero.
void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double a : v) mean += a;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double a : v) var += (a - mean) * (a - mean);
  var /= static_cast<double>(v.size());
  if (var == 0.0 && mean == 0.0) return;
  const double scale = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : v) a = (a - mean) * scale;
}

}  // namespace

void Trainer::run_update_phase(std::vector<Transition>& buffer) {
  GroupedAdvantages adv =
      grouped_advantages(buffer, kind_, params_.gamma, params_.lambda);
  // Critic targets keep the raw advantages; the actor stream may be
  // standardized, either per group before summing or on the sum.
  std::vector<double> adv_total(buffer.size());
  if (params_.normalize_advantages && params_.per_group_advantage_norm) {
    std::vector<double> non = adv.non, vr = adv.vr;
    standardize(non);
    standardize(vr);
    for (std::size_t i = 0; i < buffer.size(); ++i) adv_total[i] = non[i] + vr[i];
  } else {
    for (std::size_t i = 0; i < buffer.size(); ++i) {
      adv_total[i] = adv.non[i] + adv.vr[i];
    }
    if (params_.normalize_advantages) standardize(adv_total);
  }
  actor_update(buffer, adv_total);
  critic_update(buffer, adv);
  ++update_count_;
  if (update_count_ % params_.target_update_period == 0) critic_.sync_target();
}

ActorDiagnostics Trainer::actor_update(const std::vector<Transition>& batch,
                                       std::span<const double> advantages_total) {
  if (batch.size() != advantages_total.size()) {
    throw std::invalid_argument("actor_update: advantage length mismatch");
  }
  const double eps = params_.clip;
  ActorDiagnostics diag;
  double ratio_sum = 0.0, entropy_sum = 0.0, loss_sum = 0.0;
  long clipped = 0, seen = 0, minibatches = 0;

  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < params_.epochs_per_batch; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle_rng_.uniform() * i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params_.minibatch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(params_.minibatch_size));
      const double m = static_cast<double>(stop - start);
      actor_.net().zero_grad();
      double loss_mb = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const Transition& tr = batch[order[k]];
        const double adv = advantages_total[order[k]];
        std::vector<double> sg = tr.global_state();
        Mlp::Tape tape = actor_.net().forward_tape(sg);
        const std::vector<double>& raw = tape.acts.back();
        auto alpha = concentrations_from_raw(raw);
        const double logp = dirichlet_log_prob(alpha, tr.fractions);
        const double delta = std::clamp(logp - tr.log_prob, -30.0, 30.0);
        const double ratio = std::exp(delta);
        const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
        const double objective = std::min(ratio * adv, clipped_ratio * adv);
        loss_mb -= objective;
        const bool clip_active =
            (adv > 0.0 && ratio > 1.0 + eps) || (adv < 0.0 && ratio < 1.0 - eps);
        if (!clip_active && adv != 0.0) {
          const double coef = -(ratio * adv) / m;
          std::vector<double> dalpha(alpha.size());
          dirichlet_log_prob_grad(alpha, tr.fractions, dalpha);
          std::vector<double> dz(raw.size());
          for (std::size_t i = 0; i < raw.size(); ++i) {
            dz[i] = coef * dalpha[i] * sigmoid(raw[i]);
          }
          actor_.net().backward(tape, dz);
        }
        ratio_sum += ratio;
        entropy_sum += dirichlet_entropy(alpha);
        if (clip_active) ++clipped;
        ++seen;
      }
      loss_mb /= m;
      if (!std::isfinite(loss_mb)) {
        throw numeric_error("actor_update: non-finite loss");
      }
      actor_.net().adam_update(params_.actor_lr);
      loss_sum += loss_mb;
      ++minibatches;
    }
  }
  diag.loss = loss_sum / static_cast<double>(minibatches);
  diag.mean_ratio = ratio_sum / static_cast<double>(seen);
  diag.clip_fraction = static_cast<double>(clipped) / static_cast<double>(seen);
  diag.entropy = entropy_sum / static_cast<double>(seen);
  return diag;
}

CriticDiagnostics Trainer::critic_update(const std::vector<Transition>& batch,
                                         const GroupedAdvantages& advantages) {
  if (advantages.non.size() != batch.size() || advantages.vr.size() != batch.size()) {
    throw std::invalid_argument("critic_update: advantage length mismatch");
  }
  std::vector<double> y_non(batch.size()), y_vr(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y_non[i] = advantages.non[i] + batch[i].value_non;
    y_vr[i] = advantages.vr[i] + batch[i].value_vr;
  }
  CriticDiagnostics diag;
  double loss_sum = 0.0;
  long minibatches = 0;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < params_.epochs_per_batch; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(shuffle_rng_.uniform() * i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(params_.minibatch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(params_.minibatch_size));
      const double m = static_cast<double>(stop - start);
      critic_.zero_grad();
      double loss_mb = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const Transition& tr = batch[order[k]];
        auto [v_non, v_vr] = critic_.values(tr.s_non, tr.s_vr);
        const double e_non = v_non - y_non[order[k]];
        const double e_vr = v_vr - y_vr[order[k]];
        loss_mb += e_non * e_non + e_vr * e_vr;
        critic_.accumulate_value_grad(tr.s_non, tr.s_vr, 2.0 * e_non / m,
                                      2.0 * e_vr / m);
      }
      loss_mb /= m;
      if (!std::isfinite(loss_mb)) {
        throw numeric_error("critic_update: non-finite loss");
      }
      critic_.adam_update(params_.critic_lr);
      loss_sum += loss_mb;
      ++minibatches;
    }
  }
  diag.loss = loss_sum / static_cast<double>(minibatches);
  return diag;
}

EvalRecord Trainer::evaluate(long step) {
  EvalRecord rec;
  rec.step = step;
  rec.seed = seed_;
  rec.variant = to_string(kind_);
  const int episodes = params_.eval_episodes;
  for (int e = 0; e < episodes; ++e) {
    Environment env(config_, users_, substream_seed(seed_, "eval-episode",
                                                    static_cast<std::uint64_t>(e)));
    GroupedState state = env.reset();
    double r_non = 0.0, r_vr = 0.0;
    bool done = false;
    while (!done) {
      std::vector<double> sg = state.global_vector(config_);
      std::vector<double> fractions = actor_.mean_action(sg);
      std::vector<double> powers(fractions.size());
      for (std::size_t i = 0; i < powers.size(); ++i) {
        powers[i] = fractions[i] * config_.p_max;
      }
      Environment::StepResult res = env.step(powers);
      r_non += res.reward.non_vr;
      r_vr += res.reward.vr;
      done = res.done;
      if (!done) state = res.state;
    }
    rec.eval_reward_non += r_non;
    rec.eval_reward_vr += r_vr;
    double fps_non = 0.0, fps_vr = 0.0, std_vr = 0.0;
    int c_non = 0, c_vr = 0;
    const auto& traces = env.traces();
    for (std::size_t n = 0; n < traces.size(); ++n) {
      if (env.users()[n].mode == 1) {
        fps_vr += traces[n].achieved_fps;
        std_vr += traces[n].delay_std;
        ++c_vr;
      } else {
        fps_non += traces[n].achieved_fps;
        ++c_non;
      }
    }
    if (c_non > 0) rec.fps_non_mean += fps_non / c_non;
    if (c_vr > 0) {
      rec.fps_vr_mean += fps_vr / c_vr;
      rec.delay_std_vr_mean += std_vr / c_vr;
    }
    rec.episode_length_mean += env.steps_taken();
  }
  const double inv = 1.0 / episodes;
  rec.eval_reward_non *= inv;
  rec.eval_reward_vr *= inv;
  rec.eval_reward_total = rec.eval_reward_non + rec.eval_reward_vr;
  rec.fps_non_mean *= inv;
  rec.fps_vr_mean *= inv;
  rec.delay_std_vr_mean *= inv;
  rec.episode_length_mean *= inv;
  return rec;
}

TrainingLog Trainer::train(long total_steps, int eval_period,
                           const std::string& checkpoint_prefix) {
  if (total_steps < 1) throw std::invalid_argument("train: total_steps must be >= 1");
  if (eval_period < 1) throw std::invalid_argument("train: eval_period must be >= 1");
  TrainingLog log;
  std::vector<Transition> buffer;
  buffer.reserve(params_.rollout_length);
  std::vector<double> last_good = actor_.net().flatten_params();
  const long start_step = global_step_;
  while (global_step_ < start_step + total_steps) {
    collect_step(buffer);
    if (global_step_ % eval_period == 0) {
      log.records.push_back(evaluate(global_step_));
    }
    if (static_cast<int>(buffer.size()) == params_.rollout_length) {
      try {
        run_update_phase(buffer);
      } catch (const numeric_error&) {
        if (!checkpoint_prefix.empty()) {
          Mlp snapshot = actor_.net();
          snapshot.set_params(last_good);
          snapshot.save(checkpoint_prefix + "_actor.ckpt");
        }
        throw;
      }
      last_good = actor_.net().flatten_params();
      buffer.clear();
    }
  }
  return log;
}

double Trainer::median_update_seconds(int n_updates) {
  std::vector<Transition> buffer;
  while (static_cast<int>(buffer.size()) < params_.rollout_length) {
    collect_step(buffer);
  }
  std::vector<double> times;
  times.reserve(n_updates);
  for (int i = 0; i < n_updates; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    run_update_phase(buffer);
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return median_of(std::move(times));
}

double Trainer::median_exec_seconds(long n_steps) {
  std::vector<double> times;
  times.reserve(n_steps);
  Environment env(config_, users_, substream_seed(seed_, "exec-timing"));
  GroupedState state = env.reset();
  for (long i = 0; i < n_steps; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> sg = state.global_vector(config_);
    std::vector<double> fractions = actor_.mean_action(sg);
    std::vector<double> powers(fractions.size());
    for (std::size_t k = 0; k < powers.size(); ++k) {
      powers[k] = fractions[k] * config_.p_max;
    }
    Environment::StepResult res = env.step(powers);
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
    if (res.done) {
      state = env.reset();
    } else {
      state = res.state;
    }
  }
  return median_of(std::move(times));
}

}  // namespace framecast
