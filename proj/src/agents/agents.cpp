#include "deepref/agents/agents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "deepref/nn/checkpoint.hpp"
#include "deepref/nn/loss.hpp"

namespace deepref::agents {

std::string to_string(AgentKind kind) { return kind == AgentKind::kDqn ? "dqn" : "drqn"; }

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "dqn") return AgentKind::kDqn;
  if (name == "drqn") return AgentKind::kDrqn;
  throw ConfigError("unknown agent '" + name + "' (expected dqn or drqn)");
}

void AgentConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("agent config: " + what); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0,1]");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (optimizer != "adam" && optimizer != "sgd") fail("optimizer must be adam or sgd");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0)) fail("epsilon_start must be in [0,1]");
  if (!(epsilon_end >= 0.0 && epsilon_end <= 1.0)) fail("epsilon_end must be in [0,1]");
  if (epsilon_end > epsilon_start) fail("epsilon_end exceeds epsilon_start");
  if (epsilon_decay_episodes < 0) fail("epsilon decay must be >= 0");
  if (dqn_buffer_capacity == 0 || drqn_buffer_capacity == 0) fail("buffer capacity must be >= 1");
  if (dqn_batch_size == 0 || drqn_batch_size == 0) fail("batch size must be >= 1");
  if (target_update_period < 1) fail("target update period must be >= 1");
  if (dqn_train_every == 0) fail("dqn_train_every must be >= 1");
  if (drqn_updates_per_episode == 0) fail("drqn_updates_per_episode must be >= 1");
  if (history == 0) fail("history must be >= 1");
  if (k1 == 0 || k2 == 0) fail("k1 and k2 must be >= 1");
  if (hidden_size == 0) fail("hidden size must be >= 1");
}

double EpsilonSchedule::value(std::int64_t episode) const {
  if (decay_episodes <= 0 || episode >= decay_episodes) return end;
  if (episode <= 0) return start;
  const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
  return std::clamp(start + (end - start) * frac, std::min(start, end), std::max(start, end));
}

std::uint32_t argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<std::uint32_t>(best);
}

std::uint32_t select_action(std::span<const double> q_values, double epsilon, std::mt19937_64& rng) {
  if (q_values.empty()) throw UsageError("select_action: no actions");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(q_values.size() - 1));
      return pick(rng);
    }
  }
  return argmax(q_values);
}

double td_target(double reward, std::span<const double> next_q_values, bool done, double gamma) {
  if (done || gamma == 0.0) return reward;
  return reward + gamma * next_q_values[argmax(next_q_values)];
}

nn::LayerInput to_input(const env::Observation& observation) {
  return nn::LayerInput::indicator(observation.dim(), observation.active);
}

namespace {

std::span<const double> as_span(const nn::Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::span<const nn::Tensor> const_view(const std::vector<nn::Tensor>& v) { return {v.data(), v.size()}; }

nn::NetworkShape shape_for(AgentKind kind, std::size_t num_items, const AgentConfig& config) {
  nn::NetworkShape s;
  s.kind = kind == AgentKind::kDqn ? nn::NetworkKind::kFeedForward : nn::NetworkKind::kRecurrent;
  const auto mode = kind == AgentKind::kDqn ? env::ObservationMode::kDqn : env::ObservationMode::kDrqn;
  s.input = env::observation_dim(mode, num_items, config.history);
  s.hidden = config.hidden_size;
  s.actions = num_items + 1;
  return s;
}

std::mt19937_64 init_rng(const AgentConfig& config) { return std::mt19937_64(config.seed); }

}  // namespace

Optimizer::Optimizer(std::span<const nn::Tensor> params, const AgentConfig& config)
    : adam_(params),
      use_sgd_(config.optimizer == "sgd"),
      lr_(config.learning_rate),
      clip_(config.grad_clip) {
  adam_config_.learning_rate = config.learning_rate;
}

void Optimizer::apply(std::span<nn::Tensor> params, std::span<nn::Tensor> grads, double count) {
  if (count > 0.0 && count != 1.0) nn::scale(grads, 1.0 / count);
  nn::clip_global_norm(grads, clip_);
  const std::span<const nn::Tensor> g{grads.data(), grads.size()};
  if (use_sgd_) {
    nn::sgd_update(params, g, lr_);
  } else {
    adam_.update(params, g, adam_config_);
  }
}

LearningAgent::LearningAgent(const AgentConfig& config) : config_(config) {
  config_.validate();
  // Offset so action sampling does not replay the init stream.
  rng_.seed(config.seed + 0x9e3779b97f4a7c15ULL);
}

std::uint32_t LearningAgent::choose(const nn::Vector& q) {
  return select_action(as_span(q), explore_ ? epsilon_ : 0.0, rng_);
}

DqnAgent::DqnAgent(std::size_t num_items, const AgentConfig& config)
    : DqnAgent(
          [&] {
            auto rng = init_rng(config);
            return nn::FeedForwardQNet(shape_for(AgentKind::kDqn, num_items, config), rng);
          }(),
          config) {}

DqnAgent::DqnAgent(nn::FeedForwardQNet net, const AgentConfig& config)
    : LearningAgent(config),
      online_(std::move(net)),
      target_(online_),
      grads_(online_.zeros_like()),
      buffer_(config.dqn_buffer_capacity) {
  optimizer_ = Optimizer(const_view(online_.parameters()), config_);
}

void DqnAgent::configure(env::EnvConfig& config) const {
  config.mode = env::ObservationMode::kDqn;
  config.history = config_.history;
}

env::Action DqnAgent::act(const env::PrefetchEnv&, const env::Observation& observation) {
  return env::Action{choose(online_.forward(to_input(observation)))};
}

std::optional<double> DqnAgent::observe(const Transition& t) {
  buffer_.push(t);
  ++decisions_;
  std::optional<double> loss;
  if (decisions_ % static_cast<std::int64_t>(config_.dqn_train_every) == 0) loss = train_step();
  if (decisions_ - last_sync_ >= config_.target_update_period) sync_target();
  return loss;
}

std::optional<double> DqnAgent::train_step() {
  const std::size_t batch = config_.dqn_batch_size;
  if (buffer_.size() < batch) return std::nullopt;
  grads_.set_zero();
  double loss = 0.0;
  nn::FeedForwardQNet::Cache cache;
  for (auto i : buffer_.sample_indices(batch, rng_)) {
    const auto& t = buffer_[i];
    double y = t.reward;
    if (!t.done && config_.gamma > 0.0) {
      y = td_target(t.reward, as_span(target_.forward(to_input(t.next_observation))), false,
                    config_.gamma);
    }
    const auto q = online_.forward(to_input(t.observation), cache);
    const auto l = nn::q_loss(q, t.action.index, y);
    online_.backward(cache, l.grad, grads_);
    loss += l.loss;
  }
  auto params = online_.parameters();
  auto grads = grads_.parameters();
  optimizer_.apply(params, grads, static_cast<double>(batch));
  ++updates_;
  return loss / static_cast<double>(batch);
}

void DqnAgent::sync_target() {
  target_ = online_;
  last_sync_ = decisions_;
}

void DqnAgent::save(const std::filesystem::path& path) { nn::save_checkpoint(path, online_); }

DrqnAgent::DrqnAgent(std::size_t num_items, const AgentConfig& config)
    : DrqnAgent(
          [&] {
            auto rng = init_rng(config);
            return nn::RecurrentQNet(shape_for(AgentKind::kDrqn, num_items, config), rng);
          }(),
          config) {}

DrqnAgent::DrqnAgent(nn::RecurrentQNet net, const AgentConfig& config)
    : LearningAgent(config),
      online_(std::move(net)),
      target_(online_),
      grads_(online_.zeros_like()),
      buffer_(config.drqn_buffer_capacity),
      state_(online_.initial_state()) {
  optimizer_ = Optimizer(const_view(online_.parameters()), config_);
}

void DrqnAgent::configure(env::EnvConfig& config) const {
  config.mode = env::ObservationMode::kDrqn;
  config.history = 1;
}

void DrqnAgent::begin_episode(const env::PrefetchEnv&) {
  state_ = online_.initial_state();
  current_.transitions.clear();
}

env::Action DrqnAgent::act(const env::PrefetchEnv&, const env::Observation& observation) {
  return env::Action{choose(online_.step(to_input(observation), state_))};
}

std::optional<double> DrqnAgent::observe(const Transition& t) {
  current_.transitions.push_back(t);
  ++decisions_;
  return std::nullopt;
}

std::optional<double> DrqnAgent::end_episode() {
  if (!current_.transitions.empty()) buffer_.push(std::move(current_));
  current_.transitions.clear();
  std::optional<double> loss;
  double sum = 0.0;
  for (std::size_t k = 0; k < config_.drqn_updates_per_episode; ++k) {
    const auto l = train_step();
    if (!l) break;
    sum += *l;
    loss = sum / static_cast<double>(k + 1);
  }
  if (decisions_ - last_sync_ >= config_.target_update_period) sync_target();
  return loss;
}

std::optional<double> DrqnAgent::train_step() {
  if (buffer_.empty()) return std::nullopt;
  struct Run {
    const EpisodeSequence* episode = nullptr;
    std::vector<double> targets;
    nn::LstmState state;
    std::vector<nn::RecurrentQNet::StepCache> caches;
  };

  std::vector<Run> runs;
  std::size_t longest = 0;
  for (auto i : buffer_.sample_indices(config_.drqn_batch_size, rng_)) {
    Run run;
    run.episode = &buffer_[i];
    const auto& ts = run.episode->transitions;
    run.targets.resize(ts.size());
    // The target network reads the same sequence; its output after
    // next_observation[t] bootstraps step t.
    auto target_state = target_.initial_state();
    target_.step(to_input(ts.front().observation), target_state);
    for (std::size_t t = 0; t < ts.size(); ++t) {
      const auto q_next = target_.step(to_input(ts[t].next_observation), target_state);
      run.targets[t] = td_target(ts[t].reward, as_span(q_next), ts[t].done, config_.gamma);
    }
    run.state = online_.initial_state();
    run.caches.reserve(ts.size());
    longest = std::max(longest, ts.size());
    runs.push_back(std::move(run));
  }

  double loss_sum = 0.0;
  std::size_t loss_terms = 0;
  std::vector<nn::Vector> dq;
  for (std::size_t chunk = 0; chunk < longest; chunk += config_.k1) {
    grads_.set_zero();
    std::size_t terms = 0;
    for (auto& run : runs) {
      const auto& ts = run.episode->transitions;
      if (chunk >= ts.size()) continue;
      const std::size_t end = std::min(chunk + config_.k1, ts.size());
      const std::size_t lo = std::min(chunk, end > config_.k2 ? end - config_.k2 : std::size_t{0});
      dq.assign(end - lo, nn::Vector());
      for (std::size_t t = lo; t < chunk; ++t) dq[t - lo] = nn::Vector::Zero(run.caches[t].q.size());
      for (std::size_t t = chunk; t < end; ++t) {
        run.caches.emplace_back();
        const auto q = online_.step(to_input(ts[t].observation), run.state, run.caches.back());
        auto l = nn::q_loss(q, ts[t].action.index, run.targets[t]);
        loss_sum += l.loss;
        dq[t - lo] = std::move(l.grad);
        ++terms;
      }
      const std::span<const nn::RecurrentQNet::StepCache> window(run.caches.data() + lo, end - lo);
      online_.backward_sequence(window, dq, config_.k2, grads_);
    }
    auto params = online_.parameters();
    auto grads = grads_.parameters();
    optimizer_.apply(params, grads, static_cast<double>(terms));
    ++updates_;
    loss_terms += terms;
  }
  return loss_sum / static_cast<double>(loss_terms);
}

void DrqnAgent::sync_target() {
  target_ = online_;
  last_sync_ = decisions_;
}

void DrqnAgent::save(const std::filesystem::path& path) { nn::save_checkpoint(path, online_); }

std::unique_ptr<LearningAgent> make_agent(AgentKind kind, std::size_t num_items,
                                          const AgentConfig& config) {
  if (kind == AgentKind::kDqn) return std::make_unique<DqnAgent>(num_items, config);
  return std::make_unique<DrqnAgent>(num_items, config);
}

std::unique_ptr<LearningAgent> load_agent(AgentKind kind, const std::filesystem::path& path,
                                          std::size_t num_items, const AgentConfig& config) {
  const auto expected = shape_for(kind, num_items, config);
  auto check = [&](const nn::NetworkShape& got) {
    if (got == expected) return;
    throw DataError(path.string() + ": checkpoint shape (" + std::to_string(got.input) + ", " +
                    std::to_string(got.hidden) + ", " + std::to_string(got.actions) +
                    ") does not match config (" + std::to_string(expected.input) + ", " +
                    std::to_string(expected.hidden) + ", " + std::to_string(expected.actions) + ")");
  };
  if (kind == AgentKind::kDqn) {
    auto net = nn::load_feedforward(path);
    check(net.shape());
    return std::make_unique<DqnAgent>(std::move(net), config);
  }
  auto net = nn::load_recurrent(path);
  check(net.shape());
  return std::make_unique<DrqnAgent>(std::move(net), config);
}

EpisodeResult run_episode(env::PrefetchEnv& env, env::Policy& policy,
                          std::span<const trace::Request> window, bool explore,
                          const TransitionHook& hook) {
  policy.set_explore(explore);
  EpisodeResult result;
  env::Observation obs = env.reset(window);
  policy.begin_episode(env);
  result.sequence.transitions.reserve(window.size());
  while (!env.done()) {
    const auto action = policy.act(env, obs);
    auto step = env.step(action);
    Transition t{std::move(obs), action, step.outcome.reward, step.observation, step.outcome.done};
    if (hook) hook(t);
    result.total_reward += t.reward;
    obs = std::move(step.observation);
    result.sequence.transitions.push_back(std::move(t));
  }
  result.counters = env.counters();
  return result;
}

void write_curve_csv(std::ostream& out, std::span<const CurveRow> rows) {
  out << "episode,avg_reward,epsilon,loss\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%.6f,", static_cast<long long>(r.episode), r.avg_reward,
                  r.epsilon);
    out << buf;
    if (r.loss) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.loss);
      out << buf;
    }
    out << "\n";
  }
}

std::vector<CurveRow> train_agent(LearningAgent& agent, env::PrefetchEnv& env,
                                  std::span<const trace::Request> trace, std::size_t episode_length,
                                  std::int64_t episodes) {
  if (trace.empty()) throw UsageError("train: empty trace");
  if (episode_length == 0) throw UsageError("train: zero episode length");
  const auto& cfg = agent.config();
  EpsilonSchedule schedule{cfg.epsilon_start, cfg.epsilon_end,
                           cfg.epsilon_decay_episodes > 0 ? cfg.epsilon_decay_episodes
                                                          : std::max<std::int64_t>(1, episodes / 2)};
  std::mt19937_64 window_rng(cfg.seed * 2654435761ULL + 17);
  const std::size_t len = std::min(episode_length, trace.size());
  std::uniform_int_distribution<std::size_t> offset(0, trace.size() - len);

  std::vector<CurveRow> curve;
  curve.reserve(static_cast<std::size_t>(std::max<std::int64_t>(episodes, 0)));
  for (std::int64_t ep = 0; ep < episodes; ++ep) {
    agent.set_epsilon(schedule.value(ep));
    const auto window = trace.subspan(offset(window_rng), len);
    double loss_sum = 0.0;
    int loss_count = 0;
    auto record = [&](std::optional<double> l) {
      if (l) {
        loss_sum += *l;
        ++loss_count;
      }
    };
    auto result = run_episode(env, agent, window, true,
                              [&](const Transition& t) { record(agent.observe(t)); });
    record(agent.end_episode());
    CurveRow row;
    row.episode = ep;
    row.avg_reward = result.total_reward / static_cast<double>(result.sequence.transitions.size());
    row.epsilon = agent.epsilon();
    if (loss_count > 0) row.loss = loss_sum / loss_count;
    curve.push_back(row);
  }
  return curve;
}

}  // namespace deepref::agents
