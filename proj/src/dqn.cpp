#include "evtol/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <omp.h>

#include <json.hpp>

#include "evtol/csv.hpp"
#include "evtol/errors.hpp"

namespace evtol::dqn {

namespace {

constexpr const char* kCheckpointFormat = "evtol-dqn";
constexpr int kCheckpointVersion = 1;

}  // namespace

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng) : Mlp(zeros(sizes)) {
  for (auto& layer : layers_) {
    const double bound = std::sqrt(6.0 / layer.in);
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& w : layer.w) w = u(rng);
  }
}

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ArgumentError("a network needs at least an input and an output size");
  for (int s : sizes) {
    if (s <= 0) throw ArgumentError("layer sizes must be positive");
  }
  Mlp net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Layer l;
    l.in = sizes[i];
    l.out = sizes[i + 1];
    l.w.assign(static_cast<std::size_t>(l.in * l.out), 0.0);
    l.b.assign(static_cast<std::size_t>(l.out), 0.0);
    net.layers_.push_back(std::move(l));
  }
  return net;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s{input_dim()};
  for (const auto& l : layers_) s.push_back(l.out);
  return s;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  if (layers_.empty()) throw ContractError("forward on an empty network");
  if (static_cast<int>(x.size()) != input_dim()) throw ContractError("input dimension mismatch");
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> z;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    z.assign(l.b.begin(), l.b.end());
    for (int o = 0; o < l.out; ++o) {
      const double* row = &l.w[static_cast<std::size_t>(o * l.in)];
      double acc = 0.0;
      for (int i = 0; i < l.in; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] += acc;
    }
    if (li + 1 < layers_.size()) {
      for (auto& v : z) v = std::max(0.0, v);
    }
    a.swap(z);
  }
  return a;
}

std::vector<double> Mlp::flat() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  for (const auto& l : layers_) {
    theta.insert(theta.end(), l.w.begin(), l.w.end());
    theta.insert(theta.end(), l.b.begin(), l.b.end());
  }
  return theta;
}

void Mlp::set_flat(std::span<const double> theta) {
  if (theta.size() != parameter_count()) throw ContractError("parameter vector size mismatch");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (auto& w : l.w) w = theta[k++];
    for (auto& b : l.b) b = theta[k++];
  }
}

double Mlp::accumulate_gradient(std::span<const double> x, int action, double target, double weight,
                                std::vector<double>& grad) const {
  if (static_cast<int>(x.size()) != input_dim()) throw ContractError("input dimension mismatch");
  if (action < 0 || action >= output_dim()) throw ContractError("action outside the output layer");
  if (grad.size() != parameter_count()) grad.assign(parameter_count(), 0.0);

  // Forward pass keeping every activation.
  std::vector<std::vector<double>> acts;
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    const auto& a = acts.back();
    std::vector<double> z(l.b);
    for (int o = 0; o < l.out; ++o) {
      const double* row = &l.w[static_cast<std::size_t>(o * l.in)];
      double acc = 0.0;
      for (int i = 0; i < l.in; ++i) acc += row[i] * a[static_cast<std::size_t>(i)];
      z[static_cast<std::size_t>(o)] += acc;
    }
    if (li + 1 < layers_.size()) {
      for (auto& v : z) v = std::max(0.0, v);
    }
    acts.push_back(std::move(z));
  }

  const double err = target - acts.back()[static_cast<std::size_t>(action)];
  std::vector<double> delta(static_cast<std::size_t>(output_dim()), 0.0);
  delta[static_cast<std::size_t>(action)] = -2.0 * weight * err;

  // Offsets of each layer's block in the flat vector.
  std::vector<std::size_t> offset(layers_.size());
  std::size_t k = 0;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    offset[li] = k;
    k += layers_[li].w.size() + layers_[li].b.size();
  }

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const auto& a_in = acts[li];
    double* gw = &grad[offset[li]];
    double* gb = gw + l.w.size();
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      gb[o] += d;
      double* row = gw + static_cast<std::size_t>(o * l.in);
      for (int i = 0; i < l.in; ++i) row[i] += d * a_in[static_cast<std::size_t>(i)];
    }
    if (li == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(l.in), 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double d = delta[static_cast<std::size_t>(o)];
      if (d == 0.0) continue;
      const double* row = &l.w[static_cast<std::size_t>(o * l.in)];
      for (int i = 0; i < l.in; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
    }
    // Rectifier derivative: the stored activation is positive where the unit was active.
    for (int i = 0; i < l.in; ++i) {
      if (a_in[static_cast<std::size_t>(i)] <= 0.0) prev[static_cast<std::size_t>(i)] = 0.0;
    }
    delta.swap(prev);
  }
  return err * err;
}

void TrainConfig::validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) throw ArgumentError("discount must lie in [0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning rate must be finite and non-negative");
  }
  if (batch_size < 1) throw ArgumentError("batch size must be positive");
  if (buffer_capacity < batch_size) throw ArgumentError("replay capacity must hold a batch");
  if (target_sync_steps < 1) throw ArgumentError("target sync period must be positive");
  if (!(epsilon_min >= 0.05 && epsilon_min <= 1.0)) throw ArgumentError("epsilon floor must lie in [0.05, 1]");
  if (!(epsilon_start >= epsilon_min && epsilon_start <= 1.0)) {
    throw ArgumentError("epsilon start must lie in [epsilon floor, 1]");
  }
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw ArgumentError("epsilon decay must lie in (0, 1]");
  if (episodes < 0) throw ArgumentError("episodes must be non-negative");
  if (hidden.empty()) throw ArgumentError("at least one hidden layer is required");
  if (train_every < 1) throw ArgumentError("train_every must be positive");
  if (max_env_steps < 0) throw ArgumentError("max_env_steps must be non-negative");
}

double TrainConfig::epsilon(int episode) const {
  return std::max(epsilon_min, epsilon_start * std::pow(epsilon_decay, episode));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ArgumentError("replay capacity must be positive");
  data_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.r)) throw ContractError("non-finite reward pushed to replay");
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (batch == 0 || data_.size() < batch) throw ContractError("replay holds fewer transitions than a batch");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<const Transition*> out(batch);
  for (auto& p : out) p = &data_[pick(rng)];
  return out;
}

int greedy(const std::vector<double>& q, std::span<const int> legal) {
  if (legal.empty()) throw ContractError("no legal actions");
  int best = -1;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int a : legal) {
    if (a < 0 || a >= static_cast<int>(q.size())) throw ContractError("legal action outside the output layer");
    const double v = q[static_cast<std::size_t>(a)];
    if (best < 0 || v > best_q || (v == best_q && a < best)) {
      best = a;
      best_q = v;
    }
  }
  return best;
}

int act(const Mlp& net, std::span<const double> state, std::span<const int> legal, double epsilon,
        Rng& rng) {
  if (legal.empty()) throw ContractError("no legal actions");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
    return legal[pick(rng)];
  }
  return greedy(net.forward(state), legal);
}

std::vector<double> bellman_targets(std::span<const Transition* const> batch, const Mlp& target_net,
                                    double discount) {
  std::vector<double> y;
  y.reserve(batch.size());
  for (const Transition* t : batch) {
    if (t->done || discount == 0.0) {
      y.push_back(t->r);
      continue;
    }
    const auto q = target_net.forward(t->s2);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < t->next_legal.size() && a < q.size(); ++a) {
      if (t->next_legal[a]) best = std::max(best, q[a]);
    }
    y.push_back(std::isfinite(best) ? t->r + discount * best : t->r);
  }
  return y;
}

double train_step(Mlp& net, std::span<const Transition* const> batch, std::span<const double> targets,
                  double learning_rate, OptimizerState& opt) {
  if (batch.empty()) throw ContractError("empty training batch");
  if (targets.size() != batch.size()) throw ContractError("one target per transition required");
  const double w = 1.0 / static_cast<double>(batch.size());
  std::vector<double> grad(net.parameter_count(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += w * net.accumulate_gradient(batch[i]->s, batch[i]->a, targets[i], w, grad);
  }
  if (!std::isfinite(loss)) {
    throw TrainingError("non-finite loss " + std::to_string(loss) + " at optimiser step " +
                        std::to_string(opt.step));
  }
  if (learning_rate == 0.0) return loss;

  auto theta = net.flat();
  opt.step += 1;
  if (opt.kind == Optimizer::Sgd) {
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= learning_rate * grad[k];
  } else {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (opt.m.size() != theta.size()) {
      opt.m.assign(theta.size(), 0.0);
      opt.v.assign(theta.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(opt.step));
    for (std::size_t k = 0; k < theta.size(); ++k) {
      opt.m[k] = b1 * opt.m[k] + (1.0 - b1) * grad[k];
      opt.v[k] = b2 * opt.v[k] + (1.0 - b2) * grad[k] * grad[k];
      theta[k] -= learning_rate * (opt.m[k] / c1) / (std::sqrt(opt.v[k] / c2) + eps);
    }
  }
  net.set_flat(theta);
  return loss;
}

void sync_target(const Mlp& net, Mlp& target_net) { target_net = net; }

int state_dim(int n_destinations) { return 6 + n_destinations; }

std::vector<double> encode_state(const mission::EnvState& s, int n_destinations, double radius_nm) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(state_dim(n_destinations)));
  x.push_back(s.pc1);
  x.push_back(s.pc2);
  x.push_back((s.v - 3.0) / 1.2);
  x.push_back(s.pos.x / radius_nm);
  x.push_back(s.pos.y / radius_nm);
  x.push_back(static_cast<double>(s.reached_count) / n_destinations);
  for (int d = 0; d < n_destinations; ++d) x.push_back((s.visited_mask >> d) & 1u ? 1.0 : 0.0);
  return x;
}

MissionTask::MissionTask(mission::MissionMap map, mission::ScenarioConfig cfg, mission::EnvConfig env)
    : env_(std::move(map), cfg, std::move(env)) {}

int MissionTask::state_dim() const { return dqn::state_dim(env_.map().size()); }

int MissionTask::action_count() const { return mission::action_count(env_.map().size()); }

std::vector<double> MissionTask::reset(std::uint64_t seed) {
  const auto& s = env_.reset(seed);
  stats_ = EpisodeStats{};
  stats_.cycles = s.cycle_count;
  trace_.clear();
  return encode_state(s, env_.map().size(), env_.env_config().radius_nm);
}

std::vector<int> MissionTask::legal() const {
  std::vector<int> out;
  const int n = env_.map().size();
  for (const auto& a : env_.legal_actions()) out.push_back(mission::action_index(a, n));
  return out;
}

Task::Step MissionTask::step(int action) {
  const int n = env_.map().size();
  const auto a = mission::action_from_index(action, n);
  if (stats_.steps == 0) first_action_ = a;
  const auto out = env_.step(a);
  const auto& s = out.next_state;
  stats_.reward += out.reward;
  stats_.destinations = s.reached_count;
  stats_.violation = stats_.violation || out.info.eod_violation;
  stats_.cycles = s.cycle_count;
  stats_.truncated = out.info.truncated;
  stats_.steps = s.steps;
  stats_.completed = s.reached_count == n;
  trace_.push_back({s.steps, a, out.info.wind_kts, out.reward, s.v, s.z_internal, s.cycle_count});
  return {encode_state(s, n, env_.env_config().radius_nm), out.reward, out.done};
}

TaskFactory mission_task_factory(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                                 const mission::EnvConfig& env) {
  return [map, cfg, env]() { return std::make_unique<MissionTask>(map, cfg, env); };
}

namespace {

std::vector<std::uint8_t> legal_mask(const std::vector<int>& legal, int actions) {
  std::vector<std::uint8_t> m(static_cast<std::size_t>(actions), 0);
  for (int a : legal) m[static_cast<std::size_t>(a)] = 1;
  return m;
}

enum Stream : std::uint64_t { kInitStream = 11, kActStream = 12, kReplayStream = 13, kEpisodeStream = 14 };

}  // namespace

TrainResult train(const TaskFactory& factory, const TrainConfig& cfg) {
  cfg.validate();
  auto task = factory();
  const int actions = task->action_count();

  std::vector<int> sizes{task->state_dim()};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(actions);

  Rng init_rng(derive_seed(cfg.seed, kInitStream));
  Rng act_rng(derive_seed(cfg.seed, kActStream));
  Rng replay_rng(derive_seed(cfg.seed, kReplayStream));

  TrainResult res;
  res.net = Mlp(sizes, init_rng);
  Mlp target = res.net;
  ReplayBuffer replay(static_cast<std::size_t>(cfg.buffer_capacity));
  OptimizerState opt;
  opt.kind = cfg.optimizer;
  long env_steps = 0;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    if (cfg.max_env_steps > 0 && env_steps >= cfg.max_env_steps) break;
    const double eps = cfg.epsilon(ep);
    auto s = task->reset(derive_seed(derive_seed(cfg.seed, kEpisodeStream), static_cast<std::uint64_t>(ep)));
    double loss_sum = 0.0;
    int loss_n = 0;
    bool done = false;
    while (!done) {
      const auto legal = task->legal();
      const int a = act(res.net, s, legal, eps, act_rng);
      auto st = task->step(a);
      done = st.done;
      Transition t;
      t.s = std::move(s);
      t.a = a;
      t.r = st.reward;
      t.s2 = st.next;
      t.done = st.done;
      if (!st.done) t.next_legal = legal_mask(task->legal(), actions);
      replay.push(std::move(t));
      s = std::move(st.next);
      ++env_steps;

      if (replay.size() >= static_cast<std::size_t>(cfg.batch_size) && env_steps % cfg.train_every == 0) {
        const auto batch = replay.sample(static_cast<std::size_t>(cfg.batch_size), replay_rng);
        const auto y = bellman_targets(batch, target, cfg.discount);
        loss_sum += train_step(res.net, batch, y, cfg.learning_rate, opt);
        ++loss_n;
        ++res.gradient_steps;
        if (res.gradient_steps % cfg.target_sync_steps == 0) sync_target(res.net, target);
      }
    }
    const auto st = task->stats();
    res.curve.push_back({ep, st.reward, st.destinations, st.violation ? 1 : 0, st.cycles, eps,
                         loss_n ? loss_sum / loss_n : 0.0});
  }
  return res;
}

Policy greedy_policy(const Mlp& net) {
  return [net](std::span<const double> s, std::span<const int> legal) {
    return greedy(net.forward(s), legal);
  };
}

void bootstrap_ci(std::span<const double> xs, std::uint64_t seed, double out[2], int resamples) {
  if (xs.empty()) throw ArgumentError("bootstrap of an empty sample");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, xs.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[pick(rng)];
    m = s / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::floor(q * (resamples - 1)));
    return means[k];
  };
  out[0] = at(0.025);
  out[1] = at(0.975);
}

namespace {

struct EpisodeRecord {
  EpisodeStats stats;
  mission::Action first;
};

EpisodeRecord run_episode(const Policy& policy, Task& task, std::uint64_t seed) {
  auto s = task.reset(seed);
  bool done = false;
  while (!done) {
    const auto legal = task.legal();
    const int a = policy(s, legal);
    if (std::find(legal.begin(), legal.end(), a) == legal.end()) throw ContractError("policy chose an illegal action");
    auto st = task.step(a);
    s = std::move(st.next);
    done = st.done;
  }
  EpisodeRecord rec{task.stats(), {}};
  if (auto* m = dynamic_cast<MissionTask*>(&task)) rec.first = m->first_action();
  return rec;
}

EvalReport summarise(std::vector<EpisodeRecord> recs, std::vector<std::uint64_t> seeds, std::uint64_t seed) {
  EvalReport r;
  r.episodes = static_cast<int>(recs.size());
  r.seeds = std::move(seeds);
  std::vector<double> reward, dest, viol, cyc;
  int completed = 0, truncated = 0;
  for (const auto& e : recs) {
    reward.push_back(e.stats.reward);
    dest.push_back(e.stats.destinations);
    viol.push_back(e.stats.violation ? 1.0 : 0.0);
    cyc.push_back(e.stats.cycles);
    completed += e.stats.completed ? 1 : 0;
    truncated += e.stats.truncated ? 1 : 0;
    r.per_episode.push_back(e.stats);
    r.first_actions.push_back(e.first);
  }
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  r.mean_reward = mean(reward);
  r.mean_destinations = mean(dest);
  r.violation_rate = mean(viol);
  r.mean_cycles = mean(cyc);
  r.completion_rate = static_cast<double>(completed) / r.episodes;
  r.truncation_rate = static_cast<double>(truncated) / r.episodes;
  const std::uint64_t cs = derive_seed(seed, 0xB0075);
  bootstrap_ci(reward, cs, r.reward_ci);
  bootstrap_ci(dest, cs + 1, r.destinations_ci);
  bootstrap_ci(viol, cs + 2, r.violation_ci);
  bootstrap_ci(cyc, cs + 3, r.cycles_ci);
  return r;
}

std::vector<std::uint64_t> eval_seeds(int n, std::uint64_t seed) {
  if (n <= 0) throw ArgumentError("evaluation needs at least one episode");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) seeds[static_cast<std::size_t>(k)] = derive_seed(seed, static_cast<std::uint64_t>(k));
  return seeds;
}

}  // namespace

EvalReport evaluate_serial(const Policy& policy, const TaskFactory& factory, int n_episodes,
                           std::uint64_t seed) {
  auto seeds = eval_seeds(n_episodes, seed);
  auto task = factory();
  std::vector<EpisodeRecord> recs;
  for (auto s : seeds) recs.push_back(run_episode(policy, *task, s));
  return summarise(std::move(recs), std::move(seeds), seed);
}

EvalReport evaluate(const Policy& policy, const TaskFactory& factory, int n_episodes, std::uint64_t seed) {
  auto seeds = eval_seeds(n_episodes, seed);
  std::vector<EpisodeRecord> recs(seeds.size());
  std::exception_ptr failure;
#pragma omp parallel
  {
    std::unique_ptr<Task> task;
    try {
      task = factory();
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
#pragma omp for schedule(dynamic)
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      if (!task) continue;
      try {
        recs[k] = run_episode(policy, *task, seeds[k]);
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return summarise(std::move(recs), std::move(seeds), seed);
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["sizes"] = ck.net.sizes();
  j["activation"] = "relu";
  j["normalisation"] = {{"v_offset", 3.0}, {"v_scale", 1.2}, {"radius_nm", ck.radius_nm}};
  j["n_destinations"] = ck.n_destinations;
  nlohmann::json actions = nlohmann::json::array();
  if (ck.n_destinations > 0) {
    for (int i = 0; i < mission::action_count(ck.n_destinations); ++i) {
      const auto a = mission::action_from_index(i, ck.n_destinations);
      actions.push_back({{"target", a.target}, {"altitude_m", a.altitude_m}});
    }
  }
  j["actions"] = actions;
  j["weights"] = ck.net.flat();
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path.string());
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  Checkpoint ck;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw ConfigError("not a network checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
    ck.net = Mlp::zeros(j.at("sizes").get<std::vector<int>>());
    ck.net.set_flat(j.at("weights").get<std::vector<double>>());
    ck.n_destinations = j.at("n_destinations").get<int>();
    ck.radius_nm = j.at("normalisation").at("radius_nm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write learning curve " + path.string());
  csv::write_row(out, {"episode", "reward", "destinations", "violations", "cycles", "epsilon", "loss"});
  for (const auto& p : curve) {
    csv::write_row(out, {std::to_string(p.episode), csv::number(p.reward), std::to_string(p.destinations),
                         std::to_string(p.violations), std::to_string(p.cycles), csv::number(p.epsilon),
                         csv::number(p.mean_loss)});
  }
}

}  // namespace evtol::dqn
