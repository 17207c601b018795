#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evtol/mission_env.hpp"
#include "evtol/rng.hpp"

namespace evtol::dqn {

struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // out x in, row-major
  std::vector<double> b;
};

// Fully connected network, rectified-linear hidden layers, linear output.
class Mlp {
 public:
  Mlp() = default;
  // He-uniform initialisation.
  Mlp(const std::vector<int>& sizes, Rng& rng);
  static Mlp zeros(const std::vector<int>& sizes);

  int input_dim() const { return layers_.front().in; }
  int output_dim() const { return layers_.back().out; }
  std::vector<int> sizes() const;
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> x) const;

  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  // Flat views in layer order (w then b per layer); used by optimisers,
  // gradient checks and checkpoints.
  std::vector<double> flat() const;
  void set_flat(std::span<const double> theta);

  // Adds d/dtheta of weight * (target - Q(x)[action])^2 into `grad` and
  // returns the squared error.
  double accumulate_gradient(std::span<const double> x, int action, double target, double weight,
                             std::vector<double>& grad) const;

 private:
  std::vector<Layer> layers_;
};

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double discount = 0.99;
  double learning_rate = 1e-3;
  int batch_size = 64;
  int buffer_capacity = 20000;
  int target_sync_steps = 500;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.999;  // per episode
  double epsilon_min = 0.05;
  int episodes = 3000;
  std::uint64_t seed = 1;
  std::vector<int> hidden{64, 64};
  Optimizer optimizer = Optimizer::Sgd;
  int train_every = 1;
  long max_env_steps = 0;  // 0: no limit; otherwise training stops after this many steps

  void validate() const;
  double epsilon(int episode) const;
};

struct Transition {
  std::vector<double> s;
  int a = 0;
  double r = 0.0;
  std::vector<double> s2;
  bool done = false;
  std::vector<std::uint8_t> next_legal;  // mask over the action enumeration
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Uniform with replacement; requires size() >= batch.
  std::vector<const Transition*> sample(std::size_t batch, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

// epsilon-greedy over legal action indices; exploitation ties go to the
// lowest index. One uniform draw is consumed per call, plus one more when
// exploring.
int act(const Mlp& net, std::span<const double> state, std::span<const int> legal, double epsilon,
        Rng& rng);
int greedy(const std::vector<double>& q, std::span<const int> legal);

std::vector<double> bellman_targets(std::span<const Transition* const> batch, const Mlp& target_net,
                                    double discount);

// Optimiser state carried across steps.
struct OptimizerState {
  Optimizer kind = Optimizer::Sgd;
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

// One gradient step on the mean squared TD error of the taken actions.
// Returns the loss before the update; throws TrainingError when it is not finite.
double train_step(Mlp& net, std::span<const Transition* const> batch, std::span<const double> targets,
                  double learning_rate, OptimizerState& opt);

void sync_target(const Mlp& net, Mlp& target_net);

// Environment interface seen by the learner.
struct EpisodeStats {
  double reward = 0.0;
  int destinations = 0;
  bool violation = false;
  int cycles = 0;
  bool completed = false;
  bool truncated = false;
  int steps = 0;
};

class Task {
 public:
  virtual ~Task() = default;
  virtual int state_dim() const = 0;
  virtual int action_count() const = 0;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual std::vector<int> legal() const = 0;
  struct Step {
    std::vector<double> next;
    double reward = 0.0;
    bool done = false;
  };
  virtual Step step(int action) = 0;
  virtual EpisodeStats stats() const = 0;
};

using TaskFactory = std::function<std::unique_ptr<Task>()>;

// Agent view of a mission state: pc1, pc2, (v - 3.0) / 1.2, x / R, y / R,
// i / n, visited bits.
std::vector<double> encode_state(const mission::EnvState& s, int n_destinations, double radius_nm);
int state_dim(int n_destinations);

class MissionTask : public Task {
 public:
  MissionTask(mission::MissionMap map, mission::ScenarioConfig cfg, mission::EnvConfig env = {});

  int state_dim() const override;
  int action_count() const override;
  std::vector<double> reset(std::uint64_t seed) override;
  std::vector<int> legal() const override;
  Step step(int action) override;
  EpisodeStats stats() const override { return stats_; }

  const mission::MissionEnv& env() const { return env_; }
  const std::vector<mission::TraceRow>& trace() const { return trace_; }
  mission::Action first_action() const { return first_action_; }

 private:
  mission::MissionEnv env_;
  EpisodeStats stats_;
  std::vector<mission::TraceRow> trace_;
  mission::Action first_action_;
};

TaskFactory mission_task_factory(const mission::MissionMap& map, const mission::ScenarioConfig& cfg,
                                 const mission::EnvConfig& env = {});

struct CurvePoint {
  int episode = 0;
  double reward = 0.0;
  int destinations = 0;
  int violations = 0;
  int cycles = 0;
  double epsilon = 0.0;
  double mean_loss = 0.0;
};

using LearningCurve = std::vector<CurvePoint>;

struct TrainResult {
  Mlp net;
  LearningCurve curve;
  long gradient_steps = 0;
};

TrainResult train(const TaskFactory& factory, const TrainConfig& cfg);

// Greedy-policy evaluation over independent episodes (seed k = derive_seed(seed, k)).
struct EvalReport {
  int episodes = 0;
  double mean_reward = 0.0;
  double reward_ci[2] = {0, 0};
  double mean_destinations = 0.0;
  double destinations_ci[2] = {0, 0};
  double violation_rate = 0.0;
  double violation_ci[2] = {0, 0};
  double mean_cycles = 0.0;
  double cycles_ci[2] = {0, 0};
  double completion_rate = 0.0;
  double truncation_rate = 0.0;

  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeStats> per_episode;
  std::vector<mission::Action> first_actions;
};

using Policy = std::function<int(std::span<const double> state, std::span<const int> legal)>;

Policy greedy_policy(const Mlp& net);

EvalReport evaluate(const Policy& policy, const TaskFactory& factory, int n_episodes, std::uint64_t seed);
EvalReport evaluate_serial(const Policy& policy, const TaskFactory& factory, int n_episodes,
                           std::uint64_t seed);

// Percentile bootstrap interval of the mean.
void bootstrap_ci(std::span<const double> xs, std::uint64_t seed, double out[2], int resamples = 1000);

// Checkpoint: JSON with format tag, version, layer sizes, state normalisation
// and the action enumeration, plus the flat weights.
struct Checkpoint {
  Mlp net;
  int n_destinations = 0;
  double radius_nm = 30.0;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);

}  // namespace evtol::dqn
