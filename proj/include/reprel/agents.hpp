#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reprel/abstraction.hpp"
#include "reprel/dfoci.hpp"
#include "reprel/planner.hpp"
#include "reprel/relational.hpp"
#include "reprel/rng.hpp"
#include "reprel/taxi.hpp"

namespace reprel::agents {

// Tabular action-value store; absent entries read as 0 and are only
// materialized by updates.
class QTable {
 public:
  double get(const std::string& key, const std::string& action) const;
  void set(const std::string& key, const std::string& action, double value);
  double max_value(const std::string& key, const std::vector<std::string>& actions) const;
  std::size_t size() const;  // number of (key, action) entries

  // Sorted `key<TAB>action<TAB>value` lines, shortest round-trip floats.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::map<std::string, std::map<std::string, double>> entries_;
};

// One-step Q-learning backup; bootstrap is zeroed when done.
void q_update(QTable& q, const std::string& key, const std::string& action,
              double reward, const std::string& next_key, bool done, double alpha,
              double gamma, const std::vector<std::string>& actions);

// ε-greedy with lexicographic tie-break on action names.
const std::string& select_action(const QTable& q, const std::string& key,
                                 const std::vector<std::string>& actions,
                                 double epsilon, Rng& rng);

enum class Variant { Reprel, Hrl, Flat };
Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);
// "+T" display label for transfer-initialized runs.
std::string variant_label(Variant v, bool transfer);

struct TrainConfig {
  double alpha = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  long epsilon_decay_steps = 50000;
  double gamma = 0.99;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  long total_env_steps = 100000;
  long eval_every = 1000;
  int eval_episodes = 10;
  int option_budget = 100;
};

TrainConfig parse_train_config(const std::string& text, const std::string& filename);
TrainConfig load_train_config(const std::string& path);

// Static inputs of one task: influence statements, sub-task operators, and
// the environment instance.
struct Pipeline {
  dfoci::DomainDecl domain;
  std::vector<planner::SubtaskOperator> operators;
  taxi::Instance instance;
};

Pipeline load_pipeline(const std::string& dfoci_path, const std::string& ops_path,
                       const std::string& instance_path);

// One option policy, shared across all groundings of its sub-task. A missing
// schema means the identity abstraction (the hrl baseline).
struct OptionAgent {
  std::string subtask;
  std::optional<abstraction::AbstractionSchema> schema;
  QTable table;
};

struct AgentSet {
  Variant variant = Variant::Reprel;
  std::map<std::string, OptionAgent> options;  // by sub-task name
  QTable flat;
};

AgentSet make_agents(Variant v, const Pipeline& pipe);

// State key an option agent indexes its table with, for a given grounding of
// the sub-task parameters.
std::string option_key(const OptionAgent& agent, const State& state,
                       const Substitution& grounding);

// Qtable file set: <dir>/<prefix><subtask>.qtab, or <prefix>flat.qtab.
void save_agents(const AgentSet& agents, const std::string& dir,
                 const std::string& prefix);
void load_agents(AgentSet& agents, const std::string& dir, const std::string& prefix);

struct EpisodeOutcome {
  double reward = 0.0;
  int steps = 0;
  bool goal_reached = false;
};

// Exploration rate after `steps` env steps (linear decay).
double epsilon_at(const TrainConfig& cfg, long steps);

// Plan → per-step option execution with Ro (env reward + termination bonus)
// updates; replans when an option exhausts its budget without terminating.
// Exploration follows epsilon_at(cfg, steps_so_far + steps in episode) while
// learning and is 0 otherwise.
EpisodeOutcome run_reprel_episode(AgentSet& agents, const Pipeline& pipe,
                                  const State& start, const TrainConfig& cfg,
                                  Rng& rng, bool learn, long steps_so_far = 0);

// Single flat Q-learner over ground states and primitive actions.
EpisodeOutcome run_flat_episode(AgentSet& agents, const Pipeline& pipe,
                                const State& start, const TrainConfig& cfg,
                                Rng& rng, bool learn, long steps_so_far = 0);

struct EvalStats {
  double mean_reward = 0.0;
  double goal_rate = 0.0;  // fraction of episodes reaching the task goal
};

// Greedy (ε = 0), non-learning evaluation over fixed start states.
EvalStats evaluate(AgentSet& agents, const Pipeline& pipe,
                   const std::vector<State>& starts, const TrainConfig& cfg);

// Best undiscounted episode return from `start` (delivery bonuses minus the
// shortest goal distance; exact for these deterministic instances).
double optimal_return(const taxi::Instance& inst, const State& start);

struct EvalPoint {
  long env_steps = 0;
  double mean_reward = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EvalPoint> points;
  double optimal_mean = 0.0;
  long steps_to_optimal = -1;  // -1: never reached within budget
  AgentSet agents;
};

struct LearningCurve {
  std::vector<long> env_steps;
  std::vector<double> mean_reward;  // mean over seeds of per-seed eval means
  std::vector<double> std_reward;   // population std over seeds
  std::size_t seeds = 0;
};

struct TrainResult {
  Variant variant = Variant::Reprel;
  bool transfer = false;
  LearningCurve curve;
  std::vector<SeedResult> seed_results;
};

// Trains every seed (in parallel up to REPREL_THREADS workers) and merges the
// per-seed curves; `load_dir`/`load_prefix_base` non-empty loads pre-trained
// tables (<base>_seed<k>_) before training — the "+T" transfer protocol.
TrainResult train(Variant v, const Pipeline& pipe, const TrainConfig& cfg,
                  const std::string& load_dir = "",
                  const std::string& load_prefix_base = "");

}  // namespace reprel::agents
