#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reprel/relational.hpp"
#include "reprel/rng.hpp"

namespace reprel::taxi {

// The fixed primitive action set A of the GRMDP, in stable order.
const std::vector<std::string>& available_actions();

inline constexpr double kStepReward = -1.0;
inline constexpr double kIllegalPenalty = -10.0;
inline constexpr double kDeliveryBonus = 20.0;
// Pseudo-reward granted to an option when its termination condition becomes
// true (see rl-agents).
inline constexpr double kSubtaskBonus = 20.0;

struct GrmdpSpec {
  std::vector<std::string> actions;
  double gamma = 0.99;
  std::string goal_family;
  int max_episode_steps = 500;
};

// One passenger line of an instance file. `start`/`dest` are either a cell
// name or "random" (uniform over depots; dest additionally != start).
struct PassengerSpec {
  std::string name;
  std::string start;
  std::string dest;
};

struct Instance {
  int width = 5;
  int height = 5;
  std::vector<std::string> depots;
  std::vector<Atom> wall_facts;        // both sides of each declared segment
  std::string taxi_start = "random";   // cell name or "random" (any cell)
  std::vector<PassengerSpec> passengers;
  std::vector<std::string> goal_passengers;  // deliver these
  int max_steps = 500;
  double gamma = 0.99;

  bool randomized() const;
  std::vector<std::string> passenger_names() const;
  std::vector<std::string> cells() const;  // all grid cells, row-major
};

// Cell naming: l{x}{y}, x = column, y = row, y = 0 at the bottom;
// move-north is +y. Single-digit coordinates only (grids up to 10x10).
std::string cell_name(int x, int y);
std::pair<int, int> cell_coords(const std::string& cell);

Instance parse_instance(const std::string& text, const std::string& filename);
Instance load_instance(const std::string& path);

// Initial state for the instance: taxi-at/at/dest plus static wall facts.
// Randomized placements are drawn from `seed` (deterministic per seed).
State reset(const Instance& inst, std::uint64_t seed);

// Goal of the episode encoded over the ground state: at(p, dest_p) for every
// goal passenger, with dest read from the state's dest facts.
Goal episode_goal(const Instance& inst, const State& state);

struct StepInfo {
  bool illegal = false;
};

struct StepResult {
  State next_state;
  double reward = 0.0;
  bool done = false;  // goal satisfied (step budgets are the episode's job)
  StepInfo info;
};

// Pure one-step dynamics; `done` reflects goal satisfaction only.
StepResult step(const Instance& inst, const State& state, const std::string& action);

// Episode wrapper adding the step budget on top of the pure dynamics.
class Episode {
 public:
  Episode(const Instance& inst, State start);

  const State& state() const { return state_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  bool goal_reached() const { return goal_satisfied(state_, goal_); }
  double total_reward() const { return total_reward_; }

  StepResult step(const std::string& action);

 private:
  const Instance& inst_;
  State state_;
  Goal goal_;
  int steps_ = 0;
  bool done_ = false;
  double total_reward_ = 0.0;
};

// Exact reachable state graph from `start` (terminal = goal states, not
// expanded). Guarded by a state budget.
struct Enumeration {
  struct Tr {
    int next = -1;
    double reward = 0.0;
    bool done = false;
  };
  std::vector<State> states;
  std::map<std::string, int> index_of;        // State::key() -> index
  std::vector<std::vector<Tr>> transitions;   // [state][action idx]; terminal rows empty
  std::vector<bool> terminal;
  double gamma = 0.99;

  int index(const State& s) const;
};

Enumeration enumerate_from(const Instance& inst, const State& start,
                           std::size_t state_budget = 1000000);
// Convenience for fully fixed instances (throws on randomized placement).
Enumeration enumerate(const Instance& inst, std::size_t state_budget = 1000000);

GrmdpSpec spec(const Instance& inst);

// --- planner-facing projection ------------------------------------------
// Task-level fluents only: in-taxi(p), occupied, delivered(p), dest(p,c).
State planning_state(const State& state);
// Goal over the projection: delivered(p) for each goal passenger.
Goal planning_goal(const Instance& inst);
// Objects the planner may ground operator parameters with.
std::vector<std::string> planning_objects(const Instance& inst);

bool delivered(const State& state, const std::string& passenger);

}  // namespace reprel::taxi
