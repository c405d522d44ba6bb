#include "reprel/taxi.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "reprel/errors.hpp"

namespace reprel::taxi {

namespace {

const std::vector<std::string> kActions = {
    "move-north", "move-south", "move-east", "move-west", "pickup", "dropoff"};

struct Dir {
  const char* name;
  int dx;
  int dy;
};
constexpr Dir kDirs[] = {
    {"north", 0, 1}, {"south", 0, -1}, {"east", 1, 0}, {"west", -1, 0}};

const Dir* find_dir(const std::string& name) {
  for (const Dir& d : kDirs) {
    if (name == d.name) return &d;
  }
  return nullptr;
}

const Dir* opposite(const Dir& d) {
  if (d.name == std::string("north")) return find_dir("south");
  if (d.name == std::string("south")) return find_dir("north");
  if (d.name == std::string("east")) return find_dir("west");
  return find_dir("east");
}

}  // namespace

const std::vector<std::string>& available_actions() { return kActions; }

std::string cell_name(int x, int y) {
  return "l" + std::to_string(x) + std::to_string(y);
}

std::pair<int, int> cell_coords(const std::string& cell) {
  if (cell.size() != 3 || cell[0] != 'l' || !std::isdigit(cell[1]) ||
      !std::isdigit(cell[2])) {
    throw std::invalid_argument("not a cell name: " + cell);
  }
  return {cell[1] - '0', cell[2] - '0'};
}

bool Instance::randomized() const {
  if (taxi_start == "random") return true;
  return std::any_of(passengers.begin(), passengers.end(), [](const PassengerSpec& p) {
    return p.start == "random" || p.dest == "random";
  });
}

std::vector<std::string> Instance::passenger_names() const {
  std::vector<std::string> out;
  out.reserve(passengers.size());
  for (const PassengerSpec& p : passengers) out.push_back(p.name);
  return out;
}

std::vector<std::string> Instance::cells() const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) out.push_back(cell_name(x, y));
  }
  return out;
}

namespace {

void check_cell(const Instance& inst, const std::string& cell,
                const std::string& file, int line) {
  std::pair<int, int> xy;
  try {
    xy = cell_coords(cell);
  } catch (const std::invalid_argument& e) {
    throw ParseError(file, line, 1, e.what());
  }
  if (xy.first >= inst.width || xy.second >= inst.height) {
    throw ParseError(file, line, 1, "cell outside grid: " + cell);
  }
}

}  // namespace

Instance parse_instance(const std::string& text, const std::string& filename) {
  Instance inst;
  inst.width = 0;  // grid line required
  std::istringstream stream(text);
  std::string raw;
  int lineno = 0;
  std::set<std::string> names;
  std::vector<std::pair<std::string, int>> deferred_cells;  // validate after grid
  bool randomized_placement = false;

  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(filename, lineno, 1, msg);
  };

  while (std::getline(stream, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream line(raw);
    std::string kw;
    if (!(line >> kw)) continue;
    auto want = [&](const char* what) {
      std::string tok;
      if (!(line >> tok)) fail(std::string("expected ") + what);
      return tok;
    };
    if (kw == "grid") {
      int w = 0, h = 0;
      if (!(line >> w >> h)) fail("expected grid WIDTH HEIGHT");
      if (w < 1 || h < 1 || w > 10 || h > 10) fail("grid dimensions must be in 1..10");
      inst.width = w;
      inst.height = h;
    } else if (kw == "depot") {
      std::string cell = want("depot cell");
      deferred_cells.emplace_back(cell, lineno);
      inst.depots.push_back(cell);
    } else if (kw == "wall") {
      int x = 0, y = 0;
      std::string dirname;
      if (!(line >> x >> y >> dirname)) fail("expected wall X Y DIR");
      const Dir* dir = find_dir(dirname);
      if (!dir) fail("unknown direction: " + dirname);
      if (inst.width == 0) fail("grid line must precede wall lines");
      int nx = x + dir->dx, ny = y + dir->dy;
      if (x < 0 || y < 0 || x >= inst.width || y >= inst.height) {
        fail("wall cell outside grid");
      }
      if (nx < 0 || ny < 0 || nx >= inst.width || ny >= inst.height) {
        fail("wall segment points outside the grid (borders are implicit)");
      }
      inst.wall_facts.push_back(make_atom("wall", {cell_name(x, y), dir->name}));
      inst.wall_facts.push_back(
          make_atom("wall", {cell_name(nx, ny), opposite(*dir)->name}));
    } else if (kw == "taxi") {
      std::string cell = want("taxi cell or 'random'");
      if (cell != "random") deferred_cells.emplace_back(cell, lineno);
      inst.taxi_start = cell;
    } else if (kw == "passenger") {
      PassengerSpec p;
      p.name = want("passenger name");
      if (is_variable_name(p.name)) fail("passenger name must be a constant");
      if (!names.insert(p.name).second) fail("duplicate passenger: " + p.name);
      if (want("'at'") != "at") fail("expected 'at'");
      p.start = want("start cell or 'random'");
      if (p.start != "random") deferred_cells.emplace_back(p.start, lineno);
      if (want("'dest'") != "dest") fail("expected 'dest'");
      p.dest = want("dest cell or 'random'");
      if (p.dest != "random") deferred_cells.emplace_back(p.dest, lineno);
      if (p.start != "random" && p.start == p.dest) {
        fail("passenger " + p.name + " starts at its destination");
      }
      if (p.start == "random" || p.dest == "random") randomized_placement = true;
      inst.passengers.push_back(std::move(p));
    } else if (kw == "goal") {
      if (want("'deliver'") != "deliver") fail("expected 'goal deliver NAME'");
      inst.goal_passengers.push_back(want("passenger name"));
    } else if (kw == "max-steps") {
      if (!(line >> inst.max_steps) || inst.max_steps < 1) {
        fail("expected positive max-steps");
      }
    } else if (kw == "gamma") {
      if (!(line >> inst.gamma) || inst.gamma <= 0.0 || inst.gamma > 1.0) {
        fail("expected gamma in (0, 1]");
      }
    } else {
      fail("unknown directive: " + kw);
    }
  }
  lineno = 0;
  if (inst.width == 0) fail("missing grid line");
  for (const auto& [cell, line] : deferred_cells) {
    check_cell(inst, cell, filename, line);
  }
  if (inst.passengers.empty()) fail("no passengers declared");
  if (inst.goal_passengers.empty()) fail("no goal line");
  for (const std::string& g : inst.goal_passengers) {
    if (!names.count(g)) fail("goal names unknown passenger: " + g);
  }
  if ((randomized_placement || inst.taxi_start == "random") && inst.depots.size() < 2) {
    fail("randomized placement needs at least 2 depots");
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), path);
}

State reset(const Instance& inst, std::uint64_t seed) {
  Rng rng(seed);
  State s;
  for (const Atom& w : inst.wall_facts) s.insert(w);

  std::string taxi_cell = inst.taxi_start;
  if (taxi_cell == "random") taxi_cell = rng.choice(inst.cells());
  s.insert(make_atom("taxi-at", {taxi_cell}));

  for (const PassengerSpec& p : inst.passengers) {
    std::string start = p.start;
    if (start == "random") start = rng.choice(inst.depots);
    std::string dest = p.dest;
    if (dest == "random") {
      std::vector<std::string> options;
      for (const std::string& d : inst.depots) {
        if (d != start) options.push_back(d);
      }
      dest = rng.choice(options);
    }
    s.insert(make_atom("at", {p.name, start}));
    s.insert(make_atom("dest", {p.name, dest}));
  }
  return s;
}

Goal episode_goal(const Instance& inst, const State& state) {
  Goal goal;
  for (const std::string& p : inst.goal_passengers) {
    std::optional<std::string> dest;
    for (const Atom& fact : state.facts) {
      if (fact.predicate == "dest" && fact.args.size() == 2 &&
          fact.args[0].name == p) {
        dest = fact.args[1].name;
        break;
      }
    }
    if (!dest) {
      throw std::invalid_argument("state lacks dest fact for goal passenger " + p);
    }
    goal.literals.insert(Literal{make_atom("at", {p, *dest}), true});
  }
  return goal;
}

namespace {

std::string taxi_cell_of(const State& s) {
  for (const Atom& fact : s.facts) {
    if (fact.predicate == "taxi-at" && fact.args.size() == 1) {
      return fact.args[0].name;
    }
  }
  throw std::invalid_argument("state has no taxi-at fact");
}

std::optional<std::string> carried_passenger(const State& s) {
  for (const Atom& fact : s.facts) {
    if (fact.predicate == "in-taxi" && fact.args.size() == 1) {
      return fact.args[0].name;
    }
  }
  return std::nullopt;
}

}  // namespace

bool delivered(const State& state, const std::string& passenger) {
  for (const Atom& fact : state.facts) {
    if (fact.predicate == "at" && fact.args.size() == 2 &&
        fact.args[0].name == passenger &&
        state.contains(make_atom("dest", {passenger, fact.args[1].name}))) {
      return true;
    }
  }
  return false;
}

StepResult step(const Instance& inst, const State& state, const std::string& action) {
  StepResult result;
  result.next_state = state;
  result.reward = kStepReward;
  State& next = result.next_state;
  const std::string taxi_cell = taxi_cell_of(state);

  if (action.rfind("move-", 0) == 0) {
    const Dir* dir = find_dir(action.substr(5));
    if (!dir) throw std::invalid_argument("unknown action: " + action);
    auto [x, y] = cell_coords(taxi_cell);
    int nx = x + dir->dx, ny = y + dir->dy;
    bool blocked = nx < 0 || ny < 0 || nx >= inst.width || ny >= inst.height ||
                   state.contains(make_atom("wall", {taxi_cell, dir->name}));
    if (!blocked) {
      next.erase(make_atom("taxi-at", {taxi_cell}));
      next.insert(make_atom("taxi-at", {cell_name(nx, ny)}));
    }
  } else if (action == "pickup") {
    std::optional<std::string> target;
    if (!carried_passenger(state)) {
      // Lexicographically least passenger waiting here that is not already
      // delivered; picking delivered passengers back up is illegal so a
      // finished sub-task cannot be undone by a co-located later one.
      for (const Atom& fact : state.facts) {
        if (fact.predicate != "at" || fact.args.size() != 2) continue;
        if (fact.args[1].name != taxi_cell) continue;
        const std::string& p = fact.args[0].name;
        if (state.contains(make_atom("dest", {p, taxi_cell}))) continue;
        if (!target || p < *target) target = p;
      }
    }
    if (target) {
      next.erase(make_atom("at", {*target, taxi_cell}));
      next.insert(make_atom("in-taxi", {*target}));
    } else {
      result.reward += kIllegalPenalty;
      result.info.illegal = true;
    }
  } else if (action == "dropoff") {
    if (auto p = carried_passenger(state)) {
      next.erase(make_atom("in-taxi", {*p}));
      next.insert(make_atom("at", {*p, taxi_cell}));
      if (state.contains(make_atom("dest", {*p, taxi_cell}))) {
        result.reward += kDeliveryBonus;
      }
    } else {
      result.reward += kIllegalPenalty;
      result.info.illegal = true;
    }
  } else {
    throw std::invalid_argument("unknown action: " + action);
  }

  result.done = goal_satisfied(next, episode_goal(inst, next));
  return result;
}

Episode::Episode(const Instance& inst, State start)
    : inst_(inst), state_(std::move(start)) {
  goal_ = episode_goal(inst_, state_);
  done_ = goal_satisfied(state_, goal_);
}

StepResult Episode::step(const std::string& action) {
  if (done_) throw std::logic_error("Episode::step called after done");
  StepResult result = taxi::step(inst_, state_, action);
  state_ = result.next_state;
  total_reward_ += result.reward;
  ++steps_;
  if (steps_ >= inst_.max_steps) result.done = true;
  done_ = result.done;
  return result;
}

int Enumeration::index(const State& s) const {
  auto it = index_of.find(s.key());
  return it == index_of.end() ? -1 : it->second;
}

Enumeration enumerate_from(const Instance& inst, const State& start,
                           std::size_t state_budget) {
  Enumeration out;
  out.gamma = inst.gamma;
  const Goal goal = episode_goal(inst, start);
  const auto& actions = available_actions();

  auto intern = [&](const State& s) {
    auto [it, inserted] = out.index_of.emplace(s.key(), out.states.size());
    if (inserted) {
      if (out.states.size() >= state_budget) {
        throw std::runtime_error("enumerate: state budget exceeded");
      }
      out.states.push_back(s);
      out.terminal.push_back(goal_satisfied(s, goal));
      out.transitions.emplace_back();
    }
    return it->second;
  };

  std::deque<int> frontier;
  frontier.push_back(intern(start));
  std::set<int> expanded;
  while (!frontier.empty()) {
    int i = frontier.front();
    frontier.pop_front();
    if (out.terminal[i] || !expanded.insert(i).second) continue;
    out.transitions[i].reserve(actions.size());
    for (const std::string& a : actions) {
      StepResult r = step(inst, out.states[i], a);
      int j = intern(r.next_state);
      out.transitions[i].push_back({j, r.reward, r.done});
      if (!out.terminal[j] && !expanded.count(j)) frontier.push_back(j);
    }
  }
  return out;
}

Enumeration enumerate(const Instance& inst, std::size_t state_budget) {
  if (inst.randomized()) {
    throw std::invalid_argument("enumerate: instance has randomized placement");
  }
  return enumerate_from(inst, reset(inst, 0), state_budget);
}

GrmdpSpec spec(const Instance& inst) {
  GrmdpSpec s;
  s.actions = available_actions();
  s.gamma = inst.gamma;
  s.max_episode_steps = inst.max_steps;
  s.goal_family = "deliver each goal passenger to its dest cell";
  return s;
}

State planning_state(const State& state) {
  State out;
  bool occupied = false;
  for (const Atom& fact : state.facts) {
    if (fact.predicate == "in-taxi") {
      out.insert(fact);
      occupied = true;
    } else if (fact.predicate == "dest") {
      out.insert(fact);
      if (fact.args.size() == 2 &&
          state.contains(make_atom("at", {fact.args[0].name, fact.args[1].name}))) {
        out.insert(make_atom("delivered", {fact.args[0].name}));
      }
    }
  }
  if (occupied) out.insert(make_atom("occupied", {}));
  return out;
}

Goal planning_goal(const Instance& inst) {
  Goal goal;
  for (const std::string& p : inst.goal_passengers) {
    goal.literals.insert(Literal{make_atom("delivered", {p}), true});
  }
  return goal;
}

std::vector<std::string> planning_objects(const Instance& inst) {
  return inst.passenger_names();
}

}  // namespace reprel::taxi
