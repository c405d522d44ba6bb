#include "reprel/agents.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "reprel/errors.hpp"
#include "reprel/numfmt.hpp"

namespace reprel::agents {

double QTable::get(const std::string& key, const std::string& action) const {
  auto row = entries_.find(key);
  if (row == entries_.end()) return 0.0;
  auto cell = row->second.find(action);
  return cell == row->second.end() ? 0.0 : cell->second;
}

void QTable::set(const std::string& key, const std::string& action, double value) {
  entries_[key][action] = value;
}

double QTable::max_value(const std::string& key,
                         const std::vector<std::string>& actions) const {
  double best = 0.0;
  bool first = true;
  for (const std::string& a : actions) {
    double v = get(key, a);
    if (first || v > best) best = v;
    first = false;
  }
  return best;
}

std::size_t QTable::size() const {
  std::size_t n = 0;
  for (const auto& [key, row] : entries_) {
    (void)key;
    n += row.size();
  }
  return n;
}

void QTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("QTable::save: cannot open " + path);
  for (const auto& [key, row] : entries_) {
    for (const auto& [action, value] : row) {
      out << key << '\t' << action << '\t' << fmt_double(value) << '\n';
    }
  }
  if (!out) throw std::runtime_error("QTable::save: write failed on " + path);
}

void QTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  entries_.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab1 = line.find('\t');
    auto tab2 = tab1 == std::string::npos ? std::string::npos
                                          : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) {
      throw ParseError(path, lineno, 1, "expected key<TAB>action<TAB>value");
    }
    std::string key = line.substr(0, tab1);
    std::string action = line.substr(tab1 + 1, tab2 - tab1 - 1);
    double value = 0.0;
    const char* begin = line.data() + tab2 + 1;
    const char* end = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
      throw ParseError(path, lineno, static_cast<int>(tab2 + 2), "bad value");
    }
    entries_[std::move(key)][std::move(action)] = value;
  }
}

void q_update(QTable& q, const std::string& key, const std::string& action,
              double reward, const std::string& next_key, bool done, double alpha,
              double gamma, const std::vector<std::string>& actions) {
  double current = q.get(key, action);
  double target = reward + (done ? 0.0 : gamma * q.max_value(next_key, actions));
  q.set(key, action, current + alpha * (target - current));
}

const std::string& select_action(const QTable& q, const std::string& key,
                                 const std::vector<std::string>& actions,
                                 double epsilon, Rng& rng) {
  if (actions.empty()) throw std::invalid_argument("select_action: no actions");
  if (epsilon > 0.0 && rng.uniform01() < epsilon) {
    return actions[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(actions.size())))];
  }
  const std::string* best = &actions.front();
  double best_value = q.get(key, *best);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    double v = q.get(key, actions[i]);
    if (v > best_value || (v == best_value && actions[i] < *best)) {
      best = &actions[i];
      best_value = v;
    }
  }
  return *best;
}

Variant parse_variant(const std::string& name) {
  if (name == "reprel") return Variant::Reprel;
  if (name == "hrl") return Variant::Hrl;
  if (name == "flat") return Variant::Flat;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Reprel: return "reprel";
    case Variant::Hrl: return "hrl";
    case Variant::Flat: return "flat";
  }
  return {};
}

std::string variant_label(Variant v, bool transfer) {
  return variant_name(v) + (transfer ? "+T" : "");
}

namespace {

void validate_config(const TrainConfig& cfg) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("train config: " + msg);
  };
  if (cfg.alpha <= 0.0 || cfg.alpha > 1.0) fail("alpha must be in (0, 1]");
  if (cfg.epsilon_start < 0.0 || cfg.epsilon_start > 1.0 || cfg.epsilon_end < 0.0 ||
      cfg.epsilon_end > 1.0) {
    fail("epsilon must be in [0, 1]");
  }
  if (cfg.epsilon_decay_steps <= 0) fail("epsilon_decay_steps must be positive");
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) fail("gamma must be in (0, 1]");
  if (cfg.seeds.empty()) fail("seeds must be non-empty");
  if (cfg.total_env_steps <= 0) fail("total_env_steps must be positive");
  if (cfg.eval_every <= 0) fail("eval_every must be positive");
  if (cfg.eval_episodes <= 0) fail("eval_episodes must be positive");
  if (cfg.option_budget <= 0) fail("option_budget must be positive");
}

}  // namespace

TrainConfig parse_train_config(const std::string& text, const std::string& filename) {
  TrainConfig cfg;
  std::istringstream stream(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ParseError(filename, lineno, 1, msg);
  };
  auto trim = [](std::string s) {
    auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
  };
  while (std::getline(stream, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.empty()) fail("empty value for " + key);
    try {
      if (key == "alpha") {
        cfg.alpha = std::stod(value);
      } else if (key == "epsilon_start") {
        cfg.epsilon_start = std::stod(value);
      } else if (key == "epsilon_end") {
        cfg.epsilon_end = std::stod(value);
      } else if (key == "epsilon_decay_steps") {
        cfg.epsilon_decay_steps = std::stol(value);
      } else if (key == "gamma") {
        cfg.gamma = std::stod(value);
      } else if (key == "seeds") {
        cfg.seeds.clear();
        std::istringstream list(value);
        std::string item;
        while (std::getline(list, item, ',')) {
          cfg.seeds.push_back(std::stoull(trim(item)));
        }
      } else if (key == "total_env_steps") {
        cfg.total_env_steps = std::stol(value);
      } else if (key == "eval_every") {
        cfg.eval_every = std::stol(value);
      } else if (key == "eval_episodes") {
        cfg.eval_episodes = std::stoi(value);
      } else if (key == "option_budget") {
        cfg.option_budget = std::stoi(value);
      } else {
        fail("unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      fail("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
      fail("value out of range for " + key + ": " + value);
    }
  }
  try {
    validate_config(cfg);
  } catch (const std::invalid_argument& e) {
    lineno = 0;
    fail(e.what());
  }
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str(), path);
}

Pipeline load_pipeline(const std::string& dfoci_path, const std::string& ops_path,
                       const std::string& instance_path) {
  Pipeline pipe;
  pipe.domain = dfoci::load_domain(dfoci_path);
  pipe.operators = planner::load_operators(ops_path);
  pipe.instance = taxi::load_instance(instance_path);
  return pipe;
}

AgentSet make_agents(Variant v, const Pipeline& pipe) {
  AgentSet agents;
  agents.variant = v;
  if (v == Variant::Flat) return agents;
  for (const planner::SubtaskOperator& op : pipe.operators) {
    if (agents.options.count(op.name)) continue;
    OptionAgent agent;
    agent.subtask = op.name;
    if (v == Variant::Reprel) {
      agent.schema = abstraction::relevant_closure(pipe.domain, op.name);
    }
    agents.options.emplace(op.name, std::move(agent));
  }
  return agents;
}

std::string option_key(const OptionAgent& agent, const State& state,
                       const Substitution& grounding) {
  if (!agent.schema) return state.key();
  return abstraction::abstract_state(*agent.schema, state, grounding).key();
}

void save_agents(const AgentSet& agents, const std::string& dir,
                 const std::string& prefix) {
  if (agents.variant == Variant::Flat) {
    agents.flat.save(dir + "/" + prefix + "flat.qtab");
    return;
  }
  for (const auto& [name, agent] : agents.options) {
    agent.table.save(dir + "/" + prefix + name + ".qtab");
  }
}

void load_agents(AgentSet& agents, const std::string& dir,
                 const std::string& prefix) {
  if (agents.variant == Variant::Flat) {
    agents.flat.load(dir + "/" + prefix + "flat.qtab");
    return;
  }
  for (auto& [name, agent] : agents.options) {
    agent.table.load(dir + "/" + prefix + name + ".qtab");
  }
}

double epsilon_at(const TrainConfig& cfg, long steps) {
  double frac = std::min(1.0, static_cast<double>(steps) /
                                  static_cast<double>(cfg.epsilon_decay_steps));
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

EpisodeOutcome run_reprel_episode(AgentSet& agents, const Pipeline& pipe,
                                  const State& start, const TrainConfig& cfg,
                                  Rng& rng, bool learn, long steps_so_far) {
  taxi::Episode ep(pipe.instance, start);
  const auto& actions = taxi::available_actions();
  const Goal task_goal = taxi::planning_goal(pipe.instance);
  const auto objects = taxi::planning_objects(pipe.instance);

  std::map<std::string, const planner::SubtaskOperator*> ops_by_name;
  for (const planner::SubtaskOperator& op : pipe.operators) {
    ops_by_name.emplace(op.name, &op);
  }

  while (!ep.done()) {
    auto plan = planner::make_plan(taxi::planning_state(ep.state()), task_goal,
                                   pipe.operators, objects);
    if (!plan || plan->steps.empty()) break;
    for (const Atom& step_atom : plan->steps) {
      auto agent_it = agents.options.find(step_atom.predicate);
      auto op_it = ops_by_name.find(step_atom.predicate);
      if (agent_it == agents.options.end() || op_it == ops_by_name.end()) {
        throw std::logic_error("no option agent for sub-task " + step_atom.predicate);
      }
      OptionAgent& agent = agent_it->second;

      std::vector<std::string> args;
      for (const Term& t : step_atom.args) args.push_back(t.name);
      planner::GroundOperator gop = planner::ground(*op_it->second, args);
      Goal termination;
      for (const Atom& a : gop.add_effects) {
        termination.literals.insert(Literal{a, true});
      }
      Substitution grounding;
      if (agent.schema) {
        if (agent.schema->params.size() != args.size()) {
          throw std::logic_error("schema/operator arity mismatch for " +
                                 step_atom.predicate);
        }
        for (std::size_t i = 0; i < args.size(); ++i) {
          grounding.bind(agent.schema->params[i], Term::constant(args[i]));
        }
      }
      auto terminated = [&](const State& s) {
        return goal_satisfied(taxi::planning_state(s), termination);
      };

      int budget = cfg.option_budget;
      bool term_now = terminated(ep.state());
      while (!ep.done() && !term_now && budget-- > 0) {
        std::string key = option_key(agent, ep.state(), grounding);
        double eps = learn ? epsilon_at(cfg, steps_so_far + ep.steps()) : 0.0;
        const std::string& a = select_action(agent.table, key, actions, eps, rng);
        taxi::StepResult r = ep.step(a);
        term_now = terminated(ep.state());
        double reward = r.reward + (term_now ? taxi::kSubtaskBonus : 0.0);
        if (learn) {
          std::string next_key = option_key(agent, ep.state(), grounding);
          bool option_done = term_now || ep.done();
          q_update(agent.table, key, a, reward, next_key, option_done, cfg.alpha,
                   cfg.gamma, actions);
        }
      }
      if (ep.done()) break;
      if (!term_now) break;  // budget ran out: replan from the current state
    }
  }
  return {ep.total_reward(), ep.steps(), ep.goal_reached()};
}

EpisodeOutcome run_flat_episode(AgentSet& agents, const Pipeline& pipe,
                                const State& start, const TrainConfig& cfg,
                                Rng& rng, bool learn, long steps_so_far) {
  taxi::Episode ep(pipe.instance, start);
  const auto& actions = taxi::available_actions();
  while (!ep.done()) {
    std::string key = ep.state().key();
    double eps = learn ? epsilon_at(cfg, steps_so_far + ep.steps()) : 0.0;
    const std::string& a = select_action(agents.flat, key, actions, eps, rng);
    taxi::StepResult r = ep.step(a);
    if (learn) {
      q_update(agents.flat, key, a, r.reward, ep.state().key(), ep.done(),
               cfg.alpha, cfg.gamma, actions);
    }
  }
  return {ep.total_reward(), ep.steps(), ep.goal_reached()};
}

EvalStats evaluate(AgentSet& agents, const Pipeline& pipe,
                   const std::vector<State>& starts, const TrainConfig& cfg) {
  EvalStats stats;
  if (starts.empty()) return stats;
  Rng unused(0);  // greedy evaluation never draws
  for (const State& start : starts) {
    EpisodeOutcome out =
        agents.variant == Variant::Flat
            ? run_flat_episode(agents, pipe, start, cfg, unused, false)
            : run_reprel_episode(agents, pipe, start, cfg, unused, false);
    stats.mean_reward += out.reward;
    stats.goal_rate += out.goal_reached ? 1.0 : 0.0;
  }
  stats.mean_reward /= static_cast<double>(starts.size());
  stats.goal_rate /= static_cast<double>(starts.size());
  return stats;
}

double optimal_return(const taxi::Instance& inst, const State& start) {
  // Any goal-reaching trajectory delivers each pending goal passenger exactly
  // once (+20 each, re-pickup of delivered passengers is illegal) and pays -1
  // per step, so the best return is 20*k minus the BFS goal distance.
  double bonus = 0.0;
  for (const std::string& p : inst.goal_passengers) {
    if (!taxi::delivered(start, p)) bonus += taxi::kDeliveryBonus;
  }
  const Goal goal = taxi::episode_goal(inst, start);
  if (goal_satisfied(start, goal)) return 0.0;

  std::map<std::string, int> dist{{start.key(), 0}};
  std::deque<State> frontier{start};
  const auto& actions = taxi::available_actions();
  while (!frontier.empty()) {
    State s = std::move(frontier.front());
    frontier.pop_front();
    int d = dist.at(s.key());
    for (const std::string& a : actions) {
      taxi::StepResult r = taxi::step(inst, s, a);
      auto [it, inserted] = dist.emplace(r.next_state.key(), d + 1);
      if (!inserted) continue;
      if (r.done) return bonus - static_cast<double>(d + 1);
      frontier.push_back(std::move(r.next_state));
    }
  }
  throw std::runtime_error("optimal_return: goal unreachable");
}

namespace {

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("REPREL_THREADS")) {
    char* end = nullptr;
    long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) n = static_cast<std::size_t>(parsed);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

SeedResult run_seed(Variant v, const Pipeline& pipe, const TrainConfig& cfg,
                    std::uint64_t seed, const std::string& load_dir,
                    const std::string& load_prefix_base) {
  SeedResult sr;
  sr.seed = seed;
  Rng rng(seed);
  AgentSet agents = make_agents(v, pipe);
  if (!load_dir.empty()) {
    load_agents(agents, load_dir,
                load_prefix_base + "_seed" + std::to_string(seed) + "_");
  }

  // Fixed evaluation placements: drawn once per seed so every checkpoint
  // (and every variant sharing the seed) measures the same episodes.
  Rng eval_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<State> eval_starts;
  eval_starts.reserve(static_cast<std::size_t>(cfg.eval_episodes));
  for (int i = 0; i < cfg.eval_episodes; ++i) {
    eval_starts.push_back(taxi::reset(pipe.instance, eval_rng.next()));
  }
  double optimal_sum = 0.0;
  for (const State& s : eval_starts) optimal_sum += optimal_return(pipe.instance, s);
  sr.optimal_mean = optimal_sum / static_cast<double>(eval_starts.size());

  auto eval_point = [&](long at) {
    EvalStats stats = evaluate(agents, pipe, eval_starts, cfg);
    sr.points.push_back({at, stats.mean_reward});
  };
  eval_point(0);

  long done_steps = 0;
  long next_checkpoint = cfg.eval_every;
  while (done_steps < cfg.total_env_steps) {
    State start = taxi::reset(pipe.instance, rng.next());
    EpisodeOutcome out =
        v == Variant::Flat
            ? run_flat_episode(agents, pipe, start, cfg, rng, true, done_steps)
            : run_reprel_episode(agents, pipe, start, cfg, rng, true, done_steps);
    if (out.steps <= 0) {
      throw std::logic_error("training episode made no progress");
    }
    done_steps += out.steps;
    while (next_checkpoint <= done_steps && next_checkpoint <= cfg.total_env_steps) {
      eval_point(next_checkpoint);
      next_checkpoint += cfg.eval_every;
    }
  }

  for (const EvalPoint& p : sr.points) {
    if (p.mean_reward >= sr.optimal_mean - 1e-9) {
      sr.steps_to_optimal = p.env_steps;
      break;
    }
  }
  sr.agents = std::move(agents);
  return sr;
}

}  // namespace

TrainResult train(Variant v, const Pipeline& pipe, const TrainConfig& cfg,
                  const std::string& load_dir, const std::string& load_prefix_base) {
  validate_config(cfg);
  TrainResult result;
  result.variant = v;
  result.transfer = !load_dir.empty();
  result.seed_results.resize(cfg.seeds.size());

  std::atomic<std::size_t> next_job{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      std::size_t i = next_job.fetch_add(1);
      if (i >= cfg.seeds.size()) return;
      try {
        result.seed_results[i] =
            run_seed(v, pipe, cfg, cfg.seeds[i], load_dir, load_prefix_base);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::size_t workers = worker_count(cfg.seeds.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Merge: all seeds share the checkpoint grid by construction.
  const auto& grid = result.seed_results.front().points;
  result.curve.seeds = result.seed_results.size();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double sum = 0.0, sumsq = 0.0;
    for (const SeedResult& sr : result.seed_results) {
      if (sr.points.size() != grid.size() || sr.points[p].env_steps != grid[p].env_steps) {
        throw std::logic_error("train: checkpoint grids diverged across seeds");
      }
      sum += sr.points[p].mean_reward;
      sumsq += sr.points[p].mean_reward * sr.points[p].mean_reward;
    }
    double n = static_cast<double>(result.seed_results.size());
    double mean = sum / n;
    double var = std::max(0.0, sumsq / n - mean * mean);
    result.curve.env_steps.push_back(grid[p].env_steps);
    result.curve.mean_reward.push_back(mean);
    result.curve.std_reward.push_back(std::sqrt(var));
  }
  return result;
}

}  // namespace reprel::agents
