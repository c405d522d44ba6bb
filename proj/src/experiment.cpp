#include "reprel/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "reprel/errors.hpp"
#include "reprel/numfmt.hpp"
#include "reprel/verifier.hpp"

namespace fs = std::filesystem;

namespace reprel::experiment {

Manifest parse_manifest(const std::string& text, const std::string& filename) {
  Manifest m;
  const fs::path base = fs::path(filename).parent_path();
  auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return (p.is_absolute() ? p : base / p).lexically_normal().string();
  };

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
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.empty()) fail("empty value for " + key);
    if (key == "task") {
      m.task = value;
    } else if (key == "dfoci") {
      m.dfoci_path = resolve(value);
    } else if (key == "operators") {
      m.ops_path = resolve(value);
    } else if (key == "instance") {
      m.instance_path = resolve(value);
    } else if (key == "config") {
      m.config_path = resolve(value);
    } else if (key == "variants") {
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        agents::parse_variant(item);  // reject unknown names early
        m.variants.push_back(item);
      }
    } else if (key == "out") {
      m.out_dir = resolve(value);
    } else if (key == "load_dir") {
      m.load_dir = resolve(value);
    } else if (key == "dest_family") {
      if (value == "all") {
        m.dest_family = true;
      } else if (value == "none") {
        m.dest_family = false;
      } else {
        fail("dest_family must be 'all' or 'none'");
      }
    } else if (key == "tol") {
      try {
        m.tol = std::stod(value);
      } catch (const std::exception&) {
        fail("bad tol: " + value);
      }
      if (m.tol <= 0.0) fail("tol must be positive");
    } else {
      fail("unknown key: " + key);
    }
  }
  lineno = 0;
  if (m.task.empty()) fail("missing key: task");
  if (m.dfoci_path.empty()) fail("missing key: dfoci");
  if (m.ops_path.empty()) fail("missing key: operators");
  if (m.instance_path.empty()) fail("missing key: instance");
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  Manifest m = parse_manifest(buf.str(), path);
  // Everything referenced must load and validate up front.
  agents::load_pipeline(m.dfoci_path, m.ops_path, m.instance_path);
  if (!m.config_path.empty()) agents::load_train_config(m.config_path);
  if (!m.load_dir.empty() && !fs::is_directory(m.load_dir)) {
    throw ParseError(path, 0, 0, "load_dir is not a directory: " + m.load_dir);
  }
  return m;
}

std::string curve_csv(const agents::TrainResult& result) {
  std::string out = "env_steps,mean_reward,std_reward,seeds\n";
  const agents::LearningCurve& c = result.curve;
  for (std::size_t i = 0; i < c.env_steps.size(); ++i) {
    out += std::to_string(c.env_steps[i]);
    out += ',';
    out += fmt_fixed(c.mean_reward[i], 6);
    out += ',';
    out += fmt_fixed(c.std_reward[i], 6);
    out += ',';
    out += std::to_string(c.seeds);
    out += '\n';
  }
  out += "# steps_to_optimal";
  for (const agents::SeedResult& sr : result.seed_results) {
    out += " seed=" + std::to_string(sr.seed) + ":" +
           std::to_string(sr.steps_to_optimal);
  }
  out += '\n';
  out += "# optimal_mean";
  for (const agents::SeedResult& sr : result.seed_results) {
    out += " seed=" + std::to_string(sr.seed) + ":" + fmt_fixed(sr.optimal_mean, 6);
  }
  out += '\n';
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::vector<std::string> run_training(const Manifest& m,
                                      const agents::TrainConfig& config_override,
                                      bool has_override) {
  if (m.variants.empty()) {
    throw std::invalid_argument("manifest lists no variants");
  }
  if (!has_override && m.config_path.empty()) {
    throw std::invalid_argument("manifest lacks a config and no override given");
  }
  if (m.out_dir.empty()) throw std::invalid_argument("manifest lacks out dir");
  agents::Pipeline pipe =
      agents::load_pipeline(m.dfoci_path, m.ops_path, m.instance_path);
  agents::TrainConfig cfg =
      has_override ? config_override : agents::load_train_config(m.config_path);
  fs::create_directories(m.out_dir);

  std::vector<std::string> csvs;
  for (const std::string& vname : m.variants) {
    agents::Variant variant = agents::parse_variant(vname);
    std::vector<std::string> written;
    try {
      agents::TrainResult result =
          agents::train(variant, pipe, cfg, m.load_dir, vname);
      std::string label = agents::variant_label(variant, result.transfer);
      std::string csv_path = m.out_dir + "/" + m.task + "_" + label + ".csv";
      write_file(csv_path, curve_csv(result));
      written.push_back(csv_path);
      for (const agents::SeedResult& sr : result.seed_results) {
        std::string prefix = vname + "_seed" + std::to_string(sr.seed) + "_";
        if (variant == agents::Variant::Flat) {
          written.push_back(m.out_dir + "/" + prefix + "flat.qtab");
        } else {
          for (const auto& [name, agent] : sr.agents.options) {
            (void)agent;
            written.push_back(m.out_dir + "/" + prefix + name + ".qtab");
          }
        }
        agents::save_agents(sr.agents, m.out_dir, prefix);
      }
      csvs.push_back(csv_path);
    } catch (...) {
      for (const std::string& path : written) {
        std::error_code ec;
        fs::remove(path, ec);
      }
      throw;
    }
  }
  return csvs;
}

std::vector<std::string> run_training(const Manifest& m) {
  return run_training(m, agents::TrainConfig{}, false);
}

VerificationResult run_verification(const Manifest& m, double tol) {
  agents::Pipeline pipe =
      agents::load_pipeline(m.dfoci_path, m.ops_path, m.instance_path);
  const taxi::Instance& inst = pipe.instance;
  if (inst.randomized()) {
    throw std::invalid_argument("verification requires a fixed instance");
  }

  std::vector<State> entries = m.dest_family
                                   ? verifier::family_starts(inst)
                                   : std::vector<State>{taxi::reset(inst, 0)};
  auto plan = planner::make_plan(taxi::planning_state(entries.front()),
                                 taxi::planning_goal(inst), pipe.operators,
                                 taxi::planning_objects(inst));
  if (!plan) throw std::runtime_error("verification: planner found no plan");

  VerificationResult result;
  result.pass = true;
  result.report = "plan";
  for (const Atom& step : plan->steps) result.report += " " + step.str();
  result.report += "\nstarts " + std::to_string(entries.size()) + "\n";

  for (const Atom& step : plan->steps) {
    const planner::SubtaskOperator* op = nullptr;
    for (const planner::SubtaskOperator& candidate : pipe.operators) {
      if (candidate.name == step.predicate) {
        op = &candidate;
        break;
      }
    }
    if (!op) throw std::logic_error("no operator for plan step " + step.str());
    std::vector<std::string> args;
    for (const Term& t : step.args) args.push_back(t.name);
    planner::GroundOperator gop = planner::ground(*op, args);

    verifier::PhaseMdp phase = verifier::phase_mdp(inst, entries, gop);
    abstraction::AbstractionSchema schema =
        abstraction::relevant_closure(pipe.domain, step.predicate);
    Substitution grounding;
    if (schema.params.size() != args.size()) {
      throw std::logic_error("schema arity mismatch for " + step.str());
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      grounding.bind(schema.params[i], Term::constant(args[i]));
    }

    verifier::EquivalenceReport eq =
        verifier::check_value_equivalence(phase.mdp, schema, grounding, tol);
    result.report += "phase " + step.str() +
                     " states=" + std::to_string(phase.mdp.size()) + "\n";
    result.report += eq.str(phase.mdp);
    result.pass = result.pass && eq.pass;

    if (phase.exit_frontier.empty()) {
      result.report += "phase " + step.str() + " has no exit states\n";
      result.pass = false;
      break;
    }
    entries = phase.exit_frontier;
  }
  result.report += result.pass ? "verify result=pass\n" : "verify result=fail\n";
  return result;
}

}  // namespace reprel::experiment
