#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reprel/abstraction.hpp"
#include "reprel/agents.hpp"
#include "reprel/dfoci.hpp"
#include "reprel/errors.hpp"
#include "reprel/experiment.hpp"
#include "reprel/planner.hpp"
#include "reprel/taxi.hpp"

namespace {

using namespace reprel;

// Exit codes: 0 success, 1 parse/IO/usage failure, 2 unknown sub-task,
// 3 verification check failure.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnknownSubtask = 2;
constexpr int kExitVerifyFailed = 3;

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::istringstream list(text);
  while (std::getline(list, item, ',')) seeds.push_back(std::stoull(item));
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

int cmd_abstract(const std::string& dfoci_path, const std::string& subtask,
                 int depth) {
  dfoci::DomainDecl decl = dfoci::load_domain(dfoci_path);
  if (!decl.subtasks.count(subtask)) {
    std::cerr << "unknown subtask: " << subtask << "\n";
    return kExitUnknownSubtask;
  }
  std::cout << abstraction::relevant_closure(decl, subtask, depth).str();
  return kExitOk;
}

int cmd_plan(const std::string& ops_path, const std::string& instance_path,
             std::uint64_t seed) {
  auto operators = planner::load_operators(ops_path);
  taxi::Instance inst = taxi::load_instance(instance_path);
  State start = taxi::reset(inst, seed);
  auto plan = planner::make_plan(taxi::planning_state(start),
                                 taxi::planning_goal(inst), operators,
                                 taxi::planning_objects(inst));
  if (!plan) {
    std::cerr << "no plan found\n";
    return kExitError;
  }
  std::cout << plan->str();
  return kExitOk;
}

int cmd_train(const std::string& manifest_path, const std::string& out_override,
              const std::string& seeds_override, bool require_load) {
  experiment::Manifest manifest = experiment::load_manifest(manifest_path);
  if (!out_override.empty()) manifest.out_dir = out_override;
  if (require_load && manifest.load_dir.empty()) {
    std::cerr << "transfer requires load_dir in the manifest\n";
    return kExitError;
  }
  std::vector<std::string> csvs;
  if (!seeds_override.empty()) {
    agents::TrainConfig cfg = agents::load_train_config(manifest.config_path);
    cfg.seeds = parse_seed_list(seeds_override);
    csvs = experiment::run_training(manifest, cfg, true);
  } else {
    csvs = experiment::run_training(manifest);
  }
  for (const std::string& path : csvs) std::cout << path << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& manifest_path, double tol_override) {
  experiment::Manifest manifest = experiment::load_manifest(manifest_path);
  double tol = tol_override > 0.0 ? tol_override : manifest.tol;
  experiment::VerificationResult result =
      experiment::run_verification(manifest, tol);
  std::cout << result.report;
  return result.pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reprel: plan, abstract, and train options over relational MDPs"};
  app.require_subcommand(1);

  std::string dfoci_path, subtask;
  int depth = abstraction::kFixpoint;
  CLI::App* abstract_cmd =
      app.add_subcommand("abstract", "derive a sub-task abstraction schema");
  abstract_cmd->add_option("dfoci", dfoci_path, "D-FOCI file")->required();
  abstract_cmd->add_option("subtask", subtask, "sub-task name")->required();
  abstract_cmd->add_option("--depth", depth, "closure sweeps (-1 = fixpoint)");

  std::string ops_path, instance_path;
  std::uint64_t seed = 0;
  CLI::App* plan_cmd = app.add_subcommand("plan", "plan an instance's goal");
  plan_cmd->add_option("operators", ops_path, "operator file")->required();
  plan_cmd->add_option("instance", instance_path, "instance file")->required();
  plan_cmd->add_option("--seed", seed, "placement seed");

  std::string train_manifest, out_override, seeds_override;
  CLI::App* train_cmd = app.add_subcommand("train", "train manifest variants");
  train_cmd->add_option("manifest", train_manifest, "experiment manifest")->required();
  train_cmd->add_option("--out", out_override, "output directory override");
  train_cmd->add_option("--seeds", seeds_override, "comma-separated seed override");

  std::string transfer_manifest, transfer_out, transfer_seeds;
  CLI::App* transfer_cmd =
      app.add_subcommand("transfer", "train with tables loaded from load_dir");
  transfer_cmd->add_option("manifest", transfer_manifest, "experiment manifest")
      ->required();
  transfer_cmd->add_option("--out", transfer_out, "output directory override");
  transfer_cmd->add_option("--seeds", transfer_seeds, "comma-separated seed override");

  std::string verify_manifest;
  double tol_override = 0.0;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "check factorization and value equivalence");
  verify_cmd->add_option("manifest", verify_manifest, "experiment manifest")->required();
  verify_cmd->add_option("--tol", tol_override, "equivalence tolerance override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*abstract_cmd) return cmd_abstract(dfoci_path, subtask, depth);
    if (*plan_cmd) return cmd_plan(ops_path, instance_path, seed);
    if (*train_cmd) return cmd_train(train_manifest, out_override, seeds_override, false);
    if (*transfer_cmd) return cmd_train(transfer_manifest, transfer_out, transfer_seeds, true);
    if (*verify_cmd) return cmd_verify(verify_manifest, tol_override);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
