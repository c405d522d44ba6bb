#pragma once

#include <string>
#include <vector>

#include "reprel/agents.hpp"

namespace reprel::experiment {

// Parsed experiment manifest. Paths are resolved relative to the manifest
// file's directory at load time.
struct Manifest {
  std::string task;  // output file stem
  std::string dfoci_path;
  std::string ops_path;
  std::string instance_path;
  std::string config_path;
  std::vector<std::string> variants;  // train: subset of reprel/hrl/flat
  std::string out_dir;
  std::string load_dir;     // non-empty: initialize tables from this directory
  bool dest_family = false; // verify: expand destinations over the depots
  double tol = 1e-8;        // verify: value-equivalence tolerance
};

Manifest parse_manifest(const std::string& text, const std::string& filename);
// Parses and checks that every referenced file loads and validates.
Manifest load_manifest(const std::string& path);

// Runs every (variant) training listed in the manifest and writes one CSV
// per variant plus per-seed q-tables into out_dir. Returns the written CSV
// paths. Partial outputs of a failing variant are removed.
std::vector<std::string> run_training(const Manifest& manifest,
                                      const agents::TrainConfig& config_override,
                                      bool has_override);
std::vector<std::string> run_training(const Manifest& manifest);

// CSV body written for a learning curve (also used by tests to compare
// byte-identical reruns).
std::string curve_csv(const agents::TrainResult& result);

struct VerificationResult {
  bool pass = false;
  std::string report;  // line-oriented, one check per block
};

// Factorization + value-equivalence checks per plan phase on the manifest's
// instance (over the destination family when dest_family is set).
VerificationResult run_verification(const Manifest& manifest, double tol);

}  // namespace reprel::experiment
