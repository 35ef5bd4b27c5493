#pragma once

#include "fgs/energy.hpp"
#include "fgs/exact.hpp"
#include "fgs/samplers.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fgs {

inline constexpr const char* kToolVersion = "0.1.0";

// Declarative experiment description. Every key is optional except "model";
// unknown keys are rejected. "notes" is free-form and ignored.
//
//   {"model": {...}, "kernel": {...}, "kernels": [{...}, ...],
//    "steps": 500000, "seeds": [1, 2, 3], "checkpoints": [...],
//    "alphas": [...], "epsilons": [0.25], "p": 2.0,
//    "burn_in_fraction": 0.1, "initial": [0, 1, ...],
//    "output_dir": "out", "cap": 1000000, "emit_states": false}
//
// Kernel objects: {"name": "pncg"|"gwl"|"rwm"|"mucola"|"hybrid",
//   "alpha", "p", "adjusted", "scan": "random"|"systematic",
//   "window", "threshold", "max_pncg_steps"}.
struct ExperimentConfig {
  nlohmann::json model_doc;
  std::shared_ptr<const EnergyModel> model;
  KernelSpec kernel;
  std::vector<KernelSpec> kernels;
  long long steps = 500000;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<long long> checkpoints;  // empty: logarithmic grid
  std::vector<double> alphas{2.0, 1.0, 0.5, 0.1, 0.01};
  std::vector<double> epsilons{0.25};
  double p = 2.0;
  double burn_in_fraction = 0.1;
  std::optional<std::vector<int>> initial;
  std::string output_dir = "out";
  long long cap = kDefaultStateCap;
  bool emit_states = false;
};

ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
KernelSpec kernel_from_json(const nlohmann::json& doc);

// Kernels and step sizes of the toy convergence experiment: p-NCG and GwL at
// alpha = 1.0, MUCOLA at 1.5, all but MUCOLA MH-corrected.
std::vector<KernelSpec> toy_tv_kernels();
// Columns of the limiting-distribution sweep.
std::vector<KernelSpec> toy_limit_kernels();

// RNG stream for (seed, job); independent across jobs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

struct ToyLimitRow {
  std::string kernel;
  double alpha = 0.0;
  double tv = 0.0;
};

struct ToyTvRow {
  std::string kernel;
  std::uint64_t seed = 0;
  long long step = 0;
  double tv = 0.0;
};

struct EnergyRow {
  std::string kernel;
  std::uint64_t seed = 0;
  double mean_energy = 0.0;
  double se = 0.0;
  double acceptance_rate = 0.0;
  std::optional<long long> switch_step;
};

struct ToyTvResult {
  std::vector<ToyTvRow> curve;
  std::vector<EnergyRow> energy;
};

// Each command is a pure function of the config; files land in
// cfg.output_dir, each written to a ".partial" sibling and renamed when
// complete.
std::vector<ToyLimitRow> cmd_toy_limit(const ExperimentConfig& cfg);
ToyTvResult cmd_toy_tv(const ExperimentConfig& cfg);
std::vector<MixingReport> cmd_mixing(const ExperimentConfig& cfg);
std::vector<EnergyRow> cmd_chain(const ExperimentConfig& cfg);

// Writes `content` to `path` via a ".partial" file and rename.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace fgs
