// Copyright 2026 The murag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: murag_cli <run|sweep|attack|tau-study|gen-workload>
//   [--config PATH] [--seed U64] [--out DIR] [--noiseless]
// Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "murag/experiment.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool noiseless = false;
};

void AddCommonFlags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Root seed (overrides the config)");
  cmd->add_option("--out", flags.out, "Output directory (overrides the config)");
  cmd->add_flag("--noiseless", flags.noiseless,
                "Zero all privacy noise. For testing only; output is not private");
}

murag::ExperimentConfig Resolve(const Flags& flags) {
  murag::ExperimentConfig cfg =
      flags.config.empty() ? murag::ParseExperimentConfigText("{}")
                           : murag::LoadExperimentConfig(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  cfg.noiseless = flags.noiseless;
  if (cfg.noiseless) {
    std::fprintf(stderr,
                 "**************************************************************\n"
                 "WARNING: --noiseless is set. No privacy noise is added and every\n"
                 "privacy claim in this run's output is VOID. Testing use only.\n"
                 "**************************************************************\n");
  }
  return cfg;
}

void PrintReports(const std::vector<murag::RunReport>& reports) {
  for (const auto& r : reports) {
    std::fprintf(stderr, "%s seed=%llu eps=%s accuracy=%s precision=%s wall=%.3fs\n",
                 r.method.c_str(), static_cast<unsigned long long>(r.seed),
                 r.claim.unbounded ? "inf" : murag::FormatNumber(r.claim.epsilon).c_str(),
                 murag::FormatNumber(r.match_accuracy).c_str(),
                 murag::FormatNumber(r.retrieval_precision).c_str(), r.wall_clock_seconds);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-query private retrieval-augmented generation experiments"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* run = app.add_subcommand("run", "Run the configured method");
  CLI::App* sweep = app.add_subcommand("sweep", "Hyperparameter grid at fixed total budget");
  CLI::App* attack = app.add_subcommand("attack", "Membership inference by interrogation");
  CLI::App* tau = app.add_subcommand("tau-study", "Adaptive threshold error per eps_thr");
  CLI::App* gen = app.add_subcommand("gen-workload", "Write the synthetic corpus and queries");
  for (CLI::App* cmd : {run, sweep, attack, tau, gen}) AddCommonFlags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    murag::ExperimentConfig cfg = Resolve(flags);
    if (*run) {
      PrintReports(murag::RunExperiment(cfg));
    } else if (*sweep) {
      murag::RunSweep(cfg);
    } else if (*attack) {
      for (const auto& r : murag::RunAttackExperiment(cfg)) {
        std::fprintf(stderr, "auc=%s\n", murag::FormatNumber(r.roc.auc).c_str());
      }
    } else if (*tau) {
      for (const auto& row : murag::RunTauStudy(cfg)) {
        std::fprintf(stderr, "eps_thr=%s mean_abs_error=%s\n",
                     murag::FormatNumber(row.eps_thr).c_str(),
                     murag::FormatNumber(row.mean_tau_abs_error).c_str());
      }
    } else if (*gen) {
      murag::GenerateWorkloadFiles(cfg);
    }
  } catch (const murag::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
