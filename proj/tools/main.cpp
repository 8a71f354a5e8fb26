#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "resilience/config.hpp"
#include "resilience/error.hpp"
#include "resilience/pipeline.hpp"
#include "resilience/report.hpp"
#include "resilience/synth_oracle.hpp"

namespace {

using resilience::Error;
using resilience::ErrorCode;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ArtifactMismatch:
    case ErrorCode::IoFailure:
      return kExitValidation;
    default:
      return kExitData;
  }
}

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> fb_mode;
  std::optional<unsigned> threads;
  bool force = false;
};

resilience::RunConfig build_config(const Options& o) {
  resilience::RunConfig config;
  if (o.config) config = resilience::load_config(*o.config);
  if (o.data) config.inputs = resilience::InputPaths::in_directory(*o.data);
  if (o.out) config.output_dir = *o.out;
  if (o.seed) config.mfpca.seed = *o.seed;
  if (o.fb_mode) config.fb_mode = resilience::parse_fb_mode(*o.fb_mode);
  if (o.threads) config.threads = *o.threads;
  resilience::validate(config);
  return config;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--data", o.data, "Directory holding the five input CSVs (overrides config inputs)");
  cmd->add_option("--out", o.out, "Output directory (overrides config)");
  cmd->add_option("--seed", o.seed, "Seed for the KP noise draw");
  cmd->add_option("--fb-mode", o.fb_mode, "FB loadings: estimate or paper")->check(CLI::IsMember({"estimate", "paper"}));
  cmd->add_option("--threads", o.threads, "Worker threads for the discount-rate solver")->check(CLI::PositiveNumber);
  cmd->add_flag("--force", o.force, "Accept upstream artifacts produced under a different config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Firm resilience indexes, implied discount rates and group diagnostics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", resilience::app::kVersion);

  Options options;
  struct StageCommand {
    const char* name;
    const char* help;
    std::optional<resilience::app::Stage> stage;
  };
  const StageCommand stages[] = {
      {"screen", "Two-step PCA screening of the ratio panel", resilience::app::Stage::Screen},
      {"fb-index", "FB loadings and the monthly FB series", resilience::app::Stage::FbIndex},
      {"cf-index", "Functional PCA composite of KP and FB", resilience::app::Stage::CfIndex},
      {"discount-rate", "Implied discount rates per firm-month", resilience::app::Stage::DiscountRate},
      {"diagnose", "Group comparisons and the report bundle", resilience::app::Stage::Diagnose},
      {"pipeline", "All stages in order", std::nullopt},
  };
  std::optional<resilience::app::Stage> chosen;
  bool run_all = false;
  for (const auto& s : stages) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, options);
    cmd->callback([&chosen, &run_all, s] {
      chosen = s.stage;
      run_all = !s.stage.has_value();
    });
  }

  std::string synth_out;
  std::uint64_t synth_seed = 20200311;
  std::size_t synth_firms = 1000;
  std::size_t synth_months = 108;
  double synth_missing = 0.01;
  bool synth_heavy = false;
  bool synth_iid = false;
  bool generate = false;
  CLI::App* gen = app.add_subcommand("gen-synthetic", "Write a seeded synthetic dataset and truth.json");
  gen->add_option("--out", synth_out, "Output directory")->required();
  gen->add_option("--seed", synth_seed, "Generator seed");
  gen->add_option("--firms", synth_firms, "Number of firms")->check(CLI::Range(5, 1000000));
  gen->add_option("--months", synth_months, "Months from 2013-01")->check(CLI::Range(1, 600));
  gen->add_option("--missing", synth_missing, "Share of ratio cells left missing")->check(CLI::Range(0.0, 0.99));
  gen->add_flag("--heavy-tail", synth_heavy, "Student-t monthly noise");
  gen->add_flag("--iid", synth_iid, "Plain draws instead of moment-matched leader correlations");
  gen->callback([&generate] { generate = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (generate) {
      resilience::synth::DatasetSpec spec;
      spec.panel.seed = synth_seed;
      spec.panel.n_firms = synth_firms;
      spec.panel.n_months = synth_months;
      spec.panel.missing_share = synth_missing;
      spec.panel.heavy_tail = synth_heavy;
      spec.panel.moment_match = !synth_iid;
      const auto data = resilience::synth::generate_dataset(spec);
      const std::filesystem::path dir = synth_out;
      resilience::synth::write_dataset(data, dir);
      nlohmann::json config;
      config["inputs"] = {{"ratios", "ratios.csv"},
                          {"affected", "affected.csv"},
                          {"forecasts", "forecasts.csv"},
                          {"fundamentals", "fundamentals.csv"},
                          {"prices", "prices.csv"}};
      config["mfpca"] = {{"seed", synth_seed}};
      resilience::write_file(dir / "config.json", resilience::dump_json(config));
      std::cerr << "gen-synthetic: " << synth_firms << " firms x " << synth_months << " months written to "
                << dir.string() << "\n";
      return kExitOk;
    }
    resilience::app::Workspace workspace(build_config(options), options.force);
    if (run_all) {
      workspace.run_pipeline();
    } else {
      workspace.run(*chosen);
    }
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
