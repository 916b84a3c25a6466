#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "stratwave/dispersion.hpp"
#include "stratwave/laminar.hpp"

namespace stratwave::cli {

enum ExitCode { ok = 0, condition_failed = 1, config_error = 2, numerical_failure = 3 };

struct Overrides {
  std::optional<double> lambda_hat, ds;
  std::optional<int> nq, np, steps;
  std::optional<std::string> out;
};

struct RunConfig {
  nlohmann::json raw;
  PhysicalParameters params;
  LaminarOptions laminar;
  DispersionOptions dispersion;
  int nq = 64, np = 128;
  int steps = 6;
  double ds = 0.02;
  int ny = 64;
  double amplitude = 0.005;  // fixed-amplitude point for reconstruct
  std::filesystem::path out = "stratwave_out";
};

// Flags beat STRATWAVE_OUT, which beats the "out" key. Throws ConfigError.
RunConfig make_config(const nlohmann::json& j, const Overrides& ov = {});
RunConfig load_config(const std::filesystem::path& file, const Overrides& ov = {});

int cmd_check(const RunConfig& cfg, std::ostream& log);
int cmd_laminar(const RunConfig& cfg, std::ostream& log);
int cmd_dispersion(const RunConfig& cfg, std::ostream& log);
int cmd_branch(const RunConfig& cfg, std::ostream& log);
int cmd_reconstruct(const RunConfig& cfg, std::ostream& log);

// Branch stage on precomputed dispersion data; refuses unless the
// transversality value is positive and no kernel collision was flagged.
int run_branch(const RunConfig& cfg, const LaminarFlow& flow, const DispersionResult& disp,
               std::ostream& log);

// Entry point: parses argv, maps exceptions to exit codes.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace stratwave::cli
