#pragma once

#include <string>

#include <json.hpp>

#include "pipeline/analysis.hpp"
#include "pipeline/config.hpp"

namespace cea::pipeline {

inline constexpr const char* kEngineVersion = "0.1.0";

struct CommandResult {
  std::string command;
  nlohmann::json summary;
  std::string text;  // human-readable rendering, printed by the CLI
};

// Commands: ingest, missing, impute, analyze, ceac, mnar, simulate, report.
// Every command writes its artifacts under config.output_dir plus a
// manifest.json with config/input fingerprints, timings and artifact
// fingerprints. All analysis outputs are byte-deterministic for a given
// (config, inputs, seed); wall-clock information lives only in the manifest.
CommandResult run_command(const RunConfig& config, const std::string& command);

}  // namespace cea::pipeline
