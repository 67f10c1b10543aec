#pragma once

// Experiment driver: JSON config in, <command>.csv and manifest.txt out.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkac/tolerances.hpp"

namespace qkac::cli {

inline constexpr const char* kVersion = "1.0.0";

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"verify-spec", "steady-states", "evolve-master", "ergodicity", "evolve-qkbe",
                                            "steady-family", "check-conserved", "chaos", "gap"};
    return c;
}

struct RunConfig {
    std::string command;
    std::vector<std::int64_t> energies;
    nlohmann::json spec;  // string name or {"file": path}
    nlohmann::json params = nlohmann::json::object();
    std::string output_dir;
    std::uint64_t seed = 0;
    Tolerances tol;
    std::size_t max_dim = kDefaultMaxDim;
    std::string canonical;  // canonical dump used for the config hash
};

/// Validates the document; `where` names the offending field in ValidationError messages.
RunConfig parse_config(const nlohmann::json& doc, const std::map<std::string, double>& tol_overrides = {},
                       bool force = false, const std::string& output_override = "");

struct RunResult {
    std::string csv_name;
    std::string csv;
    std::vector<std::string> notes;  // human-readable summary lines, echoed to stdout and the manifest
};

RunResult execute(const RunConfig& cfg);

std::uint64_t fnv1a(const std::string& bytes);

/// Writes <command>.csv and manifest.txt atomically (temp file + rename).
void write_outputs(const RunConfig& cfg, const RunResult& result);

/// Full command-line entry point. Returns 0, 1 (validation) or 2 (contract violation).
int main_entry(int argc, const char* const* argv);

}  // namespace qkac::cli
