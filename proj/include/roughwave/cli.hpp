#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughwave/verify.hpp"

namespace roughwave {

enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_config_error = 2, exit_compute_error = 3 };

struct ExperimentConfig {
    int schema_version = 1;
    double half_width = 1.0;
    std::size_t resolution = 64;
    nlohmann::json kernel = {{"preset", "cos"}};
    nlohmann::json corpus = nlohmann::json::object();  // merged into every check's corpus
    std::vector<std::pair<std::string, nlohmann::json>> checks;  // in config order
    std::filesystem::path output_dir = "roughwave-out";
    bool plots = true;
};

// Throws ParseError; JSON syntax errors carry line and column.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    bool no_plots = false;
};

// Writes per-check reports, summary.json and metadata.json.
int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

std::string describe();

// Re-renders SVG plots from the report JSON files in dir.
int rerender_reports(const std::filesystem::path& dir, std::ostream& log);

int cli_main(int argc, char** argv);

}  // namespace roughwave
