#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mag/scenario.hpp"

namespace mag {

struct OutputFile {
  std::string name;
  std::string content;
};

// In-memory artifact set; the manifest is always the last file.
struct Bundle {
  std::vector<OutputFile> files;
  const OutputFile* find(std::string_view name) const;
};

// `overrides` lists fields set from the command line; they are echoed into the manifest.
Bundle run_experiment(const Scenario& s, const std::vector<std::string>& overrides = {});

// Manifest-only bundle describing an error.
Bundle failure_bundle(const Scenario* s, const std::string& error, const std::vector<std::string>& overrides = {});

std::vector<std::filesystem::path> write_outputs(const Bundle& b, const std::filesystem::path& out_dir);

// Header "theta,z_1,..." or "t,...", 17 significant digits, '\n' line ends.
std::string trajectory_csv(const Trajectory& traj);
Trajectory parse_trajectory_csv(const std::string& text);

std::string sha256_hex(std::string_view data);

}  // namespace mag
