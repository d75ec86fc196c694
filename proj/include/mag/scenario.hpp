#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mag/actions.hpp"
#include "mag/errors.hpp"
#include "mag/heatwave.hpp"

namespace mag {

enum class ExperimentKind { Minimize, GammaSweep, Sticky, Heatwave, CheckInvariants };
const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

// Plain-text `key = value` file, one entry per line, `#` starts a comment.
// Lists are comma separated; clouds are flattened particle-major with `dim` coordinates each.
struct Scenario {
  std::string name = "unnamed";
  ExperimentKind experiment = ExperimentKind::GammaSweep;
  std::size_t dim = 1;
  std::vector<double> lattice, source, target;
  std::vector<double> velocity;  // sticky only
  Gauge gauge = Gauge::Theta;
  double start = 0, end = 1;
  ActionKind functional = ActionKind::LambdaEps;
  WeightKind weight = WeightKind::Linear;
  EndpointMode endpoint_mode = EndpointMode::Fixed;
  double eps = 0.01;                 // minimize, heatwave
  std::vector<double> schedule = {1, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};  // gamma-sweep
  std::size_t grid = 512;
  double grad_tol = 1e-7;
  std::size_t max_iter = 100000;
  double cluster_tol = 1e-9;
  double endpoint_tol = 1e-9;
  double noise_eta = 0;
  NoiseProfile noise_alpha = NoiseProfile::InvSqrt;
  std::size_t samples = 1;
  std::uint64_t seed = 0;

  bool operator==(const Scenario&) const = default;

  Lattice lattice_points() const;
  Cloud source_cloud() const;
  Cloud target_cloud() const;
  Cloud velocity_cloud() const;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& origin, std::size_t line, std::size_t column, const std::string& what);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

// Throws ParseError for malformed text, ValidationError (naming the field) for bad values or unknown keys.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);
void validate(const Scenario& s);

// Every field, in a fixed order, doubles with 17 significant digits.
std::string to_text(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

}  // namespace mag
