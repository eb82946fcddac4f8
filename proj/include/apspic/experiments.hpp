#pragma once

// Experiment configuration, shipped presets, the single-particle benchmark
// runner and the diocotron PIC runner.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "apspic/diagnostics.hpp"
#include "apspic/pic_engine.hpp"
#include "apspic/poisson.hpp"

namespace apspic {

enum class Study { trajectory, expectation, weak_order };
enum class GcModel { r0_euler, r0_si2, r_euler };
enum class V0Mode { fixed, order_epsilon };

/// Single-particle runs with E(x) = -x and b(x) = 1 + eps sin|x|.
struct BenchmarkConfig {
  std::string name = "custom";
  Study study = Study::trajectory;
  Scheme scheme = Scheme::apsi1;
  std::vector<double> eps_list;
  std::vector<double> dt_list;
  double T = 0;
  double sigma = 1;
  double tau = 1;
  Vec2d x0{0.3, 0.2};
  Vec2d v0{-0.7, 0.08};
  V0Mode v0_mode = V0Mode::fixed;
  int n_paths = 1;
  GcModel gc_model = GcModel::r0_euler;
  std::uint64_t seed = 1;
  int reference_refinement = 4;  // weak order: reference dt = min(dt_list) / this

  void validate() const;
};

struct DiocotronConfig {
  std::string name = "custom";
  DiocotronInit init;
  std::size_t n_particles = 1'000'000;
  Eigen::Index nx = 129;
  Eigen::Index ny = 129;
  std::array<double, 4> domain{-8, 8, -8, 8};
  double eps = 1e-2;
  double sigma = 1;
  double tau = 1;
  double dt = 0.05;
  double T = 20;
  double b0 = 1;
  double charge_scale = 1;  // multiplies every particle weight; 0 gives a zero-charge run
  std::vector<double> snapshot_times;
  Scheme scheme = Scheme::apsi1;
  PoissonConfig poisson;
  std::uint64_t seed = 1;

  void validate() const;
  Grid2D grid() const { return Grid2D(domain[0], domain[1], domain[2], domain[3], nx, ny); }
};

using ExperimentConfig = std::variant<BenchmarkConfig, DiocotronConfig>;

/// Parse and validate a JSON config. Unknown keys are rejected; parse errors
/// report line and column.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

nlohmann::json to_json(const BenchmarkConfig& cfg);
nlohmann::json to_json(const DiocotronConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ExperimentConfig preset(const std::string& name);

std::string to_string(Scheme s);
std::string to_string(Study s);
std::string to_string(GcModel g);

struct ErrorRow {
  double eps = 0;
  double dt = 0;
  int n_paths = 0;
  Vec2d error = Vec2d::Zero();
  Vec2d standard_error = Vec2d::Zero();
  double max_abs_xi = 0;
};

struct SlopeRow {
  std::string axis;   // "eps" or "dt"
  double fixed = 0;   // the dt (axis eps) or eps (axis dt) held constant
  int component = 0;  // 1 or 2
  std::optional<SlopeFit> fit;
  std::string status;  // "ok" or the diagnostic message
};

struct BenchmarkResult {
  std::vector<ErrorRow> rows;
  std::vector<SlopeRow> slopes;

  /// Slope row for (axis, fixed value, component); nullptr if absent.
  const SlopeRow* slope(const std::string& axis, double fixed, int component) const;
};

/// Runs the configured study; writes errors.csv, slopes.csv and manifest.json
/// into `out_dir` when it is non-empty.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const std::filesystem::path& out_dir = {},
                              int workers = 1);

struct TimeSeriesRow {
  std::size_t step = 0;
  double t = 0;
  double Q = 0;
  double H = 0;
  std::size_t removed = 0;
  std::optional<double> mode_amplitude;  // empty when the diagnostic failed
  std::string mode_status = "ok";
  double exterior_fraction = 0;
  double poisson_residual = 0;
};

struct DiocotronResult {
  std::vector<TimeSeriesRow> series;
  std::vector<std::filesystem::path> snapshots;
  double initial_charge = 0;
};

/// Full PIC run. Appends one time-series row per step (including t = 0 and
/// t = T) and writes a density snapshot at each requested time. On a Poisson
/// failure a manifest with status "failed" is written before rethrowing.
DiocotronResult run_diocotron(const DiocotronConfig& cfg, const std::filesystem::path& out_dir = {},
                              int workers = 1);

// Output formats (see docs/formats.md).
void write_snapshot(const ScalarField& rho, double t, std::size_t step, const std::filesystem::path& bin_path);
ScalarField read_snapshot(const std::filesystem::path& bin_path);
std::string format_double(double v);

/// Library version string recorded in every manifest.
std::string version();

}  // namespace apspic
