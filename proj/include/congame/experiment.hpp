#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congame/engine.hpp"
#include "congame/quad_game.hpp"
#include "congame/theory.hpp"

namespace congame {

enum class OutputFormat { csv, json, both };

enum class SweepParam { none, beta, alpha, gamma_scale, sigma };

std::string sweep_param_name(SweepParam p);
SweepParam sweep_param_from_name(const std::string& name);

/// Schedule request before horizon resolution. `horizon_sqrt` becomes the
/// constant scale/sqrt(T); `match_gamma` copies the resolved gamma;
/// `alpha_gamma_sq` becomes alpha * gamma^2 (squaring the power-law decay).
struct ScheduleSpec {
  enum class Kind { constant, power_law, horizon_sqrt, match_gamma, alpha_gamma_sq };
  Kind kind = Kind::constant;
  double value = 0;     // constant value / power-law coeff / scale / alpha
  double exponent = 0;  // power_law only
};

struct ExperimentConfig {
  QuadGameParams game;
  NoiseModel noise;
  ScheduleSpec gamma, zeta, eta, beta;
  std::vector<Index> horizons;
  std::uint64_t base_seed = 1;
  Index n_seeds = 1;
  SweepParam sweep = SweepParam::none;
  std::vector<double> sweep_values;  // empty unless sweeping
  std::string out_dir;
  OutputFormat format = OutputFormat::csv;
  bool write_trajectories = true;
  int threads = 0;  // 0 = hardware concurrency
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

/// Schedules for one cell after applying the sweep override `value` (when
/// sweeping beta / alpha / gamma_scale) and the horizon. `sigma_out`
/// reports the cell's noise level (overridden by a sigma sweep).
ScheduleSet resolve_schedules(const ExperimentConfig& cfg, double value, Index horizon,
                              double* sigma_out = nullptr);

struct CellResult {
  double value = 0;  // sweep value (0 when not sweeping)
  Index horizon = 0;
  Index seed_index = 0;
  std::uint64_t seed = 0;
  double terminal_anccvc = 0;
  bool tc_satisfied = false;
  double bound_value = std::numeric_limits<double>::quiet_NaN();
};

struct SlopeRow {
  double value = 0;
  double slope = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  GameConstants constants;
  std::optional<VISolution> vi;
  std::string vi_error;  // nonempty if the dual solve was attempted and failed
  std::vector<CellResult> cells;
  std::vector<SlopeRow> slopes;  // one per sweep value when >= 2 horizons
  std::vector<std::string> files_written;
};

/// Runs every (sweep value, horizon, seed) cell, writes per-cell
/// trajectories plus per-horizon summaries (and slopes across horizons)
/// into cfg.out_dir, and returns everything in memory. Cells run in
/// parallel; all outputs are byte-deterministic in the config.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct SummaryRow {
  std::string sweep_param;
  double value = 0;
  Index horizon = 0;
  double mean_terminal = 0;
  double std_terminal = 0;
  Index n_seeds = 0;
};

/// Re-reads the summary_T*.csv files of a finished experiment directory and
/// aggregates mean/std of the terminal metric per (value, horizon).
std::vector<SummaryRow> summarize_directory(const std::string& dir);

/// Per-step CSV with header t,anccvc,price_r1..price_rR,phi_r1..phi_rR.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_trajectory_json(const std::string& path, const Trajectory& traj);

/// "%.17g" (shortest exact round trip for every double we emit).
std::string fmt_double(double v);

}  // namespace congame
