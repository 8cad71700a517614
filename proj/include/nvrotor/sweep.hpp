#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nvrotor/su11_echo.hpp"
#include "nvrotor/system_model.hpp"

namespace nvrotor {

// ---------------------------------------------------------------------------
// declarative sweeps
// ---------------------------------------------------------------------------

enum class SweepVariable { B0, Tau, NGamma, T2, Omega0, GridB0Omega0 };
enum class SweepScale { Linear, Log };

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
  SweepScale scale = SweepScale::Linear;
};

/// Which tau the revival probability P* samples: the common rephasing time
/// pi/min(freq_beta, freq_gamma), or literally pi/freq_gamma.
enum class PstarTime { SlowMode, Gamma };

struct SweepOptions {
  bool include_beta = true;
  bool allow_unstable_beta = true;  // sweeps flag rows instead of failing
  PstarTime pstar_time = PstarTime::SlowMode;
  std::vector<double> n_gamma_curves;  // one output column per entry (when used)
  std::vector<double> t2_curves;       // seconds
  SweepRange omega0_range;             // second axis of GridB0Omega0
};

struct SweepSpec {
  SystemConfig base;
  ThermalSpec thermal;
  DephasingSpec dephasing;
  SweepVariable variable = SweepVariable::B0;
  SweepRange range;
  std::vector<std::string> columns;
  SweepOptions options;
  std::string label = "custom";
};

struct Table {
  struct Column {
    std::string name;
    std::string unit;
  };
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> provenance;  // emitted as '#' comment lines
};

/// Evaluates the requested columns on the grid. Points that violate validity
/// or raise domain errors are emitted with valid = 0 rather than dropped.
Table run_sweep(const SweepSpec& spec);

/// Grid of the independent variable (inclusive endpoints).
std::vector<double> sweep_grid(const SweepRange& r);

// ---------------------------------------------------------------------------
// figure presets
// ---------------------------------------------------------------------------

enum class FigureId {
  Fig1c, Fig1d, Fig1e,
  Fig2c, Fig2d, Fig2e, Fig2f,
  FigS1, FigS2a, FigS2b, FigS2c, FigS2d,
  FigS3a, FigS3b, FigS3c,
};

std::optional<FigureId> parse_figure_id(const std::string& name);
const char* figure_id_name(FigureId id);
std::vector<FigureId> all_figure_ids();

/// Baseline parameter set used by the figure presets.
SystemConfig reference_system();

/// Sweep spec with the preset parameters baked in; axis ranges not fixed by
/// the source material are chosen to bracket the features of interest and are
/// recorded in the table provenance.
SweepSpec preset(FigureId id);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Byte-stable CSV: '#' provenance lines, one header row "name[unit],...",
/// floats in scientific notation with 9 significant digits, the `valid`
/// flag column as 0/1, ',' separator, '\n' newlines.
std::string render_csv(const Table& t);
void write_table(const Table& t, const std::string& path);
Table read_table(const std::string& path);

} // namespace nvrotor
