#pragma once

// Scenario configuration (flat key = value files) and the runner behind the
// command-line tool.
//
// Format: one `key = value` per line, `#` starts a comment, lists are comma
// separated. `schema_version = 1` is mandatory. Keys of the form
// `case.<label>.<key>` override `<key>` for one case of a mismatch_cases run.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rindler/bec_analogue.hpp"
#include "rindler/dynamics.hpp"

namespace rindler::scenario {

inline constexpr int kSchemaVersion = 1;

enum class Kind { equal_acceleration_sweep, mismatch_cases, counter_wedge, bec_design, custom };

class Config {
 public:
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Copy with `case.<label>.<key>` entries promoted to `<key>`.
  Config for_case(const std::string& label) const;

 private:
  std::map<std::string, std::string> values_;
};

/// Throws ConfigError with the line number on malformed input.
Config parse_config(std::istream& in, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Every problem found, without running anything. Empty means runnable.
std::vector<Diagnostic> validate(const Config& config);

struct RunSpec {
  std::string label;
  FrameConfig frame;
  std::vector<AtomSpec> atoms;
  RateOptions rate_options;
  std::vector<bool> initial_excited;
  EvolveOptions evolve;
  CrossPairing pairing = CrossPairing::anomalous;
  bool collective = true;
  int n_max_dense = 4;
};

struct RunSummary {
  std::vector<double> P_final;
  double P_tot_final = 0.0;
  double R_initial = 0.0;
  double R_peak = 0.0;
  double t_peak = 0.0;
  double C_coh_final = 0.0;
  double C_coh_peak = 0.0;
  double C_conc_peak = 0.0;
  double max_inter_wedge_coherence = 0.0;
  int zero_multiplicity = -1;  // -1 when the dense generator was not built
};

struct RunResult {
  RunSpec spec;
  TimeSeries series;
  RunSummary summary;
};

Kind scenario_kind(const Config& config);
std::string to_string(Kind kind);

/// Expands a validated configuration into individual evolutions (none for
/// bec_design without simulate = true).
std::vector<RunSpec> expand(const Config& config);

Eigen::MatrixXcd initial_state(const RunSpec& spec);
Generator make_generator(const RunSpec& spec);
RunResult execute(const RunSpec& spec);

/// t,P_1..P_N,P_tot,R_tot,C_coh,C_conc,trace_err,min_eig with %.17g values.
void write_csv(std::ostream& out, const TimeSeries& series);

struct Outcome {
  std::vector<RunResult> runs;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;  // scenario-level findings, also in summary.txt
};

/// Runs everything, fanning evolutions out over `threads` workers; files are
/// written afterwards in expansion order so output is deterministic.
Outcome run(const Config& config, const std::filesystem::path& out_dir, int threads = 1);

/// Presets shipped with the tool: fig2, fig3, fig4, counter_wedge, bec_design.
std::vector<std::string> preset_names();
std::filesystem::path preset_path(const std::string& name, const std::filesystem::path& preset_dir);

}  // namespace rindler::scenario
