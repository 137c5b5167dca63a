#ifndef CFMIMO_SWEEP_HPP
#define CFMIMO_SWEEP_HPP

#include "cfmimo/ao.hpp"
#include "cfmimo/config.hpp"

namespace cfm {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One CSV row: system state observed at a pipeline checkpoint.
struct RunRecord {
  double sweep_value = 0.0;  // 0 for single runs
  int realization = 0;
  std::string stage;  // init | after-power | after-position | after-bits | converged
  int outer_iter = 0;
  double sum_se = 0.0;  // bit/s/Hz
  double p_tot = 0.0;   // W
  double ee = 0.0;      // bit/J
  Vec eta;
  Vec u_x, u_y;
  Vec bits;
};

struct SweepResult {
  std::vector<RunRecord> records;
};

/// Deterministic per-realization seed; independent of sweep value and thread
/// count so sweep variants share common random drops.
std::uint64_t realization_seed(std::uint64_t base_seed, int realization);

/// Full pipeline for one drop: scenario, channels, combiners, AO per config modes.
std::vector<RunRecord> run_realization(const ExperimentConfig& config, double sweep_value,
                                       int realization);

/// Runs every sweep value x realization (sweep section empty: single point,
/// sweep_value 0). Realizations run in parallel across `config.threads`.
SweepResult run_sweep(const ExperimentConfig& config);

/// Writes records.csv, summary.csv and manifest.txt into `out_dir`.
void emit_report(const SweepResult& result, const ExperimentConfig& config,
                 const std::string& out_dir);

void write_records_csv(const std::vector<RunRecord>& records, std::ostream& out);
std::vector<RunRecord> parse_records(std::istream& in);

/// FNV-1a over the canonical config serialization.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace cfm

#endif
