#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "spectra/model.hpp"
#include "spectra/probability.hpp"
#include "spectra/structure.hpp"

namespace spectra {

enum class ExperimentKind {
  SminTail,
  CorankCensus,
  ZeroProb,
  PartitionCheck,
  ExpansionAudit,
  BoundsAudit,
  T23Anticoncentration,
  NetAudit,
  DistanceDiagnostic,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& name);

// Logarithmic grid over [1e-14, 1], 29 points.
std::vector<double> default_t_grid();

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::ZeroProb;
  ModelParams model;
  ClassParams class_params = ClassParams::defaults(1);
  int trials = 1000;
  int workers = 1;
  std::vector<double> t_grid;  // tail experiments; filled with the default when empty
  std::string output_path;
  int checkpoint_every = 0;  // 0 = no checkpointing

  void validate() const;
  // Flat key=value text of the result-determining fields; workers, output
  // path and checkpoint cadence are execution details and excluded, so runs
  // that must agree byte-for-byte hash identically.
  std::string canonical() const;
  std::uint64_t hash() const;
};

// Flat key=value config text (see docs/config.md). Unknown keys throw.
ExperimentConfig parse_config_text(const std::string& text);

struct StatRecord {
  std::string name;
  double empirical = 0;
  double stderr_ = 0;
  double prediction = 0;
  double bound = 0;
  double tolerance = 0;
  bool pass = false;
};

struct TrialRecord {
  std::uint64_t hash = 0;  // content hash of the sampled matrix; 0 if no matrix
  double v[6] = {0, 0, 0, 0, 0, 0};
};

struct RunResult {
  ExperimentConfig config;
  std::vector<StatRecord> stats;
  std::uint64_t stream_lo = 0, stream_hi = 0;  // stream ids consumed: [lo, hi)
  std::uint64_t sample_digest = 0;  // FNV-1a over per-trial hashes in index order
  double wall_clock_seconds = 0;    // not part of the serialized artifact

  bool all_pass() const;
};

// Single-trial kernel and order-independent aggregation (experiments.cpp).
TrialRecord run_trial(const ExperimentConfig& config, int trial_index);
std::vector<StatRecord> aggregate(const ExperimentConfig& config,
                                  const std::vector<TrialRecord>& records);

// Runs config.trials kernels on config.workers threads; records are keyed by
// trial index so the result is identical for any worker count. Writes the
// serialized result to config.output_path when set; maintains a checkpoint at
// output_path + ".ckpt" when checkpoint_every > 0 (and restarts from it when
// one with a matching config exists).
RunResult run(const ExperimentConfig& config);

// Continues an interrupted run from its checkpoint; the final result is
// byte-identical to an uninterrupted run. Idempotent when already complete.
RunResult resume(const std::string& checkpoint_path);

// Canonical serialization (wall clock excluded) and its inverse.
std::string serialize_run_result(const RunResult& result);
RunResult parse_run_result(const std::string& text);

// format in {csv, json, plotdata}; csv = one row per statistic, plotdata =
// (x, y, yerr) rows for the t_grid statistics.
std::string render_report(const RunResult& result, const std::string& format);

// Checkpoint file: "SPCK" magic, version byte, canonical config text,
// length-prefixed trial records, trailing FNV-1a checksum.
void write_checkpoint(const std::string& path, const ExperimentConfig& config,
                      const std::vector<TrialRecord>& done);
std::vector<TrialRecord> read_checkpoint(const std::string& path, ExperimentConfig* config_out);

}  // namespace spectra
