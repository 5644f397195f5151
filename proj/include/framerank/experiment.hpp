#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "framerank/config.hpp"
#include "framerank/corpus.hpp"
#include "framerank/novelty.hpp"
#include "framerank/normative.hpp"
#include "framerank/rank_metrics.hpp"
#include "framerank/scoring.hpp"
#include "framerank/stats.hpp"

namespace framerank {

// Metric columns of the sweep report, in output order.
inline const std::vector<std::string> kSweepMetrics = {
    "auc", "mrr", "ndcg5", "ndcg10", "cal_c", "cal_f", "rep_f", "act"};
inline const std::vector<std::string> kNoveltyMetrics = {"avg_unique", "avg_novel", "avg_kl"};

// Everything measured for one slate set.
struct Evaluation {
  std::vector<RankedSlate> slates;
  RankReport rank;
  NormativeReport normative;
  NoveltyReport novelty;
  std::size_t skipped_impressions = 0;  // empty histories

  // Flat metric values keyed by kSweepMetrics / kNoveltyMetrics names, raw
  // (not scaled).
  std::map<std::string, double> metrics() const;
};

struct CellResult {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Evaluation evaluation;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over seeds
  std::size_t n = 0;
};

struct LambdaSummary {
  double lambda = 0.0;
  std::map<std::string, Summary> metrics;
};

struct SeedStatistics {
  std::uint64_t seed = 0;
  std::optional<CorpusStatistics> stats;
  std::string error;
};

struct SweepReport {
  std::vector<CellResult> cells;  // lambda-major, seeds in config order
  std::vector<LambdaSummary> lambdas;
  std::vector<SeedStatistics> stats;
  bool all_ok() const;
};

// The corpus a seed evaluates on: synthesized (when configured) and then
// reshaped by whichever shapers are enabled, each trained with that seed.
Corpus prepare_corpus(const ExperimentConfig& config, std::uint64_t seed,
                      const Corpus* loaded = nullptr);

// Impressions of the evaluation split that can be scored (non-empty history).
std::vector<Impression> evaluable_impressions(const Corpus& corpus, Split split,
                                              std::size_t* skipped = nullptr);

struct RankSettings {
  double lambda = 0.0;
  bool use_frame = true;
  std::size_t threads = 1;
};

std::vector<RankedSlate> rank_all(const Corpus& corpus,
                                  const std::vector<Impression>& impressions,
                                  const RankSettings& settings);

// Descriptive, normative and novelty metrics of aligned slates.
Evaluation evaluate_slates(const Corpus& corpus, const std::vector<Impression>& impressions,
                           std::vector<RankedSlate> slates, const NormativeConfig& normative,
                           std::size_t threads);

// Ranks and evaluates one lambda on a prepared corpus.
Evaluation run_cell(const Corpus& corpus, const ExperimentConfig& config, double lambda,
                    bool use_frame = true);

// Every (lambda, seed) cell. A failing cell records its error and the sweep
// continues.
SweepReport run_sweep(const ExperimentConfig& config);

Summary summarize(const std::vector<double>& values);

// Lambda with at least one decimal: -1.0, 0.1, 0.25.
std::string format_lambda(double lambda);

// Writes sweep.csv, novelty.csv, stats.json, cells.csv, diagnostics.txt and,
// when `audit`, per-cell dumps under cells/. Throws Error if the directory
// cannot be written.
void emit_reports(const SweepReport& report, const std::filesystem::path& output_dir,
                  bool audit = true);

// Per-impression descriptive dump: impression_id auc mrr ndcg5 ndcg10.
void write_descriptive_dump(std::ostream& out, const RankReport& report);

// Corpus-level statistics document.
std::string stats_json(const std::vector<SeedStatistics>& stats);

}  // namespace framerank
