#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/dataio.hpp"
#include "core/metrics.hpp"
#include "core/training.hpp"

namespace puon {

enum class Scenario { kCv, kNewDrug, kFull };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view s);

struct RunConfig {
  std::string dataset_name = "dataset";
  std::filesystem::path association;
  std::filesystem::path drug_sim;
  std::filesystem::path disease_sim;  // optional
  std::filesystem::path drug_ids;     // optional
  std::filesystem::path disease_ids;  // optional
  Scenario scenario = Scenario::kCv;
  TrainConfig train;
  EvalConfig eval;
  std::size_t k_folds = 10;
  std::size_t cv_repeats = 5;
  std::filesystem::path output_dir = "runs";
  std::size_t jobs = 1;
  bool save_checkpoints = false;
  std::filesystem::path checkpoint;  // recommend: reuse instead of training

  void validate() const;
};

// Keys are the JSON config keys (snake_case); values arrive as text and are
// parsed per key. Unknown keys are configuration errors.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
void apply_json(RunConfig& cfg, const nlohmann::json& doc);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);
std::string get_setting(const RunConfig& cfg, std::string_view key);

// 16 hex digits over every setting that can change results (not output_dir
// or jobs).
std::string fingerprint(const RunConfig& cfg);

struct Dataset {
  std::string name;
  AssociationMatrix matrix;
  SimilarityMatrix drug_sim;
  std::optional<SimilarityMatrix> disease_sim;
};

Dataset load_dataset(const RunConfig& cfg);

struct FoldRecord {
  std::string dataset;
  Scenario scenario = Scenario::kCv;
  std::uint64_t seed = 0;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  MetricsReport metrics;
  std::size_t epochs_run = 0;
  double final_risk = 0.0;
};

struct RunSummary {
  std::string fingerprint;
  std::filesystem::path report_dir;
  std::vector<FoldRecord> records;
};

// Trains and evaluates one split; `log` gets the per-epoch risk lines.
FoldRecord run_split(const RunConfig& cfg, const Dataset& data,
                     const FoldSplit& split, std::uint64_t split_seed,
                     std::ostream* log, ModelParams* trained = nullptr);

// cv_repeats x k_folds cycles with split seeds seed, seed+1, ...
RunSummary run_cv(const RunConfig& cfg, const Dataset& data);
// One new-drug split, trained once per seed in seed .. seed+cv_repeats-1.
RunSummary run_newdrug(const RunConfig& cfg, const Dataset& data);

// Model trained on every validated association.
ModelParams train_full(const RunConfig& cfg, const Dataset& data,
                       std::ostream* log = nullptr);

struct Recommendation {
  std::string drug_id;
  std::size_t drug = 0;
  std::size_t rank = 0;  // 1-based
  std::size_t disease = 0;
  std::string disease_id;
  double score = 0.0;
};

// Top-k unknown diseases per drug, highest score first, ties to the lower
// disease index.
std::vector<Recommendation> recommend(const ModelParams& params,
                                      const Dataset& data,
                                      const std::vector<std::string>& drug_ids,
                                      std::size_t top_k);

void write_fold_report(const std::vector<FoldRecord>& records,
                       const std::string& fingerprint,
                       const std::vector<std::size_t>& hr_ks,
                       const std::filesystem::path& path);
// Config, every fold record, and per-dataset, per-scenario means.
nlohmann::json summarize(const std::vector<FoldRecord>& records,
                         const RunConfig& cfg);

}  // namespace puon
