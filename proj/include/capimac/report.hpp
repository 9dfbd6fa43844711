#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "capimac/config.hpp"
#include "capimac/pipeline.hpp"

namespace capimac {

/// Column order of results.csv.
inline constexpr const char* kResultsHeader =
    "dataset,align_rate,missing_rate,seed,ipt,acc,nmi,ari,f1,"
    "corrupt_ms,anchor_ms,train_ms,align_ms,cluster_ms";

/// Records sorted by (align_rate, seed, ipt).
std::vector<RunRecord> sorted_records(std::vector<RunRecord> records);

std::string results_csv(const std::vector<RunRecord>& records);
std::string results_json(const std::vector<RunRecord>& records, const ExperimentConfig& config);

/// Writes results.csv and results.json into `dir`.
void emit_report(const std::vector<RunRecord>& records, const ExperimentConfig& config,
                 const std::filesystem::path& dir);

/// Training log as `epoch,loss` lines.
void write_training_log(const std::vector<double>& losses, const std::filesystem::path& path);

}  // namespace capimac
