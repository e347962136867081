#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "opg/config.hpp"
#include "opg/dataset.hpp"
#include "opg/experiments.hpp"

namespace opg {

// Header: exactly "grader_id,item_id,score". Each grader's induced ordinal
// ranking is attached. `source` names the input in error messages.
Dataset parse_cardinal_csv_text(const std::string& text, const std::string& source = "<csv>");
Dataset parse_cardinal_csv(const std::string& path);
std::string to_cardinal_csv(const Dataset& data);

// {"items": [...], "graders": [{"id": ..., "ranking": [[best ids], ...]}],
//  "lazy": [...] (optional)}
Dataset parse_ordinal_json_text(const std::string& text, const std::string& source = "<json>");
Dataset parse_ordinal_json(const std::string& path);
std::string to_ordinal_json(const Dataset& data);

Dataset read_dataset(const std::string& path, const std::string& format);

// Rounds to 12 significant digits.
double round_sig12(double v);

// 100 (n - midrank) / (n - 1); 100 for a single item.
std::map<ItemId, double> percentile_ranks(const WeakRanking& ranking);

nlohmann::json config_to_json(const ModelConfig& cfg);

// Estimate file: model, seed, config echo, ranking, scores, percentile,
// reliabilities, metadata.
std::string estimate_to_json(const Estimate& est, const std::string& model, std::uint64_t seed,
                             const nlohmann::json& config);

// Reads "ranking" and, when present, "scores" and "reliabilities" from an
// estimate or truth file.
Estimate parse_ranking_file(const std::string& path);
Estimate parse_ranking_json_text(const std::string& text, const std::string& source = "<json>");

nlohmann::json ranking_to_json(const WeakRanking& ranking);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

std::string read_file(const std::string& path);
// Writes via a temporary sibling file and rename.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace opg
