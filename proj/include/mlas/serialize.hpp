#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlas/eval.hpp"
#include "mlas/fusion.hpp"
#include "mlas/metric.hpp"

namespace mlas {

/// Checkpoint JSON: design-variant tag, activation, and every tensor under
/// its serialization key with explicit shape. Doubles survive the
/// round-trip bit-exactly.
nlohmann::json params_to_json(const FusionParams& params);
FusionParams params_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const FusionParams& params,
                     const nlohmann::json& config_echo);
FusionParams load_checkpoint(const std::filesystem::path& path,
                             nlohmann::json* config_echo = nullptr);

/// Embeddings as JSON lines with a leading header record.
void write_embeddings(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, Embedding>>& embeddings,
                      const nlohmann::json& config_echo);
std::vector<std::pair<std::string, Embedding>> load_embeddings(
    const std::filesystem::path& path);

/// Line-delimited epoch,train_loss,val_loss with the config and stop
/// reason in leading comments.
void write_train_report(const std::filesystem::path& path, const TrainReport& report,
                        const nlohmann::json& config_echo);

void write_eval_report(const std::filesystem::path& path, const EvalReport& report);

/// Ground-truth files are id,group lines; groups map to cluster indices
/// in sorted order of their names.
Partition load_truth(const std::filesystem::path& path);
void write_truth(const std::filesystem::path& path, const Partition& truth,
                 const std::string& comment = "");

} // namespace mlas
