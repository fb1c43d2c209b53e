#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "amrgen/seq2seq.h"

namespace amrgen {

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double dev_bleu = 0.0;
  nlohmann::json train_config = nlohmann::json::object();
};

struct LoadedCheckpoint {
  std::unique_ptr<Seq2Seq> model;
  CheckpointInfo info;
};

// FNV-1a over the compact JSON of the model config (vocabulary sizes included).
std::uint64_t config_hash(const ModelConfig& config);

// Layout: "AMRGCKPT", u64 little-endian manifest length, manifest JSON, then
// each parameter's values as little-endian float64 in manifest order.
std::string serialize_checkpoint(const Seq2Seq& model, const CheckpointInfo& info);
LoadedCheckpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Seq2Seq& model,
                     const CheckpointInfo& info);
// Throws DataError on a corrupt file, a hash mismatch or a parameter whose
// name or shape disagrees with the rebuilt model.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace amrgen
