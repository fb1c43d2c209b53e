#include "amrgen/checkpoint.h"

#include <bit>
#include <cstring>

#include "amrgen/corpus.h"
#include "amrgen/errors.h"

namespace amrgen {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "AMRGCKPT";
constexpr std::size_t kMagicSize = 8;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little endian");

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v;
  std::memcpy(&v, in.data() + pos, 8);
  return v;
}

}  // namespace

std::uint64_t config_hash(const ModelConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : to_json(config).dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string serialize_checkpoint(const Seq2Seq& model, const CheckpointInfo& info) {
  json params = json::array();
  std::size_t offset = 0;
  for (const auto& [name, t] : model.params().entries()) {
    params.push_back({{"name", name}, {"shape", {t.rows(), t.cols()}}, {"offset", offset}});
    offset += t.size();
  }
  json manifest = {{"format", 1},
                   {"config", to_json(model.config())},
                   {"config_hash", config_hash(model.config())},
                   {"train_config", info.train_config},
                   {"seed", info.seed},
                   {"epoch", info.epoch},
                   {"dev_bleu", info.dev_bleu},
                   {"source_vocab", model.source_vocab().tokens()},
                   {"target_vocab", model.target_vocab().tokens()},
                   {"parameters", params}};
  const std::string text = manifest.dump();
  std::string out(kMagic, kMagicSize);
  put_u64(out, text.size());
  out += text;
  for (const auto& [name, t] : model.params().entries()) {
    const auto values = t.data();
    out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
  }
  return out;
}

LoadedCheckpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicSize + 8 || bytes.compare(0, kMagicSize, kMagic) != 0)
    throw DataError("not a checkpoint (bad magic)");
  const std::uint64_t len = get_u64(bytes, kMagicSize);
  if (len > bytes.size() - kMagicSize - 8) throw DataError("checkpoint manifest truncated");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(kMagicSize + 8, len));
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  }

  LoadedCheckpoint out;
  try {
    const ModelConfig config = model_config_from_json(manifest.at("config"));
    if (manifest.at("config_hash").get<std::uint64_t>() != config_hash(config))
      throw DataError("checkpoint config hash mismatch");
    Vocab source = Vocab::from_tokens(manifest.at("source_vocab").get<std::vector<std::string>>());
    Vocab target = Vocab::from_tokens(manifest.at("target_vocab").get<std::vector<std::string>>());
    out.info.seed = manifest.at("seed").get<std::uint64_t>();
    out.info.epoch = manifest.at("epoch").get<std::size_t>();
    out.info.dev_bleu = manifest.at("dev_bleu").get<double>();
    out.info.train_config = manifest.value("train_config", json::object());
    out.model = std::make_unique<Seq2Seq>(config, std::move(source), std::move(target), out.info.seed);
    if (config_hash(out.model->config()) != config_hash(config))
      throw DataError("checkpoint vocabulary sizes disagree with its config");

    const auto& entries = out.model->params().entries();
    const json& params = manifest.at("parameters");
    if (params.size() != entries.size())
      throw DataError("checkpoint holds " + std::to_string(params.size()) + " parameters, model has " +
                      std::to_string(entries.size()));
    const std::size_t payload = kMagicSize + 8 + len;
    std::size_t expected = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& [name, t] = entries[k];
      const json& p = params[k];
      const auto shape = p.at("shape").get<std::vector<std::size_t>>();
      if (p.at("name").get<std::string>() != name || shape.size() != 2 || shape[0] != t.rows() ||
          shape[1] != t.cols())
        throw DataError("checkpoint parameter " + p.at("name").get<std::string>() +
                        " does not match model parameter " + name + " " + t.shape_string());
      if (p.at("offset").get<std::size_t>() != expected)
        throw DataError("checkpoint parameter " + name + " has a bad offset");
      expected += t.size();
    }
    if (bytes.size() != payload + expected * sizeof(double))
      throw DataError("checkpoint payload has " + std::to_string(bytes.size() - payload) +
                      " bytes, expected " + std::to_string(expected * sizeof(double)));
    std::size_t pos = payload;
    for (const auto& [name, t] : entries) {
      Tensor dst = t;
      std::memcpy(dst.data().data(), bytes.data() + pos, t.size() * sizeof(double));
      pos += t.size() * sizeof(double);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Seq2Seq& model,
                     const CheckpointInfo& info) {
  write_file(path, serialize_checkpoint(model, info));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace amrgen
