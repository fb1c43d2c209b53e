#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace amrgen {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// SHA-1 of "blob <size>\0<content>", as git hash-object prints it.
std::string git_blob_sha1(std::string_view content);

// {path, sha1} for a file, or for every regular file under a directory (sorted).
nlohmann::json hash_inputs(const std::vector<std::filesystem::path>& paths);

// {command, config, seed, inputs, version}; no timestamps, so reruns match.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config,
                             unsigned long long seed,
                             const std::vector<std::filesystem::path>& inputs);

// Entry point behind the amrgen executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace amrgen
