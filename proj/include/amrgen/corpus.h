#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amrgen/amr.h"
#include "amrgen/encoders.h"
#include "amrgen/transforms.h"

namespace amrgen {

// One blank-line separated block of an AMR file.
struct AmrBlock {
  std::string id;
  std::string sentence;  // the ::snt value, may be empty
  std::vector<std::pair<std::string, std::string>> metadata;
  std::string penman;
  std::string source;  // "file:line" of the block's first line
};

// Splits AMR text into blocks. Metadata lines look like "# ::key value ::key value".
// Blocks without an ::id get "<source_name>.<k>" (k counts blocks from 1).
std::vector<AmrBlock> split_amr_blocks(std::string_view text, const std::string& source_name);

// All *.txt / *.amr files under `path` (or the file itself), sorted by name.
// Throws DataError if there is nothing to read.
std::vector<AmrBlock> read_amr_blocks(const std::filesystem::path& path);

std::vector<std::string> tokenize(std::string_view sentence, bool lowercase = true);
std::string join(const std::vector<std::string>& tokens, const std::string& sep = " ");

// The materialized representations of one example.
struct Record {
  std::string id;
  std::string penman;  // anonymized graph
  std::vector<std::string> tokens;
  LeviGraph levi;
  AmrTree tree;
  std::vector<std::string> sentence;   // anonymized, lowercased
  std::vector<std::string> reference;  // original tokens, lowercased
  AnonymizationMap anon_map;
  GraphStats stats;  // of the graph as written, before anonymization
};

struct PreprocessOptions {
  bool anonymize = true;
  std::size_t rare_threshold = 5;
};

struct PreprocessResult {
  std::vector<Record> records;
  std::size_t skipped = 0;
  std::vector<std::string> skip_messages;
};

// Parses, validates and transforms every block. Malformed or invalid blocks
// are skipped and counted. Concept frequencies for rare-word anonymization are
// counted over the parsed blocks themselves unless `frequencies` is given.
PreprocessResult preprocess(const std::vector<AmrBlock>& blocks, const PreprocessOptions& options,
                            const std::unordered_map<std::string, std::size_t>* frequencies =
                                nullptr);

std::string record_to_json(const Record& record);
Record record_from_json(std::string_view line);

void write_records(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::filesystem::path& path);

// Token counts over linearized sources and over target sentences.
std::map<std::string, std::size_t> source_counts(const std::vector<Record>& records);
std::map<std::string, std::size_t> target_counts(const std::vector<Record>& records);

void write_counts(const std::filesystem::path& path,
                  const std::map<std::string, std::size_t>& counts);

// A record ready for a model: the parsed graph and an encoder input for one
// representation (ids are filled in by the model).
struct Example {
  std::string id;
  AmrGraph graph;
  EncoderInput input;
  std::vector<std::string> target;
  std::vector<std::string> reference;
  AnonymizationMap anon_map;
  GraphStats stats;
};

Example make_example(const Record& record, InputRepr repr);
std::vector<Example> make_examples(const std::vector<Record>& records, InputRepr repr);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace amrgen
