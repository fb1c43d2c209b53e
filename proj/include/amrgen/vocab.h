#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace amrgen {

// Token <-> id table. Ids 0-2 are reserved for <unk>, <s> and </s>.
class Vocab {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::size_t kBos = 1;
  static constexpr std::size_t kEos = 2;

  Vocab();

  // Tokens with count >= min_count, by descending count then lexicographically.
  static Vocab build(const std::map<std::string, std::size_t>& counts, std::size_t min_count);
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  std::size_t add(const std::string& token);
  std::size_t id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<std::size_t> ids(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace amrgen
