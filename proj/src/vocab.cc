#include "amrgen/vocab.h"

#include <algorithm>
#include <utility>

namespace amrgen {

Vocab::Vocab() {
  add("<unk>");
  add("<s>");
  add("</s>");
}

Vocab Vocab::build(const std::map<std::string, std::size_t>& counts, std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [tok, n] : items)
    if (n >= min_count) v.add(tok);
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const auto& t : tokens) v.add(t);
  return v;
}

std::size_t Vocab::add(const std::string& token) {
  const auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  tokens_.push_back(token);
  index_.emplace(token, tokens_.size() - 1);
  return tokens_.size() - 1;
}

std::size_t Vocab::id(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::ids(const std::vector<std::string>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

}  // namespace amrgen
