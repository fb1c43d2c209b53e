#include "amrgen/penman.h"

#include <functional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "amrgen/errors.h"

namespace amrgen {
namespace {

enum class LexKind { LParen, RParen, Slash, Role, String, Symbol, End };

struct Token {
  LexKind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_delimiter(char c) {
  return c == '(' || c == ')' || c == '"' || c == '/' || c == ' ' || c == '\t' || c == '\n' ||
         c == '\r';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t line = 1, column = 1, i = 0;
  bool line_start = true;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
        line_start = true;
      } else {
        ++column;
        if (text[i] != ' ' && text[i] != '\t' && text[i] != '\r') line_start = false;
      }
    }
  };

  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' && line_start) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    const std::size_t tl = line, tc = column;
    if (c == '(') {
      tokens.push_back({LexKind::LParen, "(", tl, tc});
      advance(1);
    } else if (c == ')') {
      tokens.push_back({LexKind::RParen, ")", tl, tc});
      advance(1);
    } else if (c == '/') {
      tokens.push_back({LexKind::Slash, "/", tl, tc});
      advance(1);
    } else if (c == '"') {
      std::string value;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          value.push_back(text[i + 1]);
          advance(2);
        } else if (text[i] == '"') {
          advance(1);
          closed = true;
          break;
        } else {
          value.push_back(text[i]);
          advance(1);
        }
      }
      if (!closed) throw PenmanError("unterminated string literal", tl, tc);
      tokens.push_back({LexKind::String, std::move(value), tl, tc});
    } else {
      const std::size_t start = i;
      while (i < text.size() && !is_delimiter(text[i])) advance(1);
      std::string value(text.substr(start, i - start));
      const LexKind kind = value.front() == ':' ? LexKind::Role : LexKind::Symbol;
      tokens.push_back({kind, std::move(value), tl, tc});
    }
  }
  tokens.push_back({LexKind::End, "", line, column});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    // Variables may be referenced before they are defined, so collect every
    // definition site up front.
    for (std::size_t k = 0; k + 1 < tokens_.size(); ++k)
      if (tokens_[k].kind == LexKind::LParen && tokens_[k + 1].kind == LexKind::Symbol)
        defined_.insert(tokens_[k + 1].text);
  }

  AmrGraph parse() {
    if (peek().kind == LexKind::End) throw PenmanError("empty input", peek().line, peek().column);
    if (peek().kind != LexKind::LParen)
      throw PenmanError("expected '(' at start of graph", peek().line, peek().column);
    const std::size_t root = parse_node();
    graph_.root = root;
    if (peek().kind == LexKind::RParen)
      throw PenmanError("unbalanced parentheses: unexpected ')'", peek().line, peek().column);
    if (peek().kind != LexKind::End)
      throw PenmanError("unexpected content after graph: '" + peek().text + "'", peek().line,
                        peek().column);
    for (const auto& ref : pending_) {
      const auto it = variables_.find(ref.name);
      graph_.edges[ref.edge].target = it->second;
    }
    return std::move(graph_);
  }

 private:
  struct PendingRef {
    std::size_t edge;
    std::string name;
  };

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail_unbalanced(const Token& at) {
    throw PenmanError("unbalanced parentheses: missing ')'", at.line, at.column);
  }

  std::size_t parse_node() {
    next();  // '('
    const Token& var = peek();
    if (var.kind == LexKind::End) fail_unbalanced(var);
    if (var.kind != LexKind::Symbol)
      throw PenmanError("expected variable after '('", var.line, var.column);
    const Token var_tok = next();
    if (variables_.count(var_tok.text))
      throw PenmanError("duplicate variable definition '" + var_tok.text + "'", var_tok.line,
                        var_tok.column);

    if (peek().kind != LexKind::Slash) {
      if (peek().kind == LexKind::End) fail_unbalanced(peek());
      throw PenmanError("expected '/' after variable '" + var_tok.text + "'", peek().line,
                        peek().column);
    }
    next();
    const Token& concept_tok = peek();
    if (concept_tok.kind != LexKind::Symbol && concept_tok.kind != LexKind::String) {
      if (concept_tok.kind == LexKind::End) fail_unbalanced(concept_tok);
      throw PenmanError("expected concept after '/'", concept_tok.line, concept_tok.column);
    }
    const Token label = next();
    const std::size_t index = graph_.add_node(var_tok.text, label.text);
    variables_.emplace(var_tok.text, index);

    for (;;) {
      const Token& tok = peek();
      if (tok.kind == LexKind::RParen) {
        next();
        return index;
      }
      if (tok.kind == LexKind::End) fail_unbalanced(tok);
      if (tok.kind != LexKind::Role)
        throw PenmanError("relation must start with ':' (got '" + tok.text + "')", tok.line,
                          tok.column);
      const Token role = next();
      if (role.text.size() < 2)
        throw PenmanError("empty relation name", role.line, role.column);
      parse_target(index, role);
    }
  }

  void parse_target(std::size_t source, const Token& role) {
    const Token& tok = peek();
    switch (tok.kind) {
      case LexKind::LParen: {
        const std::size_t edge = graph_.add_edge(source, role.text, kNoNode);
        const std::size_t child = parse_node();
        graph_.edges[edge].target = child;
        return;
      }
      case LexKind::String: {
        const Token value = next();
        const std::size_t c = graph_.add_node(constant_id(), value.text, true, true);
        graph_.add_edge(source, role.text, c);
        return;
      }
      case LexKind::Symbol: {
        const Token value = next();
        if (defined_.count(value.text)) {
          const std::size_t edge = graph_.add_edge(source, role.text, kNoNode);
          pending_.push_back({edge, value.text});
        } else {
          const std::size_t c = graph_.add_node(constant_id(), value.text, true, false);
          graph_.add_edge(source, role.text, c);
        }
        return;
      }
      case LexKind::End:
        fail_unbalanced(tok);
      default:
        throw PenmanError("missing target for relation " + role.text, tok.line, tok.column);
    }
  }

  std::string constant_id() {
    std::string id;
    do {
      id = "#c" + std::to_string(constant_counter_++);
    } while (defined_.count(id));
    return id;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  AmrGraph graph_;
  std::unordered_set<std::string> defined_;
  std::unordered_map<std::string, std::size_t> variables_;
  std::vector<PendingRef> pending_;
  std::size_t constant_counter_ = 0;
};

bool safe_variable(const std::string& id) {
  if (id.empty() || id.front() == ':' || id.front() == '#') return false;
  for (char c : id)
    if (is_delimiter(c)) return false;
  return true;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool needs_quotes(const AmrNode& node) {
  return node.quoted || node.label.empty() ||
         node.label.find_first_of("()\"/ \t\n\r:") != std::string::npos;
}

}  // namespace

AmrGraph parse_penman(std::string_view text) { return Parser(tokenize(text)).parse(); }

std::string serialize_penman(const AmrGraph& graph, bool pretty) {
  const std::size_t n = graph.nodes.size();
  const auto adj = graph.out_edges();
  const auto indeg = graph.indegrees();

  // Constants print inline; anything a constant cannot express becomes a variable.
  std::vector<bool> inline_constant(n, false);
  std::unordered_set<std::string> constant_symbols;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& node = graph.nodes[i];
    inline_constant[i] = node.constant && adj[i].empty() && indeg[i] <= 1 && i != graph.root &&
                         !node.label.empty();
    if (inline_constant[i] && !node.quoted) constant_symbols.insert(node.label);
  }

  std::vector<std::string> names(n);
  std::unordered_set<std::string> used;
  for (std::size_t i = 0; i < n; ++i) {
    if (inline_constant[i]) continue;
    const auto& id = graph.nodes[i].id;
    if (safe_variable(id) && !constant_symbols.count(id) && used.insert(id).second) names[i] = id;
  }
  std::size_t fresh = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (inline_constant[i] || !names[i].empty()) continue;
    std::string name;
    do {
      name = "v" + std::to_string(fresh++);
    } while (used.count(name) || constant_symbols.count(name));
    used.insert(name);
    names[i] = name;
  }

  std::vector<bool> printed(n, false);
  std::string out;
  std::function<void(std::size_t, std::size_t)> emit = [&](std::size_t v, std::size_t depth) {
    printed[v] = true;
    const auto& node = graph.nodes[v];
    out += "(" + names[v] + " / ";
    out += needs_quotes(node) ? quote(node.label) : node.label;
    for (std::size_t e : adj[v]) {
      const auto& edge = graph.edges[e];
      if (pretty) {
        out += "\n";
        out.append((depth + 1) * 4, ' ');
      } else {
        out += " ";
      }
      out += edge.role + " ";
      const std::size_t t = edge.target;
      if (inline_constant[t]) {
        const auto& c = graph.nodes[t];
        out += needs_quotes(c) ? quote(c.label) : c.label;
      } else if (printed[t]) {
        out += names[t];
      } else {
        emit(t, depth + 1);
      }
    }
    out += ")";
  };
  if (graph.root < n) emit(graph.root, 0);
  return out;
}

}  // namespace amrgen
