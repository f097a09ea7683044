#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "umlcot/error.hpp"
#include "umlcot/uml.hpp"

namespace umlcot::uml {

namespace {

constexpr std::string_view kStartMarker = "@startuml";
constexpr std::string_view kEndMarker = "@enduml";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_word(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Body of the diagram between the markers. Anything on the `@startuml` line
// after the marker (a diagram name) is dropped.
struct Body {
  std::string_view text;
  std::size_t first_line = 1;
};

Body diagram_body(std::string_view source) {
  auto start = source.find(kStartMarker);
  if (start == std::string_view::npos) {
    throw Error(ErrorCode::MissingMarkers, "no @startuml marker");
  }
  auto after = start + kStartMarker.size();
  auto end = source.find(kEndMarker, after);
  if (end == std::string_view::npos) {
    throw Error(ErrorCode::MissingMarkers, "no @enduml after @startuml");
  }
  auto eol = source.find('\n', after);
  auto begin = (eol == std::string_view::npos || eol > end) ? end : eol + 1;
  auto line = static_cast<std::size_t>(
      std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(begin), '\n'));
  return {source.substr(begin, end - begin), line + 1};
}

class Cursor {
 public:
  explicit Cursor(Body body) : text_(body.text), line_(body.first_line) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  std::size_t line() const { return line_; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
      if (text_[pos_] == '\n') ++line_;
    }
  }

  void skip_space() {
    while (!eof() && is_space(peek())) advance();
  }

  void skip_inline_space() {
    while (!eof() && peek() != '\n' && is_space(peek())) advance();
  }

  std::string_view rest_of_line() {
    auto eol = text_.find('\n', pos_);
    if (eol == std::string_view::npos) eol = text_.size();
    auto out = text_.substr(pos_, eol - pos_);
    advance(eol - pos_);
    return out;
  }

  std::string_view peek_rest_of_line() const {
    auto eol = text_.find('\n', pos_);
    if (eol == std::string_view::npos) eol = text_.size();
    return text_.substr(pos_, eol - pos_);
  }

  std::string_view word() {
    auto begin = pos_;
    while (!eof() && is_word(peek())) advance();
    return text_.substr(begin, pos_ - begin);
  }

  // Reads up to (not including) `stop`; returns nullopt and leaves the
  // cursor untouched when `stop` never occurs.
  std::optional<std::string_view> until(char stop) {
    auto at = text_.find(stop, pos_);
    if (at == std::string_view::npos) return std::nullopt;
    auto out = text_.substr(pos_, at - pos_);
    advance(at - pos_);
    return out;
  }

  bool skip_comment() {
    if (peek() == '\'') {
      rest_of_line();
      return true;
    }
    if (peek() == '/' && peek(1) == '\'') {
      auto close = text_.find("'/", pos_ + 2);
      advance(close == std::string_view::npos ? text_.size() - pos_ : close + 2 - pos_);
      return true;
    }
    return false;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::optional<std::string> optional_text(std::string_view s) {
  auto normalized = normalize_label(s);
  if (normalized.empty()) return std::nullopt;
  return normalized;
}

void warn(std::vector<ParseWarning>* warnings, std::size_t line, std::string message) {
  if (warnings) warnings->push_back({line, std::move(message)});
}

// ---------------------------------------------------------------- activity

class ActivityParser {
 public:
  ActivityParser(Body body, std::vector<ParseWarning>* warnings)
      : cur_(body), warnings_(warnings) {}

  ActivityDiagram run() {
    while (true) {
      cur_.skip_space();
      if (cur_.eof()) break;
      statement();
    }
    if (!scopes_.empty()) {
      throw Error(ErrorCode::UnbalancedBraces,
                  "unclosed '{' opened on line " + std::to_string(scopes_.back().line),
                  scopes_.back().line);
    }
    return std::move(diagram_);
  }

 private:
  static constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

  struct Scope {
    std::size_t container;  // partition index or kRoot
    std::size_t line;
  };

  // Open if/while/fork constructs per container, so duplicate-name merging
  // and nested partitions validate the same way after re-rendering.
  std::unordered_map<std::size_t, std::vector<ControlKind>> open_controls_;

  std::size_t container() const {
    return scopes_.empty() ? kRoot : scopes_.back().container;
  }

  std::vector<ActivityNode>& nodes_of(std::size_t c) {
    return c == kRoot ? diagram_.orphan_nodes : diagram_.partitions[c].nodes;
  }
  std::vector<ControlConstruct>& controls_of(std::size_t c) {
    return c == kRoot ? diagram_.orphan_controls : diagram_.partitions[c].controls;
  }

  void statement() {
    if (cur_.skip_comment()) return;
    const char c = cur_.peek();
    if (c == ':') return node();
    if (c == '}') {
      if (scopes_.empty()) {
        throw Error(ErrorCode::UnbalancedBraces,
                    "'}' without matching '{' on line " + std::to_string(cur_.line()),
                    cur_.line());
      }
      scopes_.pop_back();
      cur_.advance();
      return;
    }
    if (c == '{') {
      scopes_.push_back({container(), cur_.line()});
      cur_.advance();
      return;
    }
    if (c == '-') {  // arrows carry no plan content
      cur_.rest_of_line();
      return;
    }
    if (is_alpha(c)) return keyword();
    unrecognized();
  }

  void node() {
    const auto line = cur_.line();
    cur_.advance();  // ':'
    auto body = cur_.until(';');
    if (!body) {
      throw Error(ErrorCode::UnterminatedNode,
                  "activity node opened on line " + std::to_string(line) + " has no closing ';'",
                  line);
    }
    cur_.advance();  // ';'
    auto label = normalize_label(*body);
    if (label.empty()) {
      warn(warnings_, line, "empty activity node skipped");
      return;
    }
    nodes_of(container()).push_back({std::move(label)});
  }

  void keyword() {
    const auto line = cur_.line();
    auto kw = cur_.word();
    if (kw == "start") {
      diagram_.has_start = true;
    } else if (kw == "stop") {
      diagram_.has_stop = true;
    } else if (kw == "end") {
      cur_.skip_inline_space();
      if (trim(cur_.peek_rest_of_line()).substr(0, 4) == "fork") {
        cur_.word();
        control(ControlKind::Join, line);
      } else if (is_alpha(cur_.peek())) {
        warn(warnings_, line, "unrecognized line skipped: end " + std::string(cur_.rest_of_line()));
      } else {
        diagram_.has_stop = true;
      }
    } else if (kw == "partition") {
      partition(line);
    } else if (kw == "if") {
      control(ControlKind::If, line);
    } else if (kw == "else") {
      control(ControlKind::Else, line);
    } else if (kw == "endif") {
      control(ControlKind::Endif, line);
    } else if (kw == "while") {
      control(ControlKind::While, line);
    } else if (kw == "endwhile") {
      control(ControlKind::Endwhile, line);
    } else if (kw == "fork") {
      if (trim(cur_.peek_rest_of_line()).substr(0, 5) == "again") return unrecognized(kw);
      control(ControlKind::Fork, line);
    } else if (kw == "join") {
      control(ControlKind::Join, line);
    } else {
      unrecognized(kw);
    }
  }

  void control(ControlKind kind, std::size_t line) {
    std::optional<std::string> condition;
    if (kind != ControlKind::Fork && kind != ControlKind::Join) {
      condition = optional_text(cur_.rest_of_line());
    }
    const auto c = container();
    auto& open = open_controls_[c];
    auto expect_open = [&](ControlKind opener) {
      if (open.empty() || open.back() != opener) {
        warn(warnings_, line,
             std::string(to_string(kind)) + " without matching " + std::string(to_string(opener)) +
                 " skipped");
        return false;
      }
      return true;
    };
    switch (kind) {
      case ControlKind::If:
      case ControlKind::While:
      case ControlKind::Fork:
        open.push_back(kind);
        break;
      case ControlKind::Else:
        if (!expect_open(ControlKind::If)) return;
        break;
      case ControlKind::Endif:
        if (!expect_open(ControlKind::If)) return;
        open.pop_back();
        break;
      case ControlKind::Endwhile:
        if (!expect_open(ControlKind::While)) return;
        open.pop_back();
        break;
      case ControlKind::Join:
        if (!expect_open(ControlKind::Fork)) return;
        open.pop_back();
        break;
    }
    controls_of(c).push_back({kind, std::move(condition), nodes_of(c).size()});
  }

  void partition(std::size_t line) {
    cur_.skip_inline_space();
    auto header = cur_.peek_rest_of_line();
    auto brace = header.find('{');
    if (brace == std::string_view::npos) {
      warn(warnings_, line, "partition without '{' skipped: " + std::string(trim(header)));
      cur_.rest_of_line();
      return;
    }
    std::string_view raw_name = header.substr(0, brace);
    if (!header.empty() && header.front() == '"') {
      auto close = header.find('"', 1);
      if (close != std::string_view::npos) {
        raw_name = header.substr(1, close - 1);
        brace = header.find('{', close);
        if (brace == std::string_view::npos) {
          warn(warnings_, line, "partition without '{' skipped: " + std::string(trim(header)));
          cur_.rest_of_line();
          return;
        }
      }
    }
    cur_.advance(brace + 1);
    auto name = normalize_label(raw_name);
    if (name.empty()) {
      warn(warnings_, line, "partition without a name treated as a plain block");
      scopes_.push_back({container(), line});
      return;
    }
    std::size_t index = diagram_.partitions.size();
    for (std::size_t i = 0; i < diagram_.partitions.size(); ++i) {
      if (diagram_.partitions[i].name == name) {
        index = i;
        break;
      }
    }
    if (index == diagram_.partitions.size()) {
      diagram_.partitions.push_back({std::move(name), {}, {}});
    }
    scopes_.push_back({index, line});
  }

  void unrecognized(std::string_view prefix = {}) {
    const auto line = cur_.line();
    auto rest = cur_.rest_of_line();
    warn(warnings_, line, "unrecognized line skipped: " + std::string(prefix) + std::string(rest));
  }

  Cursor cur_;
  std::vector<ParseWarning>* warnings_;
  ActivityDiagram diagram_;
  std::vector<Scope> scopes_;
};

// ---------------------------------------------------------------- class

const std::regex& relation_pattern() {
  static const std::regex re(
      R"re(^("[^"]+"|[A-Za-z_][\w.]*)\s*(?:"[^"]*"\s*)?(<\|--|--\|>|o--|--o|\*--|--\*|<--|-->|--)\s*(?:"[^"]*"\s*)?("[^"]+"|[A-Za-z_][\w.]*)\s*(?::(.*))?$)re");
  return re;
}

const std::regex& class_name_pattern() {
  static const std::regex re(R"re(^("[^"]+"|[A-Za-z_][\w.]*))re");
  return re;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return normalize_label(s);
}

class ClassParser {
 public:
  ClassParser(Body body, std::vector<ParseWarning>* warnings)
      : cur_(body), warnings_(warnings) {}

  ClassDiagram run() {
    while (true) {
      cur_.skip_space();
      if (cur_.eof()) break;
      statement();
    }
    if (!blocks_.empty()) {
      throw Error(ErrorCode::UnbalancedBraces,
                  "unclosed '{' opened on line " + std::to_string(blocks_.back()),
                  blocks_.back());
    }
    add_implicit_classes();
    return std::move(diagram_);
  }

 private:
  void statement() {
    if (cur_.skip_comment()) return;
    const auto line = cur_.line();
    if (cur_.peek() == '}') {
      if (blocks_.empty()) {
        throw Error(ErrorCode::UnbalancedBraces,
                    "'}' without matching '{' on line " + std::to_string(line), line);
      }
      blocks_.pop_back();
      cur_.advance();
      return;
    }
    if (cur_.peek() == '{') {
      blocks_.push_back(line);
      cur_.advance();
      return;
    }
    auto text = trim(cur_.peek_rest_of_line());
    auto first = text.substr(0, std::min(text.find_first_not_of(
                                             "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"),
                                         text.size()));
    if (first == "class" || first == "interface" || first == "enum" || first == "abstract") {
      return declaration();
    }
    if (first == "package" || first == "namespace" || first == "together") {
      auto brace = cur_.peek_rest_of_line().find('{');
      if (brace == std::string_view::npos) {
        warn(warnings_, line, "grouping without '{' skipped: " + std::string(text));
        cur_.rest_of_line();
        return;
      }
      cur_.advance(brace + 1);
      blocks_.push_back(line);
      return;
    }
    relation(line);
  }

  void declaration() {
    const auto line = cur_.line();
    auto kw = cur_.word();
    cur_.skip_inline_space();
    if (kw == "abstract" && cur_.peek_rest_of_line().substr(0, 5) == "class") {
      cur_.word();
      cur_.skip_inline_space();
    }
    auto header = cur_.peek_rest_of_line();
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(header.begin(), header.end(), m, class_name_pattern())) {
      warn(warnings_, line, "class declaration without a name skipped");
      cur_.rest_of_line();
      return;
    }
    auto name = unquote(std::string_view(&*m[1].first, static_cast<std::size_t>(m[1].length())));
    auto brace = header.find('{', static_cast<std::size_t>(m[1].length()));
    ClassDecl* decl = declare(name);
    if (brace == std::string_view::npos) {
      cur_.rest_of_line();
      return;
    }
    cur_.advance(brace + 1);
    // Member bodies may carry `{static}`-style modifiers; count depth.
    std::string body;
    int depth = 1;
    while (true) {
      if (cur_.eof()) {
        throw Error(ErrorCode::UnbalancedBraces,
                    "class '" + name + "' opened on line " + std::to_string(line) +
                        " is never closed",
                    line);
      }
      char c = cur_.peek();
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        cur_.advance();
        break;
      }
      body.push_back(c);
      cur_.advance();
    }
    std::string_view rest = body;
    while (!rest.empty()) {
      auto eol = rest.find('\n');
      auto member = trim(rest.substr(0, eol));
      if (!member.empty()) decl->members.emplace_back(member);
      if (eol == std::string_view::npos) break;
      rest.remove_prefix(eol + 1);
    }
  }

  ClassDecl* declare(const std::string& name) {
    for (auto& c : diagram_.classes) {
      if (c.name == name) return &c;
    }
    diagram_.classes.push_back({name, {}, false});
    return &diagram_.classes.back();
  }

  void relation(std::size_t line) {
    auto text = std::string(trim(cur_.rest_of_line()));
    std::smatch m;
    if (!std::regex_match(text, m, relation_pattern())) {
      warn(warnings_, line, "unrecognized line skipped: " + text);
      return;
    }
    Relation r;
    r.source = unquote(m[1].str());
    r.target = unquote(m[3].str());
    if (m[4].matched) r.label = optional_text(m[4].str());
    const auto a = m[2].str();
    bool reversed = false;
    if (a == "-->") {
      r.kind = RelationKind::Association;
    } else if (a == "<--") {
      r.kind = RelationKind::Association;
      reversed = true;
    } else if (a == "--|>") {
      r.kind = RelationKind::Inheritance;
    } else if (a == "<|--") {
      r.kind = RelationKind::Inheritance;
      reversed = true;
    } else if (a == "o--") {
      r.kind = RelationKind::Aggregation;
    } else if (a == "--o") {
      r.kind = RelationKind::Aggregation;
      reversed = true;
    } else if (a == "*--") {
      r.kind = RelationKind::Composition;
    } else if (a == "--*") {
      r.kind = RelationKind::Composition;
      reversed = true;
    } else {
      r.kind = RelationKind::Plain;
    }
    if (reversed) std::swap(r.source, r.target);
    diagram_.relations.push_back(std::move(r));
  }

  void add_implicit_classes() {
    for (const auto& r : diagram_.relations) {
      for (const auto* endpoint : {&r.source, &r.target}) {
        if (!diagram_.find_class(*endpoint)) {
          diagram_.classes.push_back({*endpoint, {}, true});
        }
      }
    }
  }

  Cursor cur_;
  std::vector<ParseWarning>* warnings_;
  ClassDiagram diagram_;
  std::vector<std::size_t> blocks_;
};

}  // namespace

bool check_markers(std::string_view source) {
  auto start = source.find(kStartMarker);
  if (start == std::string_view::npos) return false;
  return source.find(kEndMarker, start + kStartMarker.size()) != std::string_view::npos;
}

std::string normalize_label(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

ActivityDiagram parse_activity(std::string_view source, std::vector<ParseWarning>* warnings) {
  return ActivityParser(diagram_body(source), warnings).run();
}

ClassDiagram parse_class(std::string_view source, std::vector<ParseWarning>* warnings) {
  return ClassParser(diagram_body(source), warnings).run();
}

}  // namespace umlcot::uml
