#include "tmkit/dsl.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "tmkit/dynamics.hpp"

namespace tmkit {

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  std::ostringstream out;
  if (!file.empty()) out << file << ':';
  if (d.span) out << d.span->line << ':' << d.span->column << ':';
  if (!file.empty() || d.span) out << ' ';
  out << (d.severity == Severity::Error ? "error" : "warning") << '[' << d.code << "]: "
      << d.message;
  return out.str();
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

namespace {

enum class Tok { Ident, String, Number, LBrace, RBrace, Comma, Dot, Arrow, FatArrow, Bang, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier / decoded string / number spelling
  SourceSpan span;
};

std::string_view describe(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::String: return "string";
    case Tok::Number: return "number";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Arrow: return "'->'";
    case Tok::FatArrow: return "'=>'";
    case Tok::Bang: return "'!'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct SyntaxError {
  Diagnostic diagnostic;
};

Diagnostic error_at(std::string code, std::string message, SourceSpan span) {
  return Diagnostic{Severity::Error, std::move(code), std::move(message), span};
}

class Lexer {
 public:
  explicit Lexer(std::string_view source) : src_(source) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", {line_, column_, 1}});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  Token make(Tok kind, std::size_t start, SourceSpan span, std::string text = {}) {
    span.length = std::max<std::size_t>(1, pos_ - start);
    return {kind, std::move(text), span};
  }

  Token next() {
    SourceSpan span{line_, column_, 1};
    std::size_t start = pos_;
    char c = src_[pos_];
    auto peek = [&](std::size_t k) { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; };

    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        advance();
      return make(Tok::Ident, start, span, std::string(src_.substr(start, pos_ - start)));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (peek(0) == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      }
      return make(Tok::Number, start, span, std::string(src_.substr(start, pos_ - start)));
    }
    if (c == '"') return string_literal(span);
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      return make(Tok::Arrow, start, span);
    }
    if (c == '=' && peek(1) == '>') {
      advance();
      advance();
      return make(Tok::FatArrow, start, span);
    }
    advance();
    switch (c) {
      case '{': return make(Tok::LBrace, start, span);
      case '}': return make(Tok::RBrace, start, span);
      case ',': return make(Tok::Comma, start, span);
      case '.': return make(Tok::Dot, start, span);
      case '!': return make(Tok::Bang, start, span);
      default: break;
    }
    throw SyntaxError{error_at("Lexical", "unexpected character '" + std::string(1, c) + "'", span)};
  }

  Token string_literal(SourceSpan span) {
    std::size_t start = pos_;
    advance();
    std::string text;
    while (pos_ < src_.size() && src_[pos_] != '"') {
      char c = src_[pos_];
      if (c == '\n') break;
      if (c == '\\' && pos_ + 1 < src_.size()) {
        advance();
        char e = src_[pos_];
        switch (e) {
          case 'n': text += '\n'; break;
          case 't': text += '\t'; break;
          case '"': text += '"'; break;
          case '\\': text += '\\'; break;
          default: {
            SourceSpan at{line_, column_ - 1, 2};
            throw SyntaxError{error_at("Lexical", std::string("unknown escape '\\") + e + "'", at)};
          }
        }
        advance();
        continue;
      }
      text += c;
      advance();
    }
    if (pos_ >= src_.size() || src_[pos_] != '"') {
      span.length = std::max<std::size_t>(1, pos_ - start);
      throw SyntaxError{error_at("Lexical", "unterminated string", span)};
    }
    advance();
    return make(Tok::String, start, span, std::move(text));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct PendingEdge {
  bool trigger = false;
  std::string from;
  std::string to;
  SourceSpan span;
};

struct PendingEvent {
  EventSpec spec;
  SourceSpan span;
};

struct PendingChrono {
  ChronoEdge edge;
  SourceSpan span;
};

struct PendingFocus {
  std::string name;
  std::vector<std::string> events;
  SourceSpan span;
};

SourceSpan join(SourceSpan a, SourceSpan b) {
  if (a.line != b.line) return a;
  a.length = b.column + b.length - a.column;
  return a;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ParseResult run() {
    ParseResult result;
    try {
      parse_model_header();
      while (!at(Tok::RBrace)) parse_item();
      expect(Tok::RBrace);
      expect(Tok::End);
    } catch (const SyntaxError& e) {
      diagnostics_.push_back(e.diagnostic);
      result.diagnostics = std::move(diagnostics_);
      return result;
    }
    resolve_deferred();
    result.diagnostics = std::move(diagnostics_);
    result.spans = std::move(spans_);
    if (!has_errors(result.diagnostics)) result.model = std::move(model_);
    return result;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_word(std::string_view word, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == word;
  }

  [[noreturn]] void fail(const Token& tok, const std::string& expected) {
    std::string got = tok.kind == Tok::Ident ? "'" + tok.text + "'" : std::string(describe(tok.kind));
    throw SyntaxError{error_at("Syntax", "expected " + expected + ", found " + got, tok.span)};
  }

  Token expect(Tok kind) {
    if (!at(kind)) fail(peek(), std::string(describe(kind)));
    return toks_[pos_++];
  }

  Token expect_word(std::string_view word) {
    if (!at_word(word)) fail(peek(), "'" + std::string(word) + "'");
    return toks_[pos_++];
  }

  bool accept_word(std::string_view word) {
    if (!at_word(word)) return false;
    ++pos_;
    return true;
  }

  std::pair<std::string, SourceSpan> parse_path() {
    Token first = expect(Tok::Ident);
    std::string path = first.text;
    SourceSpan span = first.span;
    while (at(Tok::Dot)) {
      ++pos_;
      Token part = expect(Tok::Ident);
      path += '.';
      path += part.text;
      span = join(span, part.span);
    }
    return {path, span};
  }

  void semantic(const ModelError& e, SourceSpan span) {
    diagnostics_.push_back(error_at(std::string(to_string(e.code())), e.what(), span));
  }

  void parse_model_header() {
    expect_word("model");
    Token name = expect(Tok::String);
    try {
      model_ = new_model(name.text);
    } catch (const ModelError& e) {
      semantic(e, name.span);
      model_ = new_model("invalid");
    }
    expect(Tok::LBrace);
  }

  void parse_item() {
    const Token& tok = peek();
    if (tok.kind != Tok::Ident) fail(tok, "an item");
    if (tok.text == "thimac") return parse_thimac(std::nullopt, true);
    if (tok.text == "flow" || tok.text == "trigger") return parse_edge();
    if (tok.text == "event") return parse_event();
    if (tok.text == "chronology") return parse_chronology();
    if (tok.text == "focus") return parse_focus();
    fail(tok, "thimac, flow, trigger, event, chronology or focus");
  }

  void parse_thimac(std::optional<std::string> parent, bool parent_ok) {
    expect_word("thimac");
    Token name = expect(Tok::Ident);
    bool unrealizable = accept_word("unrealizable");
    bool delimiter = accept_word("delimiter");
    expect(Tok::LBrace);

    std::string id = parent ? *parent + "." + name.text : name.text;
    bool ok = parent_ok;
    if (ok) {
      try {
        add_thimac(model_, name.text,
                   parent ? std::optional<std::string_view>(*parent) : std::nullopt,
                   !unrealizable, delimiter);
        spans_[id] = name.span;
        spans_[id + "." + std::string(kImplicitCreateName)] = name.span;
      } catch (const ModelError& e) {
        semantic(e, name.span);
        ok = false;
      }
    }

    while (!at(Tok::RBrace)) {
      const Token& tok = peek();
      if (tok.kind != Tok::Ident) fail(tok, "a thimac member");
      if (tok.text == "thimac") {
        parse_thimac(id, ok);
      } else if (tok.text == "storage") {
        ++pos_;
        Token local = expect(Tok::Ident);
        std::string label;
        if (at(Tok::String)) label = toks_[pos_++].text;
        if (ok) build([&] { attach_storage(model_, id, local.text, label); }, id, local);
      } else if (tok.text == "junction") {
        ++pos_;
        JunctionMode mode = JunctionMode::Or;
        if (accept_word("and")) {
          mode = JunctionMode::And;
        } else if (!accept_word("or")) {
          fail(peek(), "'or' or 'and'");
        }
        Token local = expect(Tok::Ident);
        if (ok) build([&] { add_junction(model_, id, mode, local.text); }, id, local);
      } else {
        parse_action(id, ok);
      }
    }
    expect(Tok::RBrace);
  }

  template <typename F>
  void build(F&& f, const std::string& owner, const Token& local) {
    try {
      f();
      spans_[owner + "." + local.text] = local.span;
    } catch (const ModelError& e) {
      semantic(e, local.span);
    }
  }

  void parse_action(const std::string& owner, bool ok) {
    Token kind_tok = expect(Tok::Ident);
    std::optional<ActionKind> kind;
    try {
      kind = parse_action_kind(kind_tok.text);
    } catch (const ModelError& e) {
      // "arrive x" still has the shape of a declaration: report and skip it.
      if (!at(Tok::Ident)) fail(kind_tok, "a thimac member");
      semantic(e, kind_tok.span);
    }
    Token local = expect(Tok::Ident);
    std::string label;
    if (at(Tok::String)) label = toks_[pos_++].text;
    std::optional<Guard> guard;
    if (accept_word("guard")) {
      Guard g;
      if (at(Tok::Bang)) {
        ++pos_;
        g.negated = true;
      }
      g.input = expect(Tok::Ident).text;
      guard = g;
    }
    if (ok && kind) build([&] { add_action(model_, owner, *kind, local.text, label, guard); }, owner, local);
  }

  void parse_edge() {
    Token keyword = toks_[pos_++];
    bool trigger = keyword.text == "trigger";
    auto [from, from_span] = parse_path();
    expect(trigger ? Tok::FatArrow : Tok::Arrow);
    auto [to, to_span] = parse_path();
    edges_.push_back({trigger, from, to, join(keyword.span, to_span)});
  }

  void parse_event() {
    Token keyword = expect_word("event");
    Token id = expect(Tok::Ident);
    EventSpec spec;
    spec.id = id.text;
    if (at(Tok::String)) spec.label = toks_[pos_++].text;
    if (accept_word("absent")) spec.polarity = Polarity::Absent;
    if (accept_word("duration")) {
      Token number = expect(Tok::Number);
      Token unit = expect(Tok::Ident);
      double value = 0;
      std::from_chars(number.text.data(), number.text.data() + number.text.size(), value);
      spec.duration = Duration{value, unit.text};
    }
    if (accept_word("tense")) {
      if (accept_word("past")) {
        spec.tense = Tense::Past;
      } else if (accept_word("now")) {
        spec.tense = Tense::Now;
      } else {
        fail(peek(), "'past' or 'now'");
      }
    }
    expect_word("covers");
    expect(Tok::LBrace);
    spec.covers.push_back(parse_path().first);
    while (at(Tok::Comma)) {
      ++pos_;
      spec.covers.push_back(parse_path().first);
    }
    expect(Tok::RBrace);
    events_.push_back({std::move(spec), id.span});
    (void)keyword;
  }

  void parse_chronology() {
    expect_word("chronology");
    expect(Tok::LBrace);
    while (!at(Tok::RBrace)) {
      ChronoKind kind = ChronoKind::Precede;
      // `repeat` followed by an identifier is the repeat form; `repeat -> x` names an event.
      if (at_word("repeat") && peek(1).kind == Tok::Ident) {
        ++pos_;
        kind = ChronoKind::Repeat;
      }
      Token from = expect(Tok::Ident);
      expect(Tok::Arrow);
      Token to = expect(Tok::Ident);
      chrono_.push_back({{from.text, to.text, kind}, join(from.span, to.span)});
    }
    expect(Tok::RBrace);
  }

  void parse_focus() {
    expect_word("focus");
    Token name = expect(Tok::Ident);
    PendingFocus focus{name.text, {}, name.span};
    expect(Tok::LBrace);
    focus.events.push_back(expect(Tok::Ident).text);
    while (at(Tok::Comma)) {
      ++pos_;
      focus.events.push_back(expect(Tok::Ident).text);
    }
    expect(Tok::RBrace);
    focus_.push_back(std::move(focus));
  }

  void resolve_deferred() {
    for (const auto& edge : edges_) {
      try {
        std::string id = edge.trigger ? connect_trigger(model_, edge.from, edge.to)
                                      : connect_flow(model_, edge.from, edge.to);
        spans_[id] = edge.span;
      } catch (const ModelError& e) {
        semantic(e, edge.span);
      }
    }
    for (auto& event : events_) {
      try {
        std::string id = event.spec.id;
        define_event(model_, std::move(event.spec));
        spans_[id] = event.span;
      } catch (const ModelError& e) {
        semantic(e, event.span);
      }
    }
    for (const auto& c : chrono_) {
      try {
        declare_chronology(model_, c.edge.from, c.edge.to, c.edge.kind);
      } catch (const ModelError& e) {
        semantic(e, c.span);
      }
    }
    for (auto& f : focus_) {
      try {
        add_focus_group(model_, f.name, std::move(f.events));
      } catch (const ModelError& e) {
        semantic(e, f.span);
      }
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Model model_;
  std::vector<Diagnostic> diagnostics_;
  SourceMap spans_;
  std::vector<PendingEdge> edges_;
  std::vector<PendingEvent> events_;
  std::vector<PendingChrono> chrono_;
  std::vector<PendingFocus> focus_;
};

// ---------------------------------------------------------------------------
// Printer

std::string quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

class Printer {
 public:
  explicit Printer(const Model& model) : m_(model) {}

  std::string run() {
    out_ << "model " << quote(m_.name) << " {\n";
    for (const auto& t : m_.thimacs) {
      if (!t.parent) thimac(t, 1);
    }
    for (const auto& f : m_.flows) line(1) << "flow " << f.from << " -> " << f.to << '\n';
    for (const auto& t : m_.triggers) line(1) << "trigger " << t.from << " => " << t.to << '\n';
    for (const auto& e : m_.events) event(e);
    if (!m_.chronology.empty()) {
      line(1) << "chronology {\n";
      for (const auto& c : m_.chronology) {
        line(2) << (c.kind == ChronoKind::Repeat ? "repeat " : "") << c.from << " -> " << c.to
                << '\n';
      }
      line(1) << "}\n";
    }
    for (const auto& g : m_.focus) {
      line(1) << "focus " << g.name << " { ";
      for (std::size_t i = 0; i < g.events.size(); ++i) out_ << (i ? ", " : "") << g.events[i];
      out_ << " }\n";
    }
    out_ << "}\n";
    return out_.str();
  }

 private:
  std::ostream& line(int depth) {
    for (int i = 0; i < depth; ++i) out_ << "  ";
    return out_;
  }

  static std::string local_name(const std::string& id) { return id.substr(id.rfind('.') + 1); }

  void thimac(const Thimac& t, int depth) {
    line(depth) << "thimac " << t.name << (t.realizable ? "" : " unrealizable")
                << (t.delimiter ? " delimiter" : "") << " {\n";
    for (const auto& child : t.children) {
      auto ref = m_.find(child);
      if (!ref) continue;
      switch (ref->kind) {
        case ElementRef::Kind::Thimac: thimac(m_.thimacs[ref->index], depth + 1); break;
        case ElementRef::Kind::Action: {
          const auto& a = m_.actions[ref->index];
          if (a.implicit) break;
          line(depth + 1) << to_string(a.kind) << ' ' << local_name(a.id);
          if (!a.label.empty()) out_ << ' ' << quote(a.label);
          if (a.guard) out_ << " guard " << (a.guard->negated ? "!" : "") << a.guard->input;
          out_ << '\n';
          break;
        }
        case ElementRef::Kind::Storage: {
          const auto& s = m_.storages[ref->index];
          line(depth + 1) << "storage " << local_name(s.id);
          if (!s.label.empty()) out_ << ' ' << quote(s.label);
          out_ << '\n';
          break;
        }
        case ElementRef::Kind::Junction: {
          const auto& j = m_.junctions[ref->index];
          line(depth + 1) << "junction " << to_string(j.mode) << ' ' << local_name(j.id) << '\n';
          break;
        }
      }
    }
    line(depth) << "}\n";
  }

  void event(const Event& e) {
    line(1) << "event " << e.id;
    if (!e.label.empty()) out_ << ' ' << quote(e.label);
    if (e.polarity == Polarity::Absent) out_ << " absent";
    if (e.duration) out_ << " duration " << format_number(e.duration->magnitude) << ' ' << e.duration->unit;
    if (e.tense) out_ << " tense " << to_string(*e.tense);
    out_ << " covers { ";
    for (std::size_t i = 0; i < e.covers.size(); ++i) out_ << (i ? ", " : "") << e.covers[i];
    out_ << " }\n";
  }

  const Model& m_;
  std::ostringstream out_;
};

}  // namespace

ParseResult parse_model(std::string_view source) {
  std::vector<Token> tokens;
  try {
    tokens = Lexer(source).run();
  } catch (const SyntaxError& e) {
    ParseResult result;
    result.diagnostics.push_back(e.diagnostic);
    return result;
  }
  return Parser(std::move(tokens)).run();
}

std::string render_model(const Model& model) { return Printer(model).run(); }

ParseResult parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParseResult result;
    result.diagnostics.push_back({Severity::Error, "Io", "cannot open '" + path + "'", SourceSpan{}});
    return result;
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

}  // namespace tmkit
