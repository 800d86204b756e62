#include "pide/outer_syntax.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "pide/errors.hpp"

namespace pide {

namespace {

constexpr std::array kGreekLetters = {
    "alpha", "beta",    "gamma", "delta", "epsilon", "zeta",  "eta",   "theta", "iota",  "kappa",
    "mu",    "nu",      "xi",    "pi",    "rho",     "sigma", "tau",   "upsilon", "phi", "chi",
    "psi",   "omega",   "Gamma", "Delta", "Theta",   "Lambda", "Xi",   "Pi",    "Sigma", "Upsilon",
    "Phi",   "Psi",     "Omega"};

bool is_ascii_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_digit(const Symbol& s) { return s.ascii() >= '0' && s.ascii() <= '9'; }

bool is_letter(const Symbol& s) {
  if (is_ascii_letter(s.ascii())) return true;
  if (s.kind != SymbolKind::Named) return false;
  return std::find(kGreekLetters.begin(), kGreekLetters.end(), s.name) != kGreekLetters.end();
}

bool is_quasi_letter(const Symbol& s) { return is_letter(s) || is_digit(s) || s.is_char('_') || s.is_char('\''); }

bool is_sym_char(const Symbol& s) {
  if (s.kind == SymbolKind::Named) return !is_letter(s) && !s.is_open() && !s.is_close() && !s.is_named("comment");
  if (s.kind != SymbolKind::PlainChar) return false;
  const char c = s.ascii();
  if (c == '\0') return static_cast<unsigned char>(s.source[0]) >= 0x80;
  return std::string_view("!#$%&*+-/<=>?@^_`|~").find(c) != std::string_view::npos;
}

bool is_formal_comment_marker(const Symbol& s) {
  return s.is_named("comment") || s.is_control("cancel") || s.is_control("latex");
}

bool is_identifier_text(std::string_view text) {
  return !text.empty() && is_ascii_letter(text.front());
}

std::size_t symbol_length(std::string_view text) {
  // Counts escape-form symbols; keyword keys are ASCII.
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) {
    if (text.substr(i).starts_with("\\<")) {
      const auto close = text.find('>', i);
      i = close == std::string_view::npos ? text.size() : close + 1;
    } else {
      ++i;
    }
  }
  return n;
}

KeywordTable make_builtin() {
  KeywordTable t;
  for (const char* k : {"!", "%", "(", ")", "+", ",", "-", ".", "..", ":", "::", ";", "<", "<=", "=", "==", "=>",
                        "?", "[", "]", "{", "}", "|", "\\<equiv>", "\\<Rightarrow>", "\\<Longrightarrow>",
                        "\\<rightleftharpoons>", "\\<subseteq>", "and", "assumes", "begin", "binder", "constrains",
                        "defines", "fixes", "for", "if", "imports", "in", "includes", "infix", "infixl", "infixr",
                        "is", "keywords", "notes", "obtains", "open", "output", "overloaded", "shows", "structure",
                        "where", "when"}) {
    t.add(k, KeywordSpec{});
  }
  t.add("theory", {true, CommandKind::TheoryBegin, {}});
  t.add("end", {true, CommandKind::TheoryEnd, {}});
  for (const char* m : {"chapter", "section", "subsection", "subsubsection", "paragraph", "subparagraph", "text",
                        "txt", "text_raw"}) {
    t.add(m, {true, CommandKind::Markup, {}});
  }
  t.add("ML_file", {true, CommandKind::Load, {"ML"}});
  t.add("bibtex_file", {true, CommandKind::Load, {"bib"}});
  t.add("ML", {true, CommandKind::Regular, {}});
  t.add("definition", {true, CommandKind::Regular, {}});
  return t;
}

class Lexer {
 public:
  Lexer(const SymbolSeq& seq, const KeywordTable& kw, std::size_t begin, std::size_t end)
      : seq_(seq), kw_(kw), pos_(begin), end_(end) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < end_) {
      const std::size_t start = pos_;
      const TokenKind kind = scan();
      out.push_back(Token{kind, seq_.text(start, pos_), seq_.range(start, pos_)});
      if (kind == TokenKind::Ident || kind == TokenKind::LongIdent) classify_word(out.back());
    }
    return out;
  }

 private:
  const Symbol& at(std::size_t i) const { return seq_[i]; }
  bool has(std::size_t i) const { return i < end_; }

  TokenKind scan() {
    const Symbol& s = at(pos_);
    if (s.is_blank()) {
      while (has(pos_) && at(pos_).is_blank()) ++pos_;
      return TokenKind::Space;
    }
    if (s.is_char('(') && has(pos_ + 1) && at(pos_ + 1).is_char('*')) return scan_comment();
    if (s.is_char('"')) return scan_string();
    if (s.is_open()) {
      if (auto stop = cartouche_end(seq_, pos_, end_)) {
        pos_ = *stop;
        return TokenKind::Cartouche;
      }
      pos_ = end_;
      return TokenKind::ErrorToken;
    }
    if (is_formal_comment_marker(s)) {
      ++pos_;
      return TokenKind::FormalCommentMarker;
    }
    if (s.kind == SymbolKind::Control) {
      ++pos_;
      return TokenKind::ControlSym;
    }
    if (is_digit(s)) {
      while (has(pos_) && is_digit(at(pos_))) ++pos_;
      return TokenKind::Nat;
    }
    if (is_letter(s) || (s.is_char('\'') && has(pos_ + 1) && is_letter(at(pos_ + 1)))) return scan_ident();
    return scan_symbolic();
  }

  TokenKind scan_comment() {
    std::size_t depth = 0;
    std::size_t i = pos_;
    while (has(i)) {
      if (at(i).is_char('(') && has(i + 1) && at(i + 1).is_char('*')) {
        ++depth;
        i += 2;
      } else if (at(i).is_char('*') && has(i + 1) && at(i + 1).is_char(')')) {
        i += 2;
        if (--depth == 0) {
          pos_ = i;
          return TokenKind::SourceComment;
        }
      } else {
        ++i;
      }
    }
    pos_ = end_;
    return TokenKind::ErrorToken;
  }

  TokenKind scan_string() {
    std::size_t i = pos_ + 1;
    while (has(i)) {
      if (at(i).is_char('\\') && has(i + 1)) {
        i += 2;
      } else if (at(i).is_char('"')) {
        pos_ = i + 1;
        return TokenKind::String;
      } else {
        ++i;
      }
    }
    pos_ = end_;
    return TokenKind::ErrorToken;
  }

  std::size_t scan_ident_at(std::size_t i) const {
    if (at(i).is_char('\'')) ++i;
    ++i;
    while (has(i)) {
      if (is_quasi_letter(at(i))) {
        ++i;
      } else if (at(i).is_control("sub") && has(i + 1) && (is_letter(at(i + 1)) || is_digit(at(i + 1)))) {
        i += 2;
      } else {
        break;
      }
    }
    return i;
  }

  TokenKind scan_ident() {
    std::size_t i = scan_ident_at(pos_);
    bool long_ident = false;
    while (has(i + 1) && at(i).is_char('.') && is_letter(at(i + 1))) {
      i = scan_ident_at(i + 1);
      long_ident = true;
    }
    pos_ = i;
    return long_ident ? TokenKind::LongIdent : TokenKind::Ident;
  }

  TokenKind scan_symbolic() {
    std::size_t sym_run = 0;
    while (has(pos_ + sym_run) && is_sym_char(at(pos_ + sym_run))) ++sym_run;

    std::size_t keyword_len = 0;
    std::string candidate;
    for (std::size_t k = 1; k <= kw_.max_symbolic_length() && has(pos_ + k - 1); ++k) {
      candidate += at(pos_ + k - 1).canonical();
      if (kw_.find(candidate) != nullptr) keyword_len = k;
    }
    if (keyword_len > 0 && keyword_len >= sym_run) {
      pos_ += keyword_len;
      return kw_.is_command(candidate_prefix(keyword_len)) ? TokenKind::Command : TokenKind::Keyword;
    }
    if (sym_run > 0) {
      pos_ += sym_run;
      return TokenKind::Ident;
    }
    ++pos_;
    return TokenKind::ErrorToken;
  }

  std::string candidate_prefix(std::size_t k) const {
    std::string text;
    for (std::size_t i = 0; i < k; ++i) text += at(pos_ - k + i).canonical();
    return text;
  }

  void classify_word(Token& tok) const {
    std::string canon;
    for (std::size_t i = tok.range.start.offset; i < tok.range.stop.offset; ++i) canon += at(i).canonical();
    if (const KeywordSpec* spec = kw_.find(canon)) {
      tok.kind = spec->is_command ? TokenKind::Command : TokenKind::Keyword;
    }
  }

  const SymbolSeq& seq_;
  const KeywordTable& kw_;
  std::size_t pos_;
  std::size_t end_;
};

std::optional<CommandKind> parse_kind(std::string_view kind, bool& is_command) {
  is_command = true;
  if (kind == "keyword" || kind == "minor") {
    is_command = false;
    return CommandKind::Regular;
  }
  if (kind == "thy_begin") return CommandKind::TheoryBegin;
  if (kind == "thy_end") return CommandKind::TheoryEnd;
  if (kind == "markup" || kind == "document_heading" || kind == "document_body") return CommandKind::Markup;
  if (kind == "thy_load") return CommandKind::Load;
  if (kind == "thy_decl" || kind == "diag" || kind == "regular") return CommandKind::Regular;
  return std::nullopt;
}

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Command: return "command";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Ident: return "ident";
    case TokenKind::LongIdent: return "long_ident";
    case TokenKind::String: return "string";
    case TokenKind::Cartouche: return "cartouche";
    case TokenKind::SourceComment: return "comment";
    case TokenKind::FormalCommentMarker: return "formal_comment_marker";
    case TokenKind::ControlSym: return "control";
    case TokenKind::Nat: return "nat";
    case TokenKind::Space: return "space";
    case TokenKind::ErrorToken: return "error";
  }
  return "error";
}

std::string_view span_kind_name(SpanKind kind) {
  switch (kind) {
    case SpanKind::TheoryBegin: return "theory_begin";
    case SpanKind::TheoryEnd: return "theory_end";
    case SpanKind::Markup: return "markup";
    case SpanKind::Load: return "load";
    case SpanKind::Regular: return "regular";
    case SpanKind::Ignored: return "ignored";
  }
  return "ignored";
}

std::string_view formal_comment_kind_name(FormalCommentKind kind) {
  switch (kind) {
    case FormalCommentKind::Marginal: return "marginal";
    case FormalCommentKind::Cancel: return "cancel";
    case FormalCommentKind::Latex: return "latex";
  }
  return "marginal";
}

std::string Token::content() const {
  if (kind == TokenKind::String && source.size() >= 2) {
    std::string out;
    for (std::size_t i = 1; i + 1 < source.size(); ++i) {
      if (source[i] == '\\' && i + 2 < source.size() && (source[i + 1] == '"' || source[i + 1] == '\\')) ++i;
      out += source[i];
    }
    return out;
  }
  if (kind == TokenKind::Cartouche) {
    // Delimiters are single symbols, spelled as escapes or as one UTF-8 glyph.
    std::string_view body = source;
    if (body.starts_with("\\<open>")) {
      body.remove_prefix(7);
    } else {
      std::size_t n = 1;
      while (n < body.size() && (static_cast<unsigned char>(body[n]) & 0xC0) == 0x80) ++n;
      body.remove_prefix(n);
    }
    if (body.ends_with("\\<close>")) {
      body.remove_suffix(8);
    } else {
      std::size_t n = 1;
      while (n < body.size() && (static_cast<unsigned char>(body[body.size() - n]) & 0xC0) == 0x80) ++n;
      body.remove_suffix(std::min(n, body.size()));
    }
    return std::string(body);
  }
  return source;
}

Range Token::content_range(const SymbolSeq& seq) const {
  if (is_text() && range.length() >= 2) return seq.range(range.start.offset + 1, range.stop.offset - 1);
  return range;
}

const KeywordTable& KeywordTable::builtin() {
  static const KeywordTable table = make_builtin();
  return table;
}

void KeywordTable::add(const std::string& name, KeywordSpec spec) {
  if (!is_identifier_text(name)) max_symbolic_ = std::max(max_symbolic_, symbol_length(name));
  entries_[name] = std::move(spec);
}

KeywordTable KeywordTable::with(const std::string& name, KeywordSpec spec) const {
  KeywordTable copy = *this;
  copy.add(name, std::move(spec));
  return copy;
}

const KeywordSpec* KeywordTable::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

bool KeywordTable::is_command(std::string_view name) const {
  const KeywordSpec* spec = find(name);
  return spec != nullptr && spec->is_command;
}

KeywordTable KeywordTable::load(std::string_view config, const KeywordTable& base) {
  KeywordTable table = base;
  std::istringstream in{std::string(config)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, kind, exts, extra;
    if (!(fields >> name)) continue;
    const std::string where = "keyword table line " + std::to_string(line_no) + ": ";
    if (!(fields >> kind)) throw ConfigError(where + "missing kind for \"" + name + "\"");
    fields >> exts;
    if (fields >> extra) throw ConfigError(where + "unexpected field \"" + extra + "\"");
    KeywordSpec spec;
    const auto command_kind = parse_kind(kind, spec.is_command);
    if (!command_kind) throw ConfigError(where + "unknown kind \"" + kind + "\"");
    spec.command_kind = *command_kind;
    std::istringstream ext_list(exts);
    for (std::string ext; std::getline(ext_list, ext, ',');) {
      if (!ext.empty()) spec.load_extensions.push_back(ext);
    }
    table.add(name, std::move(spec));
  }
  return table;
}

std::vector<Token> tokenize(const SymbolSeq& seq, const KeywordTable& keywords, std::size_t begin, std::size_t end) {
  end = std::min(end, seq.size());
  if (begin >= end) return {};
  return Lexer(seq, keywords, begin, end).run();
}

std::vector<const Token*> CommandSpan::proper_tokens() const {
  std::vector<const Token*> out;
  for (const Token& t : tokens) {
    if (!t.is_improper()) out.push_back(&t);
  }
  return out;
}

namespace {

SpanKind span_kind(CommandKind kind) {
  switch (kind) {
    case CommandKind::TheoryBegin: return SpanKind::TheoryBegin;
    case CommandKind::TheoryEnd: return SpanKind::TheoryEnd;
    case CommandKind::Markup: return SpanKind::Markup;
    case CommandKind::Load: return SpanKind::Load;
    case CommandKind::Regular: return SpanKind::Regular;
  }
  return SpanKind::Regular;
}

}  // namespace

std::vector<CommandSpan> parse_spans(const std::vector<Token>& tokens, const KeywordTable& keywords) {
  std::vector<CommandSpan> spans;
  CommandSpan current;
  const auto flush = [&] {
    if (current.tokens.empty()) return;
    current.range = Range{current.tokens.front().range.start, current.tokens.back().range.stop};
    if (!current.name) {
      const bool improper_only = std::all_of(current.tokens.begin(), current.tokens.end(),
                                             [](const Token& t) { return t.is_improper(); });
      current.kind = improper_only ? SpanKind::Ignored : SpanKind::Regular;
    }
    spans.push_back(std::move(current));
    current = CommandSpan{};
  };
  for (const Token& tok : tokens) {
    if (tok.kind == TokenKind::Command) {
      flush();
      current.name = tok.source;
      const KeywordSpec* spec = keywords.find(tok.source);
      current.kind = spec != nullptr ? span_kind(spec->command_kind) : SpanKind::Regular;
    }
    current.tokens.push_back(tok);
  }
  flush();
  return spans;
}

std::vector<FormalComment> scan_formal_comments(const SymbolSeq& seq, std::size_t begin, std::size_t end) {
  end = std::min(end, seq.size());
  std::vector<FormalComment> out;
  std::size_t i = begin;
  while (i < end) {
    const Symbol& s = seq[i];
    if (!is_formal_comment_marker(s)) {
      ++i;
      continue;
    }
    FormalComment c;
    c.kind = s.is_named("comment") ? FormalCommentKind::Marginal
             : s.is_control("cancel") ? FormalCommentKind::Cancel
                                      : FormalCommentKind::Latex;
    std::size_t j = i + 1;
    while (j < end && seq[j].is_blank()) ++j;
    if (auto stop = cartouche_end(seq, j, end)) {
      c.range = seq.range(i, *stop);
      c.body = seq.range(j + 1, *stop - 1);
      i = *stop;
    } else {
      c.range = seq.range(i, i + 1);
      ++i;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace pide
