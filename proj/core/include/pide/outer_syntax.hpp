#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pide/position.hpp"
#include "pide/symbols.hpp"

namespace pide {

enum class TokenKind {
  Command,
  Keyword,
  Ident,
  LongIdent,
  String,
  Cartouche,
  SourceComment,
  FormalCommentMarker,
  ControlSym,
  Nat,
  Space,
  ErrorToken,
};

[[nodiscard]] std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::ErrorToken;
  std::string source;
  Range range;

  /// Whitespace and source comments.
  [[nodiscard]] bool is_improper() const { return kind == TokenKind::Space || kind == TokenKind::SourceComment; }
  [[nodiscard]] bool is_keyword(std::string_view k) const { return kind == TokenKind::Keyword && source == k; }
  [[nodiscard]] bool is_text() const { return kind == TokenKind::String || kind == TokenKind::Cartouche; }
  /// Interior of a string (with `\"` and `\\` unescaped) or cartouche; the
  /// source text for all other kinds.
  [[nodiscard]] std::string content() const;
  /// Symbol range of the interior of a String or Cartouche token.
  [[nodiscard]] Range content_range(const SymbolSeq& seq) const;

  friend bool operator==(const Token&, const Token&) = default;
};

enum class CommandKind { TheoryBegin, TheoryEnd, Markup, Load, Regular };

struct KeywordSpec {
  bool is_command = false;
  CommandKind command_kind = CommandKind::Regular;
  std::vector<std::string> load_extensions;

  friend bool operator==(const KeywordSpec&, const KeywordSpec&) = default;
};

/// Outer-syntax keywords: minor keywords and command names. Keys use the
/// escape form of symbols, e.g. `\<Rightarrow>`.
class KeywordTable {
 public:
  KeywordTable() = default;

  /// Minor keywords of the Pure bootstrap plus the built-in command set.
  static const KeywordTable& builtin();

  /// Parse `NAME kind [ext,...]` lines over `base`. Kinds: keyword,
  /// thy_begin, thy_end, markup, thy_load, thy_decl, diag, regular.
  static KeywordTable load(std::string_view config, const KeywordTable& base = builtin());

  void add(const std::string& name, KeywordSpec spec);
  [[nodiscard]] KeywordTable with(const std::string& name, KeywordSpec spec) const;
  [[nodiscard]] const KeywordSpec* find(std::string_view name) const;
  [[nodiscard]] bool is_command(std::string_view name) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const std::map<std::string, KeywordSpec, std::less<>>& entries() const { return entries_; }
  /// Longest symbolic (non-identifier) keyword, in symbols.
  [[nodiscard]] std::size_t max_symbolic_length() const { return max_symbolic_; }

 private:
  std::map<std::string, KeywordSpec, std::less<>> entries_;
  std::size_t max_symbolic_ = 0;
};

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Lex `seq[begin, end)` into outer-syntax tokens that tile the range.
/// Never fails: unterminated strings, cartouches and comments become one
/// ErrorToken reaching to `end`.
[[nodiscard]] std::vector<Token> tokenize(const SymbolSeq& seq, const KeywordTable& keywords, std::size_t begin = 0,
                                          std::size_t end = npos);

enum class SpanKind { TheoryBegin, TheoryEnd, Markup, Load, Regular, Ignored };

[[nodiscard]] std::string_view span_kind_name(SpanKind kind);

struct CommandSpan {
  std::optional<std::string> name;
  std::vector<Token> tokens;
  Range range;
  SpanKind kind = SpanKind::Ignored;

  /// Tokens other than whitespace and source comments.
  [[nodiscard]] std::vector<const Token*> proper_tokens() const;
};

/// Segment tokens into spans: a new span begins at every Command token.
/// Material before the first command forms one span, Ignored when it holds
/// only whitespace and source comments (otherwise a nameless Regular span).
[[nodiscard]] std::vector<CommandSpan> parse_spans(const std::vector<Token>& tokens, const KeywordTable& keywords);

enum class FormalCommentKind { Marginal, Cancel, Latex };

[[nodiscard]] std::string_view formal_comment_kind_name(FormalCommentKind kind);

struct FormalComment {
  FormalCommentKind kind = FormalCommentKind::Marginal;
  Range range;                // marker through closing cartouche delimiter
  std::optional<Range> body;  // cartouche interior; absent when incomplete

  [[nodiscard]] bool complete() const { return body.has_value(); }
};

/// Find `\<comment>`, `\<^cancel>` and `\<^latex>` markers followed by
/// optional blanks and a balanced cartouche. Occurrences inside a found
/// comment body are not reported separately.
[[nodiscard]] std::vector<FormalComment> scan_formal_comments(const SymbolSeq& seq, std::size_t begin = 0,
                                                              std::size_t end = npos);

}  // namespace pide
