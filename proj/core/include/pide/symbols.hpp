#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pide/position.hpp"

namespace pide {

enum class SymbolKind { PlainChar, Named, Control, Malformed };

/// One element of the Isabelle symbol alphabet: a plain Unicode scalar,
/// a named symbol `\<name>`, a control symbol `\<^name>`, or a malformed
/// escape that is kept verbatim.
struct Symbol {
  SymbolKind kind = SymbolKind::PlainChar;
  std::string source;  // exact input text, never empty
  std::string name;    // for Named/Control only

  [[nodiscard]] bool is_named(std::string_view n) const {
    return kind == SymbolKind::Named && name == n;
  }
  [[nodiscard]] bool is_control(std::string_view n) const {
    return kind == SymbolKind::Control && name == n;
  }
  /// The ASCII character if this is a single-byte plain symbol, otherwise '\0'.
  [[nodiscard]] char ascii() const {
    return kind == SymbolKind::PlainChar && source.size() == 1 ? source[0] : '\0';
  }
  [[nodiscard]] bool is_char(char c) const { return ascii() == c && c != '\0'; }
  [[nodiscard]] bool is_newline() const { return is_char('\n'); }
  [[nodiscard]] bool is_blank() const;
  [[nodiscard]] bool is_open() const { return is_named("open"); }
  [[nodiscard]] bool is_close() const { return is_named("close"); }
  /// Escape-form spelling: `\<name>`, `\<^name>`, or the source itself.
  [[nodiscard]] std::string canonical() const;

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Symbol table entry: optional display glyph and whether the name is a control symbol.
struct SymbolInfo {
  std::optional<char32_t> display;
  bool is_control = false;
};

class SymbolTable {
 public:
  SymbolTable() = default;

  /// Built-in table: cartouche delimiters, formal comment markers,
  /// markdown list markers and a handful of common logical symbols.
  static const SymbolTable& builtin();

  /// Parse the `NAME CODEPOINT_HEX [control]` configuration format and
  /// merge it over `base`. Throws ConfigError on malformed lines.
  static SymbolTable load(std::string_view config, const SymbolTable& base = builtin());

  void add(const std::string& name, SymbolInfo info);
  [[nodiscard]] const SymbolInfo* find(std::string_view name) const;
  [[nodiscard]] const std::string* find_glyph(char32_t codepoint) const;
  [[nodiscard]] const std::map<std::string, SymbolInfo, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, SymbolInfo, std::less<>> entries_;
  std::map<char32_t, std::string> glyphs_;
};

/// Text decoded into symbols, with a line index for offset→position lookup.
class SymbolSeq {
 public:
  SymbolSeq() = default;
  explicit SymbolSeq(std::vector<Symbol> symbols);

  [[nodiscard]] std::size_t size() const { return symbols_.size(); }
  [[nodiscard]] bool empty() const { return symbols_.empty(); }
  [[nodiscard]] const Symbol& operator[](std::size_t i) const { return symbols_[i]; }
  [[nodiscard]] auto begin() const { return symbols_.begin(); }
  [[nodiscard]] auto end() const { return symbols_.end(); }
  [[nodiscard]] const std::vector<Symbol>& symbols() const { return symbols_; }

  /// Position of `offset` (0 ≤ offset ≤ size()).
  [[nodiscard]] Position position(std::size_t offset) const;
  [[nodiscard]] Range range(std::size_t start, std::size_t stop) const;
  [[nodiscard]] Range whole() const { return range(0, size()); }
  [[nodiscard]] std::string text(std::size_t start, std::size_t stop) const;
  [[nodiscard]] std::string text(const Range& r) const { return text(r.start.offset, r.stop.offset); }
  [[nodiscard]] std::string text() const { return text(0, size()); }
  [[nodiscard]] std::size_t line_count() const { return line_starts_.size(); }
  [[nodiscard]] std::size_t line_start(std::size_t line) const { return line_starts_.at(line - 1); }

 private:
  std::vector<Symbol> symbols_;
  std::vector<std::size_t> line_starts_{0};
};

enum class ControlRole { Item, Enum, Descr, Cancel, Latex, OtherControl, NotControl };

[[nodiscard]] SymbolSeq decode(std::string_view text, const SymbolTable& table = SymbolTable::builtin());
[[nodiscard]] std::string encode(const SymbolSeq& seq);
[[nodiscard]] ControlRole classify_control(const Symbol& s);

/// True for `[A-Za-z][A-Za-z0-9_']*`.
[[nodiscard]] bool is_symbol_name(std::string_view name);

/// Replace invalid UTF-8 sequences by U+FFFD.
[[nodiscard]] std::string sanitize_utf8(std::string_view bytes);
[[nodiscard]] std::string utf8_encode(char32_t codepoint);

/// End offset (exclusive) of the balanced cartouche opening at `begin`,
/// or nullopt if `seq[begin]` is not an open symbol or the cartouche is
/// not closed before `limit`.
[[nodiscard]] std::optional<std::size_t> cartouche_end(const SymbolSeq& seq, std::size_t begin,
                                                       std::size_t limit);

}  // namespace pide
