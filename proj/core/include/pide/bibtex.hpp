#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pide/reports.hpp"
#include "pide/symbols.hpp"
#include "pide/text_structure.hpp"

namespace pide {

enum class BibTokenKind {
  At,
  EntryType,
  Key,
  FieldName,
  Equals,
  Comma,
  BraceOpen,
  BraceClose,
  ParenOpen,
  ParenClose,
  BracedValue,
  QuotedValue,
  Number,
  Concat,
  MacroName,
  Junk,
  Space,
};

[[nodiscard]] std::string_view bib_token_kind_name(BibTokenKind kind);

struct BibToken {
  BibTokenKind kind = BibTokenKind::Junk;
  std::string source;
  Range range;
  std::optional<std::string> diagnostic;  // set on Junk produced by error recovery

  /// Neither whitespace nor junk.
  [[nodiscard]] bool is_substantive() const { return kind != BibTokenKind::Space && kind != BibTokenKind::Junk; }
  friend bool operator==(const BibToken&, const BibToken&) = default;
};

/// Tokens tile the input. Text outside entries is Junk. A malformed entry
/// yields a Junk token carrying a diagnostic up to the next `@` at the start
/// of a line.
[[nodiscard]] std::vector<BibToken> tokenize_bib(const SymbolSeq& seq);
[[nodiscard]] std::vector<BibToken> tokenize_bib(std::string_view text);

enum class BibEntryKind { Regular, StringMacro, Preamble, Comment };

struct BibField {
  std::string name;  // as written
  Range name_range;
  std::vector<BibToken> value;  // value pieces and `#`
  Range value_range;
};

struct BibEntry {
  BibEntryKind kind = BibEntryKind::Regular;
  std::string entry_type;     // lower case
  std::string type_spelling;  // as written
  Range type_range;
  std::string key;
  std::optional<Range> key_range;
  std::vector<BibField> fields;
  Range range;
  std::size_t first_token = 0;  // index range into the token sequence
  std::size_t last_token = 0;   // exclusive

  /// Case-insensitive field lookup.
  [[nodiscard]] const BibField* field(std::string_view name) const;
};

struct BibParse {
  std::vector<BibEntry> entries;
  std::vector<Message> messages;
};

[[nodiscard]] BibParse parse_entries(const std::vector<BibToken>& tokens);

/// Required and optional fields per entry type. A required group such as
/// `author/editor` is satisfied by any of its members.
class FieldSpec {
 public:
  struct Entry {
    std::vector<std::vector<std::string>> required;
    std::set<std::string> optional;
  };

  FieldSpec() = default;

  /// The standard plain-style table.
  static const FieldSpec& builtin();

  /// Lines `type = req req alt/alt ; opt opt`. A type `*` lists optional
  /// fields accepted everywhere. Throws ConfigError.
  static FieldSpec parse(std::string_view text);

  [[nodiscard]] const Entry* find(std::string_view entry_type) const;
  [[nodiscard]] const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }
  [[nodiscard]] const std::set<std::string>& universal() const { return universal_; }

 private:
  std::map<std::string, Entry, std::less<>> entries_;
  std::set<std::string> universal_;
};

/// Text of the built-in field table.
[[nodiscard]] std::string_view builtin_field_table();

/// Warnings for missing (or empty) required fields, infos for fields that
/// are neither required nor optional. Only Regular entries are checked.
[[nodiscard]] std::vector<Message> check_required_fields(const BibEntry& entry, const FieldSpec& spec);

/// Duplicate keys across the database.
[[nodiscard]] std::vector<Message> check_duplicate_keys(const std::vector<BibEntry>& entries);

/// One node per keyed entry, titled `type:key`; `filter` keeps keys that
/// contain it (case-insensitive).
[[nodiscard]] std::vector<OutlineNode> outline_bib(const std::vector<BibEntry>& entries, std::string_view filter = {});

struct TokenLines {
  std::string text;
  std::vector<std::size_t> token_of_line;  // line i (1-based) ↦ token_of_line[i - 1]
};

/// One substantive token per line; newlines inside a token become spaces.
[[nodiscard]] TokenLines token_lines(const std::vector<BibToken>& tokens);

/// Token source as it appears on its line.
[[nodiscard]] std::string line_form(const BibToken& token);

/// Run `exe` (plain style, citing every entry) on the token-per-line form of
/// `text` inside `workdir` and return the `.blg` log. Throws
/// EnvironmentError when the program cannot be run or times out.
[[nodiscard]] std::string run_external_check(std::string_view text, const std::filesystem::path& exe,
                                             const std::filesystem::path& workdir,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(30));

/// Locate an executable by name on PATH, or check an explicit path.
[[nodiscard]] std::optional<std::filesystem::path> find_executable(const std::string& name);

struct BlgResult {
  std::vector<Message> messages;
  std::vector<std::string> unmatched;  // log lines no pattern recognized
};

/// Map warnings and errors of a BibTeX log back to source ranges through
/// the token-per-line index.
[[nodiscard]] BlgResult parse_blg(std::string_view log, const TokenLines& lines, const std::vector<BibToken>& tokens,
                                  const std::vector<BibEntry>& entries);

/// Field value with delimiters and braces removed and macros expanded.
[[nodiscard]] std::string field_text(const BibField& field, const std::map<std::string, std::string>& macros = {});

/// `@string` definitions of a database (lower-case names).
[[nodiscard]] std::map<std::string, std::string> string_macros(const std::vector<BibEntry>& entries);

/// Self-contained HTML listing entries by key.
[[nodiscard]] std::string render_html(const std::vector<BibEntry>& entries);

}  // namespace pide
