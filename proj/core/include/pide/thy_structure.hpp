#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pide/outer_syntax.hpp"
#include "pide/reports.hpp"
#include "pide/symbols.hpp"

namespace pide {

struct TheoryId {
  std::optional<std::string> qualifier;  // session name
  std::string base;
  bool global = false;

  [[nodiscard]] std::string qualified_name() const { return qualifier ? *qualifier + "." + base : base; }
  friend bool operator==(const TheoryId&, const TheoryId&) = default;
};

struct ImportRef {
  std::string text;
  Range range;
  std::optional<TheoryId> resolved;

  friend bool operator==(const ImportRef& a, const ImportRef& b) { return a.text == b.text; }
};

struct KeywordDecl {
  std::string name;
  std::string kind;  // empty for a minor keyword
  std::vector<std::string> load_extensions;
  Range range;

  friend bool operator==(const KeywordDecl& a, const KeywordDecl& b) {
    return a.name == b.name && a.kind == b.kind && a.load_extensions == b.load_extensions;
  }
};

struct TheoryHeader {
  std::string name;
  Range name_range;
  std::vector<ImportRef> imports;
  std::vector<KeywordDecl> keyword_decls;

  friend bool operator==(const TheoryHeader& a, const TheoryHeader& b) {
    return a.name == b.name && a.imports == b.imports && a.keyword_decls == b.keyword_decls;
  }
};

struct HeaderResult {
  TheoryHeader header;
  std::vector<Message> messages;
};

/// Parse `theory NAME [imports A B ...] [keywords ...] begin`.
[[nodiscard]] HeaderResult parse_header(const CommandSpan& span);

/// Canonical text of a header, reparsable by `parse_header`.
[[nodiscard]] std::string render_header(const TheoryHeader& header);

struct KeywordsResult {
  KeywordTable table;
  std::vector<Message> messages;
};

/// Extend `base` by the header's keyword declarations. `thy_load` yields
/// Load commands, `thy_decl` and `diag` Regular ones; other kinds fall back
/// to Regular with a warning.
[[nodiscard]] KeywordsResult apply_keywords(const KeywordTable& base, const TheoryHeader& header);

struct LoadCommandUse {
  std::string command;
  std::string path_argument;
  Range range;  // of the path token
  std::vector<std::string> extensions;  // from the keyword declaration
  std::optional<std::filesystem::path> resolved_path;

  /// Files denoted by the argument: the path itself when it has an
  /// extension or the command declares none, otherwise one file per
  /// declared extension.
  [[nodiscard]] std::vector<std::string> file_arguments() const;
};

struct LoadCommandsResult {
  std::vector<LoadCommandUse> uses;
  std::vector<Message> messages;
};

[[nodiscard]] LoadCommandsResult find_load_commands(const std::vector<CommandSpan>& spans, const KeywordTable& keywords);

struct AuxFile {
  std::filesystem::path path;
  std::optional<std::string> warning;  // set when the path escapes the base directory
};

/// Join `rel` to the directory of `theory_file` and normalize lexically.
/// `base_dir` defaults to the theory's directory.
[[nodiscard]] AuxFile resolve_aux_file(const std::filesystem::path& theory_file, const std::string& rel,
                                       const std::optional<std::filesystem::path>& base_dir = std::nullopt);

/// Outer syntax of a complete theory: the header is lexed with the base
/// table, the body with the table extended by the header's declarations.
struct TheorySyntax {
  std::optional<TheoryHeader> header;
  KeywordTable keywords;
  std::vector<Token> tokens;
  std::vector<CommandSpan> spans;
  std::vector<Message> messages;
};

[[nodiscard]] TheorySyntax parse_theory(const SymbolSeq& seq, const KeywordTable& base);

/// Line-oriented scan of a `ROOT.ML` bootstrap file for `use "f";` and
/// `ML_file "f"` / `ML_file ‹f›` forms.
[[nodiscard]] std::vector<LoadCommandUse> parse_root_ml(const SymbolSeq& seq);

/// Join adjacent (whitespace-free) identifier pieces and `-` keywords into
/// one name, as in `HOL-Analysis` or `HOL-Library.Multiset`. Also accepts a
/// single string token. Advances `i` past the name.
[[nodiscard]] std::optional<std::pair<std::string, Range>> read_name(const std::vector<const Token*>& tokens,
                                                                    std::size_t& i);

}  // namespace pide
