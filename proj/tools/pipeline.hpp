#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pide/antiquotations.hpp"
#include "pide/bibtex.hpp"
#include "pide/outer_syntax.hpp"
#include "pide/reports.hpp"
#include "pide/sessions.hpp"
#include "pide/symbols.hpp"
#include "pide/text_structure.hpp"

namespace pide::cli {

/// Everything a check needs besides the file itself.
struct Context {
  SymbolTable symbols = SymbolTable::builtin();
  KeywordTable keywords = KeywordTable::builtin();
  AntiquotationRegistry antiquotations = AntiquotationRegistry::builtin();
  FieldSpec fields = FieldSpec::builtin();
  SessionGraph graph;
  std::optional<std::filesystem::path> bibtex_exe;
  std::chrono::milliseconds bibtex_timeout = std::chrono::seconds(30);
};

struct Analysis {
  std::vector<Message> messages;
  MarkupTree tree;
  std::vector<OutlineNode> outline;
};

/// Header, keywords, spans, imports, load commands, markup text, formal
/// comments and antiquotations of a theory.
[[nodiscard]] Analysis check_theory(const std::filesystem::path& file, std::string_view text, const Context& ctx);

/// Formal comments of ML text; `use` and `ML_file` targets of `ROOT.ML`.
[[nodiscard]] Analysis check_ml(const std::filesystem::path& file, std::string_view text, const Context& ctx);

/// A BibTeX database as loaded by `bibtex_file`: syntax, required fields,
/// duplicate keys and, if configured, the external checker.
/// Throws EnvironmentError when the external checker cannot be run.
[[nodiscard]] Analysis check_bib(const std::filesystem::path& file, std::string_view text, const Context& ctx);

/// Citation keys of a database (Regular entries).
[[nodiscard]] std::vector<std::string> bib_keys(std::string_view text);

}  // namespace pide::cli
