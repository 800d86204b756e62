#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pide/outer_syntax.hpp"
#include "pide/reports.hpp"
#include "pide/symbols.hpp"

namespace pide {

enum class MarkupCommandKind { Chapter, Section, Subsection, Subsubsection, Paragraph, Subparagraph, Text, Txt, TextRaw };

[[nodiscard]] std::string_view markup_command_name(MarkupCommandKind kind);
[[nodiscard]] std::optional<MarkupCommandKind> markup_command_kind(std::string_view name);
/// 1 for chapter through 6 for subparagraph; absent for text, txt, text_raw.
[[nodiscard]] std::optional<int> heading_level(MarkupCommandKind kind);

struct MarkupText {
  MarkupCommandKind kind = MarkupCommandKind::Text;
  Range body;        // interior of the string or cartouche argument
  std::string text;  // interior content
};

struct MarkupResult {
  std::optional<MarkupText> markup;
  std::vector<Message> messages;
};

/// Recognize the nine markup commands and their single text argument.
[[nodiscard]] MarkupResult classify_markup(const CommandSpan& span, const SymbolSeq& seq);

enum class ListMarker { Item, Enum, Descr };

[[nodiscard]] std::string_view list_marker_name(ListMarker m);

struct MarkdownBlock;

struct MarkdownItem {
  Range range;
  std::vector<MarkdownBlock> blocks;
};

struct MarkdownBlock {
  enum class Kind { Paragraph, List };
  Kind kind = Kind::Paragraph;
  std::optional<ListMarker> marker;  // lists only
  std::size_t indent = 0;            // in symbols, tab counts as one
  std::vector<MarkdownItem> items;   // lists only
  Range range;
};

bool operator==(const MarkdownItem& a, const MarkdownItem& b);
bool operator==(const MarkdownBlock& a, const MarkdownBlock& b);

/// Paragraphs and (nested) lists of `seq[begin, end)`. Lines starting with
/// `\<^item>`, `\<^enum>` or `\<^descr>` open list items; equal marker and
/// indent continue a list, deeper indent nests. One blank line starts a new
/// paragraph, two or more close all lists.
[[nodiscard]] std::vector<MarkdownBlock> parse_markdown(const SymbolSeq& seq, std::size_t begin = 0,
                                                        std::size_t end = npos);

struct OutlineNode {
  std::string title;
  int level = 1;
  Range range;
  std::vector<OutlineNode> children;

  friend bool operator==(const OutlineNode&, const OutlineNode&) = default;
};

/// Heading tree: a level-k heading closes all open headings of level ≥ k.
[[nodiscard]] std::vector<OutlineNode> outline(const std::vector<CommandSpan>& spans);

/// Keep nodes whose title contains `needle` (case-insensitive), together
/// with their ancestors.
[[nodiscard]] std::vector<OutlineNode> filter_outline(const std::vector<OutlineNode>& nodes, std::string_view needle);

/// Runs of at least two letters (with inner apostrophes) outside
/// antiquotations, in document offsets.
[[nodiscard]] std::vector<Range> extract_words(const SymbolSeq& seq, std::size_t begin = 0, std::size_t end = npos);

}  // namespace pide
