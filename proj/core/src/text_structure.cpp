#include "pide/text_structure.hpp"

#include <algorithm>
#include <cctype>

#include "pide/antiquotations.hpp"

namespace pide {

namespace {

constexpr const char* kMarkupOrigin = "text_structure.classify_markup";

struct NameKind {
  std::string_view name;
  MarkupCommandKind kind;
};

constexpr NameKind kMarkupNames[] = {
    {"chapter", MarkupCommandKind::Chapter},
    {"section", MarkupCommandKind::Section},
    {"subsection", MarkupCommandKind::Subsection},
    {"subsubsection", MarkupCommandKind::Subsubsection},
    {"paragraph", MarkupCommandKind::Paragraph},
    {"subparagraph", MarkupCommandKind::Subparagraph},
    {"text", MarkupCommandKind::Text},
    {"txt", MarkupCommandKind::Txt},
    {"text_raw", MarkupCommandKind::TextRaw},
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<ListMarker> marker_of(const Symbol& s) {
  switch (classify_control(s)) {
    case ControlRole::Item: return ListMarker::Item;
    case ControlRole::Enum: return ListMarker::Enum;
    case ControlRole::Descr: return ListMarker::Descr;
    default: return std::nullopt;
  }
}

struct Line {
  std::size_t start = 0;    // first symbol
  std::size_t content = 0;  // first non-blank symbol
  std::size_t stop = 0;     // one past the last non-blank symbol
  std::size_t indent = 0;
  bool blank = true;
  std::optional<ListMarker> marker;
};

std::vector<Line> split_lines(const SymbolSeq& seq, std::size_t begin, std::size_t end) {
  std::vector<Line> lines;
  std::size_t i = begin;
  while (i <= end) {
    Line line;
    line.start = i;
    std::size_t j = i;
    while (j < end && !seq[j].is_newline()) ++j;
    std::size_t k = i;
    while (k < j && seq[k].is_blank()) ++k;
    line.indent = k - i;
    line.content = k;
    line.blank = k == j;
    std::size_t stop = j;
    while (stop > k && seq[stop - 1].is_blank()) --stop;
    line.stop = stop;
    if (!line.blank) line.marker = marker_of(seq[k]);
    lines.push_back(line);
    if (j == end) break;
    i = j + 1;
  }
  return lines;
}

// Builder nodes live in one pool and refer to each other by index, so the
// tree can grow without invalidating references.
struct Node {
  MarkdownBlock::Kind kind = MarkdownBlock::Kind::Paragraph;
  std::optional<ListMarker> marker;
  std::size_t indent = 0;
  std::size_t start = 0;
  std::size_t stop = 0;
  std::vector<std::size_t> children;  // list → items; item → blocks
};

class MarkdownBuilder {
 public:
  explicit MarkdownBuilder(const SymbolSeq& seq) : seq_(seq) {}

  std::vector<MarkdownBlock> run(const std::vector<Line>& lines) {
    std::size_t blanks = 0;
    for (const Line& line : lines) {
      if (line.blank) {
        ++blanks;
        continue;
      }
      if (blanks >= 2) {
        frames_.clear();
        paragraph_.reset();
      } else if (blanks == 1) {
        paragraph_.reset();
      }
      blanks = 0;
      if (line.marker) {
        marker_line(line);
      } else {
        text_line(line.content, line.stop, line.indent);
      }
    }
    std::vector<MarkdownBlock> out;
    for (std::size_t id : top_) out.push_back(finish(id));
    return out;
  }

 private:
  struct Frame {
    std::size_t list;
    ListMarker marker;
    std::size_t indent;
  };

  std::size_t make(Node node) {
    pool_.push_back(std::move(node));
    return pool_.size() - 1;
  }

  std::vector<std::size_t>& container() {
    if (frames_.empty()) return top_;
    return pool_[pool_[frames_.back().list].children.back()].children;
  }

  void marker_line(const Line& line) {
    const ListMarker m = *line.marker;
    while (!frames_.empty() && (frames_.back().indent > line.indent ||
                                (frames_.back().indent == line.indent && frames_.back().marker != m))) {
      frames_.pop_back();
    }
    if (frames_.empty() || frames_.back().indent < line.indent) {
      const std::size_t list = make(Node{MarkdownBlock::Kind::List, m, line.indent, line.content, line.stop, {}});
      container().push_back(list);
      frames_.push_back(Frame{list, m, line.indent});
    }
    const std::size_t item = make(Node{MarkdownBlock::Kind::List, m, line.indent, line.content, line.stop, {}});
    pool_[frames_.back().list].children.push_back(item);
    paragraph_.reset();
    std::size_t text = line.content + 1;
    while (text < line.stop && seq_[text].is_blank()) ++text;
    if (text < line.stop) text_line(text, line.stop, line.indent);
  }

  void text_line(std::size_t start, std::size_t stop, std::size_t indent) {
    if (paragraph_) {
      pool_[*paragraph_].stop = stop;
      return;
    }
    paragraph_ = make(Node{MarkdownBlock::Kind::Paragraph, std::nullopt, indent, start, stop, {}});
    container().push_back(*paragraph_);
  }

  MarkdownItem finish_item(std::size_t id) {
    const Node& n = pool_[id];
    MarkdownItem item;
    std::size_t stop = n.stop;
    for (std::size_t child : n.children) {
      item.blocks.push_back(finish(child));
      stop = std::max(stop, item.blocks.back().range.stop.offset);
    }
    item.range = seq_.range(n.start, stop);
    return item;
  }

  MarkdownBlock finish(std::size_t id) {
    const Node& n = pool_[id];
    MarkdownBlock block;
    block.kind = n.kind;
    block.marker = n.marker;
    block.indent = n.indent;
    if (n.kind == MarkdownBlock::Kind::Paragraph) {
      block.range = seq_.range(n.start, n.stop);
      return block;
    }
    for (std::size_t child : n.children) block.items.push_back(finish_item(child));
    block.range = seq_.range(block.items.front().range.start.offset, block.items.back().range.stop.offset);
    return block;
  }

  const SymbolSeq& seq_;
  std::vector<Node> pool_;
  std::vector<std::size_t> top_;
  std::vector<Frame> frames_;
  std::optional<std::size_t> paragraph_;
};

char32_t first_codepoint(std::string_view s) {
  const auto b = static_cast<unsigned char>(s[0]);
  if (b < 0x80 || s.size() < 2) return b;
  if ((b & 0xE0) == 0xC0) return ((b & 0x1Fu) << 6) | (static_cast<unsigned char>(s[1]) & 0x3Fu);
  if ((b & 0xF0) == 0xE0 && s.size() >= 3) {
    return ((b & 0x0Fu) << 12) | ((static_cast<unsigned char>(s[1]) & 0x3Fu) << 6) |
           (static_cast<unsigned char>(s[2]) & 0x3Fu);
  }
  return 0xFFFD;
}

bool is_letter(const Symbol& s) {
  if (s.kind != SymbolKind::PlainChar) return false;
  const char32_t c = first_codepoint(s.source);
  if (c < 0x80) return std::isalpha(static_cast<int>(c)) != 0;
  return c >= 0xC0 && c <= 0x24F && c != 0xD7 && c != 0xF7;
}

void filter_into(const std::vector<OutlineNode>& nodes, const std::string& needle, std::vector<OutlineNode>& out) {
  for (const OutlineNode& n : nodes) {
    std::string title = n.title;
    std::transform(title.begin(), title.end(), title.begin(), [](unsigned char c) { return std::tolower(c); });
    OutlineNode copy{n.title, n.level, n.range, {}};
    filter_into(n.children, needle, copy.children);
    if (title.find(needle) != std::string::npos || !copy.children.empty()) out.push_back(std::move(copy));
  }
}

}  // namespace

bool operator==(const MarkdownItem& a, const MarkdownItem& b) { return a.range == b.range && a.blocks == b.blocks; }

bool operator==(const MarkdownBlock& a, const MarkdownBlock& b) {
  return a.kind == b.kind && a.marker == b.marker && a.indent == b.indent && a.items == b.items && a.range == b.range;
}

std::string_view markup_command_name(MarkupCommandKind kind) {
  for (const NameKind& nk : kMarkupNames) {
    if (nk.kind == kind) return nk.name;
  }
  return "text";
}

std::optional<MarkupCommandKind> markup_command_kind(std::string_view name) {
  for (const NameKind& nk : kMarkupNames) {
    if (nk.name == name) return nk.kind;
  }
  return std::nullopt;
}

std::optional<int> heading_level(MarkupCommandKind kind) {
  const int k = static_cast<int>(kind);
  if (k <= static_cast<int>(MarkupCommandKind::Subparagraph)) return k + 1;
  return std::nullopt;
}

std::string_view list_marker_name(ListMarker m) {
  switch (m) {
    case ListMarker::Item: return "item";
    case ListMarker::Enum: return "enum";
    case ListMarker::Descr: return "descr";
  }
  return "item";
}

MarkupResult classify_markup(const CommandSpan& span, const SymbolSeq& seq) {
  MarkupResult out;
  if (!span.name) return out;
  const auto kind = markup_command_kind(*span.name);
  if (!kind) return out;
  const std::vector<const Token*> toks = span.proper_tokens();
  if (toks.size() < 2 || !toks[1]->is_text()) {
    const Range where = toks.size() < 2 ? toks.front()->range : toks[1]->range;
    out.messages.push_back(make_message(Severity::Error, where,
                                        "Markup command \"" + *span.name + "\" expects a text argument",
                                        kMarkupOrigin));
    return out;
  }
  if (toks.size() > 2) {
    out.messages.push_back(make_message(Severity::Error, seq.range(toks[2]->range.start.offset,
                                                                   toks.back()->range.stop.offset),
                                        "Extra text after markup command argument", kMarkupOrigin));
  }
  out.markup = MarkupText{*kind, toks[1]->content_range(seq), toks[1]->content()};
  return out;
}

std::vector<MarkdownBlock> parse_markdown(const SymbolSeq& seq, std::size_t begin, std::size_t end) {
  end = std::min(end, seq.size());
  begin = std::min(begin, end);
  return MarkdownBuilder(seq).run(split_lines(seq, begin, end));
}

std::vector<OutlineNode> outline(const std::vector<CommandSpan>& spans) {
  std::vector<OutlineNode> roots;
  std::vector<OutlineNode> stack;
  const auto close_top = [&] {
    OutlineNode done = std::move(stack.back());
    stack.pop_back();
    (stack.empty() ? roots : stack.back().children).push_back(std::move(done));
  };
  for (const CommandSpan& span : spans) {
    if (span.kind != SpanKind::Markup || !span.name) continue;
    const auto kind = markup_command_kind(*span.name);
    const auto level = kind ? heading_level(*kind) : std::nullopt;
    if (!level) continue;
    const std::vector<const Token*> toks = span.proper_tokens();
    std::string title;
    Range range = span.range;
    if (!toks.empty()) {
      range = Range{toks.front()->range.start, toks.back()->range.stop};
      if (toks.size() >= 2 && toks[1]->is_text()) title = trim(toks[1]->content());
    }
    while (!stack.empty() && stack.back().level >= *level) close_top();
    stack.push_back(OutlineNode{std::move(title), *level, range, {}});
  }
  while (!stack.empty()) close_top();
  return roots;
}

std::vector<OutlineNode> filter_outline(const std::vector<OutlineNode>& nodes, std::string_view needle) {
  std::string lower(needle);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::vector<OutlineNode> out;
  filter_into(nodes, lower, out);
  return out;
}

std::vector<Range> extract_words(const SymbolSeq& seq, std::size_t begin, std::size_t end) {
  end = std::min(end, seq.size());
  begin = std::min(begin, end);
  const AntiquotationScan scan = scan_antiquotations(seq, begin, end);
  std::vector<Range> words;
  std::size_t next_excluded = 0;
  std::size_t i = begin;
  const auto excluded_at = [&](std::size_t pos) -> std::optional<std::size_t> {
    const auto& as = scan.antiquotations;
    while (next_excluded < as.size() && as[next_excluded].range.stop.offset <= pos) ++next_excluded;
    if (next_excluded < as.size() && as[next_excluded].range.start.offset <= pos) {
      return as[next_excluded].range.stop.offset;
    }
    return std::nullopt;
  };
  while (i < end) {
    if (auto skip = excluded_at(i)) {
      i = *skip;
      continue;
    }
    if (!is_letter(seq[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < end && !excluded_at(i)) {
      if (is_letter(seq[i])) {
        ++i;
      } else if (seq[i].is_char('\'') && i + 1 < end && is_letter(seq[i + 1]) && !excluded_at(i + 1)) {
        i += 2;
      } else {
        break;
      }
    }
    if (i - start >= 2) words.push_back(seq.range(start, i));
  }
  return words;
}

}  // namespace pide
