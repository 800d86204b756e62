#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "markdown_oracle.hpp"
#include "pide/text_structure.hpp"
#include "test_support.hpp"

namespace pide {
namespace {

std::vector<CommandSpan> spans_of(const SymbolSeq& seq) {
  return parse_spans(tokenize(seq, KeywordTable::builtin()), KeywordTable::builtin());
}

TEST(MarkupCommands, HeadingLevels) {
  EXPECT_EQ(heading_level(MarkupCommandKind::Chapter), 1);
  EXPECT_EQ(heading_level(MarkupCommandKind::Section), 2);
  EXPECT_EQ(heading_level(MarkupCommandKind::Subparagraph), 6);
  EXPECT_FALSE(heading_level(MarkupCommandKind::Text));
  EXPECT_FALSE(heading_level(MarkupCommandKind::Txt));
  EXPECT_FALSE(heading_level(MarkupCommandKind::TextRaw));
}

TEST(ClassifyMarkup, Section) {
  const SymbolSeq seq = decode("section ‹Introduction›");
  const MarkupResult r = classify_markup(spans_of(seq)[0], seq);
  ASSERT_TRUE(r.markup);
  EXPECT_EQ(r.markup->kind, MarkupCommandKind::Section);
  EXPECT_EQ(r.markup->text, "Introduction");
  EXPECT_EQ(seq.text(r.markup->body), "Introduction");
}

TEST(ClassifyMarkup, NotMarkup) {
  const SymbolSeq seq = decode("definition foo :: nat where ‹foo = 1›");
  EXPECT_FALSE(classify_markup(spans_of(seq)[0], seq).markup);
}

TEST(ClassifyMarkup, TextRaw) {
  const SymbolSeq seq = decode("text_raw ‹\\label{x}›");
  const MarkupResult r = classify_markup(spans_of(seq)[0], seq);
  ASSERT_TRUE(r.markup);
  EXPECT_EQ(r.markup->kind, MarkupCommandKind::TextRaw);
  EXPECT_EQ(r.markup->text, "\\label{x}");
}

TEST(ClassifyMarkup, MissingBody) {
  const SymbolSeq seq = decode("section foo");
  const MarkupResult r = classify_markup(spans_of(seq)[0], seq);
  EXPECT_FALSE(r.markup);
  ASSERT_EQ(r.messages.size(), 1u);
  EXPECT_EQ(r.messages[0].severity, Severity::Error);
}

TEST(ParseMarkdown, TwoItemsGroup) {
  const SymbolSeq seq = decode("\\<^item> a\n\\<^item> b");
  const auto blocks = parse_markdown(seq);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].kind, MarkdownBlock::Kind::List);
  EXPECT_EQ(blocks[0].items.size(), 2u);
}

TEST(ParseMarkdown, DoubleBlankEscapes) {
  const SymbolSeq seq = decode("\\<^item> a\n\n\nx");
  const auto blocks = parse_markdown(seq);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].kind, MarkdownBlock::Kind::List);
  EXPECT_EQ(blocks[0].items.size(), 1u);
  EXPECT_EQ(blocks[1].kind, MarkdownBlock::Kind::Paragraph);
}

TEST(ParseMarkdown, SingleBlankStaysInItem) {
  const SymbolSeq seq = decode("\\<^item> a\n\nx");
  const auto blocks = parse_markdown(seq);
  ASSERT_EQ(blocks.size(), 1u);
  ASSERT_EQ(blocks[0].items[0].blocks.size(), 2u);
  EXPECT_EQ(blocks[0].items[0].blocks[1].kind, MarkdownBlock::Kind::Paragraph);
}

TEST(ParseMarkdown, PlainTextIsOneParagraph) {
  const SymbolSeq seq = decode("just some\nplain text");
  const auto blocks = parse_markdown(seq);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].kind, MarkdownBlock::Kind::Paragraph);
  EXPECT_EQ(seq.text(blocks[0].range), "just some\nplain text");
}

TEST(ParseMarkdown, DeeperMarkerNests) {
  const SymbolSeq seq = decode("\\<^item> a\n  \\<^enum> b");
  const auto blocks = parse_markdown(seq);
  ASSERT_EQ(blocks.size(), 1u);
  ASSERT_EQ(blocks[0].items.size(), 1u);
  const auto& inner = blocks[0].items[0].blocks;
  ASSERT_EQ(inner.size(), 2u);
  EXPECT_EQ(inner[1].kind, MarkdownBlock::Kind::List);
  EXPECT_EQ(inner[1].marker, ListMarker::Enum);
  EXPECT_EQ(inner[1].indent, 2u);
}

TEST(ParseMarkdown, DifferentMarkerSameIndentStartsNewList) {
  const auto blocks = parse_markdown(decode("\\<^item> a\n\\<^enum> b\n\\<^descr> c"));
  ASSERT_EQ(blocks.size(), 3u);
  EXPECT_EQ(blocks[2].marker, ListMarker::Descr);
}

TEST(ParseMarkdown, TabsCountAsOneSymbol) {
  const auto blocks = parse_markdown(decode("\\<^item> a\n\t\\<^item> b"));
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_EQ(blocks[0].items[0].blocks.back().indent, 1u);
}

TEST(Outline, SectionSubsectionSection) {
  const SymbolSeq seq = decode("section ‹A› subsection ‹B› section ‹C›");
  const auto tree = outline(spans_of(seq));
  ASSERT_EQ(tree.size(), 2u);
  ASSERT_EQ(tree[0].children.size(), 1u);
  EXPECT_EQ(tree[0].children[0].title, "B");
  EXPECT_TRUE(tree[1].children.empty());
}

TEST(Outline, NoHeadings) { EXPECT_TRUE(outline(spans_of(decode("text ‹x› definition y"))).empty()); }

TEST(Outline, ChapterThenSubparagraph) {
  const auto tree = outline(spans_of(decode("chapter ‹A› subparagraph ‹ deep ›")));
  ASSERT_EQ(tree.size(), 1u);
  ASSERT_EQ(tree[0].children.size(), 1u);
  EXPECT_EQ(tree[0].children[0].title, "deep");
  EXPECT_EQ(tree[0].children[0].level, 6);
}

TEST(Outline, FilterKeepsAncestors) {
  const auto tree = outline(spans_of(decode("chapter ‹Top› section ‹Introduction› section ‹Other›")));
  const auto hit = filter_outline(tree, "intro");
  ASSERT_EQ(hit.size(), 1u);
  ASSERT_EQ(hit[0].children.size(), 1u);
  EXPECT_EQ(hit[0].children[0].title, "Introduction");
  EXPECT_TRUE(filter_outline(tree, "zzz").empty());
}

TEST(ExtractWords, Examples) {
  const SymbolSeq plain = decode("criterium is wrong");
  const auto words = extract_words(plain);
  ASSERT_EQ(words.size(), 3u);
  EXPECT_EQ(plain.text(words[0]), "criterium");

  EXPECT_TRUE(extract_words(decode("@{term ‹xy›}")).empty());
  EXPECT_TRUE(extract_words(decode("")).empty());
}

TEST(ExtractWords, ApostrophesAndAccents) {
  const SymbolSeq seq = decode("don't café a \\<^item>xy");
  const auto words = extract_words(seq);
  ASSERT_EQ(words.size(), 3u);
  EXPECT_EQ(seq.text(words[0]), "don't");
  EXPECT_EQ(seq.text(words[1]), "café");
  // The control symbol is excluded, the item text after it is not.
  EXPECT_EQ(seq.text(words[2]), "xy");
}

// Properties.

std::vector<Range> flatten(const std::vector<MarkdownBlock>& blocks) {
  std::vector<Range> out;
  for (const MarkdownBlock& b : blocks) out.push_back(b.range);
  return out;
}

void check_structure(const std::vector<MarkdownBlock>& blocks, std::optional<std::size_t> enclosing_indent) {
  for (const MarkdownBlock& b : blocks) {
    if (b.kind != MarkdownBlock::Kind::List) continue;
    ASSERT_FALSE(b.items.empty());
    if (enclosing_indent) { EXPECT_GT(b.indent, *enclosing_indent); }
    for (const MarkdownItem& it : b.items) check_structure(it.blocks, b.indent);
  }
}

std::vector<std::string> random_body_lines(std::mt19937& rng) {
  static const std::vector<std::string> alphabet{"\\<^item> a", "\\<^enum> b", "  \\<^item> c", "    \\<^descr> d",
                                                 "text",       "  more",     "",             ""};
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> n(0, 12);
  std::vector<std::string> lines;
  for (int k = n(rng); k > 0; --k) lines.push_back(alphabet[pick(rng)]);
  return lines;
}

TEST(MarkdownProperties, CoverGroupingAndEscape) {
  std::mt19937 rng(31);
  for (int i = 0; i < 3000; ++i) {
    const auto lines = random_body_lines(rng);
    std::string text;
    for (std::size_t k = 0; k < lines.size(); ++k) text += (k ? "\n" : "") + lines[k];
    const SymbolSeq seq = decode(text);
    const auto blocks = parse_markdown(seq);
    check_structure(blocks, std::nullopt);

    // Top-level blocks are disjoint and ordered.
    const auto ranges = flatten(blocks);
    for (std::size_t k = 1; k < ranges.size(); ++k) {
      EXPECT_LE(ranges[k - 1].stop.offset, ranges[k].start.offset) << text;
    }
    // Every non-blank line lies inside exactly one top-level block; no block
    // crosses a run of two or more blank lines.
    std::size_t blanks = 0;
    std::optional<std::size_t> last_nonblank_end;
    for (std::size_t line = 1; line <= std::min(seq.line_count(), lines.size()); ++line) {
      const std::size_t start = seq.line_start(line);
      const bool blank = lines[line - 1].empty();
      if (blank) {
        ++blanks;
        continue;
      }
      const std::size_t content = start + lines[line - 1].find_first_not_of(' ');
      const auto hits = std::count_if(ranges.begin(), ranges.end(), [&](const Range& r) { return r.contains(content); });
      EXPECT_EQ(hits, 1) << text << " line " << line;
      if (blanks >= 2 && last_nonblank_end) {
        for (const Range& r : ranges) EXPECT_FALSE(r.contains(*last_nonblank_end - 1) && r.contains(content)) << text;
      }
      blanks = 0;
      last_nonblank_end = line < seq.line_count() ? seq.line_start(line + 1) - 1 : seq.size();
    }
  }
}

TEST(MarkdownProperties, AgreesWithReferenceOnShortBodies) {
  using test::oracle::Shape;
  std::vector<std::vector<Shape>> bodies{{}};
  for (int len = 1; len <= 4; ++len) {
    std::vector<std::vector<Shape>> next;
    for (const auto& b : bodies) {
      if (static_cast<int>(b.size()) != len - 1) continue;
      for (Shape s : test::oracle::all_shapes()) {
        auto c = b;
        c.push_back(s);
        next.push_back(c);
      }
    }
    bodies.insert(bodies.end(), next.begin(), next.end());
  }
  for (const auto& body : bodies) {
    const std::string text = test::oracle::body_source(body);
    EXPECT_EQ(test::oracle::render(parse_markdown(decode(text))), test::oracle::reference(body)) << text;
  }
}

TEST(OutlineProperties, Strictness) {
  std::mt19937 rng(32);
  const std::vector<std::string> cmds{"chapter", "section", "subsection", "subsubsection", "paragraph", "subparagraph",
                                      "text"};
  std::uniform_int_distribution<std::size_t> pick(0, cmds.size() - 1);
  std::function<void(const std::vector<OutlineNode>&, int)> check = [&](const std::vector<OutlineNode>& ns, int lvl) {
    for (const OutlineNode& n : ns) {
      EXPECT_GT(n.level, lvl);
      check(n.children, n.level);
    }
  };
  for (int i = 0; i < 500; ++i) {
    std::string text;
    for (int k = 0; k < 12; ++k) text += cmds[pick(rng)] + " ‹t" + std::to_string(k) + "›\n";
    check(outline(spans_of(decode(text))), 0);
  }
}

}  // namespace
}  // namespace pide
