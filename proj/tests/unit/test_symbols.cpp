#include <gtest/gtest.h>

#include <random>

#include "pide/errors.hpp"
#include "pide/symbols.hpp"
#include "test_support.hpp"

namespace pide {
namespace {

std::string concat_sources(const SymbolSeq& seq) {
  std::string out;
  for (const Symbol& s : seq) out += s.source;
  return out;
}

TEST(Decode, NamedSymbol) {
  const SymbolSeq seq = decode("\\<comment>");
  ASSERT_EQ(seq.size(), 1u);
  EXPECT_EQ(seq[0].kind, SymbolKind::Named);
  EXPECT_EQ(seq[0].name, "comment");
}

TEST(Decode, EmptyInput) { EXPECT_TRUE(decode("").empty()); }

TEST(Decode, ControlFollowedByText) {
  const SymbolSeq seq = decode("\\<^item> a");
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq[0].kind, SymbolKind::Control);
  EXPECT_EQ(seq[0].name, "item");
  EXPECT_EQ(seq[1].kind, SymbolKind::PlainChar);
  EXPECT_EQ(seq[1].source, " ");
  EXPECT_EQ(seq[2].source, "a");
  EXPECT_EQ(decode(encode(seq)).symbols(), seq.symbols());
}

TEST(Decode, GlyphsNormalizeToNamedSymbols) {
  const SymbolSeq seq = decode("‹x›");
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_TRUE(seq[0].is_open());
  EXPECT_EQ(seq[0].source, "‹");
  EXPECT_TRUE(seq[2].is_close());
}

TEST(Decode, MalformedEscapes) {
  for (const std::string text : {"\\<", "\\<^", "\\<^1x>", "\\<foo", "\\<a b>"}) {
    const SymbolSeq seq = decode(text);
    ASSERT_FALSE(seq.empty()) << text;
    EXPECT_EQ(seq[0].kind, SymbolKind::Malformed) << text;
    EXPECT_EQ(concat_sources(seq), text);
  }
}

TEST(Decode, MalformedControlStopsAtLineEnd) {
  const SymbolSeq seq = decode("\\<^ x\ny");
  ASSERT_GE(seq.size(), 3u);
  EXPECT_EQ(seq[0].kind, SymbolKind::Malformed);
  EXPECT_EQ(seq[0].source, "\\<^ x");
  EXPECT_TRUE(seq[1].is_newline());
}

TEST(Decode, PositionsCountSymbols) {
  const SymbolSeq seq = decode("\\<alpha>b\n\\<^item>c");
  const Position p = seq.position(4);
  EXPECT_EQ(p.line, 2u);
  EXPECT_EQ(p.column, 2u);
  EXPECT_EQ(seq.position(seq.size()).offset, seq.size());
  EXPECT_EQ(seq.line_count(), 2u);
}

TEST(Encode, EmptyAndEscapePolicy) {
  EXPECT_EQ(encode(SymbolSeq{}), "");
  EXPECT_EQ(encode(SymbolSeq({Symbol{SymbolKind::Named, "‹", "open"}})), "\\<open>");
}

TEST(ClassifyControl, Roles) {
  EXPECT_EQ(classify_control(Symbol{SymbolKind::Control, "\\<^enum>", "enum"}), ControlRole::Enum);
  EXPECT_EQ(classify_control(Symbol{SymbolKind::PlainChar, "x", ""}), ControlRole::NotControl);
  EXPECT_EQ(classify_control(Symbol{SymbolKind::Control, "\\<^cancel>", "cancel"}), ControlRole::Cancel);
  EXPECT_EQ(classify_control(Symbol{SymbolKind::Control, "\\<^term>", "term"}), ControlRole::OtherControl);
  EXPECT_EQ(classify_control(Symbol{SymbolKind::Named, "\\<comment>", "comment"}), ControlRole::NotControl);
}

TEST(SymbolTable, BuiltinEntries) {
  const SymbolTable& t = SymbolTable::builtin();
  for (const char* name :
       {"open", "close", "comment", "item", "enum", "descr", "cancel", "latex", "Rightarrow", "equiv"}) {
    EXPECT_NE(t.find(name), nullptr) << name;
  }
  EXPECT_TRUE(t.find("item")->is_control);
  EXPECT_FALSE(t.find("open")->is_control);
}

TEST(SymbolTable, LoadMergesAndRejectsGarbage) {
  const SymbolTable t = SymbolTable::load("# extra\nsnowman 2603\nmybold 1D401 control\n");
  ASSERT_NE(t.find("snowman"), nullptr);
  EXPECT_EQ(*t.find("snowman")->display, U'\u2603');
  EXPECT_TRUE(t.find("mybold")->is_control);
  EXPECT_NE(t.find("open"), nullptr);
  const SymbolSeq seq = decode("☃", t);
  EXPECT_TRUE(seq[0].is_named("snowman"));
  EXPECT_THROW((void)SymbolTable::load("bad-name 41\n"), ConfigError);
  EXPECT_THROW((void)SymbolTable::load("x zz\n"), ConfigError);
}

TEST(SymbolTable, InvalidUtf8IsSanitizedFirst) { EXPECT_EQ(sanitize_utf8("a\xff"), "a\xEF\xBF\xBD"); }

TEST(CartoucheEnd, Nesting) {
  const SymbolSeq seq = decode("‹a ‹b› c› d");
  EXPECT_EQ(cartouche_end(seq, 0, seq.size()), 9u);
  EXPECT_EQ(cartouche_end(seq, 1, seq.size()), std::nullopt);
  EXPECT_EQ(cartouche_end(seq, 0, 5), std::nullopt);
}

// Properties over random input, including truncated escapes.

TEST(SymbolProperties, LosslessCover) {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = sanitize_utf8(test::symbol_soup(rng, 200));
    EXPECT_EQ(concat_sources(decode(text)), text);
  }
}

TEST(SymbolProperties, NormalizationIdempotence) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const SymbolSeq once = decode(sanitize_utf8(test::symbol_soup(rng, 200)));
    const SymbolSeq twice = decode(encode(once));
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t k = 0; k < once.size(); ++k) {
      EXPECT_EQ(once[k].kind, twice[k].kind);
      EXPECT_EQ(once[k].name, twice[k].name);
    }
    EXPECT_EQ(encode(twice), encode(once));
  }
}

TEST(SymbolProperties, GrammarExclusivity) {
  std::mt19937 rng(13);
  for (int i = 0; i < 1000; ++i) {
    for (const Symbol& s : decode(sanitize_utf8(test::symbol_soup(rng, 200)))) {
      EXPECT_FALSE(s.source.empty());
      switch (s.kind) {
        case SymbolKind::Named:
          EXPECT_TRUE(is_symbol_name(s.name));
          EXPECT_TRUE(s.source == "\\<" + s.name + ">" || SymbolTable::builtin().find(s.name) != nullptr);
          break;
        case SymbolKind::Control:
          EXPECT_TRUE(is_symbol_name(s.name));
          EXPECT_TRUE(s.source == "\\<^" + s.name + ">" || SymbolTable::builtin().find(s.name) != nullptr);
          break;
        case SymbolKind::Malformed:
          EXPECT_EQ(s.source.rfind("\\<", 0), 0u);
          break;
        case SymbolKind::PlainChar:
          EXPECT_TRUE(s.name.empty());
          break;
      }
    }
  }
}

}  // namespace
}  // namespace pide
