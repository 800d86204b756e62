#include <gtest/gtest.h>

#include <sys/stat.h>

#include <random>

#include "pide/bibtex.hpp"
#include "pide/errors.hpp"
#include "test_support.hpp"

namespace pide {
namespace {

namespace fs = std::filesystem;
using K = BibTokenKind;

std::vector<BibToken> substantive(const std::vector<BibToken>& toks) {
  std::vector<BibToken> out;
  for (const BibToken& t : toks) {
    if (t.kind != K::Space) out.push_back(t);
  }
  return out;
}

std::vector<std::pair<K, std::string>> shape(const std::vector<BibToken>& toks) {
  std::vector<std::pair<K, std::string>> out;
  for (const BibToken& t : toks) out.emplace_back(t.kind, t.source);
  return out;
}

void expect_tiling(const std::string& text, const std::vector<BibToken>& toks) {
  const SymbolSeq seq = decode(text);
  std::size_t at = 0;
  for (const BibToken& t : toks) {
    ASSERT_EQ(t.range.start.offset, at) << text;
    ASSERT_FALSE(t.source.empty());
    EXPECT_EQ(seq.text(t.range), t.source);
    at = t.range.stop.offset;
  }
  EXPECT_EQ(at, seq.size()) << text;
}

BibParse parse(const std::string& text) { return parse_entries(tokenize_bib(text)); }

/// A scratch directory removed on scope exit.
class ScratchDir {
 public:
  ScratchDir() {
    std::string tmpl = (fs::temp_directory_path() / "pide-test-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir / name;
  test::write_file(p, "#!/bin/sh\n" + body);
  ::chmod(p.c_str(), 0755);
  return p;
}

TEST(TokenizeBib, ArticleEntry) {
  const std::vector<std::pair<K, std::string>> expected{
      {K::At, "@"},          {K::EntryType, "Article"}, {K::BraceOpen, "{"}, {K::Key, "k"},
      {K::Comma, ","},       {K::FieldName, "author"},  {K::Equals, "="},    {K::BracedValue, "{A}"},
      {K::BraceClose, "}"}};
  EXPECT_EQ(shape(substantive(tokenize_bib("@Article{k, author = {A}}"))), expected);
}

TEST(TokenizeBib, InterstitialProseIsJunk) {
  const auto toks = tokenize_bib("Some prose.\n@Misc{a, title = {T}}\nMore prose.");
  EXPECT_EQ(toks.front().kind, K::Junk);
  EXPECT_EQ(toks.back().kind, K::Junk);
  EXPECT_FALSE(toks.front().diagnostic);
}

TEST(TokenizeBib, StringMacro) {
  const auto toks = substantive(tokenize_bib("@string{x = \"Y\"}"));
  const std::vector<std::pair<K, std::string>> expected{{K::At, "@"},        {K::EntryType, "string"},
                                                        {K::BraceOpen, "{"}, {K::FieldName, "x"},
                                                        {K::Equals, "="},    {K::QuotedValue, "\"Y\""},
                                                        {K::BraceClose, "}"}};
  EXPECT_EQ(shape(toks), expected);
  const BibParse p = parse("@string{x = \"Y\"}");
  ASSERT_EQ(p.entries.size(), 1u);
  EXPECT_EQ(p.entries[0].kind, BibEntryKind::StringMacro);
}

TEST(TokenizeBib, ConcatenationAndMacros) {
  const auto toks = substantive(tokenize_bib("@Misc{k, note = acm # \" and \" # {x} # 2001, month = jan}"));
  std::vector<K> kinds;
  for (const BibToken& t : toks) kinds.push_back(t.kind);
  const std::vector<K> expected{K::At,          K::EntryType, K::BraceOpen,   K::Key,    K::Comma,
                                K::FieldName,   K::Equals,    K::MacroName,   K::Concat, K::QuotedValue,
                                K::Concat,      K::BracedValue, K::Concat,    K::Number, K::Comma,
                                K::FieldName,   K::Equals,    K::MacroName,   K::BraceClose};
  EXPECT_EQ(kinds, expected);
}

TEST(TokenizeBib, ParenthesizedEntries) {
  const auto toks = substantive(tokenize_bib("@Misc(k, title = {T})"));
  EXPECT_EQ(toks[2].kind, K::ParenOpen);
  EXPECT_EQ(toks.back().kind, K::ParenClose);
}

TEST(TokenizeBib, UnbalancedValueRecoversAtNextEntry) {
  const std::string text = "@Misc{a, title = {oops}}}, x = \n@Misc{b, title = {T}}\n";
  const auto toks = tokenize_bib(text);
  expect_tiling(text, toks);
  const BibParse p = parse_entries(toks);
  ASSERT_EQ(p.entries.size(), 2u);
  EXPECT_EQ(p.entries[1].key, "b");
}

TEST(ParseEntries, TwoEntriesInOrder) {
  const BibParse p = parse("@Misc{a, title={A}}\n@Book{b, title={B}}");
  EXPECT_TRUE(p.messages.empty());
  ASSERT_EQ(p.entries.size(), 2u);
  EXPECT_EQ(p.entries[0].key, "a");
  EXPECT_EQ(p.entries[1].entry_type, "book");
  EXPECT_EQ(p.entries[1].type_spelling, "Book");
}

TEST(ParseEntries, MissingCloseRecovers) {
  const BibParse p = parse("@Misc{a, title = {A}\n\n@Misc{b, title = {B}}\n");
  ASSERT_EQ(p.messages.size(), 1u);
  EXPECT_EQ(p.messages[0].severity, Severity::Error);
  ASSERT_EQ(p.entries.size(), 2u);
  EXPECT_EQ(p.entries[1].key, "b");
  EXPECT_EQ(p.entries[1].fields.size(), 1u);
}

TEST(ParseEntries, CommentEntry) {
  const BibParse p = parse("@comment{anything {nested} here, x = y}");
  ASSERT_EQ(p.entries.size(), 1u);
  EXPECT_EQ(p.entries[0].kind, BibEntryKind::Comment);
  EXPECT_TRUE(p.entries[0].fields.empty());
}

TEST(ParseEntries, DuplicateFieldFirstWins) {
  const BibParse p = parse("@Misc{a, title = {One}, Title = {Two}}");
  ASSERT_EQ(p.messages.size(), 1u);
  EXPECT_EQ(p.messages[0].severity, Severity::Warning);
  EXPECT_EQ(field_text(*p.entries[0].field("TITLE")), "One");
}

TEST(ParseEntries, MissingKey) {
  const BibParse p = parse("@Misc{, title = {T}}");
  ASSERT_FALSE(p.messages.empty());
  EXPECT_EQ(p.messages[0].severity, Severity::Error);
}

TEST(FieldSpec, BuiltinTable) {
  const FieldSpec& spec = FieldSpec::builtin();
  EXPECT_GE(spec.entries().size(), 14u);
  for (const char* t : {"article", "book", "booklet", "inbook", "incollection", "inproceedings", "manual",
                        "mastersthesis", "misc", "phdthesis", "proceedings", "techreport", "unpublished"}) {
    EXPECT_NE(spec.find(t), nullptr) << t;
  }
  const FieldSpec::Entry* article = spec.find("article");
  const std::vector<std::vector<std::string>> req{{"author"}, {"title"}, {"journal"}, {"year"}};
  EXPECT_EQ(article->required, req);
  EXPECT_EQ(spec.find("inproceedings")->required,
            (std::vector<std::vector<std::string>>{{"author"}, {"title"}, {"booktitle"}, {"year"}}));
  EXPECT_TRUE(spec.universal().count("crossref"));
}

TEST(FieldSpec, ParseRejectsGarbage) {
  const FieldSpec s = FieldSpec::parse("# t\nthing = a b/c ; d\n* = ; note\n");
  ASSERT_NE(s.find("thing"), nullptr);
  EXPECT_EQ(s.find("thing")->required.size(), 2u);
  EXPECT_TRUE(s.universal().count("note"));
  EXPECT_THROW((void)FieldSpec::parse("no equals sign\n"), ConfigError);
  EXPECT_THROW((void)FieldSpec::parse("* = note\n"), ConfigError);
}

TEST(CheckRequiredFields, MissingJournal) {
  const BibParse p = parse("@Article{k, author = {A}, title = {T}, year = 2000}");
  const auto ms = check_required_fields(p.entries[0], FieldSpec::builtin());
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].severity, Severity::Warning);
  EXPECT_NE(ms[0].text.find("journal"), std::string::npos);
}

TEST(CheckRequiredFields, CompleteArticle) {
  const BibParse p = parse("@Article{k, author = {A}, title = {T}, journal = {J}, year = 2000}");
  EXPECT_TRUE(check_required_fields(p.entries[0], FieldSpec::builtin()).empty());
}

TEST(CheckRequiredFields, UnknownType) {
  const BibParse p = parse("@Foo{k, bar = {x}}");
  const auto ms = check_required_fields(p.entries[0], FieldSpec::builtin());
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].severity, Severity::Warning);
}

TEST(CheckRequiredFields, AlternativesAndExtras) {
  const BibParse p = parse("@Book{k, editor = {E}, title = {T}, publisher = {P}, year = 1, doi = {x}}");
  const auto ms = check_required_fields(p.entries[0], FieldSpec::builtin());
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].severity, Severity::Info);
  EXPECT_NE(ms[0].text.find("doi"), std::string::npos);
}

TEST(CheckDuplicateKeys, CaseInsensitive) {
  const BibParse p = parse("@Misc{Key, title={A}}\n@Misc{key, title={B}}\n");
  const auto ms = check_duplicate_keys(p.entries);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].severity, Severity::Error);
}

TEST(OutlineBib, Examples) {
  const BibParse p = parse(test::read_file(test::fixture("bib/valid.bib")));
  const auto all = outline_bib(p.entries);
  EXPECT_EQ(all.size(), p.entries.size());
  EXPECT_TRUE(outline_bib({}).empty());
  for (const OutlineNode& n : outline_bib(p.entries, "PAUL")) EXPECT_NE(n.title.find("paul"), std::string::npos);
  EXPECT_FALSE(outline_bib(p.entries, "paul").empty());
}

TEST(TokenLines, Examples) {
  const auto toks = tokenize_bib("@Article{k, author = {A\nB}}");
  const TokenLines tl = token_lines(toks);
  EXPECT_EQ(tl.token_of_line.size(), 9u);
  EXPECT_EQ(tl.text, "@\nArticle\n{\nk\n,\nauthor\n=\n{A B}\n}\n");
  EXPECT_TRUE(token_lines(tokenize_bib("")).text.empty());
}

TEST(ParseBlg, WarningWithLineReference) {
  const auto toks = tokenize_bib("@Article{k, author = {A}, title = {T}, year = 2000}");
  const BibParse p = parse_entries(toks);
  const TokenLines tl = token_lines(toks);
  const BlgResult r = parse_blg("Warning--empty journal in k\n", tl, toks, p.entries);
  ASSERT_EQ(r.messages.size(), 1u);
  EXPECT_EQ(r.messages[0].severity, Severity::Warning);
  EXPECT_EQ(r.messages[0].range, *p.entries[0].key_range);

  const BlgResult r2 = parse_blg("Warning--something odd\n--line 7 of file sketch.bib\n", tl, toks, p.entries);
  ASSERT_EQ(r2.messages.size(), 1u);
  EXPECT_EQ(r2.messages[0].range, toks[tl.token_of_line[6]].range);
}

TEST(ParseBlg, ErrorBlocksAndSkips) {
  const auto toks = tokenize_bib("@Misc{k, title = {T}}");
  const BibParse p = parse_entries(toks);
  const TokenLines tl = token_lines(toks);
  const std::string log =
      "This is BibTeX, Version 0.99d\n"
      "I was expecting a `,' or a `}'---line 3 of file sketch.bib\n"
      " : {\n"
      " :  ^\n"
      "I'm skipping whatever remains of this entry\n";
  const BlgResult r = parse_blg(log, tl, toks, p.entries);
  ASSERT_EQ(r.messages.size(), 1u);
  EXPECT_EQ(r.messages[0].severity, Severity::Error);
  EXPECT_EQ(r.messages[0].range, toks[tl.token_of_line[2]].range);
  EXPECT_EQ(r.unmatched, (std::vector<std::string>{"This is BibTeX, Version 0.99d"}));
}

TEST(ParseBlg, EmptyLogAndOutOfRange) {
  const auto toks = tokenize_bib("@Misc{k, title = {T}}");
  const BibParse p = parse_entries(toks);
  const TokenLines tl = token_lines(toks);
  EXPECT_TRUE(parse_blg("", tl, toks, p.entries).messages.empty());
  const BlgResult r = parse_blg("Bad thing---line 99 of file sketch.bib\n", tl, toks, p.entries);
  ASSERT_EQ(r.messages.size(), 1u);
  EXPECT_EQ(r.messages[0].range.start.offset, toks.back().range.stop.offset);
  EXPECT_NE(r.messages[0].text.find("99"), std::string::npos);
}

TEST(RunExternalCheck, FakeToolWritesLog) {
  ScratchDir dir;
  const fs::path exe = write_script(dir.path(), "fakebib",
                                    "test -f \"$1.aux\" || exit 3\n"
                                    "grep -q 'citation{\\*}' \"$1.aux\" || exit 4\n"
                                    "echo \"Warning--empty journal in k\" > \"$1.blg\"\n"
                                    "exit 1\n");
  fs::create_directories(dir.path() / "work");
  const std::string log = run_external_check("@Article{k, title = {T}}", exe, dir.path() / "work");
  EXPECT_EQ(log, "Warning--empty journal in k\n");
  EXPECT_TRUE(fs::exists(dir.path() / "work" / "sketch.bib"));
  EXPECT_EQ(test::read_file(dir.path() / "work" / "sketch.bib"),
            token_lines(tokenize_bib("@Article{k, title = {T}}")).text);
}

TEST(RunExternalCheck, MissingExecutable) {
  ScratchDir dir;
  EXPECT_THROW((void)run_external_check("", dir.path() / "no-such-bibtex", dir.path()), EnvironmentError);
}

TEST(RunExternalCheck, Timeout) {
  ScratchDir dir;
  const fs::path exe = write_script(dir.path(), "slowbib", "sleep 5\n");
  const auto t0 = std::chrono::steady_clock::now();
  EXPECT_THROW((void)run_external_check("", exe, dir.path(), std::chrono::milliseconds(200)), EnvironmentError);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
}

TEST(RunExternalCheck, NoLogIsAnEnvironmentError) {
  ScratchDir dir;
  const fs::path exe = write_script(dir.path(), "silentbib", "exit 0\n");
  EXPECT_THROW((void)run_external_check("", exe, dir.path()), EnvironmentError);
}

TEST(FieldText, MacrosMonthsAndBraces) {
  const BibParse p = parse("@string{acm = \"ACM\"}\n@Misc{k, note = acm # \" {Press}\", month = jan}");
  const auto macros = string_macros(p.entries);
  EXPECT_EQ(field_text(*p.entries[1].field("note"), macros), "ACM Press");
  EXPECT_EQ(field_text(*p.entries[1].field("month"), macros), "January");
}

TEST(RenderHtml, Examples) {
  const std::string empty = render_html({});
  EXPECT_NE(empty.find("<html"), std::string::npos);
  EXPECT_NE(empty.find("</html>"), std::string::npos);
  EXPECT_EQ(empty.find("<li"), std::string::npos);

  const BibParse one = parse("@Article{k, author={A}, title={Deep Title}, journal={J}, year=2000}");
  const std::string html = render_html(one.entries);
  EXPECT_EQ(std::count(html.begin(), html.end(), '\n') > 0, true);
  EXPECT_NE(html.find("Deep Title"), std::string::npos);
  std::size_t items = 0;
  for (std::size_t at = html.find("<li"); at != std::string::npos; at = html.find("<li", at + 1)) ++items;
  EXPECT_EQ(items, 1u);

  const BibParse fixture = parse(test::read_file(test::fixture("bib/valid.bib")));
  EXPECT_EQ(render_html(fixture.entries), render_html(fixture.entries));
}

TEST(RenderHtml, SortedByKeyAndEscaped) {
  const BibParse p = parse("@Misc{b, title={B <&>}}\n@Misc{A, title={A}}");
  const std::string html = render_html(p.entries);
  EXPECT_LT(html.find(">A<"), html.find(">b<"));
  EXPECT_NE(html.find("&lt;&amp;&gt;"), std::string::npos);
}

// Properties.

TEST(BibProperties, TilingOnRandomBytes) {
  std::mt19937 rng(51);
  for (int i = 0; i < 2000; ++i) {
    const std::string text = sanitize_utf8(test::random_bytes(rng, 300));
    expect_tiling(text, tokenize_bib(text));
  }
}

std::string bib_soup(std::mt19937& rng) {
  static const std::vector<std::string> pieces{"@", "Article", "misc", "string", "comment", "preamble", "{",  "}",
                                               "(", ")",       ",",    "=",      "#",       "\"",       "k1", "title",
                                               " ", "\n",      "2001", "x y",    "%",       "\\"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> n(0, 60);
  std::string s;
  for (int k = n(rng); k > 0; --k) s += pieces[pick(rng)];
  return s;
}

TEST(BibProperties, TilingAndLineMapOnStructuredSoup) {
  std::mt19937 rng(52);
  for (int i = 0; i < 3000; ++i) {
    const std::string text = bib_soup(rng);
    const auto toks = tokenize_bib(text);
    expect_tiling(text, toks);
    const TokenLines tl = token_lines(toks);
    std::vector<std::string> lines;
    std::istringstream in(tl.text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    std::size_t substantive_count = 0;
    for (const BibToken& t : toks) substantive_count += t.is_substantive();
    ASSERT_EQ(lines.size(), tl.token_of_line.size()) << text;
    ASSERT_EQ(lines.size(), substantive_count) << text;
    for (std::size_t k = 0; k < lines.size(); ++k) EXPECT_EQ(lines[k], line_form(toks[tl.token_of_line[k]]));
    EXPECT_NO_THROW((void)parse_entries(toks));
  }
}

std::string canonical(const std::vector<BibEntry>& entries) {
  std::string out;
  for (const BibEntry& e : entries) {
    if (e.kind != BibEntryKind::Regular) continue;
    out += "@" + e.type_spelling + "{" + e.key;
    for (const BibField& f : e.fields) {
      out += ",\n  " + f.name + " = ";
      for (const BibToken& t : f.value) out += t.kind == K::Concat ? " # " : t.source;
    }
    out += "\n}\n\n";
  }
  return out;
}

TEST(BibProperties, ParseSerializeRoundTrip) {
  std::mt19937 rng(53);
  const std::vector<std::string> types{"Article", "book", "InProceedings", "misc"};
  const std::vector<std::string> values{"{A {B} C}", "\"quoted {x}\"", "2001", "jan", "{x} # \" y\" # acm"};
  std::uniform_int_distribution<std::size_t> pt(0, types.size() - 1), pv(0, values.size() - 1);
  std::uniform_int_distribution<int> nf(0, 5);
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (int e = 0; e < 3; ++e) {
      text += "junk line\n@" + types[pt(rng)] + "{key" + std::to_string(e);
      for (int f = nf(rng); f > 0; --f) text += ", field" + std::to_string(f) + " = " + values[pv(rng)];
      text += "}\n";
    }
    const BibParse first = parse(text);
    ASSERT_TRUE(first.messages.empty()) << text;
    const std::string again = canonical(first.entries);
    const BibParse second = parse(again);
    ASSERT_EQ(first.entries.size(), second.entries.size());
    for (std::size_t k = 0; k < first.entries.size(); ++k) {
      const BibEntry& a = first.entries[k];
      const BibEntry& b = second.entries[k];
      EXPECT_EQ(a.entry_type, b.entry_type);
      EXPECT_EQ(a.key, b.key);
      ASSERT_EQ(a.fields.size(), b.fields.size());
      for (std::size_t f = 0; f < a.fields.size(); ++f) {
        EXPECT_EQ(a.fields[f].name, b.fields[f].name);
        EXPECT_EQ(field_text(a.fields[f]), field_text(b.fields[f]));
      }
    }
    EXPECT_EQ(canonical(second.entries), again);
  }
}

}  // namespace
}  // namespace pide
