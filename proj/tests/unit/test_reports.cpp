#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <functional>
#include <random>

#include "pide/reports.hpp"
#include "pide/symbols.hpp"
#include "test_support.hpp"

namespace pide {
namespace {

Range span(std::size_t a, std::size_t b) { return Range{Position{a, 1, a + 1}, Position{b, 1, b + 1}}; }

MarkupNode node(std::size_t a, std::size_t b, std::string kind = "n") {
  return MarkupNode{span(a, b), std::move(kind), {}, {}};
}

TEST(BuildTree, DisjointNodesStayFlat) {
  const MarkupTree t = build_tree({node(5, 8), node(0, 3)});
  ASSERT_EQ(t.roots.size(), 2u);
  EXPECT_EQ(t.roots[0].range.start.offset, 0u);
  EXPECT_TRUE(t.debug_notes.empty());
}

TEST(BuildTree, ContainedNodeNests) {
  const MarkupTree t = build_tree({node(2, 4, "inner"), node(0, 10, "outer")});
  ASSERT_EQ(t.roots.size(), 1u);
  EXPECT_EQ(t.roots[0].kind, "outer");
  ASSERT_EQ(t.roots[0].children.size(), 1u);
  EXPECT_EQ(t.roots[0].children[0].kind, "inner");
}

TEST(BuildTree, OverlapIsTrimmedWithNote) {
  const MarkupTree t = build_tree({node(0, 5, "a"), node(3, 8, "b")});
  ASSERT_EQ(t.roots.size(), 1u);
  ASSERT_EQ(t.roots[0].children.size(), 1u);
  EXPECT_EQ(t.roots[0].children[0].range.stop.offset, 5u);
  EXPECT_EQ(t.debug_notes.size(), 1u);
}

TEST(Query, Examples) {
  const MarkupTree t = build_tree({node(0, 10, "cartouche"), node(2, 6, "cartouche"), node(20, 30)});
  EXPECT_TRUE(query(t, 15).empty());
  const auto path = query(t, 3);
  ASSERT_EQ(path.size(), 2u);
  EXPECT_EQ(path[0]->range.stop.offset, 10u);
  EXPECT_EQ(path[1]->range.stop.offset, 6u);
  EXPECT_EQ(query(t, 10).size(), 0u);
  EXPECT_EQ(query(t, 6).size(), 1u);
}

TEST(Query, NestedCartoucheInDocument) {
  const SymbolSeq seq = decode("text ‹a ‹b› c›");
  const MarkupTree t = build_tree({MarkupNode{seq.range(5, 14), "cartouche", {}, {}},
                                   MarkupNode{seq.range(8, 11), "cartouche", {}, {}}});
  EXPECT_EQ(query(t, 9).size(), 2u);
}

TEST(Emit, EmptyReport) {
  EXPECT_EQ(emit({}, MarkupTree{}, ReportFormat::Json), R"({"messages":[],"markup":[]})");
  EXPECT_EQ(emit({}, MarkupTree{}, ReportFormat::Plain), "");
}

TEST(Emit, SchemaAndOrdering) {
  std::vector<Message> ms{Message{Severity::Warning, "b.thy", span(4, 5), "second file", "x.y"},
                          Message{Severity::Error, "a.thy", span(9, 10), "later", "x.y"},
                          Message{Severity::Info, "a.thy", span(1, 2), "earlier", "x.y"}};
  MarkupTree t = build_tree({MarkupNode{span(0, 4), "command", {{"name", "theory"}}, {}}, node(1, 2, "word")});
  const std::string out = emit(ms, t, ReportFormat::Json);
  const auto j = nlohmann::json::parse(out);
  ASSERT_EQ(j["messages"].size(), 3u);
  EXPECT_EQ(j["messages"][0]["text"], "earlier");
  EXPECT_EQ(j["messages"][1]["text"], "later");
  EXPECT_EQ(j["messages"][2]["file"], "b.thy");
  for (const char* key : {"severity", "file", "line", "column", "offset", "end_offset", "text", "origin"}) {
    EXPECT_TRUE(j["messages"][0].contains(key)) << key;
  }
  EXPECT_EQ(j["markup"][0]["properties"]["name"], "theory");
  EXPECT_EQ(j["markup"][0]["children"][0]["kind"], "word");
  EXPECT_EQ(emit(ms, t, ReportFormat::Plain),
            "a.thy:1:2: info: earlier\na.thy:1:10: error: later\nb.thy:1:5: warning: second file\n");
}

TEST(Emit, InvalidUtf8IsReplaced) {
  const std::vector<Message> ms{Message{Severity::Error, "f", span(0, 1), "bad \xff byte", "o"}};
  EXPECT_NO_THROW({ const auto j = nlohmann::json::parse(emit(ms, {}, ReportFormat::Json)); (void)j; });
}

TEST(Messages, HelpersStampAndDetect) {
  std::vector<Message> ms{make_message(Severity::Warning, span(0, 1), "w", "o")};
  EXPECT_FALSE(has_errors(ms));
  append(ms, {Message{Severity::Error, "keep", span(0, 1), "e", "o"}});
  with_file(ms, "f.thy");
  EXPECT_EQ(ms[0].file, "f.thy");
  EXPECT_EQ(ms[1].file, "keep");
  EXPECT_TRUE(has_errors(ms));
}

// Properties.

void laminar(std::mt19937& rng, std::size_t a, std::size_t b, int depth, std::vector<MarkupNode>& out) {
  if (depth > 5 || b <= a || out.size() >= 100) return;
  std::uniform_int_distribution<int> count(0, 3);
  for (int k = count(rng); k > 0 && out.size() < 100; --k) {
    std::uniform_int_distribution<std::size_t> pos(a, b);
    std::size_t x = pos(rng), y = pos(rng);
    if (x > y) std::swap(x, y);
    if (x == y) continue;
    bool clash = false;
    for (const MarkupNode& n : out) {
      const bool nested = n.range.contains(span(x, y)) || span(x, y).contains(n.range);
      if (n.range.overlaps(span(x, y)) && !nested) clash = true;
    }
    if (clash) continue;
    out.push_back(node(x, y, "k" + std::to_string(out.size())));
    laminar(rng, x, y, depth + 1, out);
  }
}

TEST(ReportsProperties, QueryMatchesBruteForce) {
  std::mt19937 rng(61);
  for (int i = 0; i < 500; ++i) {
    std::vector<MarkupNode> nodes;
    laminar(rng, 0, 200, 0, nodes);
    std::vector<MarkupNode> shuffled = nodes;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const MarkupTree t = build_tree(shuffled);
    EXPECT_TRUE(t.debug_notes.empty());
    for (std::size_t off = 0; off <= 201; ++off) {
      std::vector<const MarkupNode*> expected;
      for (const MarkupNode& n : shuffled) {
        if (n.range.contains(off)) expected.push_back(&n);
      }
      // Outermost first; equal ranges keep input order.
      std::stable_sort(expected.begin(), expected.end(),
                       [](const MarkupNode* a, const MarkupNode* b) { return a->range.length() > b->range.length(); });
      const auto got = query(t, off);
      ASSERT_EQ(got.size(), expected.size()) << "offset " << off;
      for (std::size_t k = 0; k < got.size(); ++k) {
        EXPECT_EQ(got[k]->range, expected[k]->range);
        EXPECT_EQ(got[k]->kind, expected[k]->kind);
      }
    }
  }
}

TEST(ReportsProperties, TreeInvariants) {
  std::mt19937 rng(62);
  std::function<void(const std::vector<MarkupNode>&, const Range*)> check = [&](const std::vector<MarkupNode>& ns,
                                                                                const Range* parent) {
    for (std::size_t k = 0; k < ns.size(); ++k) {
      if (parent) { EXPECT_TRUE(parent->contains(ns[k].range)); }
      if (k > 0) { EXPECT_LE(ns[k - 1].range.stop.offset, ns[k].range.start.offset); }
      check(ns[k].children, &ns[k].range);
    }
  };
  for (int i = 0; i < 500; ++i) {
    // Arbitrary (possibly overlapping) ranges: trimming must restore the invariants.
    std::vector<MarkupNode> nodes;
    std::uniform_int_distribution<std::size_t> pos(0, 60);
    for (int k = 0; k < 30; ++k) {
      std::size_t x = pos(rng), y = pos(rng);
      if (x > y) std::swap(x, y);
      if (x < y) nodes.push_back(node(x, y));
    }
    check(build_tree(nodes).roots, nullptr);
  }
}

TEST(ReportsProperties, Determinism) {
  std::mt19937 rng(63);
  for (int i = 0; i < 100; ++i) {
    std::vector<MarkupNode> nodes;
    laminar(rng, 0, 100, 0, nodes);
    std::vector<Message> ms;
    for (const MarkupNode& n : nodes) ms.push_back(Message{Severity::Info, "f", n.range, n.kind, "o"});
    EXPECT_EQ(emit(ms, build_tree(nodes), ReportFormat::Json), emit(ms, build_tree(nodes), ReportFormat::Json));
  }
}

}  // namespace
}  // namespace pide
