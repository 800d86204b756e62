#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "pide/bibtex.hpp"
#include "pide/outer_syntax.hpp"
#include "pide/reports.hpp"
#include "pide/sessions.hpp"
#include "pide/symbols.hpp"
#include "pide/text_structure.hpp"

namespace {

std::string read_fixture(const std::string& rel) {
  std::ifstream in(std::string(PIDE_FIXTURES_DIR) + "/" + rel, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string repeat(const std::string& s, std::size_t n) {
  std::string out;
  out.reserve(s.size() * n);
  for (std::size_t i = 0; i < n; ++i) out += s;
  return out;
}

void BM_DecodeTokenize(benchmark::State& state) {
  const std::string text = repeat(read_fixture("thy/Paper.thy"), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const pide::SymbolSeq seq = pide::decode(text);
    benchmark::DoNotOptimize(pide::tokenize(seq, pide::KeywordTable::builtin()));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_DecodeTokenize)->Arg(1)->Arg(16)->Arg(256);

void BM_ParseSpans(benchmark::State& state) {
  const pide::SymbolSeq seq = pide::decode(repeat(read_fixture("thy/Paper.thy"), 64));
  const auto toks = pide::tokenize(seq, pide::KeywordTable::builtin());
  for (auto _ : state) benchmark::DoNotOptimize(pide::parse_spans(toks, pide::KeywordTable::builtin()));
}
BENCHMARK(BM_ParseSpans);

void BM_Markdown(benchmark::State& state) {
  const std::string body = "\\<^item> first\n  \\<^enum> nested\n\n\\<^item> second\ntext\n\n\n";
  const pide::SymbolSeq seq = pide::decode(repeat(body, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(pide::parse_markdown(seq));
}
BENCHMARK(BM_Markdown)->Arg(1)->Arg(64)->Arg(1024);

void BM_BibParse(benchmark::State& state) {
  const std::string text = repeat(read_fixture("bib/valid.bib"), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto toks = pide::tokenize_bib(text);
    benchmark::DoNotOptimize(pide::parse_entries(toks));
    benchmark::DoNotOptimize(pide::token_lines(toks));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_BibParse)->Arg(1)->Arg(64);

void BM_BuildGraph(benchmark::State& state) {
  std::mt19937 rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<pide::SessionEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[i].name = "S" + std::to_string(i);
    if (i > 0) entries[i].parent = "S" + std::to_string(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng));
  }
  for (auto _ : state) {
    const pide::GraphResult g = pide::build_graph(entries);
    benchmark::DoNotOptimize(pide::topological_order(g.graph));
  }
}
BENCHMARK(BM_BuildGraph)->Arg(50)->Arg(1000);

void BM_MarkupQuery(benchmark::State& state) {
  std::vector<pide::MarkupNode> nodes;
  for (std::size_t i = 0; i < 10000; i += 10) {
    nodes.push_back({pide::Range{{i, 1, i + 1}, {i + 10, 1, i + 11}}, "outer", {}, {}});
    nodes.push_back({pide::Range{{i + 2, 1, i + 3}, {i + 5, 1, i + 6}}, "inner", {}, {}});
  }
  const pide::MarkupTree tree = pide::build_tree(nodes);
  std::size_t off = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pide::query(tree, off));
    off = (off + 37) % 10000;
  }
}
BENCHMARK(BM_MarkupQuery);

}  // namespace

BENCHMARK_MAIN();
