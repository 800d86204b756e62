#include "pipeline.hpp"

#include <unistd.h>

#include <fstream>
#include <set>
#include <sstream>

#include "pide/errors.hpp"
#include "pide/thy_structure.hpp"

namespace pide::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOrigin = "cli.check";

std::optional<std::string> read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

MarkupNode node(const Range& r, std::string kind, std::map<std::string, std::string> props = {}) {
  return MarkupNode{r, std::move(kind), std::move(props), {}};
}

std::string_view comment_kind_name(FormalCommentKind k) { return formal_comment_kind_name(k); }

class TheoryChecker {
 public:
  TheoryChecker(const fs::path& file, std::string_view text, const Context& ctx)
      : file_(file), ctx_(ctx), seq_(decode(text, ctx.symbols)) {}

  Analysis run() {
    TheorySyntax syn = parse_theory(seq_, ctx_.keywords);
    append(out_.messages, std::move(syn.messages));
    session_ = ctx_.graph.session_of(file_);
    env_.graph = &ctx_.graph;
    env_.session = session_;
    env_.base_dir = file_.parent_path().empty() ? fs::path(".") : file_.parent_path();

    tokens(syn.tokens);
    if (syn.header) header(*syn.header);
    session_bibs();
    loads(syn);
    for (const CommandSpan& span : syn.spans) command(span);
    out_.outline = outline(syn.spans);
    out_.tree = build_tree(std::move(nodes_));
    with_file(out_.messages, file_.generic_string());
    return std::move(out_);
  }

 private:
  void error(const Range& r, std::string text) {
    out_.messages.push_back(make_message(Severity::Error, r, std::move(text), kOrigin));
  }

  void tokens(const std::vector<Token>& toks) {
    for (const Token& t : toks) {
      switch (t.kind) {
        case TokenKind::ErrorToken:
          error(t.range, "Malformed outer syntax: \"" + t.source.substr(0, 40) + (t.source.size() > 40 ? "...\"" : "\""));
          break;
        case TokenKind::Cartouche:
          nodes_.push_back(node(t.range, "cartouche"));
          break;
        case TokenKind::String:
          nodes_.push_back(node(t.range, "string"));
          break;
        case TokenKind::SourceComment:
          nodes_.push_back(node(t.range, "source_comment"));
          break;
        case TokenKind::FormalCommentMarker:
          formal_comment(t);
          break;
        default:
          break;
      }
    }
  }

  void header(const TheoryHeader& h) {
    if (!h.name.empty() && h.name != file_.stem().string()) {
      error(h.name_range, "Bad theory name \"" + h.name + "\" for file \"" + file_.filename().string() + "\"");
    }
    for (const ImportRef& imp : h.imports) import(imp);
  }

  void import(const ImportRef& imp) {
    std::error_code ec;
    const fs::path dir = file_.parent_path();
    if (imp.text.find('/') != std::string::npos) {
      if (!fs::is_regular_file(dir / (imp.text + ".thy"), ec)) error(imp.range, "Bad theory import \"" + imp.text + "\"");
      return;
    }
    if (session_) {
      const ResolvedTheory r = resolve_theory(imp.text, *session_, ctx_.graph);
      if (r.error) {
        error(imp.range, r.error->text);
      } else if (r.path && !r.id.global && !fs::is_regular_file(*r.path, ec)) {
        error(imp.range, "Bad theory import \"" + imp.text + "\" (no file " + r.path->generic_string() + ")");
      }
      return;
    }
    if (ctx_.graph.global_names().count(imp.text) != 0 || default_global_theories().count(imp.text) != 0) return;
    if (imp.text.find('.') != std::string::npos) {
      if (ctx_.graph.theory_index().count(imp.text) == 0) {
        error(imp.range, "Unknown theory \"" + imp.text + "\" (no session context)");
      }
      return;
    }
    if (!fs::is_regular_file(dir / (imp.text + ".thy"), ec)) {
      error(imp.range, "Bad theory import \"" + imp.text + "\" (no file " + (dir / (imp.text + ".thy")).generic_string() +
                           ")");
    }
  }

  void session_bibs() {
    if (!session_) return;
    const SessionEntry* entry = ctx_.graph.find(*session_);
    if (entry == nullptr) return;
    for (const fs::path& doc : entry->document_files) {
      if (doc.extension() != ".bib") continue;
      if (auto text = read_text(entry->dir / doc)) {
        for (std::string& k : bib_keys(*text)) env_.bib_keys.insert(std::move(k));
      } else if (auto flat = read_text(entry->dir / doc.filename())) {
        for (std::string& k : bib_keys(*flat)) env_.bib_keys.insert(std::move(k));
      }
    }
  }

  void loads(const TheorySyntax& syn) {
    LoadCommandsResult found = find_load_commands(syn.spans, syn.keywords);
    append(out_.messages, std::move(found.messages));
    for (const LoadCommandUse& use : found.uses) {
      for (const std::string& arg : use.file_arguments()) {
        const AuxFile aux = resolve_aux_file(file_, arg);
        if (aux.warning) {
          out_.messages.push_back(make_message(Severity::Warning, use.range, *aux.warning, kOrigin));
        }
        const auto text = read_text(aux.path);
        std::error_code ec;
        if (!text || !fs::is_regular_file(aux.path, ec)) {
          error(use.range, "Bad file \"" + arg + "\" for load command \"" + use.command + "\"");
          continue;
        }
        nodes_.push_back(node(use.range, "load_file", {{"path", aux.path.generic_string()}}));
        if (aux.path.extension() == ".bib") {
          for (std::string& k : bib_keys(*text)) env_.bib_keys.insert(std::move(k));
          Analysis bib = check_bib(aux.path, *text, ctx_);
          append(out_.messages, std::move(bib.messages));
        }
      }
    }
  }

  void command(const CommandSpan& span) {
    if (span.kind == SpanKind::Ignored) return;
    const std::vector<const Token*> toks = span.proper_tokens();
    if (toks.empty()) return;
    const Range extent{toks.front()->range.start, toks.back()->range.stop};
    nodes_.push_back(node(extent, "command",
                          {{"name", span.name.value_or("")}, {"kind", std::string(span_kind_name(span.kind))}}));
    if (span.kind != SpanKind::Markup) return;
    MarkupResult m = classify_markup(span, seq_);
    append(out_.messages, std::move(m.messages));
    if (!m.markup) return;
    const std::size_t a = m.markup->body.start.offset;
    const std::size_t b = m.markup->body.stop.offset;
    if (m.markup->kind != MarkupCommandKind::TextRaw) {
      for (const MarkdownBlock& block : parse_markdown(seq_, a, b)) markdown(block);
    }
    text_body(a, b);
  }

  void markdown(const MarkdownBlock& block) {
    if (block.kind == MarkdownBlock::Kind::Paragraph) {
      nodes_.push_back(node(block.range, "paragraph"));
      return;
    }
    nodes_.push_back(node(block.range, "list", {{"marker", std::string(list_marker_name(*block.marker))},
                                                {"indent", std::to_string(block.indent)}}));
    for (const MarkdownItem& item : block.items) {
      nodes_.push_back(node(item.range, "list_item"));
      for (const MarkdownBlock& inner : item.blocks) markdown(inner);
    }
  }

  void text_body(std::size_t a, std::size_t b) {
    AntiquotationScan scan = scan_antiquotations(seq_, a, b);
    append(out_.messages, std::move(scan.messages));
    append(out_.messages, check_antiquotations(seq_, scan.antiquotations, ctx_.antiquotations, env_));
    for (const Antiquotation& aq : scan.antiquotations) {
      nodes_.push_back(node(aq.range, "antiquotation",
                            {{"name", aq.name}, {"form", std::string(antiquotation_form_name(aq.form))}}));
    }
    for (const Range& w : extract_words(seq_, a, b)) nodes_.push_back(node(w, "word"));
  }

  void formal_comment(const Token& marker) {
    const std::vector<FormalComment> found = scan_formal_comments(seq_, marker.range.start.offset);
    if (found.empty() || found.front().range.start.offset != marker.range.start.offset) return;
    const FormalComment& c = found.front();
    if (!c.complete()) {
      out_.messages.push_back(make_message(Severity::Warning, c.range,
                                           "Formal comment marker without cartouche argument", kOrigin));
      return;
    }
    nodes_.push_back(node(c.range, "formal_comment", {{"kind", std::string(comment_kind_name(c.kind))}}));
    if (c.kind == FormalCommentKind::Marginal) text_body(c.body->start.offset, c.body->stop.offset);
  }

  fs::path file_;
  const Context& ctx_;
  SymbolSeq seq_;
  std::optional<std::string> session_;
  CheckEnv env_;
  Analysis out_;
  std::vector<MarkupNode> nodes_;
};

// Temporary directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "pide-sketch-XXXXXX").string();
    if (::mkdtemp(pattern.data()) == nullptr) throw EnvironmentError("Cannot create a temporary directory");
    path_ = pattern;
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

Analysis check_theory(const fs::path& file, std::string_view text, const Context& ctx) {
  return TheoryChecker(file, text, ctx).run();
}

Analysis check_ml(const fs::path& file, std::string_view text, const Context& ctx) {
  Analysis out;
  const SymbolSeq seq = decode(text, ctx.symbols);
  std::vector<MarkupNode> nodes;
  for (const FormalComment& c : scan_formal_comments(seq)) {
    if (!c.complete()) {
      out.messages.push_back(make_message(Severity::Warning, c.range,
                                          "Formal comment marker without cartouche argument", kOrigin));
      continue;
    }
    nodes.push_back(node(c.range, "formal_comment", {{"kind", std::string(comment_kind_name(c.kind))}}));
  }
  if (file.filename() == "ROOT.ML") {
    for (const LoadCommandUse& use : parse_root_ml(seq)) {
      const AuxFile aux = resolve_aux_file(file, use.path_argument);
      std::error_code ec;
      if (!fs::is_regular_file(aux.path, ec)) {
        out.messages.push_back(make_message(Severity::Error, use.range,
                                            "Bad file \"" + use.path_argument + "\" for \"" + use.command + "\"",
                                            kOrigin));
      } else {
        nodes.push_back(node(use.range, "load_file", {{"path", aux.path.generic_string()}}));
      }
    }
  }
  out.tree = build_tree(std::move(nodes));
  with_file(out.messages, file.generic_string());
  return out;
}

Analysis check_bib(const fs::path& file, std::string_view text, const Context& ctx) {
  Analysis out;
  const SymbolSeq seq = decode(text, ctx.symbols);
  const std::vector<BibToken> tokens = tokenize_bib(seq);
  BibParse parse = parse_entries(tokens);
  append(out.messages, std::move(parse.messages));
  append(out.messages, check_duplicate_keys(parse.entries));
  std::vector<MarkupNode> nodes;
  for (const BibEntry& e : parse.entries) {
    append(out.messages, check_required_fields(e, ctx.fields));
    nodes.push_back(node(e.range, "bib_entry", {{"type", e.entry_type}, {"key", e.key}}));
    for (const BibField& f : e.fields) {
      const Range r{f.name_range.start, f.value.empty() ? f.name_range.stop : f.value_range.stop};
      nodes.push_back(node(r, "bib_field", {{"name", f.name}}));
    }
  }
  if (ctx.bibtex_exe) {
    TempDir dir;
    const std::string log = run_external_check(text, *ctx.bibtex_exe, dir.path(), ctx.bibtex_timeout);
    BlgResult blg = parse_blg(log, token_lines(tokens), tokens, parse.entries);
    append(out.messages, std::move(blg.messages));
  } else {
    out.messages.push_back(make_message(Severity::Info, seq.range(0, 0),
                                        "External BibTeX check skipped: no bibtex executable configured", kOrigin));
  }
  out.outline = outline_bib(parse.entries);
  out.tree = build_tree(std::move(nodes));
  with_file(out.messages, file.generic_string());
  return out;
}

std::vector<std::string> bib_keys(std::string_view text) {
  std::vector<std::string> keys;
  for (const BibEntry& e : parse_entries(tokenize_bib(text)).entries) {
    if (e.kind == BibEntryKind::Regular && !e.key.empty()) keys.push_back(e.key);
  }
  return keys;
}

}  // namespace pide::cli
