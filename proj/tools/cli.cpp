#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pide/errors.hpp"
#include "pide/thy_structure.hpp"
#include "pipeline.hpp"

namespace pide::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Options {
  std::vector<std::string> dirs;
  bool json = false;
  bool plain = false;
  std::string symbols;
  std::string keywords;
  std::string antiquotations;
  std::string bibtex_exe;
  std::string bib_fields;
  std::string filter;
  std::string output;
  bool force = false;
  std::string file;
};

// Thrown for problems that end the run with exit code 2.
struct Failure {
  std::string text;
};

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw Failure{"cannot read " + path.string() + ": is a directory"};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"cannot read " + path.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string dump(const ordered_json& j) { return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace); }

ordered_json outline_json(const std::vector<OutlineNode>& nodes) {
  ordered_json arr = ordered_json::array();
  for (const OutlineNode& n : nodes) {
    ordered_json j;
    j["title"] = n.title;
    j["level"] = n.level;
    j["line"] = n.range.start.line;
    j["offset"] = n.range.start.offset;
    j["end_offset"] = n.range.stop.offset;
    j["children"] = outline_json(n.children);
    arr.push_back(std::move(j));
  }
  return arr;
}

void outline_plain(const std::vector<OutlineNode>& nodes, std::size_t depth, std::ostream& out) {
  for (const OutlineNode& n : nodes) {
    out << std::string(2 * depth, ' ') << n.title << '\n';
    outline_plain(n.children, depth + 1, out);
  }
}

class Runner {
 public:
  Runner(const Options& opts, std::ostream& out, const EnvLookup& env) : opts_(opts), out_(out), env_(env) {}

  int tokenize_cmd() {
    const fs::path file = opts_.file;
    const std::string text = read_file(file);
    ordered_json tokens = ordered_json::array();
    std::ostringstream plain;
    const auto add = [&](std::string_view kind, const std::string& source, const Range& r) {
      ordered_json j;
      j["kind"] = kind;
      j["source"] = source;
      j["line"] = r.start.line;
      j["column"] = r.start.column;
      j["offset"] = r.start.offset;
      j["end_offset"] = r.stop.offset;
      plain << r.start.line << ':' << r.start.column << ": " << kind << ' ' << dump(ordered_json(source)) << '\n';
      tokens.push_back(std::move(j));
    };
    const Context ctx = context(false);
    const SymbolSeq seq = decode(text, ctx.symbols);
    if (file.extension() == ".bib") {
      for (const BibToken& t : tokenize_bib(seq)) add(bib_token_kind_name(t.kind), t.source, t.range);
    } else {
      const std::vector<Token> toks =
          file.extension() == ".thy" ? parse_theory(seq, ctx.keywords).tokens : tokenize(seq, ctx.keywords);
      for (const Token& t : toks) add(token_kind_name(t.kind), t.source, t.range);
    }
    ordered_json extra;
    extra["tokens"] = std::move(tokens);
    report({}, MarkupTree{}, extra, plain.str());
    return kOk;
  }

  int check_cmd() {
    const fs::path file = opts_.file;
    const std::string ext = file.extension().string();
    if (ext != ".thy" && ext != ".ML" && ext != ".bib") {
      throw Failure{"unsupported file type \"" + ext + "\" (expected .thy, .ML or .bib)"};
    }
    const std::string text = read_file(file);
    std::vector<Message> session_messages;
    const Context ctx = context(true, &session_messages, file);
    Analysis a = ext == ".thy" ? check_theory(file, text, ctx)
               : ext == ".ML"  ? check_ml(file, text, ctx)
                               : check_bib(file, text, ctx);
    append(a.messages, std::move(session_messages));
    report(a.messages, a.tree, ordered_json::object(), "");
    return has_errors(a.messages) ? kAnalysisErrors : kOk;
  }

  int outline_cmd() {
    const fs::path file = opts_.file;
    const std::string ext = file.extension().string();
    const std::string text = read_file(file);
    const Context ctx = context(false);
    std::vector<Message> messages;
    std::vector<OutlineNode> nodes;
    if (ext == ".thy") {
      TheorySyntax syn = parse_theory(decode(text, ctx.symbols), ctx.keywords);
      messages = std::move(syn.messages);
      nodes = outline(syn.spans);
      if (!opts_.filter.empty()) nodes = filter_outline(nodes, opts_.filter);
    } else if (ext == ".bib") {
      BibParse parse = parse_entries(tokenize_bib(decode(text, ctx.symbols)));
      messages = std::move(parse.messages);
      nodes = outline_bib(parse.entries, opts_.filter);
    } else {
      throw Failure{"unsupported file type \"" + ext + "\" for outline (expected .thy or .bib)"};
    }
    with_file(messages, file.generic_string());
    ordered_json extra;
    extra["outline"] = outline_json(nodes);
    std::ostringstream plain;
    outline_plain(nodes, 0, plain);
    report(messages, MarkupTree{}, extra, plain.str());
    return has_errors(messages) ? kAnalysisErrors : kOk;
  }

  int sessions_cmd() {
    std::vector<fs::path> dirs(opts_.dirs.begin(), opts_.dirs.end());
    if (dirs.empty()) dirs.emplace_back(".");
    RootResult roots = load_project_dirs(dirs);
    GraphResult g = build_graph(roots.entries);
    std::vector<Message> messages = std::move(roots.messages);
    append(messages, std::move(g.messages));
    const OrderResult order = topological_order(g.graph);

    ordered_json sessions = ordered_json::array();
    for (const auto& [name, e] : g.graph.entries()) {
      ordered_json j;
      j["name"] = name;
      j["dir"] = e.dir.generic_string();
      const auto parent = g.graph.parent(name);
      j["parent"] = parent ? ordered_json(*parent) : ordered_json(nullptr);
      j["imports"] = g.graph.imports(name);
      j["theories"] = e.theories;
      sessions.push_back(std::move(j));
    }
    ordered_json extra;
    extra["sessions"] = std::move(sessions);
    extra["order"] = order.order;
    std::ostringstream plain;
    for (const std::string& s : order.order) plain << s << '\n';
    report(messages, MarkupTree{}, extra, plain.str());
    return has_errors(messages) ? kAnalysisErrors : kOk;
  }

  int preview_cmd() {
    const fs::path file = opts_.file;
    if (file.extension() != ".bib") throw Failure{"preview expects a .bib file"};
    const std::string text = read_file(file);
    const Context ctx = context(false);
    BibParse parse = parse_entries(tokenize_bib(decode(text, ctx.symbols)));
    with_file(parse.messages, file.generic_string());
    const std::string html = render_html(parse.entries);
    if (opts_.output.empty()) {
      out_ << html;
    } else {
      std::error_code ec;
      if (fs::exists(opts_.output, ec) && !opts_.force) {
        throw Failure{"output file " + opts_.output + " exists (use --force to overwrite)"};
      }
      std::ofstream o(opts_.output, std::ios::binary | std::ios::trunc);
      o << html;
      if (!o) throw Failure{"cannot write " + opts_.output};
      report(parse.messages, MarkupTree{}, ordered_json::object(), "");
    }
    return has_errors(parse.messages) ? kAnalysisErrors : kOk;
  }

 private:
  Context context(bool with_sessions, std::vector<Message>* session_messages = nullptr, const fs::path& file = {}) {
    Context ctx;
    if (!opts_.symbols.empty()) ctx.symbols = SymbolTable::load(read_file(opts_.symbols));
    if (!opts_.keywords.empty()) ctx.keywords = KeywordTable::load(read_file(opts_.keywords));
    if (!opts_.antiquotations.empty()) ctx.antiquotations = AntiquotationRegistry::load(read_file(opts_.antiquotations));
    if (!opts_.bib_fields.empty()) ctx.fields = FieldSpec::parse(read_file(opts_.bib_fields));
    std::string exe = opts_.bibtex_exe;
    if (exe.empty()) exe = env_("PIDE_SKETCH_BIBTEX").value_or("");
    if (!exe.empty()) {
      const auto found = find_executable(exe);
      if (!found) throw Failure{"bibtex executable not found: " + exe};
      ctx.bibtex_exe = *found;
    }
    if (!with_sessions) return ctx;

    // Explicit project directories report their problems; the implicit
    // ones (current directory, the file's directory) only contribute.
    std::vector<SessionEntry> entries;
    if (!opts_.dirs.empty()) {
      RootResult explicit_roots = load_project_dirs({opts_.dirs.begin(), opts_.dirs.end()});
      entries = std::move(explicit_roots.entries);
      if (session_messages != nullptr) append(*session_messages, std::move(explicit_roots.messages));
    }
    std::vector<fs::path> implicit;
    std::error_code ec;
    for (const fs::path& d : {fs::path("."), file.parent_path().empty() ? fs::path(".") : file.parent_path()}) {
      if (fs::is_regular_file(d / "ROOT", ec) || fs::is_regular_file(d / "ROOTS", ec)) implicit.push_back(d);
    }
    if (!implicit.empty()) {
      std::set<std::string> known;
      for (const SessionEntry& e : entries) known.insert(e.name);
      for (SessionEntry& e : load_project_dirs(implicit).entries) {
        if (known.insert(e.name).second) entries.push_back(std::move(e));
      }
    }
    GraphResult g = build_graph(entries);
    if (session_messages != nullptr && !opts_.dirs.empty()) append(*session_messages, std::move(g.messages));
    ctx.graph = std::move(g.graph);
    return ctx;
  }

  void report(const std::vector<Message>& messages, const MarkupTree& tree, const ordered_json& extra,
              const std::string& plain_extra) {
    if (opts_.plain) {
      out_ << emit(messages, tree, ReportFormat::Plain) << plain_extra;
      return;
    }
    ordered_json j = ordered_json::parse(emit(messages, tree, ReportFormat::Json));
    for (const auto& [k, v] : extra.items()) j[k] = v;
    out_ << dump(j) << '\n';
  }

  const Options& opts_;
  std::ostream& out_;
  const EnvLookup& env_;
};

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  Options opts;
  CLI::App app{"Document model checks for theory, ML and BibTeX files", "pide-sketch"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("-d,--dir", opts.dirs, "Project directory with ROOT or ROOTS (repeatable)");
  auto* json = app.add_flag("--json", opts.json, "JSON report (default)");
  app.add_flag("--plain", opts.plain, "One line per message")->excludes(json);
  app.add_option("--symbols", opts.symbols, "Symbol table file");
  app.add_option("--keywords", opts.keywords, "Keyword table file");
  app.add_option("--antiquotations", opts.antiquotations, "Antiquotation registry file");
  app.add_option("--bibtex-exe", opts.bibtex_exe, "BibTeX executable (default: $PIDE_SKETCH_BIBTEX)");
  app.add_option("--bib-fields", opts.bib_fields, "Required/optional field table for BibTeX entries");

  auto* tokenize_sub = app.add_subcommand("tokenize", "Dump tokens of a file");
  tokenize_sub->add_option("file", opts.file, "Input file")->required();
  auto* check_sub = app.add_subcommand("check", "Check a .thy, .ML or .bib file");
  check_sub->add_option("file", opts.file, "Input file")->required();
  auto* outline_sub = app.add_subcommand("outline", "Section tree of a theory or entry list of a database");
  outline_sub->add_option("file", opts.file, "Input file")->required();
  outline_sub->add_option("--filter", opts.filter, "Keep nodes containing this substring");
  auto* sessions_sub = app.add_subcommand("sessions", "Session graph and build order of project directories");
  auto* preview_sub = app.add_subcommand("preview", "HTML preview of a BibTeX database");
  preview_sub->add_option("file", opts.file, "Input .bib file")->required();
  preview_sub->add_option("-o,--output", opts.output, "Output file (default: standard output)");
  preview_sub->add_flag("--force", opts.force, "Overwrite an existing output file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Runner runner(opts, out, env);
  try {
    if (*tokenize_sub) return runner.tokenize_cmd();
    if (*check_sub) return runner.check_cmd();
    if (*outline_sub) return runner.outline_cmd();
    if (*sessions_sub) return runner.sessions_cmd();
    if (*preview_sub) return runner.preview_cmd();
  } catch (const Failure& f) {
    err << "pide-sketch: " << f.text << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "pide-sketch: configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const EnvironmentError& e) {
    err << "pide-sketch: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace pide::cli
