#include "pide/sessions.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace pide {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRootOrigin = "sessions.parse_root";
constexpr const char* kGraphOrigin = "sessions.build_graph";

const KeywordTable& root_keywords() {
  static const KeywordTable table = [] {
    KeywordTable t;
    t.add("session", {true, CommandKind::Regular, {}});
    t.add("chapter", {true, CommandKind::Regular, {}});
    for (const char* k : {"in", "=", "+", "-", "(", ")", "[", "]", ",", "description", "options", "sessions",
                          "theories", "document_files"}) {
      t.add(k, KeywordSpec{});
    }
    return t;
  }();
  return table;
}

bool is_body_keyword(const Token& t) {
  return t.is_keyword("description") || t.is_keyword("options") || t.is_keyword("sessions") ||
         t.is_keyword("theories") || t.is_keyword("document_files");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class RootParser {
 public:
  RootParser(const std::vector<const Token*>& toks, const Range& span_range, RootResult& out, const fs::path& dir,
             const std::string& file)
      : toks_(toks), end_{span_range.stop, span_range.stop}, out_(out), dir_(dir), file_(file) {}

  void parse_session() {
    i_ = 1;
    SessionEntry entry;
    entry.dir = dir_;
    entry.root_file = file_;
    auto name = read_name(toks_, i_);
    if (!name) return fail("Missing session name");
    entry.name = name->first;
    entry.range = name->second;
    skip_group();
    if (accept("in")) {
      auto sub = read_name(toks_, i_);
      if (!sub) return fail("Missing directory after \"in\"");
      entry.dir = (dir_ / sub->first).lexically_normal();
    }
    if (!accept("=")) return fail("Expected \"=\" after session name");
    if (i_ < toks_.size() && !is_body_keyword(*toks_[i_])) {
      auto parent = read_name(toks_, i_);
      if (!parent) return fail("Bad parent session");
      if (!accept("+")) return fail("Expected \"+\" after parent session \"" + parent->first + "\"");
      entry.parent = parent->first;
    }
    while (i_ < toks_.size()) {
      const Token& kw = *toks_[i_];
      if (accept("description")) {
        if (i_ < toks_.size() && toks_[i_]->is_text()) {
          ++i_;
        } else {
          return fail("Missing description text");
        }
      } else if (accept("options")) {
        if (!parse_options(entry.options)) return;
      } else if (accept("sessions")) {
        if (!parse_names(entry.imports, kw)) return;
      } else if (accept("theories")) {
        if (i_ < toks_.size() && toks_[i_]->is_keyword("[")) {
          std::map<std::string, std::string> ignored;
          if (!parse_options(ignored)) return;
        }
        if (!parse_names(entry.theories, kw)) return;
      } else if (accept("document_files")) {
        fs::path base = "document";
        if (accept("(")) {
          if (!accept("in")) return fail("Expected \"in\" in document_files");
          auto sub = read_name(toks_, i_);
          if (!sub || !accept(")")) return fail("Bad document_files directory");
          base = sub->first;
        }
        std::size_t before = entry.document_files.size();
        while (i_ < toks_.size() && toks_[i_]->is_text()) {
          entry.document_files.push_back(base / toks_[i_]->content());
          ++i_;
        }
        if (entry.document_files.size() == before) return fail("Missing document file names");
      } else {
        return fail("Unexpected \"" + kw.source + "\" in session specification");
      }
    }
    out_.entries.push_back(std::move(entry));
  }

 private:
  bool accept(std::string_view keyword) {
    if (i_ < toks_.size() && toks_[i_]->is_keyword(keyword)) {
      ++i_;
      return true;
    }
    return false;
  }

  void skip_group() {
    if (!(i_ < toks_.size() && toks_[i_]->is_keyword("("))) return;
    while (i_ < toks_.size() && !toks_[i_]->is_keyword(")")) ++i_;
    if (i_ < toks_.size()) ++i_;
  }

  bool parse_options(std::map<std::string, std::string>& options) {
    if (!accept("[")) {
      fail("Expected \"[\" after options");
      return false;
    }
    while (i_ < toks_.size() && !toks_[i_]->is_keyword("]")) {
      auto name = read_name(toks_, i_);
      if (!name) {
        fail("Bad option name");
        return false;
      }
      std::string value;
      if (accept("=")) {
        while (i_ < toks_.size() && !toks_[i_]->is_keyword(",") && !toks_[i_]->is_keyword("]")) {
          value += toks_[i_]->is_text() ? toks_[i_]->content() : toks_[i_]->source;
          ++i_;
        }
        if (value.empty()) {
          fail("Missing value for option \"" + name->first + "\"");
          return false;
        }
      }
      options[name->first] = value;
      if (!accept(",")) break;
    }
    if (!accept("]")) {
      fail("Expected \"]\" after options");
      return false;
    }
    return true;
  }

  bool parse_names(std::vector<std::string>& into, const Token& keyword) {
    const std::size_t before = into.size();
    while (i_ < toks_.size() && !is_body_keyword(*toks_[i_])) {
      auto name = read_name(toks_, i_);
      if (!name) {
        fail("Bad name \"" + toks_[i_]->source + "\"");
        return false;
      }
      into.push_back(name->first);
      skip_group();
    }
    if (into.size() == before) {
      fail("Missing names after \"" + keyword.source + "\"");
      return false;
    }
    return true;
  }

  void fail(const std::string& text) {
    const Range where = i_ < toks_.size() ? toks_[i_]->range : end_;
    Message m = make_message(Severity::Error, where, text, kRootOrigin);
    m.file = file_;
    out_.messages.push_back(std::move(m));
  }

  const std::vector<const Token*>& toks_;
  Range end_;
  RootResult& out_;
  fs::path dir_;
  std::string file_;
  std::size_t i_ = 0;
};

struct EdgeKey {
  std::string from;
  std::string to;
  bool parent;
};

}  // namespace

const SessionEntry* SessionGraph::find(std::string_view name) const {
  auto it = entries_.find(std::string(name));
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> SessionGraph::parent(const std::string& name) const {
  auto it = parent_.find(name);
  return it == parent_.end() ? std::nullopt : it->second;
}

const std::vector<std::string>& SessionGraph::imports(const std::string& name) const {
  static const std::vector<std::string> none;
  auto it = imports_.find(name);
  return it == imports_.end() ? none : it->second;
}

std::vector<std::string> SessionGraph::requirements(const std::string& name) const {
  std::vector<std::string> out;
  if (auto p = parent(name)) out.push_back(*p);
  for (const std::string& imp : imports(name)) out.push_back(imp);
  return out;
}

std::set<std::string> SessionGraph::import_closure(const std::string& name) const {
  std::set<std::string> seen;
  std::vector<std::string> todo{name};
  while (!todo.empty()) {
    std::string s = todo.back();
    todo.pop_back();
    if (!contains(s) || !seen.insert(s).second) continue;
    for (std::string& r : requirements(s)) todo.push_back(std::move(r));
  }
  return seen;
}

std::optional<std::string> SessionGraph::session_of(const fs::path& file) const {
  std::error_code ec;
  const fs::path target = fs::weakly_canonical(file, ec);
  for (const auto& [name, entry] : entries_) {
    for (const std::string& thy : entry.theories) {
      const fs::path candidate = fs::weakly_canonical(entry.dir / (thy + ".thy"), ec);
      if (candidate == target) return name;
    }
  }
  return std::nullopt;
}

std::vector<std::string> parse_roots(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

RootResult parse_root(std::string_view text, const fs::path& dir, const std::string& file) {
  RootResult out;
  const SymbolSeq seq = decode(text);
  const std::vector<Token> tokens = tokenize(seq, root_keywords());
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::ErrorToken) {
      Message m = make_message(Severity::Error, t.range, "Bad input \"" + t.source.substr(0, 20) + "\"", kRootOrigin);
      m.file = file;
      out.messages.push_back(std::move(m));
    }
  }
  for (const CommandSpan& span : parse_spans(tokens, root_keywords())) {
    if (span.kind == SpanKind::Ignored) continue;
    const std::vector<const Token*> toks = span.proper_tokens();
    if (!span.name) {
      Message m = make_message(Severity::Error, span.range, "Expected \"session\" or \"chapter\"", kRootOrigin);
      m.file = file;
      out.messages.push_back(std::move(m));
      continue;
    }
    if (*span.name == "chapter") {
      if (toks.size() != 2) {
        Message m = make_message(Severity::Error, span.range, "Malformed chapter declaration", kRootOrigin);
        m.file = file;
        out.messages.push_back(std::move(m));
      }
      continue;
    }
    RootParser(toks, span.range, out, dir, file).parse_session();
  }
  return out;
}

RootResult load_project_dirs(const std::vector<fs::path>& dirs) {
  RootResult out;
  std::set<fs::path> visited;
  const auto complain = [&](const fs::path& dir, const std::string& text) {
    Message m = make_message(Severity::Error, Range{}, text, "sessions.load_project_dirs");
    m.file = dir.generic_string();
    out.messages.push_back(std::move(m));
  };
  std::function<void(const fs::path&)> visit = [&](const fs::path& dir) {
    std::error_code ec;
    const fs::path canon = fs::weakly_canonical(dir, ec);
    if (!visited.insert(canon).second) return;
    if (!fs::is_directory(dir, ec)) return complain(dir, "Bad project directory " + dir.generic_string());
    const fs::path root = dir / "ROOT";
    const fs::path roots = dir / "ROOTS";
    const bool has_root = fs::is_regular_file(root, ec);
    const bool has_roots = fs::is_regular_file(roots, ec);
    if (!has_root && !has_roots) {
      return complain(dir, "No ROOT or ROOTS file in project directory " + dir.generic_string());
    }
    if (has_root) {
      RootResult r = parse_root(read_file(root), dir, root.generic_string());
      out.entries.insert(out.entries.end(), r.entries.begin(), r.entries.end());
      append(out.messages, std::move(r.messages));
    }
    if (has_roots) {
      for (const std::string& sub : parse_roots(read_file(roots))) visit((dir / sub).lexically_normal());
    }
  };
  for (const fs::path& d : dirs) visit(d.lexically_normal());
  return out;
}

struct GraphBuilder {
  static GraphResult build(const std::vector<SessionEntry>& entries, const std::set<std::string>& global_names) {
    GraphResult result;
    SessionGraph& g = result.graph;
    g.global_names_ = global_names;
    const auto report = [&](const SessionEntry& e, std::string text) {
      Message m = make_message(Severity::Error, e.range, std::move(text), kGraphOrigin);
      m.file = e.root_file;
      result.messages.push_back(std::move(m));
    };

    for (const SessionEntry& e : entries) {
      auto [it, fresh] = g.entries_.emplace(e.name, e);
      if (!fresh) {
        report(e, "Duplicate session \"" + e.name + "\": session names need to be globally unique (also defined in " +
                      it->second.dir.generic_string() + ")");
      }
    }

    for (const auto& [name, e] : g.entries_) {
      g.parent_[name] = std::nullopt;
      g.imports_[name] = {};
      if (e.parent) {
        if (g.contains(*e.parent)) {
          g.parent_[name] = e.parent;
        } else {
          report(e, "Unknown parent session \"" + *e.parent + "\" of \"" + name + "\"");
        }
      }
      for (const std::string& imp : e.imports) {
        if (!g.contains(imp)) {
          report(e, "Unknown import session \"" + imp + "\" in \"" + name + "\"");
        } else if (std::find(g.imports_[name].begin(), g.imports_[name].end(), imp) == g.imports_[name].end()) {
          g.imports_[name].push_back(imp);
        }
      }
    }

    break_cycles(g, report);

    for (const auto& [name, e] : g.entries_) {
      for (const std::string& thy : e.theories) {
        const std::string base = fs::path(thy).stem().generic_string();
        const std::string qualified = name + "." + base;
        fs::path file = e.dir / thy;
        if (file.extension() != ".thy") file += ".thy";
        g.theory_index_.emplace(qualified, file.lexically_normal());
        if (global_names.count(base) != 0) g.global_theories_.emplace(base, qualified);
      }
    }
    return result;
  }

  // One message per strongly connected component that contains a cycle;
  // edges closing cycles are removed until the component is acyclic.
  template <typename Report>
  static void break_cycles(SessionGraph& g, Report&& report) {
    for (const std::vector<std::string>& scc : components(g)) {
      const std::set<std::string> members(scc.begin(), scc.end());
      bool reported = false;
      while (auto cycle = find_cycle(g, members)) {
        if (!reported) {
          std::string text = "Cycle in session graph:";
          for (std::size_t k = 0; k < cycle->size(); ++k) text += (k == 0 ? " " : " -> ") + (*cycle)[k];
          report(g.entries_.at(cycle->front()), text);
          reported = true;
        }
        const std::string& from = (*cycle)[cycle->size() - 2];
        const std::string& to = cycle->back();
        remove_edge(g, from, to);
      }
    }
  }

  static void remove_edge(SessionGraph& g, const std::string& from, const std::string& to) {
    auto& imps = g.imports_[from];
    if (auto it = std::find(imps.begin(), imps.end(), to); it != imps.end()) {
      imps.erase(it);
    } else if (g.parent_[from] == to) {
      g.parent_[from] = std::nullopt;
    }
  }

  // Tarjan's algorithm over sorted names and sorted requirements.
  static std::vector<std::vector<std::string>> components(const SessionGraph& g) {
    std::map<std::string, int> index, low;
    std::set<std::string> on_stack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> out;
    int counter = 0;
    std::function<void(const std::string&)> strong = [&](const std::string& v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack.insert(v);
      std::vector<std::string> reqs = g.requirements(v);
      std::sort(reqs.begin(), reqs.end());
      for (const std::string& w : reqs) {
        if (index.count(w) == 0) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack.count(w) != 0) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        std::vector<std::string> comp;
        std::string w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack.erase(w);
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    };
    for (const auto& [name, e] : g.entries_) {
      if (index.count(name) == 0) strong(name);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Shortest cycle through the smallest member that lies on one, as a path
  // ending where it started.
  static std::optional<std::vector<std::string>> find_cycle(const SessionGraph& g, const std::set<std::string>& members) {
    for (const std::string& start : members) {
      std::map<std::string, std::string> pred;
      std::queue<std::string> todo;
      todo.push(start);
      std::set<std::string> seen{start};
      while (!todo.empty()) {
        const std::string v = todo.front();
        todo.pop();
        std::vector<std::string> reqs = g.requirements(v);
        std::sort(reqs.begin(), reqs.end());
        for (const std::string& w : reqs) {
          if (members.count(w) == 0) continue;
          if (w == start) {
            std::vector<std::string> path{v};
            while (path.back() != start) path.push_back(pred.at(path.back()));
            std::reverse(path.begin(), path.end());
            path.push_back(start);
            return path;
          }
          if (seen.insert(w).second) {
            pred[w] = v;
            todo.push(w);
          }
        }
      }
    }
    return std::nullopt;
  }
};

GraphResult build_graph(const std::vector<SessionEntry>& entries, const std::set<std::string>& global_names) {
  return GraphBuilder::build(entries, global_names);
}

ResolvedTheory resolve_theory(const std::string& ref, const std::string& context, const SessionGraph& graph) {
  ResolvedTheory out;
  const auto unknown = [&](std::string detail) {
    out.error = make_message(Severity::Error, Range{}, "Unknown theory \"" + ref + "\"" + detail,
                             "sessions.resolve_theory");
  };

  if (graph.global_names().count(ref) != 0) {
    out.id = TheoryId{std::nullopt, ref, true};
    if (auto it = graph.global_theories().find(ref); it != graph.global_theories().end()) {
      out.path = graph.theory_index().at(it->second);
    }
    return out;
  }

  if (const auto dot = ref.find('.'); dot != std::string::npos) {
    const std::string qualifier = ref.substr(0, dot);
    const std::string base = ref.substr(dot + 1);
    out.id = TheoryId{qualifier, base, false};
    const std::set<std::string> closure = graph.import_closure(context);
    if (closure.count(qualifier) == 0) {
      unknown(graph.contains(qualifier) ? " (session \"" + qualifier + "\" is not imported by \"" + context + "\")"
                                        : "");
      return out;
    }
    if (auto it = graph.theory_index().find(ref); it != graph.theory_index().end()) {
      out.path = it->second;
    } else {
      unknown(" (not among the theories of session \"" + qualifier + "\")");
    }
    return out;
  }

  out.id = TheoryId{context, fs::path(ref).filename().generic_string(), false};
  const SessionEntry* entry = graph.find(context);
  if (entry == nullptr) {
    unknown(" (unknown session \"" + context + "\")");
    return out;
  }
  out.path = (entry->dir / (ref + ".thy")).lexically_normal();
  return out;
}

namespace {

OrderResult order_requirements(const std::map<std::string, std::vector<std::string>>& deps) {
  OrderResult result;
  std::map<std::string, std::size_t> pending;
  std::map<std::string, std::vector<std::string>> dependents;
  for (const auto& [name, reqs] : deps) {
    pending[name];
    for (const std::string& r : reqs) {
      if (deps.count(r) == 0) continue;
      ++pending[name];
      dependents[r].push_back(name);
    }
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [name, n] : pending) {
    if (n == 0) ready.push(name);
  }
  while (!ready.empty()) {
    std::string s = ready.top();
    ready.pop();
    for (const std::string& d : dependents[s]) {
      if (--pending[d] == 0) ready.push(d);
    }
    result.order.push_back(std::move(s));
  }
  if (result.order.size() < deps.size()) {
    // Walk requirements among the leftovers until a node repeats.
    std::string v;
    for (const auto& [name, n] : pending) {
      if (n > 0) {
        v = name;
        break;
      }
    }
    std::vector<std::string> path;
    std::map<std::string, std::size_t> where;
    while (where.count(v) == 0) {
      where[v] = path.size();
      path.push_back(v);
      for (const std::string& r : deps.at(v)) {
        if (deps.count(r) != 0 && pending[r] > 0) {
          v = r;
          break;
        }
      }
    }
    std::vector<std::string> cycle(path.begin() + static_cast<std::ptrdiff_t>(where[v]), path.end());
    cycle.push_back(v);
    result.cycle = std::move(cycle);
  }
  return result;
}

}  // namespace

OrderResult topological_order(const SessionGraph& graph) {
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto& [name, e] : graph.entries()) deps[name] = graph.requirements(name);
  return order_requirements(deps);
}

OrderResult topological_order(const std::map<std::string, std::vector<std::string>>& requirements) {
  return order_requirements(requirements);
}

}  // namespace pide
