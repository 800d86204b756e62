#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pide/reports.hpp"
#include "pide/thy_structure.hpp"

namespace pide {

struct SessionEntry {
  std::string name;
  std::filesystem::path dir;
  std::optional<std::string> parent;
  std::vector<std::string> imports;
  std::map<std::string, std::string> options;
  std::vector<std::string> theories;
  std::vector<std::filesystem::path> document_files;  // relative to dir
  std::string root_file;  // ROOT file the entry came from
  Range range;            // of the session name

  friend bool operator==(const SessionEntry&, const SessionEntry&) = default;
};

/// Sessions with parent edges (a forest) and import edges; the combined
/// relation is acyclic after `build_graph` drops offending edges.
class SessionGraph {
 public:
  [[nodiscard]] const std::map<std::string, SessionEntry>& entries() const { return entries_; }
  [[nodiscard]] bool contains(std::string_view name) const { return entries_.find(std::string(name)) != entries_.end(); }
  [[nodiscard]] const SessionEntry* find(std::string_view name) const;
  [[nodiscard]] std::optional<std::string> parent(const std::string& name) const;
  [[nodiscard]] const std::vector<std::string>& imports(const std::string& name) const;
  /// All direct predecessors: parent first, then imports.
  [[nodiscard]] std::vector<std::string> requirements(const std::string& name) const;
  /// `name` plus everything reachable through parent and import edges.
  [[nodiscard]] std::set<std::string> import_closure(const std::string& name) const;
  /// Qualified theory name (`Session.Base`) to file.
  [[nodiscard]] const std::map<std::string, std::filesystem::path>& theory_index() const { return theory_index_; }
  /// Global theory name to qualified name.
  [[nodiscard]] const std::map<std::string, std::string>& global_theories() const { return global_theories_; }
  [[nodiscard]] const std::set<std::string>& global_names() const { return global_names_; }
  /// Session whose directory holds `file` and lists it among its theories.
  [[nodiscard]] std::optional<std::string> session_of(const std::filesystem::path& file) const;

 private:
  friend struct GraphBuilder;
  std::map<std::string, SessionEntry> entries_;
  std::map<std::string, std::optional<std::string>> parent_;
  std::map<std::string, std::vector<std::string>> imports_;
  std::map<std::string, std::filesystem::path> theory_index_;
  std::map<std::string, std::string> global_theories_;
  std::set<std::string> global_names_;
};

struct RootResult {
  std::vector<SessionEntry> entries;
  std::vector<Message> messages;
};

/// One relative directory per non-blank, non-comment line.
[[nodiscard]] std::vector<std::string> parse_roots(std::string_view text);

/// Parse a ROOT file. Every entry records `dir`; `file` stamps messages.
[[nodiscard]] RootResult parse_root(std::string_view text, const std::filesystem::path& dir,
                                    const std::string& file = "ROOT");

/// Read ROOT and ROOTS files below each project directory (ROOTS recursively).
[[nodiscard]] RootResult load_project_dirs(const std::vector<std::filesystem::path>& dirs);

inline const std::set<std::string>& default_global_theories() {
  static const std::set<std::string> names{"Pure", "Main"};
  return names;
}

struct GraphResult {
  SessionGraph graph;
  std::vector<Message> messages;
};

/// Build the session graph. Duplicate names, unknown parents or imports and
/// cycles are reported; offending entries and edges are left out. Each
/// strongly connected component with a cycle yields exactly one message.
[[nodiscard]] GraphResult build_graph(const std::vector<SessionEntry>& entries,
                                      const std::set<std::string>& global_names = default_global_theories());

struct ResolvedTheory {
  TheoryId id;
  std::optional<std::filesystem::path> path;
  std::optional<Message> error;
};

/// Resolve a theory import as seen from session `context`.
[[nodiscard]] ResolvedTheory resolve_theory(const std::string& ref, const std::string& context,
                                            const SessionGraph& graph);

struct OrderResult {
  std::vector<std::string> order;
  std::optional<std::vector<std::string>> cycle;
};

/// Parents and imports before dependents; ties broken by name.
[[nodiscard]] OrderResult topological_order(const SessionGraph& graph);

/// Same over a plain requirement map; names outside the map are ignored.
/// A leftover cycle is returned instead of an order for those nodes.
[[nodiscard]] OrderResult topological_order(const std::map<std::string, std::vector<std::string>>& requirements);

}  // namespace pide
