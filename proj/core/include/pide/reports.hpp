#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pide/position.hpp"

namespace pide {

enum class Severity { Error, Warning, Info };

[[nodiscard]] std::string_view severity_name(Severity s);

/// A positioned diagnostic. Operations that do not know their file leave
/// `file` empty; the caller stamps it (see `with_file`).
struct Message {
  Severity severity = Severity::Error;
  std::string file;
  Range range;
  std::string text;
  std::string origin;  // producing module.operation

  friend bool operator==(const Message&, const Message&) = default;
};

[[nodiscard]] Message make_message(Severity severity, const Range& range, std::string text, std::string origin);
[[nodiscard]] bool has_errors(const std::vector<Message>& messages);
void with_file(std::vector<Message>& messages, const std::string& file);
void append(std::vector<Message>& into, std::vector<Message> more);

struct MarkupNode {
  Range range;
  std::string kind;
  std::map<std::string, std::string> properties;
  std::vector<MarkupNode> children;

  friend bool operator==(const MarkupNode&, const MarkupNode&) = default;
};

/// Markup nested by range containment. Children are contained in their
/// parent, pairwise disjoint, and ordered by start offset.
struct MarkupTree {
  std::vector<MarkupNode> roots;
  std::vector<std::string> debug_notes;  // trimmed overlaps
};

/// Nest `nodes` by containment. Input `children` fields are ignored.
/// A node that overlaps an enclosing node without being contained is
/// trimmed to the enclosing range and a debug note is recorded.
[[nodiscard]] MarkupTree build_tree(std::vector<MarkupNode> nodes);

/// Nodes whose range contains `offset`, outermost first.
[[nodiscard]] std::vector<const MarkupNode*> query(const MarkupTree& tree, std::size_t offset);

enum class ReportFormat { Json, Plain };

/// Deterministic serialization. Messages are sorted by (file, offset).
[[nodiscard]] std::string emit(const std::vector<Message>& messages, const MarkupTree& tree, ReportFormat format);

/// Stable (file, offset) ordering used by `emit`.
void sort_messages(std::vector<Message>& messages);

}  // namespace pide
