#include "pide/reports.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pide {

using ordered_json = nlohmann::ordered_json;

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::Error:
      return "error";
    case Severity::Warning:
      return "warning";
    case Severity::Info:
      return "info";
  }
  return "error";
}

Message make_message(Severity severity, const Range& range, std::string text, std::string origin) {
  return Message{severity, {}, range, std::move(text), std::move(origin)};
}

bool has_errors(const std::vector<Message>& messages) {
  return std::any_of(messages.begin(), messages.end(),
                     [](const Message& m) { return m.severity == Severity::Error; });
}

void with_file(std::vector<Message>& messages, const std::string& file) {
  for (Message& m : messages) {
    if (m.file.empty()) m.file = file;
  }
}

void append(std::vector<Message>& into, std::vector<Message> more) {
  into.insert(into.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

void sort_messages(std::vector<Message>& messages) {
  std::stable_sort(messages.begin(), messages.end(), [](const Message& a, const Message& b) {
    if (a.file != b.file) return a.file < b.file;
    return a.range.start.offset < b.range.start.offset;
  });
}

MarkupTree build_tree(std::vector<MarkupNode> nodes) {
  MarkupTree tree;
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  // Outer nodes first: by start ascending, then longer ranges first, then input order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Range& ra = nodes[a].range;
    const Range& rb = nodes[b].range;
    if (ra.start.offset != rb.start.offset) return ra.start.offset < rb.start.offset;
    return ra.stop.offset > rb.stop.offset;
  });

  // Path of open ancestors as index paths into the tree under construction.
  struct Open {
    std::vector<MarkupNode>* siblings;
    std::size_t index;
    Range range;
  };
  std::vector<Open> stack;
  for (std::size_t idx : order) {
    MarkupNode node = std::move(nodes[idx]);
    node.children.clear();
    while (!stack.empty() && !stack.back().range.contains(node.range) &&
           node.range.start.offset >= stack.back().range.stop.offset) {
      stack.pop_back();
    }
    if (!stack.empty() && node.range.stop.offset > stack.back().range.stop.offset) {
      std::ostringstream note;
      note << "trimmed " << node.kind << " [" << node.range.start.offset << "," << node.range.stop.offset
           << ") to enclosing [" << stack.back().range.start.offset << "," << stack.back().range.stop.offset << ")";
      tree.debug_notes.push_back(note.str());
      node.range.stop = stack.back().range.stop;
    }
    std::vector<MarkupNode>& siblings =
        stack.empty() ? tree.roots : (*stack.back().siblings)[stack.back().index].children;
    const Range range = node.range;
    siblings.push_back(std::move(node));
    stack.push_back(Open{&siblings, siblings.size() - 1, range});
  }
  return tree;
}

std::vector<const MarkupNode*> query(const MarkupTree& tree, std::size_t offset) {
  std::vector<const MarkupNode*> path;
  const std::vector<MarkupNode>* level = &tree.roots;
  while (true) {
    const auto it = std::upper_bound(level->begin(), level->end(), offset, [](std::size_t off, const MarkupNode& n) {
      return off < n.range.start.offset;
    });
    if (it == level->begin()) break;
    // Empty nodes can share a start with their successor; scan back over candidates.
    const MarkupNode* hit = nullptr;
    for (auto cand = it; cand != level->begin();) {
      --cand;
      if (cand->range.contains(offset)) {
        hit = &*cand;
        break;
      }
      if (cand->range.stop.offset <= offset && !cand->range.empty()) break;
    }
    if (hit == nullptr) break;
    path.push_back(hit);
    level = &hit->children;
  }
  return path;
}

namespace {

ordered_json markup_json(const MarkupNode& node) {
  ordered_json j;
  j["kind"] = node.kind;
  j["offset"] = node.range.start.offset;
  j["end_offset"] = node.range.stop.offset;
  ordered_json props = ordered_json::object();
  for (const auto& [k, v] : node.properties) props[k] = v;
  j["properties"] = props;
  ordered_json children = ordered_json::array();
  for (const MarkupNode& c : node.children) children.push_back(markup_json(c));
  j["children"] = children;
  return j;
}

}  // namespace

std::string emit(const std::vector<Message>& messages, const MarkupTree& tree, ReportFormat format) {
  std::vector<Message> sorted = messages;
  sort_messages(sorted);
  if (format == ReportFormat::Plain) {
    std::ostringstream out;
    for (const Message& m : sorted) {
      out << m.file << ':' << m.range.start.line << ':' << m.range.start.column << ": " << severity_name(m.severity)
          << ": " << m.text << '\n';
    }
    return out.str();
  }
  ordered_json root;
  ordered_json msgs = ordered_json::array();
  for (const Message& m : sorted) {
    ordered_json j;
    j["severity"] = severity_name(m.severity);
    j["file"] = m.file;
    j["line"] = m.range.start.line;
    j["column"] = m.range.start.column;
    j["offset"] = m.range.start.offset;
    j["end_offset"] = m.range.stop.offset;
    j["text"] = m.text;
    j["origin"] = m.origin;
    msgs.push_back(std::move(j));
  }
  root["messages"] = std::move(msgs);
  ordered_json markup = ordered_json::array();
  for (const MarkupNode& n : tree.roots) markup.push_back(markup_json(n));
  root["markup"] = std::move(markup);
  return root.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

}  // namespace pide
