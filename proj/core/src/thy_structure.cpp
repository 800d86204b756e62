#include "pide/thy_structure.hpp"

#include <algorithm>
#include <set>

namespace pide {

namespace fs = std::filesystem;

namespace {

constexpr const char* kHeaderOrigin = "thy_structure.parse_header";

bool is_name_piece(const Token& t) {
  return t.kind == TokenKind::Ident || t.kind == TokenKind::LongIdent || t.kind == TokenKind::Nat ||
         t.is_keyword("-");
}

std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

bool is_identifier(const std::string& name) {
  if (name.empty()) return false;
  const SymbolSeq seq = decode(name);
  // Letters, digits, quasi-letters; the first symbol must not be a digit or quasi-letter.
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const char c = seq[i].ascii();
    const bool letter = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || seq[i].kind == SymbolKind::Named;
    const bool other = (c >= '0' && c <= '9') || c == '_' || c == '\'';
    if (i == 0 ? !letter : !(letter || other || seq[i].is_control("sub"))) return false;
  }
  return true;
}

}  // namespace

std::optional<std::pair<std::string, Range>> read_name(const std::vector<const Token*>& tokens, std::size_t& i) {
  if (i >= tokens.size()) return std::nullopt;
  const Token& first = *tokens[i];
  if (first.kind == TokenKind::String) {
    ++i;
    return std::pair{first.content(), first.range};
  }
  if (!is_name_piece(first) || first.is_keyword("-")) return std::nullopt;
  std::string name = first.source;
  Range range = first.range;
  std::size_t j = i + 1;
  while (j < tokens.size() && is_name_piece(*tokens[j]) && tokens[j]->range.start.offset == range.stop.offset) {
    name += tokens[j]->source;
    range.stop = tokens[j]->range.stop;
    ++j;
  }
  i = j;
  return std::pair{name, range};
}

HeaderResult parse_header(const CommandSpan& span) {
  HeaderResult result;
  TheoryHeader& h = result.header;
  std::vector<Message>& msgs = result.messages;
  const std::vector<const Token*> toks = span.proper_tokens();
  const auto error_at = [&](const Range& r, std::string text) {
    msgs.push_back(make_message(Severity::Error, r, std::move(text), kHeaderOrigin));
  };
  const Range span_end{span.range.stop, span.range.stop};

  std::size_t i = 0;
  if (i < toks.size() && toks[i]->kind == TokenKind::Command) ++i;

  if (auto name = read_name(toks, i); name && is_identifier(name->first)) {
    h.name = name->first;
    h.name_range = name->second;
  } else {
    error_at(name ? name->second : (i < toks.size() ? toks[i]->range : span_end), "Missing theory name");
    if (name) h.name_range = name->second;
  }

  bool seen_begin = false;
  std::set<std::string> seen_imports;
  while (i < toks.size() && !seen_begin) {
    const Token& t = *toks[i];
    if (t.is_keyword("imports")) {
      ++i;
      std::size_t before = h.imports.size();
      while (i < toks.size() && !toks[i]->is_keyword("keywords") && !toks[i]->is_keyword("begin")) {
        auto name = read_name(toks, i);
        if (!name) {
          error_at(toks[i]->range, "Bad theory import \"" + toks[i]->source + "\"");
          ++i;
          continue;
        }
        if (!seen_imports.insert(name->first).second) {
          msgs.push_back(make_message(Severity::Warning, name->second, "Duplicate import \"" + name->first + "\"",
                                      kHeaderOrigin));
        }
        h.imports.push_back(ImportRef{name->first, name->second, std::nullopt});
      }
      if (h.imports.size() == before) error_at(t.range, "Missing theory imports");
    } else if (t.is_keyword("keywords")) {
      ++i;
      while (true) {
        std::vector<KeywordDecl> group;
        while (i < toks.size() && toks[i]->kind == TokenKind::String) {
          group.push_back(KeywordDecl{toks[i]->content(), {}, {}, toks[i]->range});
          ++i;
        }
        if (group.empty()) {
          error_at(i < toks.size() ? toks[i]->range : span_end, "Missing keyword name (double-quoted string)");
          break;
        }
        if (i < toks.size() && toks[i]->is_keyword("::")) {
          ++i;
          std::string kind;
          if (i < toks.size() && toks[i]->kind == TokenKind::Ident) {
            kind = toks[i]->source;
            ++i;
          } else {
            error_at(i < toks.size() ? toks[i]->range : span_end, "Missing keyword kind after \"::\"");
          }
          std::vector<std::string> exts;
          if (i < toks.size() && toks[i]->is_keyword("(")) {
            ++i;
            while (i < toks.size() && !toks[i]->is_keyword(")")) {
              if (toks[i]->kind == TokenKind::String) {
                exts.push_back(toks[i]->content());
              } else if (!toks[i]->is_keyword(",")) {
                error_at(toks[i]->range, "Bad file extension \"" + toks[i]->source + "\"");
              }
              ++i;
            }
            if (i < toks.size()) {
              ++i;
            } else {
              error_at(span_end, "Missing \")\" after file extensions");
            }
          }
          for (KeywordDecl& d : group) {
            d.kind = kind;
            d.load_extensions = exts;
          }
        }
        h.keyword_decls.insert(h.keyword_decls.end(), group.begin(), group.end());
        if (i < toks.size() && toks[i]->is_keyword("and")) {
          ++i;
          continue;
        }
        break;
      }
    } else if (t.is_keyword("begin")) {
      seen_begin = true;
      ++i;
    } else {
      error_at(t.range, "Unexpected \"" + t.source + "\" in theory header");
      ++i;
    }
  }
  if (!seen_begin) error_at(span_end, "Missing \"begin\" in theory header");
  if (i < toks.size()) {
    error_at(Range{toks[i]->range.start, toks.back()->range.stop}, "Unexpected text after \"begin\"");
  }
  return result;
}

std::string render_header(const TheoryHeader& header) {
  std::string out = "theory " + header.name;
  if (!header.imports.empty()) {
    out += " imports";
    for (const ImportRef& imp : header.imports) out += " " + quote(imp.text);
  }
  if (!header.keyword_decls.empty()) {
    out += " keywords";
    bool first = true;
    for (const KeywordDecl& d : header.keyword_decls) {
      out += first ? " " : " and ";
      first = false;
      out += quote(d.name);
      if (!d.kind.empty()) {
        out += " :: " + d.kind;
        if (!d.load_extensions.empty()) {
          out += " (";
          for (std::size_t k = 0; k < d.load_extensions.size(); ++k) {
            out += (k > 0 ? ", " : "") + quote(d.load_extensions[k]);
          }
          out += ")";
        }
      }
    }
  }
  return out + " begin";
}

KeywordsResult apply_keywords(const KeywordTable& base, const TheoryHeader& header) {
  KeywordsResult result{base, {}};
  for (const KeywordDecl& d : header.keyword_decls) {
    KeywordSpec spec;
    if (!d.kind.empty()) {
      spec.is_command = true;
      if (d.kind == "thy_load") {
        spec.command_kind = CommandKind::Load;
        spec.load_extensions = d.load_extensions;
      } else if (d.kind == "thy_decl" || d.kind == "diag") {
        spec.command_kind = CommandKind::Regular;
      } else {
        spec.command_kind = CommandKind::Regular;
        result.messages.push_back(make_message(Severity::Warning, d.range,
                                               "Unknown command kind \"" + d.kind + "\" for \"" + d.name +
                                                   "\", treated as regular command",
                                               "thy_structure.apply_keywords"));
      }
    }
    if (const KeywordSpec* old = base.find(d.name);
        old != nullptr && (old->is_command != spec.is_command || old->command_kind != spec.command_kind)) {
      result.messages.push_back(make_message(Severity::Warning, d.range,
                                             "Redeclaration of built-in keyword \"" + d.name + "\" with different kind",
                                             "thy_structure.apply_keywords"));
    }
    result.table.add(d.name, std::move(spec));
  }
  return result;
}

std::vector<std::string> LoadCommandUse::file_arguments() const {
  if (extensions.empty() || fs::path(path_argument).has_extension()) return {path_argument};
  std::vector<std::string> out;
  for (const std::string& ext : extensions) out.push_back(path_argument + "." + ext);
  return out;
}

LoadCommandsResult find_load_commands(const std::vector<CommandSpan>& spans, const KeywordTable& keywords) {
  LoadCommandsResult result;
  for (const CommandSpan& span : spans) {
    if (span.kind != SpanKind::Load) continue;
    const std::vector<const Token*> toks = span.proper_tokens();
    const auto arg = std::find_if(toks.begin() + (toks.empty() ? 0 : 1), toks.end(),
                                  [](const Token* t) { return t->is_text(); });
    const std::string command = span.name.value_or("");
    if (arg == toks.end()) {
      result.messages.push_back(make_message(Severity::Error, span.range,
                                             "Missing file argument for load command \"" + command + "\"",
                                             "thy_structure.find_load_commands"));
      continue;
    }
    LoadCommandUse use{command, (*arg)->content(), (*arg)->range, {}, std::nullopt};
    if (const KeywordSpec* spec = keywords.find(command)) use.extensions = spec->load_extensions;
    result.uses.push_back(std::move(use));
  }
  return result;
}

AuxFile resolve_aux_file(const fs::path& theory_file, const std::string& rel, const std::optional<fs::path>& base_dir) {
  const fs::path dir = theory_file.parent_path();
  const fs::path rel_path(rel);
  AuxFile out;
  out.path = (rel_path.is_absolute() ? rel_path : dir / rel_path).lexically_normal();
  const fs::path base = (base_dir ? *base_dir : dir).lexically_normal();
  const fs::path inside = out.path.lexically_relative(base);
  if (inside.empty() || *inside.begin() == "..") {
    out.warning = "File \"" + rel + "\" lies outside of base directory " + base.generic_string();
  }
  return out;
}

TheorySyntax parse_theory(const SymbolSeq& seq, const KeywordTable& base) {
  TheorySyntax out;
  out.keywords = base;
  const std::vector<Token> initial = tokenize(seq, base);
  const std::vector<CommandSpan> initial_spans = parse_spans(initial, base);

  const auto first = std::find_if(initial_spans.begin(), initial_spans.end(),
                                  [](const CommandSpan& s) { return s.kind != SpanKind::Ignored; });
  if (first == initial_spans.end() || first->kind != SpanKind::TheoryBegin) {
    const Range where = first == initial_spans.end() ? seq.range(seq.size(), seq.size()) : first->range;
    out.messages.push_back(make_message(Severity::Error, where, "Missing theory header (\"theory NAME ... begin\")",
                                        "thy_structure.parse_theory"));
    out.tokens = initial;
    out.spans = initial_spans;
    return out;
  }

  // The header ends with its `begin`; whatever follows is body text.
  CommandSpan header_span = *first;
  const auto begin_tok = std::find_if(header_span.tokens.begin(), header_span.tokens.end(),
                                      [](const Token& t) { return t.is_keyword("begin"); });
  if (begin_tok != header_span.tokens.end()) {
    header_span.tokens.erase(begin_tok + 1, header_span.tokens.end());
    header_span.range.stop = header_span.tokens.back().range.stop;
  }
  HeaderResult header = parse_header(header_span);
  append(out.messages, std::move(header.messages));
  KeywordsResult kw = apply_keywords(base, header.header);
  append(out.messages, std::move(kw.messages));
  out.keywords = std::move(kw.table);
  out.header = std::move(header.header);

  const std::size_t body_start = header_span.range.stop.offset;
  for (const Token& t : initial) {
    if (t.range.stop.offset > body_start) break;
    out.tokens.push_back(t);
  }
  std::vector<Token> body = tokenize(seq, out.keywords, body_start);
  out.tokens.insert(out.tokens.end(), body.begin(), body.end());
  out.spans = parse_spans(out.tokens, out.keywords);
  return out;
}

std::vector<LoadCommandUse> parse_root_ml(const SymbolSeq& seq) {
  std::vector<LoadCommandUse> out;
  const std::vector<Token> tokens = tokenize(seq, KeywordTable::builtin());
  std::vector<const Token*> proper;
  for (const Token& t : tokens) {
    if (!t.is_improper()) proper.push_back(&t);
  }
  for (std::size_t i = 0; i + 1 < proper.size(); ++i) {
    const Token& t = *proper[i];
    const bool is_use = t.kind == TokenKind::Ident && t.source == "use";
    const bool is_ml_file = t.kind == TokenKind::Command && t.source == "ML_file";
    if ((is_use || is_ml_file) && proper[i + 1]->is_text()) {
      out.push_back(LoadCommandUse{t.source, proper[i + 1]->content(), proper[i + 1]->range, {}, std::nullopt});
    }
  }
  return out;
}

}  // namespace pide
