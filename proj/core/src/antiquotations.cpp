#include "pide/antiquotations.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "pide/errors.hpp"

namespace pide {

namespace {

constexpr const char* kScanOrigin = "antiquotations.scan";
constexpr const char* kCheckOrigin = "antiquotations.check";

bool is_name_start(const Symbol& s) {
  const char c = s.ascii();
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_name_char(const Symbol& s) {
  const char c = s.ascii();
  return is_name_start(s) || (c >= '0' && c <= '9') || c == '_' || c == '\'' || c == '.';
}

class Scanner {
 public:
  Scanner(const SymbolSeq& seq, AntiquotationScan& out) : seq_(seq), out_(out) {}

  void scan(std::size_t i, std::size_t end, bool in_comment) {
    while (i < end) {
      const Symbol& s = seq_[i];
      if (s.is_char('@') && i + 1 < end && seq_[i + 1].is_char('{')) {
        i = long_form(i, end);
      } else if (s.is_named("comment") || s.is_control("cancel") || s.is_control("latex")) {
        i = formal_comment(i, end, in_comment);
      } else if (classify_control(s) == ControlRole::OtherControl) {
        i = control(i, end);
      } else if (s.is_open()) {
        if (auto stop = cartouche_end(seq_, i, end)) {
          Antiquotation a;
          a.form = AntiquotationForm::BareCartouche;
          a.name = "cartouche";
          a.name_range = seq_.range(i, i);
          a.argument = seq_.range(i, *stop);
          a.argument_text = seq_.text(i, *stop);
          a.range = *a.argument;
          out_.antiquotations.push_back(std::move(a));
          i = *stop;
        } else {
          ++i;
        }
      } else {
        ++i;
      }
    }
  }

 private:
  std::size_t skip_blanks(std::size_t i, std::size_t end) const {
    while (i < end && seq_[i].is_blank()) ++i;
    return i;
  }

  // Offset just past a closed double-quoted string starting at `i`.
  std::optional<std::size_t> string_end(std::size_t i, std::size_t end) const {
    for (std::size_t j = i + 1; j < end; ++j) {
      if (seq_[j].is_char('\\')) {
        ++j;
      } else if (seq_[j].is_char('"')) {
        return j + 1;
      }
    }
    return std::nullopt;
  }

  // Offset of the delimiter `close` matching the opener at `i`, skipping
  // cartouches and strings.
  std::optional<std::size_t> matching(std::size_t i, std::size_t end, char open, char close) const {
    std::size_t depth = 0;
    std::size_t j = i;
    while (j < end) {
      const Symbol& s = seq_[j];
      if (s.is_open()) {
        if (auto stop = cartouche_end(seq_, j, end)) {
          j = *stop;
          continue;
        }
      } else if (s.is_char('"')) {
        if (auto stop = string_end(j, end)) {
          j = *stop;
          continue;
        }
      } else if (s.is_char(open)) {
        ++depth;
      } else if (s.is_char(close)) {
        if (--depth == 0) return j;
      }
      ++j;
    }
    return std::nullopt;
  }

  void error(std::size_t a, std::size_t b, std::string text) {
    out_.messages.push_back(make_message(Severity::Error, seq_.range(a, b), std::move(text), kScanOrigin));
  }

  std::size_t long_form(std::size_t at, std::size_t end) {
    const auto close = matching(at + 1, end, '{', '}');
    if (!close) {
      error(at, at + 2, "Unbalanced antiquotation braces");
      return at + 2;
    }
    Antiquotation a;
    a.form = AntiquotationForm::Long;
    a.range = seq_.range(at, *close + 1);
    std::size_t i = skip_blanks(at + 2, *close);
    const std::size_t name_start = i;
    if (i < *close && is_name_start(seq_[i])) {
      while (i < *close && is_name_char(seq_[i])) ++i;
    }
    if (i == name_start) {
      error(at, *close + 1, "Missing antiquotation name");
      return *close + 1;
    }
    a.name = seq_.text(name_start, i);
    a.name_range = seq_.range(name_start, i);
    i = skip_blanks(i, *close);
    if (i < *close && seq_[i].is_char('[')) {
      const auto bracket = matching(i, *close, '[', ']');
      if (!bracket) {
        error(i, *close, "Unbalanced option brackets in antiquotation");
        return *close + 1;
      }
      if (!parse_options(i + 1, *bracket, a.options)) return *close + 1;
      i = skip_blanks(*bracket + 1, *close);
    }
    std::size_t stop = *close;
    while (stop > i && seq_[stop - 1].is_blank()) --stop;
    if (i < stop) {
      a.argument = seq_.range(i, stop);
      a.argument_text = seq_.text(i, stop);
    }
    out_.antiquotations.push_back(std::move(a));
    return *close + 1;
  }

  bool parse_options(std::size_t i, std::size_t end, std::vector<AntiquotationOption>& options) {
    i = skip_blanks(i, end);
    if (i == end) return true;
    for (;;) {
      const std::size_t start = i;
      while (i < end && is_name_char(seq_[i])) ++i;
      if (i == start || !is_name_start(seq_[start])) {
        error(start, end, "Bad antiquotation option");
        return false;
      }
      AntiquotationOption opt{seq_.text(start, i), std::nullopt};
      i = skip_blanks(i, end);
      if (i < end && seq_[i].is_char('=')) {
        i = skip_blanks(i + 1, end);
        const std::size_t vstart = i;
        if (i < end && seq_[i].is_char('"')) {
          const auto stop = string_end(i, end);
          if (!stop) {
            error(i, end, "Unterminated option value");
            return false;
          }
          opt.value = seq_.text(i + 1, *stop - 1);
          i = *stop;
        } else {
          while (i < end && !seq_[i].is_blank() && !seq_[i].is_char(',')) ++i;
          if (i == vstart) {
            error(vstart, end, "Missing value for option \"" + opt.name + "\"");
            return false;
          }
          opt.value = seq_.text(vstart, i);
        }
        i = skip_blanks(i, end);
      }
      options.push_back(std::move(opt));
      if (i == end) return true;
      if (!seq_[i].is_char(',')) {
        error(i, end, "Expected \",\" between antiquotation options");
        return false;
      }
      i = skip_blanks(i + 1, end);
    }
  }

  std::size_t formal_comment(std::size_t at, std::size_t end, bool in_comment) {
    const std::size_t j = skip_blanks(at + 1, end);
    const auto stop = cartouche_end(seq_, j, end);
    if (!stop) return at + 1;
    if (in_comment) {
      out_.messages.push_back(make_message(Severity::Info, seq_.range(at, *stop),
                                           "Nested formal comment not validated", kScanOrigin));
    } else if (seq_[at].is_named("comment")) {
      scan(j + 1, *stop - 1, true);
    }
    return *stop;
  }

  std::size_t control(std::size_t at, std::size_t end) {
    Antiquotation a;
    a.name = seq_[at].name;
    a.name_range = seq_.range(at, at + 1);
    if (auto stop = cartouche_end(seq_, at + 1, end)) {
      a.form = AntiquotationForm::ControlCartouche;
      a.argument = seq_.range(at + 1, *stop);
      a.argument_text = seq_.text(at + 1, *stop);
      a.range = seq_.range(at, *stop);
    } else {
      a.form = AntiquotationForm::ControlOnly;
      a.range = seq_.range(at, at + 1);
    }
    const std::size_t next = a.range.stop.offset;
    out_.antiquotations.push_back(std::move(a));
    return next;
  }

  const SymbolSeq& seq_;
  AntiquotationScan& out_;
};

enum class ArgShape { Cartouche, String, Name, Other };

struct ArgInfo {
  ArgShape shape = ArgShape::Other;
  std::size_t inner_start = 0;
  std::size_t inner_stop = 0;
};

ArgInfo classify_argument(const SymbolSeq& seq, const Range& r) {
  const std::size_t a = r.start.offset;
  const std::size_t b = r.stop.offset;
  ArgInfo info{ArgShape::Other, a, b};
  if (a >= b) return info;
  if (seq[a].is_open()) {
    if (cartouche_end(seq, a, b) == b) info = {ArgShape::Cartouche, a + 1, b - 1};
    return info;
  }
  if (seq[a].is_char('"')) {
    bool closed = false;
    for (std::size_t j = a + 1; j < b; ++j) {
      if (seq[j].is_char('\\')) {
        ++j;
      } else if (seq[j].is_char('"')) {
        closed = j + 1 == b;
        break;
      }
    }
    if (closed) info = {ArgShape::String, a + 1, b - 1};
    return info;
  }
  for (std::size_t j = a; j < b; ++j) {
    if (seq[j].is_blank() || seq[j].is_open() || seq[j].is_close()) return info;
  }
  info.shape = ArgShape::Name;
  return info;
}

bool is_key_char(const Symbol& s) { return !s.is_blank() && !s.is_char(',') && !s.is_open() && !s.is_close(); }

}  // namespace

std::string_view antiquotation_form_name(AntiquotationForm form) {
  switch (form) {
    case AntiquotationForm::Long: return "long";
    case AntiquotationForm::ControlCartouche: return "control_cartouche";
    case AntiquotationForm::BareCartouche: return "cartouche";
    case AntiquotationForm::ControlOnly: return "control";
  }
  return "long";
}

std::string_view arity_name(Arity a) {
  switch (a) {
    case Arity::NoArg: return "none";
    case Arity::OneArg: return "one";
    case Arity::FreeForm: return "free";
  }
  return "free";
}

std::string_view checker_name(Checker c) {
  switch (c) {
    case Checker::None: return "none";
    case Checker::TheoryName: return "theory";
    case Checker::Path: return "path";
    case Checker::Dir: return "dir";
    case Checker::Url: return "url";
    case Checker::Cite: return "cite";
    case Checker::Term: return "term";
  }
  return "none";
}

AntiquotationScan scan_antiquotations(const SymbolSeq& seq, std::size_t begin, std::size_t end) {
  AntiquotationScan out;
  end = std::min(end, seq.size());
  Scanner(seq, out).scan(std::min(begin, end), end, false);
  return out;
}

std::string to_long_form(const Antiquotation& a) {
  std::string out = "@{" + a.name;
  if (!a.options.empty()) {
    out += " [";
    for (std::size_t k = 0; k < a.options.size(); ++k) {
      if (k > 0) out += ", ";
      out += a.options[k].name;
      if (a.options[k].value) out += " = \"" + *a.options[k].value + "\"";
    }
    out += "]";
  }
  if (a.argument) out += " " + a.argument_text;
  return out + "}";
}

const AntiquotationRegistry& AntiquotationRegistry::builtin() {
  static const AntiquotationRegistry registry = [] {
    AntiquotationRegistry r;
    r.add("term", {Arity::OneArg, Checker::Term});
    r.add("prop", {Arity::OneArg, Checker::Term});
    r.add("typ", {Arity::OneArg, Checker::Term});
    r.add("const", {Arity::OneArg, Checker::Term});
    r.add("cite", {Arity::FreeForm, Checker::Cite});
    r.add("cartouche", {Arity::OneArg, Checker::None});
    r.add("file", {Arity::OneArg, Checker::Path});
    r.add("path", {Arity::OneArg, Checker::None});
    r.add("dir", {Arity::OneArg, Checker::Dir});
    r.add("url", {Arity::OneArg, Checker::Url});
    r.add("lemma", {Arity::FreeForm, Checker::None});
    r.add("thm", {Arity::FreeForm, Checker::None});
    r.add("theory", {Arity::OneArg, Checker::TheoryName});
    r.add("text", {Arity::OneArg, Checker::None});
    r.add("ML", {Arity::OneArg, Checker::None});
    r.add("verbatim", {Arity::OneArg, Checker::None});
    r.add("emph", {Arity::OneArg, Checker::None});
    r.add("bold", {Arity::FreeForm, Checker::None});
    r.add("footnote", {Arity::OneArg, Checker::None});
    for (const char* control : {"sub", "sup", "bsub", "esub", "bsup", "esup", "noindent", "smallskip", "medskip",
                                "bigskip", "here"}) {
      r.add(control, {Arity::NoArg, Checker::None});
    }
    return r;
  }();
  return registry;
}

AntiquotationRegistry AntiquotationRegistry::load(std::string_view config, const AntiquotationRegistry& base) {
  static const std::map<std::string, Arity> arities{
      {"none", Arity::NoArg}, {"noarg", Arity::NoArg}, {"one", Arity::OneArg}, {"onearg", Arity::OneArg},
      {"free", Arity::FreeForm}, {"freeform", Arity::FreeForm}};
  static const std::map<std::string, Checker> checkers{
      {"none", Checker::None}, {"theory", Checker::TheoryName}, {"path", Checker::Path}, {"file", Checker::Path},
      {"dir", Checker::Dir},   {"url", Checker::Url},           {"cite", Checker::Cite}, {"term", Checker::Term}};
  AntiquotationRegistry r = base;
  std::istringstream in{std::string(config)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, arity, checker, extra;
    if (!(fields >> name)) continue;
    const auto where = "antiquotation table line " + std::to_string(line_no) + ": ";
    if (!(fields >> arity >> checker) || (fields >> extra)) {
      throw ConfigError(where + "expected NAME ARITY CHECKER");
    }
    std::transform(arity.begin(), arity.end(), arity.begin(), [](unsigned char c) { return std::tolower(c); });
    std::transform(checker.begin(), checker.end(), checker.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!is_symbol_name(name)) throw ConfigError(where + "bad name \"" + name + "\"");
    const auto a = arities.find(arity);
    if (a == arities.end()) throw ConfigError(where + "unknown arity \"" + arity + "\"");
    const auto c = checkers.find(checker);
    if (c == checkers.end()) throw ConfigError(where + "unknown checker \"" + checker + "\"");
    r.add(name, {a->second, c->second});
  }
  return r;
}

const AntiquotationSpec* AntiquotationRegistry::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

CiteArgs parse_cite_args(const SymbolSeq& seq, const Range& argument) {
  CiteArgs out;
  std::size_t i = argument.start.offset;
  std::size_t end = argument.stop.offset;
  const auto skip = [&] {
    while (i < end && seq[i].is_blank()) ++i;
  };
  skip();
  if (i < end && seq[i].is_open()) {
    const auto stop = cartouche_end(seq, i, end);
    if (!stop) {
      out.error = "Unbalanced cartouche in citation";
      return out;
    }
    std::size_t after = *stop;
    while (after < end && seq[after].is_blank()) ++after;
    if (after == end && out.keys.empty()) {
      // A lone cartouche holds the keys, as in `\<^cite>‹key›`.
      i = i + 1;
      end = *stop - 1;
    } else {
      out.opt = seq.range(i, *stop);
      i = *stop;
    }
  }
  bool need_key = true;
  for (;;) {
    skip();
    if (i >= end) break;
    if (seq[i].is_char(',')) {
      if (need_key) {
        out.error = "Missing citation key before \",\"";
        return out;
      }
      need_key = true;
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < end && is_key_char(seq[i])) ++i;
    if (i == start) {
      out.error = "Unexpected \"" + seq[i].source + "\" in citation";
      return out;
    }
    std::string word = seq.text(start, i);
    if (word == "and" && !need_key) {
      need_key = true;
      continue;
    }
    if (!need_key) {
      out.error = "Expected \",\" or \"and\" between citation keys";
      return out;
    }
    out.keys.emplace_back(std::move(word), seq.range(start, i));
    need_key = false;
  }
  if (out.keys.empty()) {
    out.error = "Missing citation key";
  } else if (need_key) {
    out.error = "Missing citation key after separator";
  }
  return out;
}

std::vector<Message> check_antiquotations(const SymbolSeq& seq, const std::vector<Antiquotation>& as,
                                          const AntiquotationRegistry& registry, const CheckEnv& env) {
  std::vector<Message> out;
  const auto report = [&](Severity sev, const Range& r, std::string text) {
    out.push_back(make_message(sev, r, std::move(text), kCheckOrigin));
  };
  static const std::regex url_shape(R"(^([A-Za-z][A-Za-z0-9+.\-]*://[^\s/]+\S*|mailto:\S+@\S+)$)");

  for (const Antiquotation& a : as) {
    const AntiquotationSpec* spec = registry.find(a.name);
    if (spec == nullptr) {
      report(Severity::Error, a.name_range.empty() ? a.range : a.name_range,
             "Unknown antiquotation \"" + a.name + "\"");
      continue;
    }
    const ArgInfo arg = a.argument ? classify_argument(seq, *a.argument) : ArgInfo{};
    if (spec->arity == Arity::NoArg && a.argument) {
      report(Severity::Error, *a.argument, "Antiquotation \"" + a.name + "\" takes no argument");
      continue;
    }
    if (spec->arity == Arity::OneArg) {
      if (!a.argument) {
        report(Severity::Error, a.range, "Antiquotation \"" + a.name + "\" expects one argument");
        continue;
      }
      if (arg.shape == ArgShape::Other) {
        report(Severity::Error, *a.argument,
               "Antiquotation \"" + a.name + "\" expects one argument (a cartouche, string or name)");
        continue;
      }
    }
    const std::string content = a.argument ? seq.text(arg.inner_start, arg.inner_stop) : std::string();
    switch (spec->checker) {
      case Checker::None:
        break;
      case Checker::Term:
        if (a.argument && arg.shape == ArgShape::Other) {
          report(Severity::Error, *a.argument, "Malformed term argument: expected a cartouche, string or name");
        }
        break;
      case Checker::Path:
      case Checker::Dir: {
        if (!a.argument) break;
        if (!env.base_dir) {
          report(Severity::Info, *a.argument, "Path \"" + content + "\" not checked: no base directory");
          break;
        }
        std::error_code ec;
        const std::filesystem::path p = *env.base_dir / content;
        const bool ok = spec->checker == Checker::Dir ? std::filesystem::is_directory(p, ec)
                                                      : std::filesystem::is_regular_file(p, ec);
        if (!ok) {
          report(Severity::Error, *a.argument,
                 std::string(spec->checker == Checker::Dir ? "Bad directory" : "Bad file") + " \"" + content + "\"");
        }
        break;
      }
      case Checker::Url:
        if (a.argument && !std::regex_match(content, url_shape)) {
          report(Severity::Error, *a.argument, "Malformed URL \"" + content + "\"");
        }
        break;
      case Checker::Cite: {
        if (!a.argument) {
          report(Severity::Error, a.range, "Missing citation key");
          break;
        }
        const CiteArgs cite = parse_cite_args(seq, *a.argument);
        if (cite.error) {
          report(Severity::Error, *a.argument, *cite.error);
          break;
        }
        for (const auto& [key, r] : cite.keys) {
          if (env.bib_keys.count(key) == 0) report(Severity::Error, r, "Undefined citation \"" + key + "\"");
        }
        break;
      }
      case Checker::TheoryName: {
        if (!a.argument) break;
        if (env.graph == nullptr || !env.session) {
          report(Severity::Info, *a.argument, "Theory name \"" + content + "\" not checked: no session context");
          break;
        }
        const ResolvedTheory resolved = resolve_theory(content, *env.session, *env.graph);
        if (resolved.error) {
          report(Severity::Error, *a.argument, resolved.error->text);
        } else if (resolved.path && !resolved.id.global) {
          std::error_code ec;
          if (!std::filesystem::is_regular_file(*resolved.path, ec)) {
            report(Severity::Error, *a.argument, "Unknown theory \"" + content + "\" (no file " +
                                                     resolved.path->generic_string() + ")");
          }
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace pide
