#include "pide/bibtex.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "pide/errors.hpp"

namespace pide {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

class BibLexer {
 public:
  explicit BibLexer(const SymbolSeq& seq) : seq_(seq), n_(seq.size()) {}

  std::vector<BibToken> run() {
    while (i_ < n_) {
      if (ch(i_) == '@') {
        entry();
      } else if (seq_[i_].is_blank()) {
        space();
      } else {
        const std::size_t s = i_;
        while (i_ < n_ && ch(i_) != '@' && !seq_[i_].is_blank()) ++i_;
        emit(BibTokenKind::Junk, s, i_);
      }
    }
    return std::move(out_);
  }

 private:
  char ch(std::size_t i) const { return i < n_ ? seq_[i].ascii() : '\0'; }

  bool id_char(std::size_t i) const {
    if (i >= n_ || seq_[i].is_blank()) return false;
    const char c = seq_[i].ascii();
    if (c == '\0') return true;
    return std::string_view("\"#%'(),={}@").find(c) == std::string_view::npos && std::isprint(c) != 0;
  }

  bool line_initial(std::size_t j) const {
    std::size_t k = j;
    while (k > 0 && (ch(k - 1) == ' ' || ch(k - 1) == '\t')) --k;
    return k == 0 || seq_[k - 1].is_newline();
  }

  // A newline at `j` followed by blanks and `@` ends any value.
  bool entry_break(std::size_t j) const {
    if (!seq_[j].is_newline()) return false;
    std::size_t k = j + 1;
    while (k < n_ && (ch(k) == ' ' || ch(k) == '\t')) ++k;
    return ch(k) == '@';
  }

  void emit(BibTokenKind kind, std::size_t a, std::size_t b, std::optional<std::string> diagnostic = std::nullopt) {
    out_.push_back(BibToken{kind, seq_.text(a, b), seq_.range(a, b), std::move(diagnostic)});
  }

  void space() {
    const std::size_t s = i_;
    while (i_ < n_ && seq_[i_].is_blank()) ++i_;
    if (i_ > s) emit(BibTokenKind::Space, s, i_);
  }

  // Skip to the next `@` at the start of a line. Returns false for use in
  // tail position.
  bool recover(std::string diagnostic) {
    const std::size_t s = i_;
    std::size_t j = i_;
    while (j < n_ && !(ch(j) == '@' && line_initial(j))) ++j;
    if (j > s) emit(BibTokenKind::Junk, s, j, std::move(diagnostic));
    i_ = j;
    return false;
  }

  void entry() {
    emit(BibTokenKind::At, i_, i_ + 1);
    ++i_;
    space();
    const std::size_t ts = i_;
    while (id_char(i_)) ++i_;
    if (i_ == ts) return void(recover("Missing entry type after \"@\""));
    emit(BibTokenKind::EntryType, ts, i_);
    const std::string type = lower(seq_.text(ts, i_));
    space();
    char close = '\0';
    if (ch(i_) == '{') {
      close = '}';
      emit(BibTokenKind::BraceOpen, i_, i_ + 1);
    } else if (ch(i_) == '(') {
      close = ')';
      emit(BibTokenKind::ParenOpen, i_, i_ + 1);
    } else {
      return void(recover("Expected \"{\" or \"(\" after entry type \"" + seq_.text(ts, ts + (i_ - ts)) + "\""));
    }
    ++i_;
    if (type == "comment") {
      comment(close);
    } else if (type == "preamble") {
      space();
      if (value()) expect_close(close);
    } else if (type == "string") {
      space();
      if (field(close)) expect_close(close);
    } else {
      regular(close);
    }
  }

  void comment(char close) {
    const std::size_t s = i_;
    std::size_t depth = 0;
    for (std::size_t j = i_; j < n_; ++j) {
      const char c = ch(j);
      if (c == '{') {
        ++depth;
      } else if (c == '}' && depth > 0) {
        --depth;
      } else if (c == close && depth == 0) {
        if (j > s) emit(BibTokenKind::Junk, s, j);
        i_ = j;
        expect_close(close);
        return;
      }
    }
    recover("Unterminated @comment");
  }

  void expect_close(char close) {
    space();
    if (ch(i_) == close) {
      emit(close == '}' ? BibTokenKind::BraceClose : BibTokenKind::ParenClose, i_, i_ + 1);
      ++i_;
    } else {
      recover(std::string("Expected \"") + close + "\" to close the entry");
    }
  }

  // `name = value`; false after error recovery.
  bool field(char close) {
    const std::size_t s = i_;
    while (id_char(i_)) ++i_;
    if (i_ == s) {
      return ch(i_) == close || i_ >= n_ ? recover(std::string("Expected field name before \"") + close + "\"")
                                         : recover("Expected field name");
    }
    emit(BibTokenKind::FieldName, s, i_);
    space();
    if (ch(i_) != '=') return recover("Expected \"=\" after field name \"" + seq_.text(s, s + (i_ - s)) + "\"");
    emit(BibTokenKind::Equals, i_, i_ + 1);
    ++i_;
    space();
    return value();
  }

  void regular(char close) {
    space();
    const std::size_t ks = i_;
    while (i_ < n_ && !seq_[i_].is_blank() && ch(i_) != ',' && ch(i_) != close && !(ch(i_) == '@' && line_initial(i_))) {
      ++i_;
    }
    if (i_ > ks) emit(BibTokenKind::Key, ks, i_);
    for (;;) {
      space();
      if (ch(i_) == close) {
        emit(close == '}' ? BibTokenKind::BraceClose : BibTokenKind::ParenClose, i_, i_ + 1);
        ++i_;
        return;
      }
      if (ch(i_) != ',') {
        recover(std::string("Expected \",\" or \"") + close + "\"");
        return;
      }
      emit(BibTokenKind::Comma, i_, i_ + 1);
      ++i_;
      space();
      if (ch(i_) == close) continue;
      if (!field(close)) return;
    }
  }

  // One or more `#`-joined pieces; false after error recovery.
  bool value() {
    for (;;) {
      const std::size_t s = i_;
      const char c = ch(i_);
      if (c == '{') {
        std::size_t depth = 0;
        std::size_t j = i_;
        for (; j < n_; ++j) {
          if (entry_break(j)) break;
          if (ch(j) == '{') {
            ++depth;
          } else if (ch(j) == '}' && --depth == 0) {
            break;
          }
        }
        if (j >= n_ || ch(j) != '}') return recover("Unbalanced braces in field value");
        emit(BibTokenKind::BracedValue, s, j + 1);
        i_ = j + 1;
      } else if (c == '"') {
        std::size_t depth = 0;
        std::size_t j = i_ + 1;
        bool ok = false;
        for (; j < n_; ++j) {
          if (entry_break(j)) break;
          const char d = ch(j);
          if (d == '{') {
            ++depth;
          } else if (d == '}') {
            if (depth == 0) break;
            --depth;
          } else if (d == '"' && depth == 0) {
            ok = true;
            break;
          }
        }
        if (!ok) return recover("Unterminated quoted field value");
        emit(BibTokenKind::QuotedValue, s, j + 1);
        i_ = j + 1;
      } else if (c >= '0' && c <= '9') {
        while (ch(i_) >= '0' && ch(i_) <= '9') ++i_;
        emit(BibTokenKind::Number, s, i_);
      } else if (id_char(i_)) {
        while (id_char(i_)) ++i_;
        emit(BibTokenKind::MacroName, s, i_);
      } else {
        return recover("Expected field value");
      }
      space();
      if (ch(i_) != '#') return true;
      emit(BibTokenKind::Concat, i_, i_ + 1);
      ++i_;
      space();
    }
  }

  const SymbolSeq& seq_;
  std::size_t n_;
  std::size_t i_ = 0;
  std::vector<BibToken> out_;
};

BibEntryKind entry_kind(const std::string& type) {
  if (type == "comment") return BibEntryKind::Comment;
  if (type == "preamble") return BibEntryKind::Preamble;
  if (type == "string") return BibEntryKind::StringMacro;
  return BibEntryKind::Regular;
}

bool is_value_token(BibTokenKind k) {
  return k == BibTokenKind::BracedValue || k == BibTokenKind::QuotedValue || k == BibTokenKind::Number ||
         k == BibTokenKind::MacroName || k == BibTokenKind::Concat;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

Range end_range(const std::vector<BibToken>& tokens) {
  if (tokens.empty()) return Range{};
  return Range{tokens.back().range.stop, tokens.back().range.stop};
}

}  // namespace

std::string_view bib_token_kind_name(BibTokenKind kind) {
  switch (kind) {
    case BibTokenKind::At: return "at";
    case BibTokenKind::EntryType: return "entry_type";
    case BibTokenKind::Key: return "key";
    case BibTokenKind::FieldName: return "field_name";
    case BibTokenKind::Equals: return "equals";
    case BibTokenKind::Comma: return "comma";
    case BibTokenKind::BraceOpen: return "brace_open";
    case BibTokenKind::BraceClose: return "brace_close";
    case BibTokenKind::ParenOpen: return "paren_open";
    case BibTokenKind::ParenClose: return "paren_close";
    case BibTokenKind::BracedValue: return "braced_value";
    case BibTokenKind::QuotedValue: return "quoted_value";
    case BibTokenKind::Number: return "number";
    case BibTokenKind::Concat: return "concat";
    case BibTokenKind::MacroName: return "macro_name";
    case BibTokenKind::Junk: return "junk";
    case BibTokenKind::Space: return "space";
  }
  return "junk";
}

std::vector<BibToken> tokenize_bib(const SymbolSeq& seq) { return BibLexer(seq).run(); }

std::vector<BibToken> tokenize_bib(std::string_view text) { return tokenize_bib(decode(text)); }

const BibField* BibEntry::field(std::string_view name) const {
  const std::string wanted = lower(name);
  for (const BibField& f : fields) {
    if (lower(f.name) == wanted) return &f;
  }
  return nullptr;
}

BibParse parse_entries(const std::vector<BibToken>& tokens) {
  constexpr const char* origin = "bibtex.parse_entries";
  BibParse out;
  std::size_t k = 0;
  while (k < tokens.size()) {
    if (tokens[k].kind != BibTokenKind::At) {
      ++k;
      continue;
    }
    BibEntry e;
    e.first_token = k;
    e.type_range = tokens[k].range;
    bool closed = false;
    bool failed = false;
    BibField* current = nullptr;
    BibField discarded;
    ++k;
    for (; k < tokens.size(); ++k) {
      const BibToken& t = tokens[k];
      if (t.kind == BibTokenKind::At) break;
      if (t.kind == BibTokenKind::EntryType) {
        e.type_spelling = t.source;
        e.entry_type = lower(t.source);
        e.type_range = t.range;
        e.kind = entry_kind(e.entry_type);
        if (e.kind == BibEntryKind::Preamble) {
          e.fields.push_back(BibField{"preamble", t.range, {}, Range{}});
          current = &e.fields.back();
        }
      } else if (t.kind == BibTokenKind::Key) {
        e.key = t.source;
        e.key_range = t.range;
      } else if (t.kind == BibTokenKind::FieldName) {
        if (e.kind == BibEntryKind::StringMacro && e.key.empty()) {
          e.key = t.source;
          e.key_range = t.range;
        }
        if (e.field(t.source) != nullptr) {
          out.messages.push_back(make_message(
              Severity::Warning, t.range,
              "Duplicate field \"" + t.source + "\" in entry \"" + e.key + "\" (the first occurrence is used)", origin));
          discarded = BibField{t.source, t.range, {}, Range{}};
          current = &discarded;
        } else {
          e.fields.push_back(BibField{t.source, t.range, {}, Range{}});
          current = &e.fields.back();
        }
      } else if (is_value_token(t.kind)) {
        if (current != nullptr) {
          if (current->value.empty()) current->value_range.start = t.range.start;
          current->value.push_back(t);
          current->value_range.stop = t.range.stop;
        }
      } else if (t.kind == BibTokenKind::BraceClose || t.kind == BibTokenKind::ParenClose) {
        closed = true;
        ++k;
        break;
      } else if (t.kind == BibTokenKind::Junk && t.diagnostic) {
        out.messages.push_back(make_message(Severity::Error, t.range, *t.diagnostic, origin));
        failed = true;
        ++k;
        break;
      }
    }
    e.last_token = k;
    std::size_t last = k;
    while (last > e.first_token + 1 && tokens[last - 1].kind == BibTokenKind::Space) --last;
    e.range = Range{tokens[e.first_token].range.start, tokens[last - 1].range.stop};
    if (!closed && !failed) {
      out.messages.push_back(make_message(Severity::Error, e.range,
                                          "Missing closing delimiter of entry" +
                                              (e.key.empty() ? std::string() : " \"" + e.key + "\""),
                                          origin));
    } else if (closed && e.kind == BibEntryKind::Regular && e.key.empty()) {
      out.messages.push_back(make_message(Severity::Error, e.type_range, "Missing entry key", origin));
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

const FieldSpec& FieldSpec::builtin() {
  static const FieldSpec spec = parse(builtin_field_table());
  return spec;
}

FieldSpec FieldSpec::parse(std::string_view text) {
  FieldSpec spec;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = "field table line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected TYPE = REQUIRED ; OPTIONAL");
    std::istringstream head(line.substr(0, eq));
    std::string type, extra;
    if (!(head >> type) || (head >> extra)) throw ConfigError(where + "expected one entry type before \"=\"");
    const std::string rest = line.substr(eq + 1);
    const auto semi = rest.find(';');
    std::istringstream req(rest.substr(0, semi));
    std::istringstream opt(semi == std::string::npos ? std::string() : rest.substr(semi + 1));
    Entry entry;
    for (std::string group; req >> group;) {
      std::vector<std::string> alternatives;
      std::istringstream alts(group);
      for (std::string a; std::getline(alts, a, '/');) {
        if (a.empty()) throw ConfigError(where + "empty alternative in \"" + group + "\"");
        alternatives.push_back(lower(a));
      }
      entry.required.push_back(std::move(alternatives));
    }
    for (std::string f; opt >> f;) entry.optional.insert(lower(f));
    type = lower(type);
    if (type == "*") {
      if (!entry.required.empty()) throw ConfigError(where + "type \"*\" cannot have required fields");
      spec.universal_.insert(entry.optional.begin(), entry.optional.end());
    } else {
      spec.entries_[type] = std::move(entry);
    }
  }
  return spec;
}

const FieldSpec::Entry* FieldSpec::find(std::string_view entry_type) const {
  auto it = entries_.find(lower(entry_type));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<Message> check_required_fields(const BibEntry& entry, const FieldSpec& spec) {
  constexpr const char* origin = "bibtex.check_required_fields";
  std::vector<Message> out;
  if (entry.kind != BibEntryKind::Regular) return out;
  const FieldSpec::Entry* table = spec.find(entry.entry_type);
  if (table == nullptr) {
    out.push_back(make_message(Severity::Warning, entry.type_range,
                               "Unknown entry type \"" + entry.type_spelling + "\"", origin));
    return out;
  }
  const Range anchor = entry.key_range.value_or(entry.type_range);
  const auto present = [&](const std::string& name) {
    const BibField* f = entry.field(name);
    return f != nullptr && !field_text(*f).empty();
  };
  for (const auto& group : table->required) {
    if (std::any_of(group.begin(), group.end(), present)) continue;
    std::string names;
    for (std::size_t k = 0; k < group.size(); ++k) names += (k == 0 ? "\"" : " or \"") + group[k] + "\"";
    out.push_back(make_message(Severity::Warning, anchor,
                               "Missing required field " + names + " in " + entry.entry_type + " entry \"" +
                                   entry.key + "\"",
                               origin));
  }
  for (const BibField& f : entry.fields) {
    const std::string name = lower(f.name);
    const bool required = std::any_of(table->required.begin(), table->required.end(), [&](const auto& group) {
      return std::find(group.begin(), group.end(), name) != group.end();
    });
    if (required || table->optional.count(name) != 0 || spec.universal().count(name) != 0) continue;
    out.push_back(make_message(Severity::Info, f.name_range,
                               "Field \"" + f.name + "\" is ignored for entry type " + entry.entry_type, origin));
  }
  return out;
}

std::vector<Message> check_duplicate_keys(const std::vector<BibEntry>& entries) {
  std::vector<Message> out;
  std::map<std::string, const BibEntry*> seen;
  for (const BibEntry& e : entries) {
    if (e.kind != BibEntryKind::Regular || e.key.empty()) continue;
    auto [it, fresh] = seen.emplace(lower(e.key), &e);
    if (!fresh) {
      out.push_back(make_message(Severity::Error, e.key_range.value_or(e.range),
                                 "Repeated entry key \"" + e.key + "\"", "bibtex.check_duplicate_keys"));
    }
  }
  return out;
}

std::vector<OutlineNode> outline_bib(const std::vector<BibEntry>& entries, std::string_view filter) {
  const std::string needle = lower(filter);
  std::vector<OutlineNode> out;
  for (const BibEntry& e : entries) {
    if (e.key.empty() || (e.kind != BibEntryKind::Regular && e.kind != BibEntryKind::StringMacro)) continue;
    if (!needle.empty() && lower(e.key).find(needle) == std::string::npos) continue;
    out.push_back(OutlineNode{e.entry_type + ":" + e.key, 1, e.range, {}});
  }
  return out;
}

std::string line_form(const BibToken& token) {
  std::string out;
  out.reserve(token.source.size());
  for (std::size_t k = 0; k < token.source.size(); ++k) {
    const char c = token.source[k];
    if (c == '\r' && k + 1 < token.source.size() && token.source[k + 1] == '\n') continue;
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

TokenLines token_lines(const std::vector<BibToken>& tokens) {
  TokenLines out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (!tokens[k].is_substantive()) continue;
    out.text += line_form(tokens[k]);
    out.text += '\n';
    out.token_of_line.push_back(k);
  }
  return out;
}

std::optional<fs::path> find_executable(const std::string& name) {
  const auto runnable = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.empty()) return std::nullopt;
  if (name.find('/') != std::string::npos) {
    if (runnable(name)) return fs::path(name);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return std::nullopt;
  std::istringstream dirs(path);
  for (std::string dir; std::getline(dirs, dir, ':');) {
    const fs::path candidate = fs::path(dir.empty() ? "." : dir) / name;
    if (runnable(candidate)) return candidate;
  }
  return std::nullopt;
}

std::string run_external_check(std::string_view text, const fs::path& exe, const fs::path& workdir,
                               std::chrono::milliseconds timeout) {
  const auto program = find_executable(exe.string());
  if (!program) throw EnvironmentError("BibTeX executable not found: " + exe.string());
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) throw EnvironmentError("Cannot create working directory " + workdir.string() + ": " + ec.message());

  const TokenLines lines = token_lines(tokenize_bib(text));
  {
    std::ofstream bib(workdir / "sketch.bib", std::ios::binary);
    bib << lines.text;
    std::ofstream aux(workdir / "sketch.aux", std::ios::binary);
    aux << "\\citation{*}\n\\bibstyle{plain}\n\\bibdata{sketch}\n";
    if (!bib || !aux) throw EnvironmentError("Cannot write input files in " + workdir.string());
  }
  fs::remove(workdir / "sketch.blg", ec);

  // Everything the child needs is prepared before fork.
  const std::string prog = program->string();
  const std::string dir = workdir.string();
  std::string arg0 = prog;
  std::string arg1 = "sketch";
  char* argv[] = {arg0.data(), arg1.data(), nullptr};

  const pid_t pid = ::fork();
  if (pid < 0) throw EnvironmentError("Cannot start " + prog);
  if (pid == 0) {
    if (::chdir(dir.c_str()) != 0) ::_exit(127);
    const int null_fd = ::open("/dev/null", O_RDWR);
    if (null_fd >= 0) {
      ::dup2(null_fd, 0);
      ::dup2(null_fd, 1);
      ::dup2(null_fd, 2);
    }
    ::execv(prog.c_str(), argv);
    ::_exit(127);
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw EnvironmentError("Lost track of " + prog);
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw EnvironmentError(prog + " timed out after " + std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  const fs::path blg = workdir / "sketch.blg";
  if (!fs::is_regular_file(blg, ec)) {
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127) throw EnvironmentError("Cannot run " + prog);
    throw EnvironmentError(prog + " produced no log file");
  }
  std::ifstream in(blg, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

BlgResult parse_blg(std::string_view log, const TokenLines& lines, const std::vector<BibToken>& tokens,
                    const std::vector<BibEntry>& entries) {
  constexpr const char* origin = "bibtex.parse_blg";
  static const std::regex error_line(R"(^(.*)---line (\d+) of file (.*)$)");
  static const std::regex warning_in(R"(^Warning--(.*) in (\S+)$)");
  static const std::regex warning(R"(^Warning--(.*)$)");
  static const std::regex line_ref(R"(^--line (\d+) of file (.*)$)");

  BlgResult out;
  std::vector<std::string> log_lines;
  {
    std::istringstream in{std::string(log)};
    for (std::string l; std::getline(in, l);) {
      if (!l.empty() && l.back() == '\r') l.pop_back();
      log_lines.push_back(std::move(l));
    }
  }
  std::map<std::string, const BibEntry*> by_key;
  for (const BibEntry& e : entries) {
    if (e.kind == BibEntryKind::Regular && !e.key.empty()) by_key.emplace(e.key, &e);
  }
  const auto at_line = [&](const std::string& number, const std::string& file, std::string& text) -> Range {
    if (!file.ends_with(".bib")) return Range{};
    const std::size_t n = std::stoul(number);
    if (n >= 1 && n <= lines.token_of_line.size()) return tokens.at(lines.token_of_line[n - 1]).range;
    text += " (log refers to line " + number + ", beyond the " + std::to_string(lines.token_of_line.size()) +
            " token lines)";
    return end_range(tokens);
  };

  std::smatch m;
  for (std::size_t k = 0; k < log_lines.size(); ++k) {
    const std::string& l = log_lines[k];
    if (l.find("I'm skipping whatever remains") != std::string::npos ||
        l.find("(Error may have been on previous line)") != std::string::npos || l.starts_with(" : ")) {
      continue;
    }
    if (std::regex_match(l, m, error_line)) {
      std::string text = m[1].str();
      const Range r = at_line(m[2].str(), m[3].str(), text);
      out.messages.push_back(make_message(Severity::Error, r, text, origin));
    } else if (std::regex_match(l, m, warning_in) && by_key.count(m[2].str()) != 0) {
      const BibEntry& e = *by_key.at(m[2].str());
      out.messages.push_back(make_message(Severity::Warning, e.key_range.value_or(e.range),
                                          m[1].str() + " in " + m[2].str(), origin));
    } else if (std::regex_match(l, m, warning)) {
      std::string text = m[1].str();
      Range r{};
      std::smatch ref;
      if (k + 1 < log_lines.size() && std::regex_match(log_lines[k + 1], ref, line_ref)) {
        r = at_line(ref[1].str(), ref[2].str(), text);
        ++k;
      }
      out.messages.push_back(make_message(Severity::Warning, r, text, origin));
    } else if (!l.empty()) {
      out.unmatched.push_back(l);
    }
  }
  return out;
}

std::string field_text(const BibField& field, const std::map<std::string, std::string>& macros) {
  static const std::map<std::string, std::string> months{
      {"jan", "January"}, {"feb", "February"}, {"mar", "March"},     {"apr", "April"},
      {"may", "May"},     {"jun", "June"},     {"jul", "July"},      {"aug", "August"},
      {"sep", "September"}, {"oct", "October"}, {"nov", "November"}, {"dec", "December"}};
  std::string raw;
  for (const BibToken& t : field.value) {
    switch (t.kind) {
      case BibTokenKind::BracedValue:
      case BibTokenKind::QuotedValue:
        raw += t.source.substr(1, t.source.size() - 2);
        break;
      case BibTokenKind::Number:
        raw += t.source;
        break;
      case BibTokenKind::MacroName: {
        const std::string name = lower(t.source);
        if (auto it = macros.find(name); it != macros.end()) {
          raw += it->second;
        } else if (auto mo = months.find(name); mo != months.end()) {
          raw += mo->second;
        } else {
          raw += t.source;
        }
        break;
      }
      default:
        break;
    }
  }
  raw.erase(std::remove_if(raw.begin(), raw.end(), [](char c) { return c == '{' || c == '}'; }), raw.end());
  return collapse_spaces(raw);
}

std::map<std::string, std::string> string_macros(const std::vector<BibEntry>& entries) {
  std::map<std::string, std::string> macros;
  for (const BibEntry& e : entries) {
    if (e.kind != BibEntryKind::StringMacro || e.fields.empty()) continue;
    macros[lower(e.fields.front().name)] = field_text(e.fields.front(), macros);
  }
  return macros;
}

std::string render_html(const std::vector<BibEntry>& entries) {
  const auto macros = string_macros(entries);
  std::vector<const BibEntry*> sorted;
  for (const BibEntry& e : entries) {
    if (e.kind == BibEntryKind::Regular && !e.key.empty()) sorted.push_back(&e);
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const BibEntry* a, const BibEntry* b) {
    const std::string la = lower(a->key);
    const std::string lb = lower(b->key);
    return la != lb ? la < lb : a->key < b->key;
  });
  const auto text = [&](const BibEntry& e, std::string_view name) -> std::string {
    const BibField* f = e.field(name);
    return f == nullptr ? std::string() : field_text(*f, macros);
  };

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Bibliography</title>\n"
       << "<style>li{margin-bottom:0.6em} .key{font-family:monospace}</style>\n</head>\n<body>\n"
       << "<ul class=\"bibliography\">\n";
  for (const BibEntry* e : sorted) {
    std::string authors = text(*e, "author");
    if (authors.empty()) authors = text(*e, "editor");
    for (std::size_t pos; (pos = authors.find(" and ")) != std::string::npos;) authors.replace(pos, 5, ", ");
    std::string venue;
    for (const char* name : {"journal", "booktitle", "publisher", "school", "institution", "howpublished"}) {
      venue = text(*e, name);
      if (!venue.empty()) break;
    }
    html << "<li id=\"" << html_escape(e->key) << "\"><span class=\"key\">[" << html_escape(e->key) << "]</span>";
    if (!authors.empty()) html << "<br>\n<span class=\"author\">" << html_escape(authors) << "</span>";
    const std::string title = text(*e, "title");
    if (!title.empty()) html << "<br>\n<em class=\"title\">" << html_escape(title) << "</em>";
    if (!venue.empty()) html << "<br>\n<span class=\"venue\">" << html_escape(venue) << "</span>";
    const std::string year = text(*e, "year");
    if (!year.empty()) html << "<br>\n<span class=\"year\">" << html_escape(year) << "</span>";
    html << "</li>\n";
  }
  html << "</ul>\n</body>\n</html>\n";
  return html.str();
}

}  // namespace pide
