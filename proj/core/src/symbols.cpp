#include "pide/symbols.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "pide/errors.hpp"

namespace pide {

namespace {

bool is_ascii_letter(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
bool is_name_char(char c) { return is_ascii_letter(c) || is_ascii_digit(c) || c == '_' || c == '\''; }

// Length of the well-formed UTF-8 scalar at `s[i]`, or 0 if malformed.
std::size_t scalar_length(std::string_view s, std::size_t i, char32_t& cp) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  std::size_t len = 0;
  unsigned char lo = 0x80, hi = 0xBF;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    len = 2;
    cp = b0 & 0x1F;
  } else if (b0 >= 0xE0 && b0 <= 0xEF) {
    len = 3;
    cp = b0 & 0x0F;
    if (b0 == 0xE0) lo = 0xA0;
    if (b0 == 0xED) hi = 0x9F;
  } else if (b0 >= 0xF0 && b0 <= 0xF4) {
    len = 4;
    cp = b0 & 0x07;
    if (b0 == 0xF0) lo = 0x90;
    if (b0 == 0xF4) hi = 0x8F;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = byte(i + k);
    if (k == 1 ? (b < lo || b > hi) : (b < 0x80 || b > 0xBF)) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

SymbolTable make_builtin() {
  SymbolTable t;
  const auto named = [&](const char* n, char32_t cp) { t.add(n, {cp, false}); };
  const auto control = [&](const char* n) { t.add(n, {std::nullopt, true}); };
  named("open", 0x2039);
  named("close", 0x203A);
  named("comment", 0x2014);
  named("Rightarrow", 0x21D2);
  named("Longrightarrow", 0x27F9);
  named("rightarrow", 0x2192);
  named("equiv", 0x2261);
  named("forall", 0x2200);
  named("exists", 0x2203);
  named("and", 0x2227);
  named("or", 0x2228);
  named("not", 0x00AC);
  named("le", 0x2264);
  named("ge", 0x2265);
  named("noteq", 0x2260);
  named("in", 0x2208);
  named("times", 0x00D7);
  named("lambda", 0x03BB);
  named("alpha", 0x03B1);
  named("beta", 0x03B2);
  named("gamma", 0x03B3);
  for (const char* n : {"item", "enum", "descr", "cancel", "latex", "term", "prop", "typ", "file", "dir",
                        "url", "cite", "sub", "sup", "bold", "emph"}) {
    control(n);
  }
  return t;
}

std::optional<char32_t> parse_codepoint(std::string_view text) {
  if (text == "-") return std::nullopt;
  if (text.starts_with("0x") || text.starts_with("0X") || text.starts_with("U+") || text.starts_with("u+")) {
    text.remove_prefix(2);
  }
  unsigned long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || value > 0x10FFFF ||
      (value >= 0xD800 && value <= 0xDFFF)) {
    throw ConfigError("invalid code point \"" + std::string(text) + "\"");
  }
  return static_cast<char32_t>(value);
}

}  // namespace

bool Symbol::is_blank() const {
  const char c = ascii();
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string Symbol::canonical() const {
  switch (kind) {
    case SymbolKind::Named:
      return "\\<" + name + ">";
    case SymbolKind::Control:
      return "\\<^" + name + ">";
    default:
      return source;
  }
}

const SymbolTable& SymbolTable::builtin() {
  static const SymbolTable table = make_builtin();
  return table;
}

void SymbolTable::add(const std::string& name, SymbolInfo info) {
  if (auto old = entries_.find(name); old != entries_.end() && old->second.display) {
    glyphs_.erase(*old->second.display);
  }
  if (info.display) glyphs_[*info.display] = name;
  entries_[name] = info;
}

const SymbolInfo* SymbolTable::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

const std::string* SymbolTable::find_glyph(char32_t codepoint) const {
  auto it = glyphs_.find(codepoint);
  return it == glyphs_.end() ? nullptr : &it->second;
}

SymbolTable SymbolTable::load(std::string_view config, const SymbolTable& base) {
  SymbolTable table = base;
  std::istringstream in{std::string(config)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, code, flag, extra;
    if (!(fields >> name)) continue;
    try {
      if (!(fields >> code)) throw ConfigError("missing code point");
      fields >> flag;
      if (fields >> extra) throw ConfigError("unexpected field \"" + extra + "\"");
      if (!is_symbol_name(name)) throw ConfigError("bad symbol name \"" + name + "\"");
      if (!flag.empty() && flag != "control") throw ConfigError("unknown flag \"" + flag + "\"");
      table.add(name, {parse_codepoint(code), flag == "control"});
    } catch (const ConfigError& e) {
      throw ConfigError("symbol table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

SymbolSeq::SymbolSeq(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].is_newline()) line_starts_.push_back(i + 1);
  }
}

Position SymbolSeq::position(std::size_t offset) const {
  offset = std::min(offset, symbols_.size());
  const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  const auto line = static_cast<std::size_t>(it - line_starts_.begin());
  return Position{offset, line, offset - line_starts_[line - 1] + 1};
}

Range SymbolSeq::range(std::size_t start, std::size_t stop) const {
  return Range{position(start), position(std::max(start, stop))};
}

std::string SymbolSeq::text(std::size_t start, std::size_t stop) const {
  std::string out;
  stop = std::min(stop, symbols_.size());
  for (std::size_t i = start; i < stop; ++i) out += symbols_[i].source;
  return out;
}

bool is_symbol_name(std::string_view name) {
  if (name.empty() || !is_ascii_letter(name.front())) return false;
  return std::all_of(name.begin(), name.end(), is_name_char);
}

SymbolSeq decode(std::string_view text, const SymbolTable& table) {
  std::vector<Symbol> out;
  out.reserve(text.size());
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (text[i] == '\\' && i + 1 < n && text[i + 1] == '<') {
      std::size_t j = i + 2;
      const bool control = j < n && text[j] == '^';
      if (control) ++j;
      std::size_t k = j;
      if (k < n && is_ascii_letter(text[k])) {
        while (k < n && is_name_char(text[k])) ++k;
      }
      if (k > j && k < n && text[k] == '>') {
        out.push_back({control ? SymbolKind::Control : SymbolKind::Named, std::string(text.substr(i, k + 1 - i)),
                       std::string(text.substr(j, k - j))});
        i = k + 1;
        continue;
      }
      // Bounded recovery: through the next '>' or up to end of line.
      std::size_t m = i + 2;
      while (m < n && text[m] != '>' && text[m] != '\n') ++m;
      if (m < n && text[m] == '>') ++m;
      out.push_back({SymbolKind::Malformed, std::string(text.substr(i, m - i)), {}});
      i = m;
      continue;
    }
    char32_t cp = 0;
    std::size_t len = scalar_length(text, i, cp);
    if (len == 0) {
      out.push_back({SymbolKind::PlainChar, std::string(text.substr(i, 1)), {}});
      ++i;
      continue;
    }
    Symbol sym{SymbolKind::PlainChar, std::string(text.substr(i, len)), {}};
    if (len > 1) {
      if (const std::string* name = table.find_glyph(cp)) {
        sym.kind = table.find(*name)->is_control ? SymbolKind::Control : SymbolKind::Named;
        sym.name = *name;
      }
    }
    out.push_back(std::move(sym));
    i += len;
  }
  return SymbolSeq(std::move(out));
}

std::string encode(const SymbolSeq& seq) {
  std::string out;
  for (const Symbol& s : seq) out += s.canonical();
  return out;
}

ControlRole classify_control(const Symbol& s) {
  if (s.kind != SymbolKind::Control) return ControlRole::NotControl;
  if (s.name == "item") return ControlRole::Item;
  if (s.name == "enum") return ControlRole::Enum;
  if (s.name == "descr") return ControlRole::Descr;
  if (s.name == "cancel") return ControlRole::Cancel;
  if (s.name == "latex") return ControlRole::Latex;
  return ControlRole::OtherControl;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    char32_t cp = 0;
    const std::size_t len = scalar_length(bytes, i, cp);
    if (len == 0) {
      out += "\xEF\xBF\xBD";
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::optional<std::size_t> cartouche_end(const SymbolSeq& seq, std::size_t begin, std::size_t limit) {
  if (begin >= limit || !seq[begin].is_open()) return std::nullopt;
  std::size_t depth = 0;
  for (std::size_t i = begin; i < limit; ++i) {
    if (seq[i].is_open()) {
      ++depth;
    } else if (seq[i].is_close()) {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

}  // namespace pide
