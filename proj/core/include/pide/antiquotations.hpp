#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pide/outer_syntax.hpp"
#include "pide/reports.hpp"
#include "pide/sessions.hpp"
#include "pide/symbols.hpp"

namespace pide {

enum class AntiquotationForm { Long, ControlCartouche, BareCartouche, ControlOnly };

[[nodiscard]] std::string_view antiquotation_form_name(AntiquotationForm form);

struct AntiquotationOption {
  std::string name;
  std::optional<std::string> value;

  friend bool operator==(const AntiquotationOption&, const AntiquotationOption&) = default;
};

/// One occurrence of `@{name [options] argument}` or of a short form.
/// Short forms are stored desugared: `\<^name>‹arg›` has argument `‹arg›`
/// (delimiters included), `\<^name>` has none, and a bare cartouche is
/// named `cartouche`.
struct Antiquotation {
  AntiquotationForm form = AntiquotationForm::Long;
  std::string name;
  Range name_range;
  std::vector<AntiquotationOption> options;
  std::optional<Range> argument;
  std::string argument_text;  // source text of `argument`, empty if absent
  Range range;
};

struct AntiquotationScan {
  std::vector<Antiquotation> antiquotations;
  std::vector<Message> messages;
};

/// Scan `seq[begin, end)` for antiquotations in all four forms. Bodies of
/// marginal comments are scanned one level deep; `\<^cancel>` and
/// `\<^latex>` bodies are skipped.
[[nodiscard]] AntiquotationScan scan_antiquotations(const SymbolSeq& seq, std::size_t begin = 0,
                                                    std::size_t end = npos);

/// The long form `@{name [opts] arg}` of an occurrence.
[[nodiscard]] std::string to_long_form(const Antiquotation& a);

enum class Arity { NoArg, OneArg, FreeForm };
enum class Checker { None, TheoryName, Path, Dir, Url, Cite, Term };

[[nodiscard]] std::string_view arity_name(Arity a);
[[nodiscard]] std::string_view checker_name(Checker c);

struct AntiquotationSpec {
  Arity arity = Arity::FreeForm;
  Checker checker = Checker::None;

  friend bool operator==(const AntiquotationSpec&, const AntiquotationSpec&) = default;
};

class AntiquotationRegistry {
 public:
  AntiquotationRegistry() = default;

  /// term, prop, cite, cartouche, file, dir, url, lemma, theory and a few
  /// common text-style controls.
  static const AntiquotationRegistry& builtin();

  /// Parse `NAME arity checker` lines over `base`. Throws ConfigError.
  /// Redefining `cartouche` changes how bare cartouches are checked.
  static AntiquotationRegistry load(std::string_view config, const AntiquotationRegistry& base = builtin());

  void add(const std::string& name, AntiquotationSpec spec) { entries_[name] = spec; }
  [[nodiscard]] const AntiquotationSpec* find(std::string_view name) const;
  [[nodiscard]] const std::map<std::string, AntiquotationSpec, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, AntiquotationSpec, std::less<>> entries_;
};

/// Context for checking: the session graph for theory names, the
/// directory that relative paths refer to, and all known citation keys.
struct CheckEnv {
  const SessionGraph* graph = nullptr;
  std::optional<std::string> session;
  std::optional<std::filesystem::path> base_dir;
  std::set<std::string> bib_keys;
};

/// Check names, arities and arguments. Never throws.
[[nodiscard]] std::vector<Message> check_antiquotations(const SymbolSeq& seq, const std::vector<Antiquotation>& as,
                                                        const AntiquotationRegistry& registry, const CheckEnv& env);

struct CiteArgs {
  std::optional<Range> opt;  // leading cartouche
  std::vector<std::pair<std::string, Range>> keys;
  std::optional<std::string> error;
};

/// Parse a `cite` argument: an optional cartouche, then keys separated by
/// `,` or `and`.
[[nodiscard]] CiteArgs parse_cite_args(const SymbolSeq& seq, const Range& argument);

}  // namespace pide
