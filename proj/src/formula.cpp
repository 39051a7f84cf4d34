#include "ordshift/formula.hpp"

#include <cctype>

#include <fmt/format.h>

#include "ordshift/error.hpp"

namespace ordshift {

namespace {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, int default_basis)
      : text_(text), default_basis_(default_basis) {}

  FormulaSpec parse() {
    FormulaSpec out;
    skip_space();
    if (peek() == '~') fail("empty response");
    out.response = identifier("response");
    skip_space();
    if (peek() != '~') fail("expected '~' after the response");
    ++pos_;
    out.location = terms("location");
    skip_space();
    if (peek() == '|') {
      ++pos_;
      skip_space();
      if (!at_end()) out.dispersion = terms("dispersion");
      skip_space();
      if (peek() == '|') fail("more than one '|'");
    }
    skip_space();
    if (!at_end()) fail(fmt::format("unexpected '{}'", peek()));
    return out;
  }

 private:
  std::vector<Term> terms(const char* side) {
    std::vector<Term> out;
    skip_space();
    if (peek() == '1') {
      ++pos_;
      return out;
    }
    while (true) {
      out.push_back(term(side));
      skip_space();
      if (peek() != '+') break;
      ++pos_;
    }
    return out;
  }

  Term term(const char* side) {
    skip_space();
    if (at_end() || peek() == '|' || peek() == '+') fail(fmt::format("missing {} term", side));
    const std::size_t start = pos_;
    std::string name = identifier("term");
    skip_space();
    if (peek() != '(') return Term{name, false};
    if (name != "s") {
      pos_ = start;
      fail(fmt::format("unknown function '{}', only s(...) is supported", name));
    }
    ++pos_;
    Term t{identifier("smooth variable"), true, default_basis_};
    skip_space();
    if (peek() == ',') {
      ++pos_;
      skip_space();
      const std::size_t num_start = pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      if (pos_ == num_start) fail("expected basis count in s(...)");
      t.basis_count = std::stoi(std::string(text_.substr(num_start, pos_ - num_start)));
      skip_space();
    }
    if (peek() != ')') fail("malformed s(...): expected ')'");
    ++pos_;
    return t;
  }

  std::string identifier(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end()) {
      const auto c = static_cast<unsigned char>(peek());
      const bool ok = std::isalpha(c) || c == '_' || c == '.' ||
                      (pos_ > start && std::isdigit(c));
      if (!ok) break;
      ++pos_;
    }
    if (pos_ == start) fail(fmt::format("expected {} name", what));
    return std::string(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(pos_, message); }

  std::string_view text_;
  std::size_t pos_ = 0;
  int default_basis_;
};

std::string join_terms(const std::vector<Term>& terms) {
  if (terms.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += " + ";
    const Term& t = terms[i];
    out += t.smooth ? fmt::format("s({}, {})", t.variable, t.basis_count) : t.variable;
  }
  return out;
}

}  // namespace

FormulaSpec parse_formula(std::string_view text, int default_basis) {
  return FormulaParser(text, default_basis).parse();
}

std::string to_string(const FormulaSpec& formula) {
  std::string out = formula.response + " ~ " + join_terms(formula.location);
  if (!formula.dispersion.empty()) out += " | " + join_terms(formula.dispersion);
  return out;
}

}  // namespace ordshift
