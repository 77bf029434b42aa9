#include "conjlab/expression.hpp"

#include <cctype>
#include <charconv>
#include <vector>

#include "conjlab/error.hpp"

namespace conjlab {

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ScalarField parse() {
    ScalarField f = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
    return f;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  std::string_view atom() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c))) break;
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected an atom", start);
    return text_.substr(start, pos_ - start);
  }

  static bool parse_number(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
  }

  double number(std::string_view tok, std::size_t at) {
    const auto slash = tok.find('/');
    double value = 0.0;
    if (slash == std::string_view::npos) {
      if (!parse_number(tok, value)) throw ParseError("invalid number '" + std::string(tok) + "'", at);
      return value;
    }
    double num = 0.0;
    double den = 0.0;
    if (!parse_number(tok.substr(0, slash), num) || !parse_number(tok.substr(slash + 1), den)) {
      throw ParseError("invalid ratio '" + std::string(tok) + "'", at);
    }
    if (den == 0.0) throw ParseError("zero denominator", at);
    return num / den;
  }

  ScalarField expr() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
    if (text_[pos_] != '(') {
      const std::size_t at = pos_;
      const std::string_view tok = atom();
      if (tok == "x") return ScalarField::variable(Axis::x);
      if (tok == "y") return ScalarField::variable(Axis::y);
      if (tok == "z") return ScalarField::variable(Axis::z);
      return ScalarField(number(tok, at));
    }

    const std::size_t open = pos_++;
    const std::size_t head_at = (skip_ws(), pos_);
    const std::string_view head = atom();
    ScalarField result;

    if (head == "+") {
      while (!closing()) result += expr();
    } else if (head == "*") {
      result = ScalarField(1.0);
      while (!closing()) result = result * expr();
    } else if (head == "^") {
      ScalarField base = expr();
      skip_ws();
      const std::size_t at = pos_;
      const std::string_view tok = atom();
      int n = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
      if (ec != std::errc{} || p != tok.data() + tok.size() || n < 0) {
        throw ParseError("exponent must be a non-negative integer", at);
      }
      result = base.pow(n);
    } else if (head == "exp2") {
      const std::size_t at = (skip_ws(), pos_);
      ScalarField arg = expr();
      if (!arg.is_polynomial()) throw ParseError("exp2 argument must be a polynomial", at);
      result = ScalarField::exp2(arg.as_polynomial());
    } else {
      throw ParseError("unknown operator '" + std::string(head) + "'", head_at);
    }

    if (!closing()) throw ParseError("expected ')' to close form opened", open);
    ++pos_;
    return result;
  }

  bool closing() {
    if (at_end()) throw ParseError("unterminated form", pos_);
    return text_[pos_] == ')';
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<std::string> monomial_factors(const Exponents& e) {
  static constexpr const char* names[] = {"x", "y", "z"};
  std::vector<std::string> out;
  for (int i = 0; i < 3; ++i) {
    if (e[i] == 1) out.emplace_back(names[i]);
    else if (e[i] > 1) out.push_back(std::string("(^ ") + names[i] + " " + std::to_string(e[i]) + ")");
  }
  return out;
}

std::string join_form(const char* op, const std::vector<std::string>& parts, const char* empty) {
  if (parts.empty()) return empty;
  if (parts.size() == 1) return parts.front();
  std::string s = std::string("(") + op;
  for (const auto& p : parts) s += " " + p;
  return s + ")";
}

std::string render_term(double c, const Exponents& e, const std::string& exp_factor) {
  std::vector<std::string> factors = monomial_factors(e);
  if (!exp_factor.empty()) factors.push_back(exp_factor);
  if (c != 1.0 || factors.empty()) factors.insert(factors.begin(), format_double(c));
  return join_form("*", factors, "1");
}

}  // namespace

ScalarField parse_field(std::string_view text) { return Parser(text).parse(); }

std::string render_polynomial(const Poly3& p) {
  std::vector<std::string> parts;
  for (const auto& [e, c] : p.terms()) parts.push_back(render_term(c, e, {}));
  return join_form("+", parts, "0");
}

std::string render_field(const ScalarField& f) {
  std::vector<std::string> parts;
  for (const auto& [expo, coef] : f.terms()) {
    const std::string factor = expo.is_zero() ? std::string{} : "(exp2 " + render_polynomial(expo) + ")";
    for (const auto& [e, c] : coef.terms()) parts.push_back(render_term(c, e, factor));
  }
  return join_form("+", parts, "0");
}

}  // namespace conjlab
