#include "skm/problems.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace skm {

namespace {

/// Next whitespace-delimited token, tracking line numbers.
class Tokenizer {
public:
  explicit Tokenizer(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string token;
    while (true) {
      const int ch = in_.get();
      if (ch == std::char_traits<char>::eof()) break;
      if (ch == '\n') {
        ++line_;
        if (!token.empty()) break;
        continue;
      }
      if (std::isspace(ch)) {
        if (!token.empty()) break;
        continue;
      }
      token.push_back(static_cast<char>(ch));
    }
    if (token.empty()) throw ParseError(std::string("unexpected end of input, expected ") + what, line_);
    return token;
  }

  double next_double(const char* what) {
    const std::string token = next(what);
    try {
      return parse_double(token);
    } catch (const std::invalid_argument&) {
      throw ParseError(std::string("invalid ") + what + " '" + token + "'", line_);
    }
  }

  Index next_count(const char* what) {
    const std::string token = next(what);
    Index value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value < 1) {
      throw ParseError(std::string("invalid ") + what + " '" + token + "'", line_);
    }
    return value;
  }

  void expect(std::string_view word) {
    const std::string token = next("header");
    if (token != word) {
      throw ParseError("expected '" + std::string(word) + "', found '" + token + "'", line_);
    }
  }

  std::size_t line() const { return line_; }

private:
  std::istream& in_;
  std::size_t line_ = 1;
};

}  // namespace

std::string format_double(double v) {
  std::array<char, 40> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

void write_problem(std::ostream& out, const DenseMatrix& a, const Vector& b) {
  if (b.size() != a.rows()) throw DimensionError("write_problem: b length does not match A");
  out << "skm-problem v1 " << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out << format_double(a(i, j)) << ' ';
    out << format_double(b(i)) << '\n';
  }
}

void write_problem(std::ostream& out, const FeasibilityProblem& p) { write_problem(out, p.a(), p.b()); }

RawSystem read_raw_system(std::istream& in) {
  Tokenizer tok(in);
  tok.expect("skm-problem");
  tok.expect("v1");
  const Index m = tok.next_count("row count");
  const Index n = tok.next_count("column count");
  RawSystem sys{DenseMatrix(m, n), Vector(m)};
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) sys.a(i, j) = tok.next_double("coefficient");
    sys.b(i) = tok.next_double("right-hand side");
  }
  if (!sys.a.allFinite() || !sys.b.allFinite()) throw ParseError("non-finite value", tok.line());
  return sys;
}

FeasibilityProblem read_problem(std::istream& in) {
  RawSystem sys = read_raw_system(in);
  return FeasibilityProblem(std::move(sys.a), std::move(sys.b));
}

void write_vector(std::ostream& out, const Vector& v) {
  out << "skm-vector v1 " << v.size() << '\n';
  for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

Vector read_vector(std::istream& in) {
  Tokenizer tok(in);
  tok.expect("skm-vector");
  tok.expect("v1");
  const Index n = tok.next_count("length");
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = tok.next_double("entry");
  return v;
}

}  // namespace skm
