#pragma once

#include "fedbv/fourier.hpp"
#include "fedbv/jet_poly.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedbv {

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::invalid_argument(what + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

namespace detail {

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool done() {
    skip_ws();
    return i_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  bool accept(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }
  bool accept_word(std::string_view w) {
    skip_ws();
    if (s_.substr(i_, w.size()) != w) return false;
    i_ += w.size();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  bool at_digit() { return std::isdigit(static_cast<unsigned char>(peek())) != 0; }

  unsigned long integer() {
    skip_ws();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) fail("expected integer");
    if (i_ - start > 18) fail("integer too large");
    return std::stoul(std::string(s_.substr(start, i_ - start)));
  }

  long signed_integer() {
    bool neg = accept('-');
    if (!neg) accept('+');
    long v = static_cast<long>(integer());
    return neg ? -v : v;
  }

  // Unsigned "p" or "p/q" with arbitrary-length digits.
  Rational rational() {
    skip_ws();
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) fail("expected number");
    std::string text(s_.substr(start, i_ - start));
    if (i_ < s_.size() && s_[i_] == '/') {
      ++i_;
      std::size_t ds = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      if (ds == i_) fail("expected denominator");
      std::string den(s_.substr(ds, i_ - ds));
      if (den.find_first_not_of('0') == std::string::npos) fail("zero denominator");
      text += "/" + den;
    }
    return parse_rational(text);
  }

  std::size_t pos() const { return i_; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, i_); }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

// Reads the leading sign of a term: '+' or '-' (required after the first term).
inline int term_sign(Scanner& sc, bool first) {
  if (sc.accept('+')) return 1;
  if (sc.accept('-')) return -1;
  if (!first) sc.fail("expected '+' or '-'");
  return 1;
}

}  // namespace detail

// Grammar: terms joined by + / -, each an optional "p/q" followed by factors
// "xK" or "xK^E" (K from 1). Juxtaposition or '*' multiplies.
inline JetPoly parse_poly(std::string_view text, const JetContext& ctx) {
  detail::Scanner sc(text);
  JetPoly out(ctx);
  if (sc.done()) sc.fail("empty polynomial");
  bool first = true;
  while (!sc.done()) {
    const int sign = detail::term_sign(sc, first);
    first = false;
    Rational c(1);
    bool any = false;
    if (sc.at_digit()) {
      c = sc.rational();
      any = true;
    }
    Mono m = 0;
    int deg = 0;
    while (true) {
      sc.accept('*');
      if (!sc.accept('x')) break;
      const std::size_t at = sc.pos();
      unsigned long k = sc.integer();
      if (k < 1 || static_cast<int>(k) > ctx.nvars) throw ParseError("variable index out of range", at);
      unsigned long e = 1;
      if (sc.accept('^')) {
        const std::size_t eat = sc.pos();
        e = sc.integer();
        if (e < 1) throw ParseError("exponent must be >= 1", eat);
      }
      deg += static_cast<int>(e);
      if (deg > ctx.max_degree) throw ParseError("degree exceeds x-degree bound", at);
      m += mono_unit(static_cast<int>(k) - 1, static_cast<int>(e));
      any = true;
    }
    if (!any) sc.fail("expected term");
    out += JetPoly::monomial(ctx, m, sign > 0 ? c : Rational(-c));
  }
  return out;
}

namespace detail {

inline void append_term(std::string& out, const Rational& c, const std::string& body) {
  const bool neg = sgn(c) < 0;
  const Rational a = neg ? Rational(-c) : c;
  if (out.empty()) {
    if (neg) out += "-";
  } else {
    out += neg ? " - " : " + ";
  }
  if (body.empty()) {
    out += to_string(a);
  } else if (a == 1) {
    out += body;
  } else {
    out += to_string(a) + " " + body;
  }
}

}  // namespace detail

inline std::string format(const JetPoly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (const auto& [m, c] : p.terms()) {
    std::string body;
    for (int i = 0; i < kMaxVars; ++i) {
      const int e = mono_get(m, i);
      if (e == 0) continue;
      if (!body.empty()) body += " ";
      body += "x" + std::to_string(i + 1);
      if (e > 1) body += "^" + std::to_string(e);
    }
    detail::append_term(out, c, body);
  }
  return out;
}

// Grammar: terms joined by + / -, each an optional "p/q", optional "i",
// optional "tau" or "tau^k", optional "e(m1,...,mN)" with N = nvars.
inline FourierElement parse_fourier(std::string_view text, const FourierContext& ctx) {
  detail::Scanner sc(text);
  FourierElement out(ctx);
  if (sc.done()) sc.fail("empty Fourier expression");
  bool first = true;
  while (!sc.done()) {
    const int sign = detail::term_sign(sc, first);
    first = false;
    Rational c(1);
    bool any = false, imag = false;
    int tau = 0;
    Frequency m{};
    if (sc.at_digit()) {
      c = sc.rational();
      any = true;
    }
    while (true) {
      sc.accept('*');
      if (sc.accept_word("tau")) {
        tau += 1;
        if (sc.accept('^')) tau += static_cast<int>(sc.integer()) - 1;
        any = true;
      } else if (sc.accept_word("e(")) {
        for (int j = 0; j < ctx.nvars; ++j) {
          if (j > 0) sc.expect(',');
          long v = sc.signed_integer();
          if (v < -32768 || v > 32767) sc.fail("frequency out of range");
          m[j] = static_cast<std::int16_t>(m[j] + v);
        }
        sc.expect(')');
        any = true;
      } else if (sc.accept('i')) {
        imag = !imag;
        if (!imag) c = -c;
        any = true;
      } else {
        break;
      }
    }
    if (!any) sc.fail("expected term");
    if (sign < 0) c = -c;
    GaussQ g = imag ? GaussQ(0, c) : GaussQ(c);
    out += FourierElement::wave(ctx, m, TauPoly::tau_power(tau, g));
  }
  return out;
}

inline std::string format(const FourierElement& f) {
  if (f.is_zero()) return "0";
  std::string out;
  const int n = f.context().nvars;
  for (const auto& [m, poly] : f.terms()) {
    std::string wave;
    if (m != Frequency{}) {
      wave = "e(";
      for (int j = 0; j < n; ++j) wave += (j ? "," : "") + std::to_string(m[j]);
      wave += ")";
    }
    for (int k = 0; k <= poly.degree(); ++k) {
      const GaussQ& g = poly.coeffs()[k];
      std::string tau = k == 0 ? "" : (k == 1 ? "tau" : "tau^" + std::to_string(k));
      auto join = [](std::string a, const std::string& b) {
        if (b.empty()) return a;
        return a.empty() ? b : a + " " + b;
      };
      if (!fedbv::is_zero(g.re)) detail::append_term(out, g.re, join(tau, wave));
      if (!fedbv::is_zero(g.im)) detail::append_term(out, g.im, join(join("i", tau), wave));
    }
  }
  return out;
}

}  // namespace fedbv
