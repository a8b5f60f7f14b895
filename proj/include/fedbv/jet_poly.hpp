#pragma once

#include "fedbv/monomial.hpp"
#include "fedbv/rational.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedbv {

struct JetContext {
  int nvars = 0;
  int max_degree = 0;
  bool operator==(const JetContext&) const = default;
};

// Polynomial in the base coordinates x^1..x^nvars, truncated at total degree J.
// Terms are kept sorted by packed monomial with no zero coefficients.
class JetPoly {
 public:
  using Context = JetContext;
  using Term = std::pair<Mono, Rational>;
  using Scalar = Rational;

  JetPoly() = default;
  explicit JetPoly(Context ctx) : ctx_(ctx) {
    if (ctx.nvars < 0 || ctx.nvars > kMaxVars) throw std::out_of_range("JetPoly: nvars");
    if (ctx.max_degree < 0 || ctx.max_degree > 255) throw std::out_of_range("JetPoly: degree");
  }

  static JetPoly constant(Context ctx, const Rational& c) {
    JetPoly p(ctx);
    if (!fedbv::is_zero(c)) p.terms_.emplace_back(0, c);
    return p;
  }
  static JetPoly monomial(Context ctx, Mono m, const Rational& c) {
    JetPoly p(ctx);
    if (!fedbv::is_zero(c) && mono_degree(m) <= ctx.max_degree) p.terms_.emplace_back(m, c);
    return p;
  }
  static JetPoly variable(Context ctx, int i) {
    if (i < 0 || i >= ctx.nvars) throw std::out_of_range("JetPoly: variable index");
    return monomial(ctx, mono_unit(i), Rational(1));
  }

  const Context& context() const { return ctx_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  Rational constant_term() const {
    if (!terms_.empty() && terms_.front().first == 0) return terms_.front().second;
    return Rational(0);
  }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, mono_degree(m));
    return d;
  }

  JetPoly& operator+=(const JetPoly& o) { return combine(o, 1); }
  JetPoly& operator-=(const JetPoly& o) { return combine(o, -1); }

  JetPoly operator-() const {
    JetPoly r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }

  JetPoly& operator*=(const Rational& s) {
    if (fedbv::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.second *= s;
    return *this;
  }

  friend JetPoly operator+(JetPoly a, const JetPoly& b) { return a += b; }
  friend JetPoly operator-(JetPoly a, const JetPoly& b) { return a -= b; }
  friend JetPoly operator*(JetPoly a, const Rational& s) { return a *= s; }
  friend JetPoly operator*(const Rational& s, JetPoly a) { return a *= s; }

  friend JetPoly operator*(const JetPoly& a, const JetPoly& b) {
    check(a, b);
    JetPoly r(a.ctx_);
    if (a.is_zero() || b.is_zero()) return r;
    if (b.terms_.size() == 1 && b.terms_[0].first == 0) return a * b.terms_[0].second;
    if (a.terms_.size() == 1 && a.terms_[0].first == 0) return b * a.terms_[0].second;
    std::vector<Term> raw;
    raw.reserve(a.terms_.size() * b.terms_.size());
    const int J = a.ctx_.max_degree;
    for (const auto& [ma, ca] : a.terms_) {
      const int da = mono_degree(ma);
      for (const auto& [mb, cb] : b.terms_) {
        if (da + mono_degree(mb) > J) continue;
        raw.emplace_back(mono_mul(ma, mb), ca * cb);
      }
    }
    r.terms_ = normalize(std::move(raw));
    return r;
  }
  JetPoly& operator*=(const JetPoly& o) { return *this = *this * o; }

  JetPoly derivative(int i) const {
    if (i < 0 || i >= ctx_.nvars) throw std::out_of_range("JetPoly: derivative index");
    JetPoly r(ctx_);
    for (const auto& [m, c] : terms_) {
      const int e = mono_get(m, i);
      if (e == 0) continue;
      r.terms_.emplace_back(m - mono_unit(i), c * e);
    }
    std::sort(r.terms_.begin(), r.terms_.end(), key_less);
    return r;
  }

  // Drops every term of total degree above d.
  JetPoly truncated(int d) const {
    JetPoly r(ctx_);
    for (const auto& t : terms_)
      if (mono_degree(t.first) <= d) r.terms_.push_back(t);
    return r;
  }

  bool operator==(const JetPoly& o) const { return ctx_ == o.ctx_ && terms_ == o.terms_; }

 private:
  static bool key_less(const Term& a, const Term& b) { return a.first < b.first; }

  static void check(const JetPoly& a, const JetPoly& b) {
    if (!(a.ctx_ == b.ctx_)) throw std::invalid_argument("JetPoly: context mismatch");
  }

  static std::vector<Term> normalize(std::vector<Term> raw) {
    std::sort(raw.begin(), raw.end(), key_less);
    std::vector<Term> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t j = i + 1;
      Rational c = std::move(raw[i].second);
      for (; j < raw.size() && raw[j].first == raw[i].first; ++j) c += raw[j].second;
      if (!fedbv::is_zero(c)) out.emplace_back(raw[i].first, std::move(c));
      i = j;
    }
    return out;
  }

  JetPoly& combine(const JetPoly& o, int sign) {
    if (this == &o) {
      const JetPoly copy = o;
      return combine(copy, sign);
    }
    check(*this, o);
    std::vector<Term> out;
    out.reserve(terms_.size() + o.terms_.size());
    auto i = terms_.begin();
    auto j = o.terms_.begin();
    while (i != terms_.end() || j != o.terms_.end()) {
      if (j == o.terms_.end() || (i != terms_.end() && i->first < j->first)) {
        out.push_back(std::move(*i++));
      } else if (i == terms_.end() || j->first < i->first) {
        out.emplace_back(j->first, sign > 0 ? j->second : Rational(-j->second));
        ++j;
      } else {
        Rational c = sign > 0 ? Rational(i->second + j->second) : Rational(i->second - j->second);
        if (!fedbv::is_zero(c)) out.emplace_back(i->first, std::move(c));
        ++i;
        ++j;
      }
    }
    terms_ = std::move(out);
    return *this;
  }

  Context ctx_{};
  std::vector<Term> terms_;
};

}  // namespace fedbv
