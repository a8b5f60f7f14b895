#pragma once

#include "fedbv/monomial.hpp"
#include "fedbv/rational.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedbv {

// Gaussian rational re + i*im.
struct GaussQ {
  Rational re, im;

  GaussQ() = default;
  GaussQ(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return fedbv::is_zero(re) && fedbv::is_zero(im); }
  GaussQ operator-() const { return {-re, -im}; }
  GaussQ& operator+=(const GaussQ& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussQ& operator-=(const GaussQ& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  friend GaussQ operator+(GaussQ a, const GaussQ& b) { return a += b; }
  friend GaussQ operator-(GaussQ a, const GaussQ& b) { return a -= b; }
  friend GaussQ operator*(const GaussQ& a, const GaussQ& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussQ operator*(const GaussQ& a, const Rational& s) { return {a.re * s, a.im * s}; }
  bool operator==(const GaussQ& o) const { return re == o.re && im == o.im; }
};

// Polynomial in the formal unit tau = 2*pi*i with Gaussian rational coefficients.
class TauPoly {
 public:
  TauPoly() = default;
  explicit TauPoly(GaussQ c) {
    if (!c.is_zero()) c_.push_back(std::move(c));
  }
  static TauPoly tau_power(int k, GaussQ c = GaussQ(1)) {
    TauPoly p;
    if (c.is_zero()) return p;
    p.c_.assign(static_cast<std::size_t>(k) + 1, GaussQ());
    p.c_[k] = std::move(c);
    return p;
  }

  const std::vector<GaussQ>& coeffs() const { return c_; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  GaussQ coeff(int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : GaussQ(); }

  TauPoly& operator+=(const TauPoly& o) {
    if (c_.size() < o.c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
  }
  TauPoly& operator-=(const TauPoly& o) {
    if (c_.size() < o.c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    trim();
    return *this;
  }
  TauPoly operator-() const {
    TauPoly r = *this;
    for (auto& c : r.c_) c = -c;
    return r;
  }
  friend TauPoly operator+(TauPoly a, const TauPoly& b) { return a += b; }
  friend TauPoly operator-(TauPoly a, const TauPoly& b) { return a -= b; }
  friend TauPoly operator*(const TauPoly& a, const TauPoly& b) {
    TauPoly r;
    if (a.is_zero() || b.is_zero()) return r;
    r.c_.assign(a.c_.size() + b.c_.size() - 1, GaussQ());
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    r.trim();
    return r;
  }
  friend TauPoly operator*(TauPoly a, const Rational& s) {
    for (auto& c : a.c_) c = c * s;
    a.trim();
    return a;
  }
  TauPoly times_tau() const {
    TauPoly r;
    if (is_zero()) return r;
    r.c_.reserve(c_.size() + 1);
    r.c_.push_back(GaussQ());
    r.c_.insert(r.c_.end(), c_.begin(), c_.end());
    return r;
  }
  bool operator==(const TauPoly& o) const { return c_ == o.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }
  std::vector<GaussQ> c_;
};

struct FourierContext {
  int nvars = 0;
  bool operator==(const FourierContext&) const = default;
};

using Frequency = std::array<std::int16_t, kMaxVars>;

// Finite sum of e_m = exp(2*pi*i m.x) on the unit torus with TauPoly coefficients.
// d/dx^j e_m = tau m_j e_m and e_m e_m' = e_{m+m'} hold exactly.
class FourierElement {
 public:
  using Context = FourierContext;
  using Scalar = TauPoly;
  using Term = std::pair<Frequency, TauPoly>;

  FourierElement() = default;
  explicit FourierElement(Context ctx) : ctx_(ctx) {
    if (ctx.nvars < 0 || ctx.nvars > kMaxVars) throw std::out_of_range("FourierElement: nvars");
  }

  static FourierElement constant(Context ctx, const Rational& c) {
    return wave(ctx, Frequency{}, TauPoly(GaussQ(c)));
  }
  static FourierElement wave(Context ctx, const Frequency& m, TauPoly c) {
    FourierElement f(ctx);
    for (int i = ctx.nvars; i < kMaxVars; ++i)
      if (m[i] != 0) throw std::out_of_range("FourierElement: frequency beyond nvars");
    if (!c.is_zero()) f.terms_.emplace_back(m, std::move(c));
    return f;
  }

  const Context& context() const { return ctx_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Zero-frequency coefficient; equals the integral over the unit torus.
  TauPoly constant_term() const {
    for (const auto& [m, c] : terms_)
      if (m == Frequency{}) return c;
    return TauPoly();
  }
  TauPoly integrate_torus() const { return constant_term(); }

  FourierElement& operator+=(const FourierElement& o) { return combine(o, 1); }
  FourierElement& operator-=(const FourierElement& o) { return combine(o, -1); }
  FourierElement operator-() const {
    FourierElement r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  FourierElement& operator*=(const Rational& s) {
    if (fedbv::is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& t : terms_) t.second = t.second * s;
    return *this;
  }
  friend FourierElement operator+(FourierElement a, const FourierElement& b) { return a += b; }
  friend FourierElement operator-(FourierElement a, const FourierElement& b) { return a -= b; }
  friend FourierElement operator*(FourierElement a, const Rational& s) { return a *= s; }
  friend FourierElement operator*(const Rational& s, FourierElement a) { return a *= s; }

  friend FourierElement operator*(const FourierElement& a, const FourierElement& b) {
    check(a, b);
    FourierElement r(a.ctx_);
    std::vector<Term> raw;
    raw.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) {
        Frequency m{};
        for (int i = 0; i < kMaxVars; ++i) m[i] = static_cast<std::int16_t>(ma[i] + mb[i]);
        raw.emplace_back(m, ca * cb);
      }
    r.terms_ = normalize(std::move(raw));
    return r;
  }
  FourierElement& operator*=(const FourierElement& o) { return *this = *this * o; }

  FourierElement derivative(int i) const {
    if (i < 0 || i >= ctx_.nvars) throw std::out_of_range("FourierElement: derivative index");
    FourierElement r(ctx_);
    for (const auto& [m, c] : terms_) {
      if (m[i] == 0) continue;
      r.terms_.emplace_back(m, c.times_tau() * Rational(m[i]));
    }
    return r;
  }

  FourierElement truncated(int) const { return *this; }

  bool operator==(const FourierElement& o) const { return ctx_ == o.ctx_ && terms_ == o.terms_; }

 private:
  static bool key_less(const Term& a, const Term& b) { return a.first < b.first; }
  static void check(const FourierElement& a, const FourierElement& b) {
    if (!(a.ctx_ == b.ctx_)) throw std::invalid_argument("FourierElement: context mismatch");
  }
  static std::vector<Term> normalize(std::vector<Term> raw) {
    std::sort(raw.begin(), raw.end(), key_less);
    std::vector<Term> out;
    for (std::size_t i = 0; i < raw.size();) {
      std::size_t j = i + 1;
      TauPoly c = std::move(raw[i].second);
      for (; j < raw.size() && raw[j].first == raw[i].first; ++j) c += raw[j].second;
      if (!c.is_zero()) out.emplace_back(raw[i].first, std::move(c));
      i = j;
    }
    return out;
  }
  FourierElement& combine(const FourierElement& o, int sign) {
    if (this == &o) {
      const FourierElement copy = o;
      return combine(copy, sign);
    }
    check(*this, o);
    std::vector<Term> raw = terms_;
    for (const auto& [m, c] : o.terms_) raw.emplace_back(m, sign > 0 ? c : -c);
    terms_ = normalize(std::move(raw));
    return *this;
  }

  Context ctx_{};
  std::vector<Term> terms_;
};

}  // namespace fedbv
