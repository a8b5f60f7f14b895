#pragma once

#include "fedbv/coefficient.hpp"
#include "fedbv/monomial.hpp"
#include "fedbv/parallel.hpp"
#include "fedbv/truncation.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedbv {

// One monomial c(x) * dx^S * theta^T * hbar^h * u^e * y^A, odd factors in
// ascending order. h may be negative only in intermediate Laurent expressions.
struct TermKey {
  Mono y = 0;
  std::int16_t h = 0;
  std::int16_t u = 0;
  OddMask dx = 0;
  OddMask th = 0;

  auto operator<=>(const TermKey&) const = default;
};

inline int y_degree(const TermKey& k) { return mono_degree(k.y); }
inline int form_degree(const TermKey& k) { return popcount(k.dx); }
inline int theta_degree(const TermKey& k) { return popcount(k.th); }
inline int weight(const TermKey& k) { return 2 * k.h + y_degree(k); }
inline int cohomological_degree(const TermKey& k) {
  return popcount(k.dx) - popcount(k.th) + 2 * k.u;
}
inline int parity(const TermKey& k) { return (popcount(k.dx) + popcount(k.th)) & 1; }

struct Grade {
  int degree;
  int weight;
  bool operator==(const Grade&) const = default;
};

inline Grade grade(const TermKey& k) { return {cohomological_degree(k), weight(k)}; }

// Product of keys; returns false when an odd generator repeats.
inline bool key_product(const TermKey& a, const TermKey& b, TermKey& out, int& sign) {
  if ((a.dx & b.dx) || (a.th & b.th)) return false;
  for (int i = 0; i < kMaxVars; ++i)
    if (mono_get(a.y, i) + mono_get(b.y, i) > 255) throw std::overflow_error("y exponent overflow");
  out.y = mono_mul(a.y, b.y);
  out.h = static_cast<std::int16_t>(a.h + b.h);
  out.u = static_cast<std::int16_t>(a.u + b.u);
  out.dx = a.dx | b.dx;
  out.th = a.th | b.th;
  // dx^S th^T dx^S' th^T' = (-1)^{|T||S'|} dx^S dx^S' th^T th^T'
  int s = ((popcount(a.th) * popcount(b.dx)) & 1) ? -1 : 1;
  s *= merge_sign(a.dx, b.dx) * merge_sign(a.th, b.th);
  sign = s;
  return true;
}

enum class Generator { Y, X, Dx, Theta, Hbar, U };

template <CoefficientRing R, bool BV>
class Section {
 public:
  using Ring = R;
  using Context = typename R::Context;
  using Map = std::map<TermKey, R>;
  static constexpr bool kBV = BV;

  Section() = default;
  Section(int dim, Context ctx, TruncationPolicy policy) : dim_(dim), ctx_(ctx), policy_(policy) {
    if (dim < 0 || dim > kMaxVars) throw std::out_of_range("Section: dimension");
    policy_.validate();
  }

  int dim() const { return dim_; }
  const Context& context() const { return ctx_; }
  const TruncationPolicy& policy() const { return policy_; }
  const Map& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Section zero() const { return Section(dim_, ctx_, policy_); }
  R coeff_constant(const Rational& c) const { return R::constant(ctx_, c); }

  bool admissible(const TermKey& k) const {
    if (weight(k) > policy_.weight || k.h > policy_.hbar) return false;
    if (!BV && (k.th != 0 || k.u != 0)) return false;
    if (k.u < policy_.u_min || k.u > policy_.u_max) return false;
    return true;
  }

  void check_key(const TermKey& k) const {
    const unsigned mask = dim_ >= 16 ? 0xFFFFu : ((1u << dim_) - 1u);
    if ((k.dx & ~mask) || (k.th & ~mask)) throw std::out_of_range("Section: odd index beyond dim");
    for (int i = dim_; i < kMaxVars; ++i)
      if (mono_get(k.y, i) != 0) throw std::out_of_range("Section: y index beyond dim");
    if (!BV && (k.th != 0 || k.u != 0))
      throw std::invalid_argument("Section: theta/u in a Weyl form");
  }

  // Accumulates c at k; inadmissible keys are dropped.
  void add(const TermKey& k, const R& c) {
    if (c.is_zero() || !admissible(k)) return;
    auto it = terms_.find(k);
    if (it == terms_.end()) {
      terms_.emplace(k, c);
      return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
  void add(const TermKey& k, const R& c, int sign) { add(k, sign > 0 ? c : -c); }
  void add(const TermKey& k, const Rational& c) { add(k, R::constant(ctx_, c)); }

  Section& operator+=(const Section& o) {
    check_compatible(o);
    if (this == &o) {
      const Section copy = o;
      return *this += copy;
    }
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }
  Section& operator-=(const Section& o) {
    check_compatible(o);
    if (this == &o) {
      terms_.clear();
      return *this;
    }
    for (const auto& [k, c] : o.terms_) add(k, -c);
    return *this;
  }
  friend Section operator+(Section a, const Section& b) { return a += b; }
  friend Section operator-(Section a, const Section& b) { return a -= b; }
  Section operator-() const {
    Section r = *this;
    for (auto& [k, c] : r.terms_) c = -c;
    return r;
  }
  friend Section operator*(Section a, const Rational& s) {
    if (fedbv::is_zero(s)) {
      a.terms_.clear();
      return a;
    }
    for (auto& [k, c] : a.terms_) c = c * s;
    return a;
  }
  friend Section operator*(const Rational& s, Section a) { return std::move(a) * s; }

  // Multiplies every coefficient by a function (an even scalar).
  Section scaled(const R& f) const {
    Section r = zero();
    for (const auto& [k, c] : terms_) r.add(k, c * f);
    return r;
  }

  // Graded-commutative product, truncated to the left operand's policy.
  friend Section operator*(const Section& a, const Section& b) {
    a.check_compatible(b);
    Section r = a.zero();
    if (a.is_zero() || b.is_zero()) return r;
    std::vector<const typename Map::value_type*> lhs;
    lhs.reserve(a.terms_.size());
    for (const auto& t : a.terms_) lhs.push_back(&t);
    auto parts = parallel_map(lhs.size(), [&](std::size_t i) {
      Section part = a.zero();
      const auto& [ka, ca] = *lhs[i];
      for (const auto& [kb, cb] : b.terms_) {
        TermKey k;
        int sign;
        if (!key_product(ka, kb, k, sign) || !part.admissible(k)) continue;
        part.add(k, ca * cb, sign);
      }
      return part;
    });
    for (const auto& p : parts) r += p;
    return r;
  }

  bool operator==(const Section& o) const {
    return dim_ == o.dim_ && terms_ == o.terms_;
  }

  // Keeps the terms accepted by pred(key).
  template <class Pred>
  Section filtered(Pred pred) const {
    Section r = zero();
    for (const auto& [k, c] : terms_)
      if (pred(k)) r.terms_.emplace(k, c);
    return r;
  }

  Section with_policy(const TruncationPolicy& p) const {
    Section r(dim_, ctx_, p);
    for (const auto& [k, c] : terms_) r.add(k, c);
    return r;
  }

  // Drops coefficient x-monomials of degree above d.
  Section truncated_x(int d) const {
    Section r = zero();
    for (const auto& [k, c] : terms_) r.add(k, c.truncated(d));
    return r;
  }

  // Multiplies by hbar^s; negative s is allowed (Laurent).
  Section shifted_hbar(int s) const {
    Section r = zero();
    for (const auto& [k, c] : terms_) {
      TermKey k2 = k;
      k2.h = static_cast<std::int16_t>(k.h + s);
      r.add(k2, c);
    }
    return r;
  }

  // Exact division by hbar; fails if a term has no hbar to give.
  Section divided_by_hbar() const {
    for (const auto& [k, c] : terms_)
      if (k.h <= 0) throw std::domain_error("divide by hbar: term with hbar exponent <= 0");
    return shifted_hbar(-1);
  }

  Section shifted_u(int s) const {
    Section r = zero();
    for (const auto& [k, c] : terms_) {
      TermKey k2 = k;
      k2.u = static_cast<std::int16_t>(k.u + s);
      r.add(k2, c);
    }
    return r;
  }

  Section derive_y(int i) const {
    check_index(i);
    Section r = zero();
    for (const auto& [k, c] : terms_) {
      const int e = mono_get(k.y, i);
      if (e == 0) continue;
      TermKey k2 = k;
      k2.y -= mono_unit(i);
      r.add(k2, c * Rational(e));
    }
    return r;
  }

  Section derive_x(int i) const {
    check_index(i);
    Section r = zero();
    for (const auto& [k, c] : terms_) r.add(k, c.derivative(i));
    return r;
  }

  // Left contraction with d/dtheta^i.
  Section iota_theta(int i) const {
    check_index(i);
    Section r = zero();
    for (const auto& [k, c] : terms_) {
      if (!(k.th & (1u << i))) continue;
      TermKey k2 = k;
      k2.th = static_cast<OddMask>(k.th & ~(1u << i));
      const int s = popcount(k.dx) + bits_below(k.th, i);
      r.add(k2, c, (s & 1) ? -1 : 1);
    }
    return r;
  }

  // Left contraction with the coordinate vector field d/dx^i.
  Section iota_dx(int i) const {
    check_index(i);
    Section r = zero();
    for (const auto& [k, c] : terms_) {
      if (!(k.dx & (1u << i))) continue;
      TermKey k2 = k;
      k2.dx = static_cast<OddMask>(k.dx & ~(1u << i));
      r.add(k2, c, (bits_below(k.dx, i) & 1) ? -1 : 1);
    }
    return r;
  }

  // Left multiplication by a single generator; i is ignored for hbar and u.
  Section times(Generator g, int i = 0) const;

  // Terms whose parity (|dx|+|theta|) is even / odd.
  Section even_part() const {
    return filtered([](const TermKey& k) { return parity(k) == 0; });
  }
  Section odd_part() const {
    return filtered([](const TermKey& k) { return parity(k) == 1; });
  }

  void check_compatible(const Section& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("Section: dimension mismatch");
    if (!(ctx_ == o.ctx_)) throw std::invalid_argument("Section: coefficient context mismatch");
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= dim_) throw std::out_of_range("Section: index out of range");
  }

  int dim_ = 0;
  Context ctx_{};
  TruncationPolicy policy_{};
  Map terms_;
};

template <CoefficientRing R, bool BV>
Section<R, BV> Section<R, BV>::times(Generator g, int i) const {
  if (g != Generator::Hbar && g != Generator::U) check_index(i);
  Section r = zero();
  for (const auto& [k, c] : terms_) {
    TermKey k2 = k;
    int sign = 1;
    R c2 = c;
    switch (g) {
      case Generator::Y:
        k2.y = mono_mul(k.y, mono_unit(i));
        break;
      case Generator::X:
        if constexpr (std::is_same_v<R, JetPoly>) {
          c2 = c * JetPoly::variable(ctx_, i);
        } else {
          throw std::invalid_argument("multiply by x: coordinate functions need a jet ring");
        }
        break;
      case Generator::Dx:
        if (k.dx & (1u << i)) continue;
        k2.dx = static_cast<OddMask>(k.dx | (1u << i));
        sign = (bits_below(k.dx, i) & 1) ? -1 : 1;
        break;
      case Generator::Theta:
        if (!BV) throw std::invalid_argument("theta in a Weyl form");
        if (k.th & (1u << i)) continue;
        k2.th = static_cast<OddMask>(k.th | (1u << i));
        sign = ((popcount(k.dx) + bits_below(k.th, i)) & 1) ? -1 : 1;
        break;
      case Generator::Hbar:
        k2.h = static_cast<std::int16_t>(k.h + 1);
        break;
      case Generator::U:
        if (!BV) throw std::invalid_argument("u in a Weyl form");
        k2.u = static_cast<std::int16_t>(k.u + 1);
        break;
    }
    r.add(k2, c2, sign);
  }
  return r;
}

template <CoefficientRing R>
using WeylForm = Section<R, false>;
template <CoefficientRing R>
using BVForm = Section<R, true>;

// Single-term constructor.
template <class S>
S monomial(const S& like, const TermKey& k, const typename S::Ring& c) {
  like.check_key(k);
  S r = like.zero();
  r.add(k, c);
  return r;
}

template <class S>
S monomial(const S& like, const TermKey& k, const Rational& c) {
  return monomial(like, k, like.coeff_constant(c));
}

template <class S>
S constant(const S& like, const Rational& c) {
  return monomial(like, TermKey{}, c);
}

// Embeds a Weyl form as a theta-free, u-free BV form.
template <CoefficientRing R>
BVForm<R> to_bv(const WeylForm<R>& a, const TruncationPolicy& p) {
  BVForm<R> r(a.dim(), a.context(), p);
  for (const auto& [k, c] : a.terms()) r.add(k, c);
  return r;
}
template <CoefficientRing R>
BVForm<R> to_bv(const WeylForm<R>& a) {
  return to_bv(a, a.policy());
}

// Forgets theta-free, u-free BV terms back to a Weyl form; other terms must be absent.
template <CoefficientRing R>
WeylForm<R> to_weyl(const BVForm<R>& a) {
  WeylForm<R> r(a.dim(), a.context(), a.policy().with_u(0, 0));
  for (const auto& [k, c] : a.terms()) {
    if (k.th != 0 || k.u != 0) throw std::invalid_argument("to_weyl: theta or u present");
    r.add(k, c);
  }
  return r;
}

}  // namespace fedbv
