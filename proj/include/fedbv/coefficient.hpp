#pragma once

#include "fedbv/fourier.hpp"
#include "fedbv/jet_poly.hpp"

#include <concepts>
#include <stdexcept>
#include <variant>

namespace fedbv {

// What the graded-section algebra needs from its coefficient ring.
template <class R>
concept CoefficientRing = requires(const R& a, const R& b, const Rational& s, int i) {
  typename R::Context;
  { a.context() } -> std::convertible_to<typename R::Context>;
  { R::constant(a.context(), s) } -> std::same_as<R>;
  { a + b } -> std::same_as<R>;
  { a - b } -> std::same_as<R>;
  { a * b } -> std::same_as<R>;
  { a * s } -> std::same_as<R>;
  { -a } -> std::same_as<R>;
  { a.derivative(i) } -> std::same_as<R>;
  { a.truncated(i) } -> std::same_as<R>;
  { a.is_zero() } -> std::convertible_to<bool>;
  { a == b } -> std::convertible_to<bool>;
};

struct CoefficientContext {
  std::variant<JetContext, FourierContext> v;
  bool operator==(const CoefficientContext&) const = default;
};

// Runtime-tagged coefficient. Operations never leave the tag; mixing tags throws.
class Coefficient {
 public:
  using Context = CoefficientContext;

  Coefficient() = default;
  Coefficient(JetPoly p) : v_(std::move(p)) {}
  Coefficient(FourierElement f) : v_(std::move(f)) {}

  static Coefficient constant(const Context& ctx, const Rational& c) {
    return std::visit(
        [&](const auto& k) -> Coefficient {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, JetContext>)
            return JetPoly::constant(k, c);
          else
            return FourierElement::constant(k, c);
        },
        ctx.v);
  }

  bool is_jet() const { return std::holds_alternative<JetPoly>(v_); }
  bool is_fourier() const { return std::holds_alternative<FourierElement>(v_); }
  const JetPoly& jet() const { return std::get<JetPoly>(v_); }
  const FourierElement& fourier() const { return std::get<FourierElement>(v_); }

  Context context() const {
    return std::visit([](const auto& x) { return Context{x.context()}; }, v_);
  }
  bool is_zero() const {
    return std::visit([](const auto& x) { return x.is_zero(); }, v_);
  }

  friend Coefficient operator+(const Coefficient& a, const Coefficient& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x + y; });
  }
  friend Coefficient operator-(const Coefficient& a, const Coefficient& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x - y; });
  }
  friend Coefficient operator*(const Coefficient& a, const Coefficient& b) {
    return binary(a, b, [](const auto& x, const auto& y) { return x * y; });
  }
  friend Coefficient operator*(const Coefficient& a, const Rational& s) {
    return std::visit([&](const auto& x) { return Coefficient(x * s); }, a.v_);
  }
  Coefficient operator-() const {
    return std::visit([](const auto& x) { return Coefficient(-x); }, v_);
  }
  Coefficient& operator+=(const Coefficient& o) { return *this = *this + o; }
  Coefficient& operator-=(const Coefficient& o) { return *this = *this - o; }

  Coefficient derivative(int i) const {
    return std::visit([&](const auto& x) { return Coefficient(x.derivative(i)); }, v_);
  }
  Coefficient truncated(int d) const {
    return std::visit([&](const auto& x) { return Coefficient(x.truncated(d)); }, v_);
  }
  bool operator==(const Coefficient& o) const { return v_ == o.v_; }

 private:
  template <class F>
  static Coefficient binary(const Coefficient& a, const Coefficient& b, F f) {
    if (a.v_.index() != b.v_.index())
      throw std::invalid_argument("Coefficient: mixing jet and Fourier coefficients");
    if (a.is_jet()) return f(a.jet(), b.jet());
    return f(a.fourier(), b.fourier());
  }

  std::variant<JetPoly, FourierElement> v_;
};

// Value at the origin (jet) or the torus mean (Fourier), required to be rational.
inline Rational constant_rational(const JetPoly& p) { return p.constant_term(); }
inline Rational constant_rational(const FourierElement& f) {
  const TauPoly c = f.constant_term();
  if (c.degree() > 0 || !fedbv::is_zero(c.coeff(0).im))
    throw std::domain_error("constant part is not rational");
  return c.coeff(0).re;
}
inline Rational constant_rational(const Coefficient& c) {
  return c.is_jet() ? constant_rational(c.jet()) : constant_rational(c.fourier());
}

static_assert(CoefficientRing<JetPoly>);
static_assert(CoefficientRing<FourierElement>);
static_assert(CoefficientRing<Coefficient>);

}  // namespace fedbv
