#pragma once

#include "fedbv/chart.hpp"

#include <stdexcept>

namespace fedbv {

// Policy with two extra units of weight and one of hbar, so that a product
// followed by division by hbar is exact up to the original bounds.
inline TruncationPolicy widened(const TruncationPolicy& p) {
  TruncationPolicy w = p;
  w.weight = p.weight + 2;
  w.hbar = p.hbar + 1;
  return w;
}

// Policy one weight lower: the range in which a residual built from inputs
// exact through weight W is itself exact.
inline TruncationPolicy residual_policy(const TruncationPolicy& p) {
  TruncationPolicy r = p;
  r.weight = std::max(0, p.weight - 1);
  r.hbar = std::min(p.hbar, r.weight / 2);
  return r;
}

// x-degree through which coefficients survive the nested derivatives of a
// weight-W computation on jets of order J.
inline int exact_x_degree(const TruncationPolicy& p) { return p.x_degree - p.weight; }

// (1/hbar)[a, b], evaluated with widened bounds and cut back to a's policy.
template <class S>
S hbar_commutator(const S& a, const S& b, const SymplecticData<typename S::Ring>& s) {
  const TruncationPolicy wide = widened(a.policy());
  S c = moyal_commutator(a.with_policy(wide), b.with_policy(wide), s);
  return c.divided_by_hbar().with_policy(a.policy());
}

// nabla = dx^k ^ (d/dx^k - Gamma^l_{kj} (y^j d/dy^l + theta^j d/dtheta^l)).
template <class S>
S nabla(const S& a, const Chart<typename S::Ring>& c) {
  const int d = c.dim();
  S out = a.zero();
  for (int k = 0; k < d; ++k) out += a.derive_x(k).times(Generator::Dx, k);
  for (int l = 0; l < d; ++l) {
    S dy = a.derive_y(l);
    S dth = S::kBV ? a.iota_theta(l) : a.zero();
    if (dy.is_zero() && dth.is_zero()) continue;
    for (int j = 0; j < d; ++j) {
      S t = dy.times(Generator::Y, j);
      if constexpr (S::kBV) t += dth.times(Generator::Theta, j);
      if (t.is_zero()) continue;
      for (int k = 0; k < d; ++k) {
        const auto& g = c.gamma_upper(l, k, j);
        if (g.is_zero()) continue;
        out -= t.scaled(g).times(Generator::Dx, k);
      }
    }
  }
  return out;
}

// omega_{ij} y^i dx^j.
template <CoefficientRing R>
WeylForm<R> omega_one_form(const Chart<R>& c) {
  WeylForm<R> out = c.weyl_zero();
  const int d = c.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const R& w = c.omega.lower(i, j);
      if (w.is_zero()) continue;
      TermKey k;
      k.y = mono_unit(i);
      k.dx = static_cast<OddMask>(1u << j);
      out.add(k, w);
    }
  return out;
}

// 1/2 m_{ij} dx^i dx^j for an antisymmetric matrix m, times hbar^h.
template <CoefficientRing R>
WeylForm<R> two_form(const Chart<R>& c, const std::vector<R>& m, int h) {
  WeylForm<R> out = c.weyl_zero();
  const int d = c.dim();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      if (m[i * d + j].is_zero()) continue;
      TermKey k;
      k.dx = static_cast<OddMask>((1u << i) | (1u << j));
      k.h = static_cast<std::int16_t>(h);
      out.add(k, m[i * d + j]);
    }
  return out;
}

// omega_hbar = -omega + sum_k hbar^k omega_k.
template <CoefficientRing R>
WeylForm<R> omega_hbar(const Chart<R>& c) {
  const int d = c.dim();
  std::vector<R> m(d * d, c.zero_coeff());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i * d + j] = c.omega.lower(i, j);
  WeylForm<R> out = -two_form(c, m, 0);
  for (std::size_t k = 0; k < c.omega_k.size(); ++k) out += two_form(c, c.omega_k[k], static_cast<int>(k) + 1);
  return out;
}

// sum_k hbar^k omega_k only.
template <CoefficientRing R>
WeylForm<R> omega_corrections(const Chart<R>& c) {
  WeylForm<R> out = c.weyl_zero();
  for (std::size_t k = 0; k < c.omega_k.size(); ++k) out += two_form(c, c.omega_k[k], static_cast<int>(k) + 1);
  return out;
}

// nabla gamma + (1/2hbar)[gamma, gamma] + R_nabla - omega_hbar, exact through weight W-1.
template <CoefficientRing R>
WeylForm<R> flatness_residual(const WeylForm<R>& gamma, const Chart<R>& c) {
  auto [t, rn] = curvature(c);
  WeylForm<R> res = nabla(gamma, c) + hbar_commutator(gamma, gamma, c.omega) * Rational(1, 2) + rn - omega_hbar(c);
  return res.with_policy(residual_policy(c.policy)).truncated_x(exact_x_degree(c.policy));
}

struct FedosovOptions {
  int max_iterations = 64;
};

// gamma = omega_{ij} y^i dx^j + r with delta^{-1} r = 0, from the fixed point of
// r <- delta^{-1}(R_nabla + nabla r + (1/2hbar)[r, r] - sum_k hbar^k omega_k).
// Each pass fixes at least one more weight, so W+1 passes reach the fixed point.
template <CoefficientRing R>
WeylForm<R> solve_fedosov(const Chart<R>& c, const FedosovOptions& opt = {}, const WeylForm<R>* seed = nullptr) {
  auto [t, rn] = curvature(c);
  const WeylForm<R> src = rn - omega_corrections(c);
  WeylForm<R> r = seed ? *seed : c.weyl_zero();
  for (int it = 0; it < opt.max_iterations; ++it) {
    WeylForm<R> rhs = src + nabla(r, c) + hbar_commutator(r, r, c.omega) * Rational(1, 2);
    WeylForm<R> next = delta_inv(rhs);
    if (next == r) return omega_one_form(c) + r;
    r = std::move(next);
  }
  throw std::runtime_error("solve_fedosov: iteration did not reach a fixed point");
}

// r = gamma - omega_{ij} y^i dx^j.
template <CoefficientRing R>
WeylForm<R> fedosov_r(const WeylForm<R>& gamma, const Chart<R>& c) {
  return gamma - omega_one_form(c);
}

// D a = nabla a + (1/hbar)[gamma, a], exact through weight W-1.
template <class S>
S fedosov_d(const S& a, const WeylForm<typename S::Ring>& gamma, const Chart<typename S::Ring>& c) {
  S g = a.zero();
  for (const auto& [k, v] : gamma.terms()) g.add(k, v);
  return nabla(a, c) + hbar_commutator(g, a, c.omega);
}

// y-free, form-free part.
template <class S>
S symbol(const S& a) {
  return a.filtered([](const TermKey& k) { return k.y == 0 && k.dx == 0 && k.th == 0; });
}

struct FlatSectionOptions {
  int max_iterations = 64;
  bool verify_gamma = true;
};

// The flat section with symbol f: fixed point of a <- f + delta^{-1}(nabla a + (1/hbar)[r, a]).
template <CoefficientRing R>
WeylForm<R> flat_section(const WeylForm<R>& f, const WeylForm<R>& gamma, const Chart<R>& c,
                         const FlatSectionOptions& opt = {}) {
  for (const auto& [k, v] : f.terms())
    if (k.y != 0 || k.dx != 0) throw std::invalid_argument("flat_section: f must be a function series");
  if (opt.verify_gamma && !flatness_residual(gamma, c).is_zero())
    throw std::invalid_argument("flat_section: gamma is not flat");
  const WeylForm<R> r = fedosov_r(gamma, c);
  WeylForm<R> a = f;
  for (int it = 0; it < opt.max_iterations; ++it) {
    WeylForm<R> next = f + delta_inv(nabla(a, c) + hbar_commutator(r, a, c.omega));
    if (next == a) return a;
    a = std::move(next);
  }
  throw std::runtime_error("flat_section: iteration did not reach a fixed point");
}

// f * g = sigma(sigma^{-1} f * sigma^{-1} g).
template <CoefficientRing R>
WeylForm<R> star(const WeylForm<R>& f, const WeylForm<R>& g, const WeylForm<R>& gamma, const Chart<R>& c) {
  FlatSectionOptions opt;
  opt.verify_gamma = false;
  return symbol(moyal(flat_section(f, gamma, c, opt), flat_section(g, gamma, c, opt), c.omega));
}

// Embeds a function (times hbar^h) as a y-free 0-form.
template <CoefficientRing R>
WeylForm<R> function_section(const Chart<R>& c, const R& f, int h = 0) {
  WeylForm<R> out = c.weyl_zero();
  TermKey k;
  k.h = static_cast<std::int16_t>(h);
  out.add(k, f);
  return out;
}

}  // namespace fedbv
