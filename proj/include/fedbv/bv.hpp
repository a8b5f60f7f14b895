#pragma once

#include "fedbv/fedosov.hpp"

#include <stdexcept>

namespace fedbv {

// d_TM = theta^i d/dy^i, theta multiplied from the left.
template <CoefficientRing R>
BVForm<R> d_tm(const BVForm<R>& a) {
  BVForm<R> out = a.zero();
  for (int i = 0; i < a.dim(); ++i) out += a.derive_y(i).times(Generator::Theta, i);
  return out;
}

// iota_Pi = 1/2 w^{ij} iota_i iota_j = sum_{i<j} w^{ij} iota_i iota_j.
template <CoefficientRing R>
BVForm<R> iota_pi(const BVForm<R>& a, const SymplecticData<R>& s) {
  BVForm<R> out = a.zero();
  for (int j = 0; j < a.dim(); ++j) {
    BVForm<R> aj = a.iota_theta(j);
    if (aj.is_zero()) continue;
    for (int i = 0; i < j; ++i)
      if (!s.upper(i, j).is_zero()) out += aj.iota_theta(i).scaled(s.upper(i, j));
  }
  return out;
}

// Delta = w^{ij} d/dy^i iota_j = [d_TM, iota_Pi].
template <CoefficientRing R>
BVForm<R> bv_delta(const BVForm<R>& a, const SymplecticData<R>& s) {
  BVForm<R> out = a.zero();
  for (int j = 0; j < a.dim(); ++j) {
    BVForm<R> aj = a.iota_theta(j);
    if (aj.is_zero()) continue;
    for (int i = 0; i < a.dim(); ++i)
      if (!s.upper(i, j).is_zero()) out += aj.derive_y(i).scaled(s.upper(i, j));
  }
  return out;
}

// {a,b} = Delta(ab) - (Delta a) b - (-1)^a a Delta b, split by the parity of a.
template <CoefficientRing R>
BVForm<R> bv_bracket(const BVForm<R>& a, const BVForm<R>& b, const SymplecticData<R>& s) {
  const BVForm<R> db = bv_delta(b, s);
  BVForm<R> out = bv_delta(a * b, s) - bv_delta(a, s) * b;
  out -= a.even_part() * db;
  out += a.odd_part() * db;
  return out;
}

// Left multiplication by d_TM(R_nabla).
template <CoefficientRing R>
BVForm<R> curvature_insertion(const Chart<R>& c, const TruncationPolicy& p) {
  auto [t, rn] = curvature(c);
  return d_tm(to_bv(rn, p));
}

// sum_k x^k / k!, for x nilpotent under the product.
template <class S>
S exp_nilpotent(const S& x) {
  S out = constant(x, 1);
  S term = out;
  for (int k = 1;; ++k) {
    term = (term * x) * make_rational(1, k);
    if (term.is_zero()) return out;
    if (k > 4 * kMaxVars) throw std::logic_error("exp_nilpotent: argument is not nilpotent");
    out += term;
  }
}

template <CoefficientRing R>
void require_nilpotent_action(const BVForm<R>& g) {
  for (const auto& [k, v] : g.terms()) {
    if (k.dx == 0) throw std::invalid_argument("BV action: term without dx, exp(G/hbar) is not a finite sum");
    if (parity(k) != 0 || k.u != 0) throw std::invalid_argument("BV action: term is odd or carries u");
  }
}

// exp(G/hbar) with Laurent hbar.
template <CoefficientRing R>
BVForm<R> exp_over_hbar(const BVForm<R>& g) {
  require_nilpotent_action(g);
  return exp_nilpotent(g.shifted_hbar(-1));
}

// nabla G + hbar Delta G + 1/2 {G,G} + d_TM R_nabla = hbar exp(-G/hbar) Q exp(G/hbar),
// Q = nabla + hbar Delta + hbar^{-1} d_TM R_nabla. Exact through weight W-1.
template <CoefficientRing R>
BVForm<R> qme_residual(const BVForm<R>& g, const Chart<R>& c) {
  require_nilpotent_action(g);
  const TruncationPolicy& p = g.policy();
  BVForm<R> res = nabla(g, c) + bv_delta(g, c.omega).times(Generator::Hbar) +
                  bv_bracket(g, g, c.omega) * Rational(1, 2) + curvature_insertion(c, p);
  return res.with_policy(residual_policy(p)).truncated_x(exact_x_degree(p));
}

// (1/n!) iota_Pi^n on the theta-top, y-free part. Fiberwise only: x, dx, hbar and
// u pass through. Returns a y-free, theta-free form.
template <CoefficientRing R>
BVForm<R> berezin(const BVForm<R>& a, const SymplecticData<R>& s) {
  const int d = a.dim();
  const OddMask top = static_cast<OddMask>((1u << d) - 1u);
  BVForm<R> t = a.filtered([top](const TermKey& k) { return k.y == 0 && k.th == top; });
  Rational fact(1);
  for (int m = 1; m <= d / 2; ++m) {
    t = iota_pi(t, s);
    fact *= m;
  }
  return t * (Rational(1) / fact);
}

// d_M on y-free, theta-free forms.
template <class S>
S de_rham(const S& a) {
  S out = a.zero();
  for (int k = 0; k < a.dim(); ++k) out += a.derive_x(k).times(Generator::Dx, k);
  return out;
}

// int_G a = hbar^n int_Ber exp(G/hbar) a. The factor hbar^n makes int_G 1 lead with
// hbar^{-n} omega^n/n! and matches the u -> 0 limit of the equivariant map.
template <CoefficientRing R>
BVForm<R> integrate_twisted(const BVForm<R>& a, const BVForm<R>& g, const SymplecticData<R>& s) {
  return berezin(exp_over_hbar(g) * a, s).shifted_hbar(a.dim() / 2);
}

// exp(t iota_Pi) b with t = c hbar^e u^f, summed until the theta degree is exhausted.
template <CoefficientRing R>
BVForm<R> exp_iota_pi(const BVForm<R>& b, const SymplecticData<R>& s, int hbar_step, int u_step,
                      const Rational& c = Rational(1)) {
  BVForm<R> out = b;
  BVForm<R> term = b;
  for (int k = 1;; ++k) {
    term = iota_pi(term, s).shifted_hbar(hbar_step).shifted_u(u_step) * Rational(c / k);
    if (term.is_zero()) return out;
    out += term;
  }
}

// Policy with room for u^{-n} .. u^{n} around p's range.
inline TruncationPolicy equivariant_policy(const TruncationPolicy& p, int n) {
  return p.with_u(p.u_min - n, p.u_max + n);
}

// sigma(u^n exp(hbar iota_Pi / u) a exp(G/hbar)), sigma setting y and theta to zero.
template <CoefficientRing R>
BVForm<R> equivariant_integrate(const BVForm<R>& a, const BVForm<R>& g, const SymplecticData<R>& s) {
  const int n = a.dim() / 2;
  const TruncationPolicy wide = equivariant_policy(a.policy(), n);
  BVForm<R> b = a.with_policy(wide) * exp_over_hbar(g.with_policy(wide));
  b = exp_iota_pi(b, s, 1, -1).shifted_u(n);
  return b.filtered([](const TermKey& k) { return k.y == 0 && k.th == 0; });
}

// -omega_{ij} theta^i dx^j = -d_TM(omega_{ij} y^i dx^j), the flat-chart BV action.
// The sign matches the transfer of gamma.
template <CoefficientRing R>
BVForm<R> flat_bv_action(const Chart<R>& c, const TruncationPolicy& p) {
  return d_tm(to_bv(omega_one_form(c), p)) * Rational(-1);
}

}  // namespace fedbv
