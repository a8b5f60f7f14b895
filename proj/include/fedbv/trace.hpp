#pragma once

#include "fedbv/transfer.hpp"

#include <functional>
#include <map>
#include <utility>

namespace fedbv {

using TorusChart = Chart<FourierElement>;

// hbar exponent -> value.
using LaurentTau = std::map<int, TauPoly>;
using LaurentQ = std::map<int, Rational>;

// Flat torus R^{2n}/Z^{2n} with constant omega, Gamma = 0 and optional constant
// omega_k. gamma and gamma_inf are solved once on construction.
class GlobalSetup {
 public:
  static GlobalSetup make(int n, const std::vector<Rational>& omega_lower,
                          const std::vector<std::vector<Rational>>& omega_k, int weight) {
    const int d = 2 * n;
    const FourierContext ctx{d};
    auto lift = [&](const std::vector<Rational>& m) {
      if (m.size() != static_cast<std::size_t>(d * d)) throw std::invalid_argument("torus: matrix size");
      std::vector<FourierElement> out;
      for (const auto& v : m) out.push_back(FourierElement::constant(ctx, v));
      return out;
    };
    std::vector<std::vector<FourierElement>> wk;
    for (const auto& m : omega_k) wk.push_back(lift(m));
    GlobalSetup s;
    s.omega_lower_ = omega_lower;
    s.omega_k_ = omega_k;
    // Fourier coefficients are never truncated in x; the x-degree only has to
    // keep exact_x_degree nonnegative through the transfer.
    s.chart_ = TorusChart::build(n, ctx, lift(omega_lower), {}, std::move(wk),
                                 TruncationPolicy::make(weight, weight + 8));
    s.gamma_ = solve_fedosov(s.chart_);
    s.gamma_inf_ = gamma_infinity(s.gamma_, s.chart_);
    return s;
  }

  static GlobalSetup standard(int n, int weight, const std::vector<Rational>& omega_k_scales = {}) {
    std::vector<std::vector<Rational>> wk;
    const auto std_omega = standard_omega(2 * n);
    for (const auto& c : omega_k_scales) {
      std::vector<Rational> m = std_omega;
      for (auto& v : m) v *= c;
      wk.push_back(m);
    }
    return make(n, std_omega, wk, weight);
  }

  const TorusChart& chart() const { return chart_; }
  const WeylForm<FourierElement>& gamma() const { return gamma_; }
  const BVForm<FourierElement>& gamma_inf() const { return gamma_inf_; }
  const std::vector<Rational>& omega_lower() const { return omega_lower_; }
  const std::vector<std::vector<Rational>>& omega_k() const { return omega_k_; }
  int n() const { return chart_.n; }

  // Highest hbar exponent of Tr that the truncation determines. The trace sees
  // only y-free terms of gamma_inf and [O]_inf, which are exact through hbar^h
  // with 2h <= W-1; a missing hbar^h term enters at hbar^{h-n}.
  int max_exact_hbar() const { return (chart_.policy.weight - 1) / 2 - n(); }

  WeylForm<FourierElement> function(const FourierElement& f, int h = 0) const {
    return function_section(chart_, f, h);
  }
  FourierElement wave(std::initializer_list<int> m, const Rational& c = Rational(1)) const {
    Frequency f{};
    int i = 0;
    for (int v : m) f[i++] = static_cast<std::int16_t>(v);
    return FourierElement::wave(chart_.ctx, f, TauPoly(GaussQ(c)));
  }

 private:
  TorusChart chart_;
  WeylForm<FourierElement> gamma_;
  BVForm<FourierElement> gamma_inf_;
  std::vector<Rational> omega_lower_;
  std::vector<std::vector<Rational>> omega_k_;
};

namespace detail {

// int_M of the top-degree part: the dx^1...dx^{2n} coefficient's torus mean,
// keyed by (hbar, u) exponents.
inline std::map<std::pair<int, int>, TauPoly> integrate_top(const BVForm<FourierElement>& a) {
  const OddMask top = static_cast<OddMask>((1u << a.dim()) - 1u);
  std::map<std::pair<int, int>, TauPoly> out;
  for (const auto& [k, v] : a.terms()) {
    if (k.y != 0 || k.th != 0 || k.dx != top) continue;
    TauPoly t = v.integrate_torus();
    if (!t.is_zero()) out[{k.h, k.u}] += t;
  }
  for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
  return out;
}

inline BVForm<FourierElement> observable_transfer(const WeylForm<FourierElement>& f, const GlobalSetup& s) {
  for (const auto& [k, v] : f.terms())
    if (k.y != 0 || k.dx != 0) throw std::invalid_argument("trace: argument must be a function series");
  FlatSectionOptions fo;
  fo.verify_gamma = false;
  TransferOptions to;
  to.check_flat = false;
  return local_to_global(flat_section(f, s.gamma(), s.chart(), fo), s.gamma(), s.chart(), to);
}

}  // namespace detail

// Tr f = int_M int_{gamma_inf} [sigma^{-1} f]_inf, through hbar^{max_exact_hbar}.
inline LaurentTau trace(const WeylForm<FourierElement>& f, const GlobalSetup& s) {
  const auto x = detail::observable_transfer(f, s);
  LaurentTau out;
  for (auto& [hu, v] : detail::integrate_top(integrate_twisted(x, s.gamma_inf(), s.chart().omega)))
    if (hu.first <= s.max_exact_hbar()) out[hu.first] += v;
  return out;
}

inline LaurentTau trace(const FourierElement& f, const GlobalSetup& s) { return trace(s.function(f), s); }

// An S^1-equivariant observable dtheta sigma^{-1} f. Components without dtheta
// are not modelled.
struct EquivariantObservable {
  WeylForm<FourierElement> f;
};

// (hbar, u) exponent -> value.
using EquivariantValue = std::map<std::pair<int, int>, TauPoly>;

// Tr^{S^1}(dtheta sigma^{-1} f) = int_M sigma(u^n exp(hbar iota_Pi / u) [sigma^{-1} f]_inf exp(gamma_inf / hbar)).
inline EquivariantValue equivariant_trace(const EquivariantObservable& o, const GlobalSetup& s) {
  const auto x = detail::observable_transfer(o.f, s);
  EquivariantValue out;
  for (auto& [hu, v] : detail::integrate_top(equivariant_integrate(x, s.gamma_inf(), s.chart().omega)))
    if (hu.first <= s.max_exact_hbar()) out[hu] = v;
  return out;
}

// E = sum y^i d/dy^i + 2 hbar d/dhbar, diagonal on terms.
template <class S>
S euler_operator(const S& a) {
  S out = a.zero();
  for (const auto& [k, v] : a.terms()) out.add(k, v * Rational(weight(k)));
  return out;
}

// nabla G + (1/hbar)[gamma, G] - 2 sum_k (k-1) hbar^k omega_k with G = E gamma - 2 gamma
// and omega_0 = -omega; hbar times the rescaling identity. Exact through W-1.
template <CoefficientRing R>
WeylForm<R> euler_rescale_residual(const WeylForm<R>& gamma, const Chart<R>& c) {
  const WeylForm<R> g = euler_operator(gamma) - gamma * Rational(2);
  WeylForm<R> res = nabla(g, c) + hbar_commutator(gamma, g, c.omega);
  // omega_hbar = -omega + sum hbar^k omega_k; weight the hbar^k part by 2(k-1).
  const WeylForm<R> om = omega_hbar(c);
  for (const auto& [k, v] : om.terms()) res.add(k, v * Rational(-2 * (k.h - 1)));
  return res.with_policy(residual_policy(c.policy)).truncated_x(exact_x_degree(c.policy));
}

// A-hat_u = exp(sum_{j>=2} (j-1)! wheel_zeta(j) u^{-j} ch_j), ch[j] = ch_j. Returns the
// u exponent -> coefficient through u^{-order}. Odd j have wheel_zeta(j) = 0.
inline LaurentQ a_hat_series(const std::vector<Rational>& ch, int order) {
  std::vector<Rational> l(order + 1, Rational(0));
  Rational fact(1);
  for (int j = 2; j <= order; ++j) {
    fact *= j - 1;
    if (j < static_cast<int>(ch.size())) l[j] = fact * wheel_zeta(j) * ch[j];
  }
  // exp of a series without constant term: m a_m = sum_k k l_k a_{m-k}.
  std::vector<Rational> a(order + 1, Rational(0));
  a[0] = 1;
  for (int m = 1; m <= order; ++m) {
    Rational s(0);
    for (int k = 1; k <= m; ++k) s += Rational(k) * l[k] * a[m - k];
    a[m] = s / Rational(m);
  }
  LaurentQ out;
  for (int m = 0; m <= order; ++m)
    if (a[m] != 0) out[-m] = a[m];
  return out;
}

// 4 R_ijkl = 3(R_(ijk)l - R_(ijl)k), symmetrization with weight 1/3 over the cyclic
// orbit (R is symmetric in its first two slots). Coefficients are compared after
// truncation at x-degree x_cap when x_cap >= 0.
template <CoefficientRing R>
bool bianchi_identity_check(const CurvatureTensor<R>& t, int x_cap = -1) {
  const int d = t.dim;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          R lhs = t.at(i, j, k, l) * Rational(4);
          R rhs = t.at(i, j, k, l) + t.at(j, k, i, l) + t.at(k, i, j, l) - t.at(i, j, l, k) - t.at(j, l, i, k) -
                  t.at(l, i, j, k);
          R diff = lhs - rhs;
          if (x_cap >= 0) diff = diff.truncated(x_cap);
          if (!diff.is_zero()) return false;
        }
  return true;
}

// int_M exp(-omega_hbar / hbar) = Pf(omega / hbar - sum_k hbar^{k-1} omega_k), computed
// from the Pfaffian expansion with Laurent polynomial entries.
inline LaurentQ exp_omega_integral(int n, const std::vector<Rational>& omega_lower,
                                   const std::vector<std::vector<Rational>>& omega_k) {
  const int d = 2 * n;
  std::vector<LaurentQ> m(d * d);
  for (int a = 0; a < d * d; ++a) {
    if (omega_lower[a] != 0) m[a][-1] += omega_lower[a];
    for (std::size_t k = 0; k < omega_k.size(); ++k)
      if (omega_k[k][a] != 0) m[a][static_cast<int>(k)] -= omega_k[k][a];
  }
  auto mul = [](const LaurentQ& x, const LaurentQ& y) {
    LaurentQ r;
    for (const auto& [e, v] : x)
      for (const auto& [f, w] : y) r[e + f] += v * w;
    return r;
  };
  // Pf over the index list: Pf = sum_{j>0} (-1)^{j+1} a_{0j} Pf(rest).
  std::function<LaurentQ(const std::vector<int>&)> pf = [&](const std::vector<int>& idx) -> LaurentQ {
    if (idx.empty()) return LaurentQ{{0, Rational(1)}};
    LaurentQ acc;
    for (std::size_t j = 1; j < idx.size(); ++j) {
      const LaurentQ& a = m[idx[0] * d + idx[j]];
      if (a.empty()) continue;
      std::vector<int> rest;
      for (std::size_t q = 1; q < idx.size(); ++q)
        if (q != j) rest.push_back(idx[q]);
      const Rational sign = j % 2 ? 1 : -1;
      for (const auto& [e, v] : mul(a, pf(rest))) acc[e] += sign * v;
    }
    return acc;
  };
  std::vector<int> all(d);
  for (int i = 0; i < d; ++i) all[i] = i;
  LaurentQ out;
  for (const auto& [e, v] : pf(all))
    if (v != 0) out[e] = v;
  return out;
}

// Sign c_n in Tr(1) = c_n int_M exp(-omega_hbar / hbar), fixed by the T^2 calibration.
inline int index_sign(int n) { return n % 2 ? -1 : 1; }

struct IndexReport {
  LaurentQ trace;     // Tr(1)
  LaurentQ integral;  // int_M exp(-omega_hbar / hbar)
  int sign = 1;       // c_n
  int max_hbar = 0;   // exponents above this are not compared
  bool rational = true;
  bool match = false;
};

// Tr(1) against c_n int exp(-omega_hbar/hbar) (A-hat = 1 on the flat torus).
inline IndexReport index_check(const GlobalSetup& s) {
  IndexReport r;
  r.sign = index_sign(s.n());
  r.max_hbar = s.max_exact_hbar();
  for (const auto& [e, t] : trace(constant(s.chart().weyl_zero(), Rational(1)), s)) {
    if (t.degree() > 0 || t.coeff(0).im != 0) {
      r.rational = false;
      continue;
    }
    r.trace[e] = t.coeff(0).re;
  }
  for (const auto& [e, v] : exp_omega_integral(s.n(), s.omega_lower(), s.omega_k()))
    if (e <= r.max_hbar) r.integral[e] = v;
  LaurentQ scaled;
  for (const auto& [e, v] : r.integral) scaled[e] = v * r.sign;
  r.match = r.rational && scaled == r.trace;
  return r;
}

}  // namespace fedbv
