#pragma once

#include "fedbv/weyl_ops.hpp"

#include <string>
#include <vector>

namespace fedbv {

// Symplectic chart: omega_{ij}(x), the connection tensor Gamma_{ijk}(x) with
// Gamma^l_{jk} = omega^{li} Gamma_{ijk}, optional closed 2-forms omega_k.
template <CoefficientRing R>
struct Chart {
  using Context = typename R::Context;

  int n = 0;
  Context ctx{};
  SymplecticData<R> omega;
  std::vector<R> gamma;                 // Gamma_{ijk} at (i*d + j)*d + k
  std::vector<std::vector<R>> omega_k;  // omega_k[k-1] is d x d, row-major
  TruncationPolicy policy;
  std::vector<R> gamma_up;              // Gamma^l_{kj} at (l*d + k)*d + j

  int dim() const { return 2 * n; }
  const R& gamma_lower(int i, int j, int k) const { return gamma[(i * dim() + j) * dim() + k]; }
  const R& gamma_upper(int l, int k, int j) const { return gamma_up[(l * dim() + k) * dim() + j]; }

  WeylForm<R> weyl_zero() const { return WeylForm<R>(dim(), ctx, policy); }
  BVForm<R> bv_zero(int u_min = 0, int u_max = 0) const {
    return BVForm<R>(dim(), ctx, policy.with_u(u_min, u_max));
  }
  R zero_coeff() const { return R::constant(ctx, 0); }

  static Chart build(int n, Context ctx, std::vector<R> omega_lower, std::vector<R> gamma,
                     std::vector<std::vector<R>> omega_k, TruncationPolicy policy) {
    Chart c;
    c.n = n;
    c.ctx = ctx;
    const int d = 2 * n;
    c.omega = SymplecticData<R>(d, ctx, std::move(omega_lower));
    if (gamma.empty()) gamma.assign(d * d * d, R::constant(ctx, 0));
    if (gamma.size() != static_cast<std::size_t>(d * d * d)) throw std::invalid_argument("chart: gamma size");
    for (const auto& w : omega_k)
      if (w.size() != static_cast<std::size_t>(d * d)) throw std::invalid_argument("chart: omega_k size");
    c.gamma = std::move(gamma);
    c.omega_k = std::move(omega_k);
    policy.validate();
    c.policy = policy;
    c.gamma_up.assign(d * d * d, R::constant(ctx, 0));
    for (int l = 0; l < d; ++l)
      for (const auto& [i, w] : c.omega.row(l))
        for (int k = 0; k < d; ++k)
          for (int j = 0; j < d; ++j) {
            const R& g = c.gamma_lower(i, j, k);
            if (!g.is_zero()) c.gamma_up[(l * d + k) * d + j] += w * g;
          }
    return c;
  }
};

// Flat chart: standard constant omega, Gamma = 0.
template <CoefficientRing R>
Chart<R> flat_chart(int n, const typename R::Context& ctx, const TruncationPolicy& p) {
  std::vector<R> lower;
  for (const auto& v : standard_omega(2 * n)) lower.push_back(R::constant(ctx, v));
  return Chart<R>::build(n, ctx, std::move(lower), {}, {}, p);
}

// Sets Gamma_{ijk} and all its index permutations.
template <CoefficientRing R>
void set_symmetric(std::vector<R>& gamma, int d, int i, int j, int k, const R& v) {
  const int idx[3] = {i, j, k};
  static const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (const auto& p : perm) gamma[(idx[p[0]] * d + idx[p[1]]) * d + idx[p[2]]] = v;
}

struct ChartDiagnostics {
  bool ok = true;
  std::vector<std::string> issues;
  void flag(std::string s) {
    ok = false;
    issues.push_back(std::move(s));
  }
};

namespace detail {
inline std::string idx(std::initializer_list<int> v) {
  std::string s;
  for (int i : v) s += std::to_string(i + 1);
  return s;
}
}  // namespace detail

// Exact checks of the chart invariants. Identities involving one x-derivative
// are compared below x-degree J.
template <CoefficientRing R>
ChartDiagnostics validate_chart(const Chart<R>& c) {
  ChartDiagnostics out;
  const int d = c.dim();
  const int cap = c.policy.x_degree - 1;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const R& g = c.gamma_lower(i, j, k);
        if (!(g == c.gamma_lower(j, i, k)) || !(g == c.gamma_lower(i, k, j)))
          out.flag("gamma_lower not symmetric at " + detail::idx({i, j, k}));
      }
  auto w = [&](int i, int j) -> const R& { return c.omega.lower(i, j); };
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        R s = w(j, k).derivative(i) + w(k, i).derivative(j) + w(i, j).derivative(k);
        if (!s.truncated(cap).is_zero()) out.flag("omega not closed at " + detail::idx({i, j, k}));
      }
  // (nabla_k omega)_{ij} = d_k omega_{ij} - Gamma_{ijk} + Gamma_{jik}
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        R s = w(i, j).derivative(k) - c.gamma_lower(i, j, k) + c.gamma_lower(j, i, k);
        if (!s.truncated(cap).is_zero()) {
          out.flag("connection does not preserve omega at " + detail::idx({i, j, k}));
          i = j = k = d;
        }
      }
  for (std::size_t m = 0; m < c.omega_k.size(); ++m) {
    const auto& om = c.omega_k[m];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (!(om[i * d + j] + om[j * d + i]).is_zero())
          out.flag("omega_" + std::to_string(m + 1) + " not antisymmetric");
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
          R s = om[j * d + k].derivative(i) + om[k * d + i].derivative(j) + om[i * d + j].derivative(k);
          if (!s.truncated(cap).is_zero()) out.flag("omega_" + std::to_string(m + 1) + " not closed");
        }
  }
  return out;
}

// R_{ijkl} = omega_{im} R^m_{jkl}; symmetric in ij, antisymmetric in kl.
template <CoefficientRing R>
struct CurvatureTensor {
  int dim = 0;
  std::vector<R> r;
  const R& at(int i, int j, int k, int l) const { return r[((i * dim + j) * dim + k) * dim + l]; }
  R& at(int i, int j, int k, int l) { return r[((i * dim + j) * dim + k) * dim + l]; }
};

// R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}.
template <CoefficientRing R>
CurvatureTensor<R> curvature_tensor(const Chart<R>& c) {
  const int d = c.dim();
  std::vector<R> up(d * d * d * d, c.zero_coeff());
  auto U = [&](int i, int j, int k, int l) -> R& { return up[((i * d + j) * d + k) * d + l]; };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          R v = c.gamma_upper(i, l, j).derivative(k) - c.gamma_upper(i, k, j).derivative(l);
          for (int m = 0; m < d; ++m) {
            v += c.gamma_upper(i, k, m) * c.gamma_upper(m, l, j);
            v -= c.gamma_upper(i, l, m) * c.gamma_upper(m, k, j);
          }
          U(i, j, k, l) = v;
        }
  CurvatureTensor<R> t{d, std::vector<R>(d * d * d * d, c.zero_coeff())};
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m) {
      const R& w = c.omega.lower(i, m);
      if (w.is_zero()) continue;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) t.at(i, j, k, l) += w * U(m, j, k, l);
    }
  return t;
}

// R_nabla = 1/4 R_{ijkl} y^i y^j dx^k dx^l.
template <CoefficientRing R>
WeylForm<R> curvature_form(const Chart<R>& c, const CurvatureTensor<R>& t) {
  const int d = c.dim();
  WeylForm<R> out = c.weyl_zero();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          if (k == l || t.at(i, j, k, l).is_zero()) continue;
          TermKey key;
          key.y = mono_unit(i) + mono_unit(j);
          key.dx = static_cast<OddMask>((1u << k) | (1u << l));
          out.add(key, t.at(i, j, k, l) * Rational(1, 4), k < l ? 1 : -1);
        }
  return out;
}

template <CoefficientRing R>
std::pair<CurvatureTensor<R>, WeylForm<R>> curvature(const Chart<R>& c) {
  auto diag = validate_chart(c);
  if (!diag.ok) throw std::invalid_argument("curvature: invalid chart: " + diag.issues.front());
  auto t = curvature_tensor(c);
  return {t, curvature_form(c, t)};
}

}  // namespace fedbv
