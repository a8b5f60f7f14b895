#pragma once

#include "fedbv/parallel.hpp"
#include "fedbv/section.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fedbv {

// Exact inverse of a rational matrix (row-major, n x n) by Gauss-Jordan.
inline std::vector<Rational> invert_rational(std::vector<Rational> m, int n) {
  std::vector<Rational> inv(static_cast<std::size_t>(n) * n, Rational(0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    while (piv < n && fedbv::is_zero(m[piv * n + col])) ++piv;
    if (piv == n) throw std::domain_error("matrix is singular");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(m[piv * n + j], m[col * n + j]);
        std::swap(inv[piv * n + j], inv[col * n + j]);
      }
    const Rational p = m[col * n + col];
    for (int j = 0; j < n; ++j) {
      m[col * n + j] /= p;
      inv[col * n + j] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || fedbv::is_zero(m[r * n + col])) continue;
      const Rational f = m[r * n + col];
      for (int j = 0; j < n; ++j) {
        m[r * n + j] -= f * m[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  return inv;
}

// omega_{ij}(x) and its inverse omega^{ij}(x), plus a cache of the
// coefficients Omega(alpha, beta) of exp(omega^{ij} s_i t_j).
template <CoefficientRing R>
class SymplecticData {
 public:
  using Context = typename R::Context;

  SymplecticData() = default;

  // lower is row-major dim x dim. The inverse is the Neumann series around
  // omega(0)^{-1}; it terminates because the non-constant part raises x-degree.
  SymplecticData(int dim, Context ctx, std::vector<R> lower, int max_terms = 64)
      : dim_(dim), ctx_(ctx), lower_(std::move(lower)) {
    if (dim <= 0 || dim % 2 != 0 || dim > kMaxVars) throw std::invalid_argument("symplectic: dimension must be even");
    if (lower_.size() != static_cast<std::size_t>(dim * dim)) throw std::invalid_argument("symplectic: matrix size");
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (!((at(lower_, i, j) + at(lower_, j, i)).is_zero()))
          throw std::invalid_argument("symplectic: omega not antisymmetric");
    std::vector<Rational> c0(dim * dim);
    for (int k = 0; k < dim * dim; ++k) c0[k] = constant_rational(lower_[k]);
    const std::vector<Rational> inv0 = invert_rational(c0, dim);
    // upper = sum_k (-inv0 E)^k inv0 with E = lower - lower(0).
    std::vector<R> e(dim * dim), m0(dim * dim);
    for (int k = 0; k < dim * dim; ++k) {
      e[k] = lower_[k] - R::constant(ctx_, c0[k]);
      m0[k] = R::constant(ctx_, inv0[k]);
    }
    std::vector<R> neg_inv_e = matmul(m0, e);
    for (auto& v : neg_inv_e) v = -v;
    upper_ = m0;
    std::vector<R> term = m0;
    for (int it = 0;; ++it) {
      term = matmul(neg_inv_e, term);
      if (all_zero(term)) break;
      if (it >= max_terms) throw std::domain_error("symplectic: inverse series does not terminate");
      for (int k = 0; k < dim * dim; ++k) upper_[k] += term[k];
    }
    rows_.resize(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (!upper(i, j).is_zero()) rows_[i].emplace_back(j, upper(i, j));
  }

  int dim() const { return dim_; }
  const Context& context() const { return ctx_; }
  const R& lower(int i, int j) const { return at(lower_, i, j); }
  const R& upper(int i, int j) const { return at(upper_, i, j); }
  // Nonzero omega^{ij} for fixed i.
  const std::vector<std::pair<int, R>>& row(int i) const { return rows_[i]; }

  // Coefficient of s^alpha t^beta in exp(omega^{ij} s_i t_j); |alpha| = |beta|.
  // Uses alpha_i Omega(alpha, beta) = sum_j omega^{ij} Omega(alpha - e_i, beta - e_j).
  R big_omega(Mono alpha, Mono beta) const {
    if (alpha == 0 && beta == 0) return R::constant(ctx_, 1);
    if (mono_degree(alpha) != mono_degree(beta)) return R::constant(ctx_, 0);
    {
      std::lock_guard<std::mutex> lock(*mu_);
      auto it = cache_->find({alpha, beta});
      if (it != cache_->end()) return it->second;
    }
    int i = 0;
    while (mono_get(alpha, i) == 0) ++i;
    R acc = R::constant(ctx_, 0);
    for (const auto& [j, w] : rows_[i]) {
      if (mono_get(beta, j) == 0) continue;
      acc += w * big_omega(alpha - mono_unit(i), beta - mono_unit(j));
    }
    acc = acc * Rational(1, mono_get(alpha, i));
    std::lock_guard<std::mutex> lock(*mu_);
    cache_->emplace(std::make_pair(alpha, beta), acc);
    return acc;
  }

 private:
  const R& at(const std::vector<R>& m, int i, int j) const { return m[i * dim_ + j]; }
  std::vector<R> matmul(const std::vector<R>& a, const std::vector<R>& b) const {
    std::vector<R> r(dim_ * dim_, R::constant(ctx_, 0));
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k < dim_; ++k) {
        const R& aik = a[i * dim_ + k];
        if (aik.is_zero()) continue;
        for (int j = 0; j < dim_; ++j)
          if (!b[k * dim_ + j].is_zero()) r[i * dim_ + j] += aik * b[k * dim_ + j];
      }
    return r;
  }
  static bool all_zero(const std::vector<R>& m) {
    for (const auto& v : m)
      if (!v.is_zero()) return false;
    return true;
  }

  int dim_ = 0;
  Context ctx_{};
  std::vector<R> lower_, upper_;
  std::vector<std::vector<std::pair<int, R>>> rows_;
  std::shared_ptr<std::mutex> mu_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::pair<Mono, Mono>, R>> cache_ =
      std::make_shared<std::map<std::pair<Mono, Mono>, R>>();
};

namespace detail {

// Calls f(sub, falling) for every sub <= full with |sub| = d, where
// falling = prod full_i! / (full_i - sub_i)!.
template <class F>
void for_each_sub(Mono full, int d, int dim, F&& f) {
  auto rec = [&](auto&& self, int i, int left, Mono sub, long falling) -> void {
    if (left == 0) {
      f(sub, falling);
      return;
    }
    if (i >= dim) return;
    const int e = mono_get(full, i);
    long fall = falling;
    for (int k = 0; k <= std::min(e, left); ++k) {
      self(self, i + 1, left - k, sub + mono_unit(i, k), fall);
      fall *= (e - k);
    }
  };
  rec(rec, 0, d, 0, 1);
}

}  // namespace detail

// Moyal product exp(hbar/2 omega^{ij} d_{y^i} (x) d_{z^j}) a(y) b(z) at y = z,
// extended over forms by the graded product. Weight is preserved termwise.
namespace detail {

// Sum over d of (hbar/2)^d Omega(alpha, beta) d^alpha a d^beta b, restricted to
// odd d and doubled when odd_only is set.
template <class S>
S moyal_sum(const S& a, const S& b, const SymplecticData<typename S::Ring>& s, bool odd_only) {
  a.check_compatible(b);
  if (s.dim() != a.dim()) throw std::invalid_argument("moyal: dimension mismatch");
  S r = a.zero();
  if (a.is_zero() || b.is_zero()) return r;
  const int H = a.policy().hbar;
  std::vector<const typename S::Map::value_type*> lhs;
  for (const auto& t : a.terms()) lhs.push_back(&t);
  auto parts = parallel_map(lhs.size(), [&](std::size_t idx) {
    S part = a.zero();
    const auto& [ka, ca] = *lhs[idx];
    for (const auto& [kb, cb] : b.terms()) {
      TermKey base;
      int sign;
      if (!key_product(ka, kb, base, sign) || !part.admissible(base)) continue;
      const auto c = ca * cb;
      if (c.is_zero()) continue;
      const int dmax = std::min({y_degree(ka), y_degree(kb), H - base.h});
      for (int d = odd_only ? 1 : 0; d <= dmax; d += odd_only ? 2 : 1) {
        const Rational scale = make_rational(odd_only ? 2 : 1, 1L << d);
        detail::for_each_sub(ka.y, d, a.dim(), [&](Mono al, long fa) {
          detail::for_each_sub(kb.y, d, a.dim(), [&](Mono be, long fb) {
            auto om = s.big_omega(al, be);
            if (om.is_zero()) return;
            TermKey k = base;
            k.y = base.y - al - be;
            k.h = static_cast<std::int16_t>(base.h + d);
            part.add(k, c * om * (scale * Rational(fa * fb)), sign);
          });
        });
      }
    }
    return part;
  });
  for (const auto& p : parts) r += p;
  return r;
}

}  // namespace detail

template <class S>
S moyal(const S& a, const S& b, const SymplecticData<typename S::Ring>& s) {
  return detail::moyal_sum(a, b, s, false);
}

// [a,b] = a*b - (-1)^{|a||b|} b*a with |.| the total odd degree. Since omega^{ij}
// is antisymmetric the order-d terms of b*a are (-1)^d times those of a*b up to
// the Koszul sign, so only odd orders survive, doubled.
template <class S>
S moyal_commutator(const S& a, const S& b, const SymplecticData<typename S::Ring>& s) {
  return detail::moyal_sum(a, b, s, true);
}

// Reference form of the commutator from two full products.
template <class S>
S moyal_commutator_direct(const S& a, const S& b, const SymplecticData<typename S::Ring>& s) {
  const S bo = b.odd_part(), ao = a.odd_part();
  return moyal(a, b, s) - moyal(b, a, s) + Rational(2) * moyal(bo, ao, s);
}

// omega^{ij} d_{y^i} a d_{y^j} b.
template <class S>
S poisson(const S& a, const S& b, const SymplecticData<typename S::Ring>& s) {
  S r = a.zero();
  for (int i = 0; i < a.dim(); ++i) {
    if (s.row(i).empty()) continue;
    S di = a.derive_y(i);
    if (di.is_zero()) continue;
    S g = b.zero();
    for (const auto& [j, w] : s.row(i)) g += b.derive_y(j).scaled(w);
    r += di * g;
  }
  return r;
}

// delta a = dx^k d a / d y^k.
template <class S>
S delta(const S& a) {
  S r = a.zero();
  for (int k = 0; k < a.dim(); ++k) r += a.derive_y(k).times(Generator::Dx, k);
  return r;
}

// delta* a = y^k iota_{d/dx^k} a.
template <class S>
S delta_star(const S& a) {
  S r = a.zero();
  for (int k = 0; k < a.dim(); ++k) r += a.iota_dx(k).times(Generator::Y, k);
  return r;
}

// delta^{-1} = delta* / (p + q) on y-degree p, form-degree q monomials; zero when p + q = 0.
template <class S>
S delta_inv(const S& a) {
  S r = a.zero();
  for (const auto& [k, c] : a.terms()) {
    const int pq = y_degree(k) + form_degree(k);
    if (pq == 0) continue;
    S t = a.zero();
    t.add(k, c);
    r += delta_star(t) * Rational(1, pq);
  }
  return r;
}

// The (y-degree 0, form-degree 0) part.
template <class S>
S a00(const S& a) {
  return a.filtered([](const TermKey& k) { return k.y == 0 && k.dx == 0; });
}

// Constant-in-x symplectic structure from a rational matrix.
template <CoefficientRing R>
SymplecticData<R> constant_symplectic(int dim, const typename R::Context& ctx, const std::vector<Rational>& m) {
  std::vector<R> lower;
  lower.reserve(m.size());
  for (const auto& v : m) lower.push_back(R::constant(ctx, v));
  return SymplecticData<R>(dim, ctx, std::move(lower));
}

// Standard form: omega = sum_a dx^{2a-1} ^ dx^{2a}, i.e. omega_{2a-1,2a} = 1.
inline std::vector<Rational> standard_omega(int dim) {
  std::vector<Rational> m(dim * dim, Rational(0));
  for (int a = 0; a < dim / 2; ++a) {
    m[(2 * a) * dim + 2 * a + 1] = 1;
    m[(2 * a + 1) * dim + 2 * a] = -1;
  }
  return m;
}

}  // namespace fedbv
