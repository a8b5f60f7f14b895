#pragma once

#include "fedbv/format.hpp"
#include "fedbv/section.hpp"

#include <random>

namespace fedbv::fixtures {

using Rng = std::mt19937_64;

inline Rational random_rational(Rng& rng, int span = 5) {
  std::uniform_int_distribution<int> num(-span, span), den(1, 3);
  int n = 0;
  while (n == 0) n = num(rng);
  return make_rational(n, den(rng));
}

inline JetPoly random_jet(const JetContext& ctx, Rng& rng, int nterms, int max_deg) {
  JetPoly p(ctx);
  std::uniform_int_distribution<int> var(0, ctx.nvars - 1), deg(0, max_deg);
  for (int t = 0; t < nterms; ++t) {
    Mono m = 0;
    const int d = deg(rng);
    for (int e = 0; e < d; ++e) m += mono_unit(var(rng));
    p += JetPoly::monomial(ctx, m, random_rational(rng));
  }
  return p;
}

struct KeyShape {
  int max_weight = 4;
  int max_hbar = 1;
  int max_dx = 2;
  int max_theta = 2;
  int u_lo = 0, u_hi = 0;
};

inline TermKey random_key(int dim, Rng& rng, const KeyShape& s, bool bv) {
  std::uniform_int_distribution<int> var(0, dim - 1), coin(0, 1);
  TermKey k;
  k.h = static_cast<std::int16_t>(std::uniform_int_distribution<int>(0, s.max_hbar)(rng));
  const int ymax = std::max(0, s.max_weight - 2 * k.h);
  const int yd = std::uniform_int_distribution<int>(0, ymax)(rng);
  for (int e = 0; e < yd; ++e) k.y += mono_unit(var(rng));
  const int nd = std::uniform_int_distribution<int>(0, s.max_dx)(rng);
  for (int e = 0; e < nd; ++e) k.dx |= static_cast<OddMask>(1u << var(rng));
  if (bv) {
    const int nt = std::uniform_int_distribution<int>(0, s.max_theta)(rng);
    for (int e = 0; e < nt; ++e) k.th |= static_cast<OddMask>(1u << var(rng));
    k.u = static_cast<std::int16_t>(std::uniform_int_distribution<int>(s.u_lo, s.u_hi)(rng));
  }
  return k;
}

// Random section; coefficients are random jets when the ring is JetPoly.
template <class S>
S random_section(const S& like, Rng& rng, int nterms, const KeyShape& shape, int coeff_deg = 1) {
  S r = like.zero();
  for (int t = 0; t < nterms; ++t) {
    TermKey k = random_key(like.dim(), rng, shape, S::kBV);
    if constexpr (std::is_same_v<typename S::Ring, JetPoly>) {
      r.add(k, random_jet(like.context(), rng, 2, coeff_deg));
    } else {
      r.add(k, random_rational(rng));
    }
  }
  return r;
}

// Keeps the terms of a given parity.
template <class S>
S homogeneous_parity(const S& a, int p) {
  return a.filtered([p](const TermKey& k) { return parity(k) == p; });
}

}  // namespace fedbv::fixtures
