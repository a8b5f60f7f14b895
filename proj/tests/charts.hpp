#pragma once

#include "fedbv/fedosov.hpp"
#include "random_forms.hpp"

namespace fedbv::fixtures {

// Constant standard omega and a sparse random symmetric Gamma of x-degree <= 2.
inline Chart<JetPoly> random_chart(int n, Rng& rng, int weight, int x_degree, int entries = 3,
                                   std::vector<std::vector<JetPoly>> omega_k = {}) {
  const int d = 2 * n;
  JetContext ctx{d, x_degree};
  std::vector<JetPoly> lower;
  for (const auto& v : standard_omega(d)) lower.push_back(JetPoly::constant(ctx, v));
  std::vector<JetPoly> gamma(d * d * d, JetPoly(ctx));
  std::uniform_int_distribution<int> idx(0, d - 1);
  for (int e = 0; e < entries; ++e) {
    int i = idx(rng), j = idx(rng), k = idx(rng);
    set_symmetric(gamma, d, i, j, k, random_jet(ctx, rng, 2, 2));
  }
  return Chart<JetPoly>::build(n, ctx, std::move(lower), std::move(gamma), std::move(omega_k),
                               TruncationPolicy::make(weight, x_degree));
}

// Constant closed 2-form c * omega_standard as an omega_k entry.
inline std::vector<JetPoly> scaled_standard(const JetContext& ctx, int d, const Rational& c) {
  std::vector<JetPoly> m;
  for (const auto& v : standard_omega(d)) m.push_back(JetPoly::constant(ctx, v * c));
  return m;
}

}  // namespace fedbv::fixtures
