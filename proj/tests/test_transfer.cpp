#include "fedbv/transfer.hpp"
#include "charts.hpp"

#include <gtest/gtest.h>

using namespace fedbv;
namespace fx = fedbv::fixtures;

namespace {

using B = BVForm<JetPoly>;
using Wf = WeylForm<JetPoly>;

Chart<JetPoly> flat(int n, int weight, int x_degree) {
  return flat_chart<JetPoly>(n, JetContext{2 * n, x_degree}, TruncationPolicy::make(weight, x_degree));
}

// Random Weyl observable of the given parity with enough terms to exercise every graph.
Wf random_observable(const Chart<JetPoly>& c, fx::Rng& rng, int parity) {
  Wf o = c.weyl_zero();
  while (o.size() < 6) o += fx::homogeneous_parity(fx::random_section(c.weyl_zero(), rng, 4, {3, 1, 1, 0}), parity);
  return o;
}

std::vector<Rational> random_symmetric(int d, fx::Rng& rng) {
  std::vector<Rational> a(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) a[i * d + j] = a[j * d + i] = fx::random_rational(rng);
  return a;
}

}  // namespace

TEST(GammaInfinity, FlatChartIsThetaDx) {
  for (int n : {1, 2}) {
    auto c = flat(n, 6, 6);
    auto g = solve_fedosov(c);
    auto gi = gamma_infinity(g, c);
    EXPECT_EQ(gi, transfer_vertex(g, gi.policy()));
    ASSERT_FALSE(gi.is_zero());
    for (const auto& [k, v] : gi.terms()) {
      EXPECT_EQ(k.y, 0);
      EXPECT_EQ(popcount(k.th), 1);
      EXPECT_EQ(popcount(k.dx), 1);
      EXPECT_EQ(k.h, 0);
    }
    EXPECT_TRUE(qme_residual(gi, c).is_zero());
  }
}

TEST(GammaInfinity, RejectsNonSolution) {
  fx::Rng rng(2);
  auto c = fx::random_chart(1, rng, 5, 8);
  auto g = solve_fedosov(c);
  Wf bad = g + monomial(g, TermKey{mono_unit(0) * 3, 0, 0, 1, 0}, 1);
  EXPECT_THROW(gamma_infinity(bad, c), std::invalid_argument);
}

TEST(GammaInfinity, QuantumMasterEquationDim2) {
  for (int seed : {1, 2, 3}) {
    fx::Rng rng(seed);
    auto c = fx::random_chart(1, rng, 7, 11);
    auto g = solve_fedosov(c);
    auto gi = gamma_infinity(g, c);
    EXPECT_TRUE(qme_residual(gi, c).is_zero()) << "seed " << seed;
    // Graphs beyond the single vertex contribute.
    EXPECT_NE(gi, transfer_vertex(g, gi.policy()));
  }
}

TEST(GammaInfinity, QuantumMasterEquationDim4) {
  fx::Rng rng(3);
  auto c = fx::random_chart(2, rng, 4, 7);
  auto g = solve_fedosov(c);
  auto gi = gamma_infinity(g, c);
  EXPECT_TRUE(qme_residual(gi, c).is_zero());
}

TEST(GammaInfinity, ResidualDetectsWrongAction) {
  fx::Rng rng(1);
  auto c = fx::random_chart(1, rng, 6, 10);
  auto g = solve_fedosov(c);
  auto gi = gamma_infinity(g, c);
  // The unsigned vertex d_TM gamma fails already at hbar^0.
  EXPECT_FALSE(qme_residual(transfer_vertex(g, gi.policy()) * Rational(-1), c).is_zero());
  // Dropping the loop graphs fails at positive hbar.
  EXPECT_FALSE(qme_residual(transfer_vertex(g, gi.policy()), c).is_zero());
}

TEST(GammaInfinity, LabeledGraphsAgree) {
  {
    fx::Rng rng(5);
    auto c = fx::random_chart(1, rng, 7, 11);
    auto g = solve_fedosov(c);
    EXPECT_EQ(gamma_infinity(g, c), gamma_infinity_labeled(g, c));
  }
  {
    fx::Rng rng(6);
    auto c = fx::random_chart(2, rng, 4, 7);
    auto g = solve_fedosov(c);
    EXPECT_EQ(gamma_infinity(g, c), gamma_infinity_labeled(g, c));
  }
}

TEST(GammaInfinity, PruningDoesNotChangeResult) {
  fx::Rng rng(7);
  auto c = fx::random_chart(1, rng, 6, 10);
  auto g = solve_fedosov(c);
  TransferOptions off;
  off.prune = false;
  EXPECT_EQ(gamma_infinity(g, c), gamma_infinity(g, c, off));
}

TEST(GammaInfinity, ExactnessStableUnderRaisingWeight) {
  fx::Rng r1(8), r2(8);
  auto c = fx::random_chart(1, r1, 6, 12);
  auto c2 = fx::random_chart(1, r2, 8, 12);
  auto gi = gamma_infinity(solve_fedosov(c), c);
  auto gi2 = gamma_infinity(solve_fedosov(c2), c2);
  const int xd = exact_x_degree(gi.policy());
  EXPECT_EQ(gi2.with_policy(gi.policy()).truncated_x(xd), gi.truncated_x(xd));
}

TEST(LocalToGlobal, UnitMapsToUnit) {
  fx::Rng rng(9);
  auto c = fx::random_chart(1, rng, 6, 10);
  auto g = solve_fedosov(c);
  auto one = local_to_global(constant(c.weyl_zero(), Rational(1)), g, c);
  EXPECT_EQ(one, constant(one, Rational(1)));
}

TEST(LocalToGlobal, FlatChartIsIdentity) {
  fx::Rng rng(10);
  auto c = flat(1, 6, 6);
  auto g = solve_fedosov(c);
  for (int t = 0; t < 5; ++t) {
    auto o = random_observable(c, rng, t % 2);
    auto x = local_to_global(o, g, c);
    EXPECT_EQ(x, to_bv(o, x.policy()));
  }
}

TEST(LocalToGlobal, CochainMapFlat) {
  fx::Rng rng(11);
  auto c = flat(1, 6, 6);
  auto g = solve_fedosov(c);
  auto gi = gamma_infinity(g, c);
  for (int t = 0; t < 10; ++t) EXPECT_TRUE(cochain_residual(random_observable(c, rng, t % 2), g, gi, c).is_zero());
}

TEST(LocalToGlobal, CochainMapCurved) {
  fx::Rng rng(12);
  auto c = fx::random_chart(1, rng, 6, 10);
  auto g = solve_fedosov(c);
  auto gi = gamma_infinity(g, c);
  bool detected = false;
  for (int t = 0; t < 10; ++t) {
    auto o = random_observable(c, rng, t % 2);
    EXPECT_TRUE(cochain_residual(o, g, gi, c).is_zero()) << "observable " << t;
    detected = detected || !cochain_residual(o, g, gi * Rational(2), c).is_zero();
  }
  EXPECT_TRUE(detected);
}

TEST(Wheel, MatchesZetaTimesTrace) {
  fx::Rng rng(13);
  for (int n : {1, 2}) {
    const int d = 2 * n;
    auto c = flat_chart<JetPoly>(n, JetContext{d, 0}, TruncationPolicy::make(12, 0));
    const auto A = random_symmetric(d, rng);
    Wf a = c.weyl_zero();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a += monomial(a, TermKey{mono_unit(i) + mono_unit(j), 0, 0, 0, 0}, A[i * d + j] / 2);
    // Pi A with Pi = omega^{ij}.
    std::vector<Rational> pa(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) pa[i * d + j] += c.omega.upper(i, k).constant_term() * A[k * d + j];
    std::vector<Rational> pw = pa;  // (Pi A)^{m-1} before the multiply
    const auto kernel = omega_kernel(c.omega);
    for (int m = 2; m <= 6; ++m) {
      std::vector<Rational> next(d * d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) next[i * d + j] += pw[i * d + k] * pa[k * d + j];
      pw = next;
      Rational tr(0);
      for (int i = 0; i < d; ++i) tr += pw[i * d + i];
      const Rational expected = wheel_zeta(m) * tr / Rational(2 * m);
      EXPECT_EQ(wheel_term(m, a, kernel), monomial(a, TermKey{0, 1, 0, 0, 0}, expected)) << "m=" << m;
    }
  }
}
