#include "fedbv/fedosov.hpp"
#include "charts.hpp"

#include <gtest/gtest.h>

using namespace fedbv;
namespace fx = fedbv::fixtures;

namespace {

using W = WeylForm<JetPoly>;

TermKey ykey(std::initializer_list<int> y, unsigned dx = 0, int h = 0) {
  TermKey k;
  for (int i : y) k.y += mono_unit(i);
  k.dx = static_cast<OddMask>(dx);
  k.h = static_cast<std::int16_t>(h);
  return k;
}

// Gamma~ = 1/2 Gamma_{ijk} y^i y^j dx^k.
W gamma_tilde(const Chart<JetPoly>& c) {
  W out = c.weyl_zero();
  const int d = c.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        out.add(ykey({i, j}, 1u << k), c.gamma_lower(i, j, k) * Rational(1, 2));
  return out;
}

W de_rham(const W& a) {
  W out = a.zero();
  for (int k = 0; k < a.dim(); ++k) out += a.derive_x(k).times(Generator::Dx, k);
  return out;
}

// 1/8 R_{ijkl} y^i y^j y^k dx^l, summed over all indices.
W weight_three_expected(const Chart<JetPoly>& c, const CurvatureTensor<JetPoly>& t) {
  W out = c.weyl_zero();
  const int d = c.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) out.add(ykey({i, j, k}, 1u << l), t.at(i, j, k, l) * Rational(1, 8));
  return out;
}

}  // namespace

TEST(Chart, Validation) {
  fx::Rng rng(1);
  JetContext ctx{2, 4};
  auto flat = flat_chart<JetPoly>(1, ctx, TruncationPolicy::make(4, 4));
  EXPECT_TRUE(validate_chart(flat).ok);
  auto c = fx::random_chart(2, rng, 4, 6);
  EXPECT_TRUE(validate_chart(c).ok);
  auto gamma = c.gamma;
  gamma[0 * 16 + 1 * 4 + 2] += JetPoly::constant(c.ctx, 1);
  std::vector<JetPoly> lower;
  for (const auto& v : standard_omega(4)) lower.push_back(JetPoly::constant(c.ctx, v));
  auto bad = Chart<JetPoly>::build(2, c.ctx, lower, gamma, {}, c.policy);
  auto diag = validate_chart(bad);
  EXPECT_FALSE(diag.ok);
  EXPECT_NE(diag.issues.front().find("not symmetric"), std::string::npos);
  EXPECT_THROW(curvature(bad), std::invalid_argument);
}

TEST(Chart, NonConstantOmegaWithSymmetricGammaIsFlagged) {
  JetContext ctx{2, 4};
  std::vector<JetPoly> lower(4, JetPoly(ctx));
  lower[1] = JetPoly::constant(ctx, 1) + JetPoly::variable(ctx, 0);
  lower[2] = -lower[1];
  auto c = Chart<JetPoly>::build(1, ctx, lower, {}, {}, TruncationPolicy::make(4, 4));
  EXPECT_FALSE(validate_chart(c).ok);
}

TEST(Curvature, FlatChartHasZeroCurvature) {
  auto c = flat_chart<JetPoly>(2, JetContext{4, 4}, TruncationPolicy::make(4, 4));
  EXPECT_TRUE(curvature(c).second.is_zero());
}

TEST(Curvature, MatchesConnectionFormOracle) {
  fx::Rng rng(2);
  std::vector<Chart<JetPoly>> charts;
  {
    JetContext ctx{2, 6};
    std::vector<JetPoly> lower;
    for (const auto& v : standard_omega(2)) lower.push_back(JetPoly::constant(ctx, v));
    std::vector<JetPoly> gamma(8, JetPoly(ctx));
    gamma[0] = JetPoly::variable(ctx, 1);
    charts.push_back(Chart<JetPoly>::build(1, ctx, lower, gamma, {}, TruncationPolicy::make(6, 6)));
  }
  for (int t = 0; t < 3; ++t) charts.push_back(fx::random_chart(1 + t % 2, rng, 6, 6));
  for (const auto& c : charts) {
    auto [tensor, rn] = curvature(c);
    W gt = gamma_tilde(c);
    W oracle = de_rham(gt) + hbar_commutator(gt, gt, c.omega) * Rational(1, 2);
    EXPECT_EQ(rn.truncated_x(4), oracle.truncated_x(4));
    const int d = c.dim();
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        JetPoly trace(c.ctx);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            trace += c.omega.upper(i, j) * tensor.at(i, j, k, l);
            EXPECT_EQ(tensor.at(i, j, k, l), tensor.at(j, i, k, l));
            EXPECT_EQ(tensor.at(i, j, k, l), -tensor.at(i, j, l, k));
          }
        EXPECT_TRUE(trace.is_zero());
      }
  }
}

TEST(Nabla, SquareIsCurvatureCommutator) {
  fx::Rng rng(3);
  for (int n : {1, 2}) {
    auto c = fx::random_chart(n, rng, 6, 6);
    auto rn = curvature(c).second;
    for (int t = 0; t < 4; ++t) {
      auto a = fx::random_section(c.weyl_zero(), rng, 5, {4, 1, 1}, 2);
      EXPECT_EQ(nabla(nabla(a, c), c).truncated_x(3), hbar_commutator(rn, a, c.omega).truncated_x(3));
    }
  }
}

TEST(Nabla, LeibnizAndFlatPairing) {
  fx::Rng rng(4);
  auto flat = flat_chart<JetPoly>(2, JetContext{4, 4}, TruncationPolicy::make(6, 4));
  EXPECT_TRUE(nabla(omega_one_form(flat), flat).is_zero());
  auto c = fx::random_chart(2, rng, 6, 6);
  EXPECT_TRUE(nabla(omega_one_form(c), c).is_zero());
  for (int t = 0; t < 5; ++t) {
    for (int pa = 0; pa < 2; ++pa) {
      auto a = fx::homogeneous_parity(fx::random_section(c.weyl_zero(), rng, 4, {3, 1, 1}, 2), pa);
      auto b = fx::random_section(c.weyl_zero(), rng, 4, {3, 1, 1}, 2);
      const Rational s(pa ? -1 : 1);
      EXPECT_EQ(nabla(moyal(a, b, c.omega), c).truncated_x(4),
                (moyal(nabla(a, c), b, c.omega) + s * moyal(a, nabla(b, c), c.omega)).truncated_x(4));
    }
  }
}

TEST(Fedosov, FlatChartGivesCanonicalOneForm) {
  auto c = flat_chart<JetPoly>(2, JetContext{4, 4}, TruncationPolicy::make(6, 4));
  auto gamma = solve_fedosov(c);
  EXPECT_EQ(gamma, omega_one_form(c));
  EXPECT_TRUE(flatness_residual(gamma, c).is_zero());
}

TEST(Fedosov, IdentifiesOmegaPairingWithMinusDelta) {
  fx::Rng rng(5);
  auto c = flat_chart<JetPoly>(2, JetContext{4, 4}, TruncationPolicy::make(6, 4));
  auto A = omega_one_form(c);
  for (int t = 0; t < 5; ++t) {
    auto a = fx::random_section(c.weyl_zero(), rng, 6, {4, 1, 2});
    EXPECT_EQ(hbar_commutator(A, a, c.omega), -delta(a));
  }
}

TEST(Fedosov, WeightThreeTermAndFlatness) {
  fx::Rng rng(6);
  for (int t = 0; t < 3; ++t) {
    const int n = 1 + t % 2;
    auto c = fx::random_chart(n, rng, 6, 8);
    auto gamma = solve_fedosov(c);
    auto r = fedosov_r(gamma, c);
    auto w3 = r.filtered([](const TermKey& k) { return k.h == 0 && weight(k) == 3; });
    auto [tensor, rn] = curvature(c);
    const int cap = exact_x_degree(c.policy);
    EXPECT_EQ(w3.truncated_x(cap), weight_three_expected(c, tensor).truncated_x(cap));
    EXPECT_TRUE(flatness_residual(gamma, c).is_zero());
    EXPECT_TRUE(delta_inv(r).is_zero());
    for (const auto& [k, v] : r.terms()) EXPECT_GE(weight(k), 3);
  }
}

TEST(Fedosov, ResidualDetectsMissingCorrection) {
  fx::Rng rng(7);
  auto c = fx::random_chart(1, rng, 5, 7);
  EXPECT_FALSE(flatness_residual(omega_one_form(c), c).is_zero());
}

TEST(Fedosov, ResidualIsLinearInPerturbation) {
  // gamma + eps xi with eps^2 = 0: residual(gamma + eps xi) = eps (D xi) to first order.
  fx::Rng rng(8);
  auto c = fx::random_chart(1, rng, 5, 9);
  auto gamma = solve_fedosov(c);
  auto xi = fx::random_section(c.weyl_zero(), rng, 3, {2, 0, 1}, 1)
                .filtered([](const TermKey& k) { return form_degree(k) == 1; });
  for (int s : {1, 2}) {
    auto res = flatness_residual(gamma + Rational(s) * xi, c);
    auto lin = (fedosov_d(xi, gamma, c) * Rational(s) + hbar_commutator(xi, xi, c.omega) * make_rational(s * s, 2))
                   .with_policy(residual_policy(c.policy))
                   .truncated_x(exact_x_degree(c.policy));
    EXPECT_EQ(res, lin);
  }
}

TEST(Fedosov, OmegaCorrectionsAreAbsorbed) {
  fx::Rng rng(9);
  JetContext ctx{4, 8};
  std::vector<std::vector<JetPoly>> ok{fx::scaled_standard(ctx, 4, Rational(1, 3))};
  auto c = fx::random_chart(2, rng, 6, 8, 2, ok);
  auto gamma = solve_fedosov(c);
  EXPECT_TRUE(flatness_residual(gamma, c).is_zero());
}

TEST(Fedosov, GaugeFixesTheSolution) {
  fx::Rng rng(10);
  auto c = fx::random_chart(1, rng, 6, 8);
  auto gamma = solve_fedosov(c);
  auto seed = fx::random_section(c.weyl_zero(), rng, 6, {5, 1, 1}, 1)
                  .filtered([](const TermKey& k) { return form_degree(k) == 1 && weight(k) >= 3; });
  EXPECT_EQ(solve_fedosov(c, {}, &seed), gamma);
}

TEST(FlatSection, FlatChartIsTaylorSeries) {
  JetContext ctx{2, 5};
  auto c = flat_chart<JetPoly>(1, ctx, TruncationPolicy::make(5, 5));
  auto gamma = solve_fedosov(c);
  auto one = function_section(c, JetPoly::constant(ctx, 1));
  EXPECT_EQ(flat_section(one, gamma, c), one);
  fx::Rng rng(11);
  auto f = fx::random_jet(ctx, rng, 4, 3);
  auto a = flat_section(function_section(c, f), gamma, c);
  W expected = c.weyl_zero();
  // sum_alpha d^alpha f y^alpha / alpha!
  for (int p = 0; p <= 5; ++p)
    for (int q = 0; p + q <= 5; ++q) {
      JetPoly g = f;
      for (int i = 0; i < p; ++i) g = g.derivative(0);
      for (int i = 0; i < q; ++i) g = g.derivative(1);
      TermKey k;
      k.y = mono_unit(0, p) + mono_unit(1, q);
      expected.add(k, g * (Rational(1) / (factorial(p) * factorial(q))));
    }
  EXPECT_EQ(a, expected);
  EXPECT_EQ(symbol(a), function_section(c, f));
}

TEST(FlatSection, CurvedChartIsFlat) {
  fx::Rng rng(12);
  auto c = fx::random_chart(2, rng, 5, 8);
  auto gamma = solve_fedosov(c);
  for (int t = 0; t < 3; ++t) {
    auto f = function_section(c, fx::random_jet(c.ctx, rng, 3, 2));
    auto a = flat_section(f, gamma, c);
    EXPECT_EQ(symbol(a), f);
    auto res = fedosov_d(a, gamma, c).with_policy(residual_policy(c.policy)).truncated_x(exact_x_degree(c.policy));
    EXPECT_TRUE(res.is_zero());
    // D^2 = 0 on a random section
    auto b = fx::random_section(c.weyl_zero(), rng, 4, {3, 1, 1}, 1);
    auto dd = fedosov_d(fedosov_d(b, gamma, c), gamma, c);
    TruncationPolicy p2 = residual_policy(residual_policy(c.policy));
    EXPECT_TRUE(dd.with_policy(p2).truncated_x(exact_x_degree(c.policy) - 1).is_zero());
  }
  W delta_image = delta(fx::random_section(c.weyl_zero(), rng, 4, {3, 1, 1}));
  EXPECT_TRUE(symbol(delta_image).is_zero());
}

TEST(Star, FlatChartCommutator) {
  JetContext ctx{2, 4};
  auto c = flat_chart<JetPoly>(1, ctx, TruncationPolicy::make(4, 4));
  auto gamma = solve_fedosov(c);
  auto x1 = function_section(c, JetPoly::variable(ctx, 0));
  auto x2 = function_section(c, JetPoly::variable(ctx, 1));
  auto one = function_section(c, JetPoly::constant(ctx, 1));
  EXPECT_EQ(star(x1, one, gamma, c), x1);
  EXPECT_EQ(star(x1, x2, gamma, c) - star(x2, x1, gamma, c), function_section(c, c.omega.upper(0, 1), 1));
}

TEST(Star, CurvedAssociativityAndPoissonLimit) {
  fx::Rng rng(13);
  auto c = fx::random_chart(1, rng, 4, 10);
  auto gamma = solve_fedosov(c);
  const int cap = 2;
  for (int t = 0; t < 3; ++t) {
    auto f = function_section(c, fx::random_jet(c.ctx, rng, 2, 2));
    auto g = function_section(c, fx::random_jet(c.ctx, rng, 2, 2));
    auto h = function_section(c, fx::random_jet(c.ctx, rng, 2, 2));
    auto lhs = star(star(f, g, gamma, c), h, gamma, c);
    auto rhs = star(f, star(g, h, gamma, c), gamma, c);
    EXPECT_EQ(lhs.truncated_x(cap), rhs.truncated_x(cap));
    auto comm = star(f, g, gamma, c) - star(g, f, gamma, c);
    JetPoly pb(c.ctx);
    const JetPoly& F = f.terms().begin()->second;
    const JetPoly& G = g.terms().begin()->second;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) pb += c.omega.upper(i, j) * F.derivative(i) * G.derivative(j);
    auto order1 = comm.filtered([](const TermKey& k) { return k.h <= 1; });
    EXPECT_EQ(order1.truncated_x(cap), function_section(c, pb, 1).truncated_x(cap));
    EXPECT_EQ(star(f, function_section(c, JetPoly::constant(c.ctx, 1)), gamma, c), f);
  }
}
