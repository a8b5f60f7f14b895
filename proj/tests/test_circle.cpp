#include "fedbv/circle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fedbv;

TEST(Propagator, ClosedForm) {
  EXPECT_EQ(propagator(Rational(1, 2)), Rational(0));
  EXPECT_EQ(propagator(Rational(1, 4)), Rational(-1, 4));
  EXPECT_EQ(propagator(Rational(-3, 4)), Rational(-1, 4));
  EXPECT_EQ(propagator(Rational(7, 3)), Rational(-1, 6));
  EXPECT_EQ(propagator_limit_from_above_zero(), Rational(-1, 2));
  EXPECT_EQ(propagator_limit_from_below_one(), Rational(1, 2));
  EXPECT_EQ(propagator(Rational(1, 1000)), Rational(-1, 2) + Rational(1, 1000));
  EXPECT_THROW(propagator(Rational(2)), std::domain_error);
  for (int q = 2; q < 12; ++q)
    for (int p = 1; p < q; ++p) {
      Rational t = make_rational(p, q);
      EXPECT_EQ(propagator(t), -propagator(Rational(1) - t));
    }
}

TEST(Amplitude, SmallExamples) {
  AmplitudeSpec one{2, {{0, 1}}, {}};
  EXPECT_EQ(amplitude(one).value, Rational(0));
  AmplitudeSpec two{2, {{0, 1}, {1, 0}}, {}};
  EXPECT_EQ(amplitude(two).value, Rational(-1, 12));
  EXPECT_EQ(amplitude(wheel_spec(3)).value, Rational(0));
  AmplitudeSpec empty{1, {}, {}};
  EXPECT_EQ(amplitude(empty).value, Rational(1));
  // int (t - 1/2)^2 dt over one ordering pair, both orientations.
  AmplitudeSpec same{2, {{0, 1}, {0, 1}}, {}};
  EXPECT_EQ(amplitude(same).value, Rational(1, 12));
}

TEST(Amplitude, WheelsMatchZetaValues) {
  for (int k = 2; k <= 6; ++k) EXPECT_EQ(amplitude(wheel_spec(k)).value, wheel_zeta(k)) << "k = " << k;
  EXPECT_EQ(wheel_zeta(2), Rational(-1, 12));
  EXPECT_EQ(wheel_zeta(4), Rational(1, 720));
  EXPECT_EQ(wheel_zeta(6), Rational(-1, 30240));
  EXPECT_EQ(wheel_zeta(5), Rational(0));
}

TEST(Amplitude, TypeAndTadpoleRules) {
  AmplitudeSpec partial{3, {{0, 1}, {1, 2}}, {0, 2}};
  auto a = amplitude(partial);
  EXPECT_EQ(a.value, Rational(0));
  EXPECT_FALSE(a.note.empty());
  AmplitudeSpec tad{2, {{0, 1}, {1, 1}}, {}};
  auto t = amplitude(tad);
  EXPECT_EQ(t.value, Rational(0));
  EXPECT_EQ(t.note, "tadpole edge");
  EXPECT_THROW(amplitude(AmplitudeSpec{2, {{0, 2}}, {}}), std::invalid_argument);
}

TEST(Amplitude, RotationInvariance) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = 2 + trial % 3;
    AmplitudeSpec s{k, {}, {}};
    std::uniform_int_distribution<int> v(0, k - 1);
    for (int e = 0; e < 4; ++e) {
      int a = v(rng), b = v(rng);
      if (a != b) s.edges.emplace_back(a, b);
    }
    const Rational full = amplitude(s).value;
    for (int r = 0; r < k; ++r) EXPECT_EQ(amplitude_pinned(s, r), full);
  }
}

TEST(Amplitude, MonteCarloAgreement) {
  std::vector<AmplitudeSpec> specs{
      {3, {{0, 1}, {1, 2}, {0, 2}, {0, 1}}, {}},
      {4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}}, {}},
      {3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}, {}},
  };
  std::uint64_t seed = 7;
  for (const auto& s : specs) {
    const double exact = amplitude(s).value.get_d();
    const auto mc = amplitude_monte_carlo(s, 1000000, seed++);
    EXPECT_LE(std::abs(mc.mean - exact), 3 * mc.stderr_ + 1e-12) << exact << " vs " << mc.mean;
  }
}

TEST(Bernoulli, KnownValues) {
  auto b = bernoulli_numbers(10);
  EXPECT_EQ(b[1], Rational(-1, 2));
  EXPECT_EQ(b[2], Rational(1, 6));
  EXPECT_EQ(b[4], Rational(-1, 30));
  EXPECT_EQ(b[6], Rational(1, 42));
  EXPECT_EQ(b[8], Rational(-1, 30));
  EXPECT_EQ(b[10], Rational(5, 66));
  for (int k = 3; k <= 9; k += 2) EXPECT_EQ(b[k], Rational(0));
}

TEST(Bernoulli, ZetaIdentityNumerically) {
  // 2 zeta(k) / (2 pi)^k (-1)^{k/2} against a direct zeta sum.
  const double pi = std::acos(-1.0);
  for (int k : {2, 4, 6, 8}) {
    double z = 0;
    const int N = 200000;
    for (int n = 1; n < N; ++n) z += std::pow(n, -k);
    z += std::pow(N, 1 - k) / (k - 1) + 0.5 * std::pow(N, -k);  // tail
    const double expect = 2 * z / std::pow(2 * pi, k) * ((k / 2) % 2 ? -1 : 1);
    EXPECT_NEAR(wheel_zeta(k).get_d(), expect, 1e-9);
  }
}

TEST(HeatKernel, SeriesAgree) {
  for (double t : {0.01, 0.03, 0.1, 0.3, 1.0})
    for (double d : {0.0, 0.1, 0.25, 0.5, 0.77}) {
      auto h = heat_kernel(t, d, 0.0);
      EXPECT_NEAR(h.image_sum, h.fourier_sum, 1e-10) << t << " " << d;
      EXPECT_NEAR(heat_kernel(t, 0.0, d).image_sum, h.image_sum, 1e-12);
    }
  EXPECT_NO_THROW(heat_kernel_checked(0.1, 0.3, 0.3));
}

TEST(HeatKernel, UnitMass) {
  for (double t : {0.01, 0.1, 1.0}) {
    const int n = 2000;
    double s = 0;
    for (int i = 0; i < n; ++i) s += heat_kernel(t, 0.3, (i + 0.5) / n).image_sum;
    EXPECT_NEAR(s / n, 1.0, 1e-9);
  }
}

TEST(EffectivePropagator, ConvergesToSawtooth) {
  const double p = effective_propagator(1e-4, 1e3, 0.25, 0.0);
  EXPECT_NEAR(p, -0.25, 1e-3);
  EXPECT_NEAR(p, effective_propagator_modes(1e-4, 1e3, 0.25, 0.0), 1e-8);
  EXPECT_NEAR(effective_propagator(1e-3, 10, 0.6, 0.1), -effective_propagator(1e-3, 10, 0.1, 0.6), 1e-12);
  EXPECT_NEAR(effective_propagator(0.01, 1, 0.4, 0.0), effective_propagator_modes(0.01, 1, 0.4, 0.0), 1e-8);
}

TEST(EffectivePropagator, FourierPartialSum) {
  for (double d = 0.05; d <= 0.95 + 1e-12; d += 0.01)
    EXPECT_NEAR(sawtooth_fourier(d, 10000), d - 0.5, 1e-3) << d;
}
