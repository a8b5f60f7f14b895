#pragma once

#include "fedbv/monomial.hpp"
#include "fedbv/parallel.hpp"
#include "fedbv/rational.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedbv {

// Sawtooth P(t) = frac(t) - 1/2 on R \ Z.
inline Rational propagator(const Rational& t) {
  if (t.get_den() == 1) throw std::domain_error("propagator: t on the diagonal");
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
  return t - Rational(fl) - Rational(1, 2);
}

// Boundary values of the lift to S^1[2]: t -> 0+ and t -> 1-.
inline Rational propagator_limit_from_above_zero() { return Rational(-1, 2); }
inline Rational propagator_limit_from_below_one() { return Rational(1, 2); }

// k points on the circle, edges (a, b) carrying P(theta_a - theta_b), 0-based.
struct AmplitudeSpec {
  int k = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> dtheta_vertices;  // empty means all k
};

struct Amplitude {
  Rational value;
  std::string note;  // why the value is zero by type, if it is
};

inline AmplitudeSpec wheel_spec(int k) {
  AmplitudeSpec s;
  s.k = k;
  for (int a = 0; a < k; ++a) s.edges.emplace_back(a, (a + 1) % k);
  return s;
}

namespace detail {

using CellPoly = std::map<Mono, Rational>;

inline void check_spec(const AmplitudeSpec& s) {
  if (s.k < 1 || s.k > kMaxVars) throw std::invalid_argument("amplitude: k out of range 1.." + std::to_string(kMaxVars));
  for (auto [a, b] : s.edges)
    if (a < 0 || b < 0 || a >= s.k || b >= s.k) throw std::invalid_argument("amplitude: edge endpoint out of range");
  for (int v : s.dtheta_vertices)
    if (v < 0 || v >= s.k) throw std::invalid_argument("amplitude: dtheta vertex out of range");
}

// Multiplies p by the affine form c0 + s_i - s_j.
inline CellPoly times_affine(const CellPoly& p, const Rational& c0, int i, int j) {
  CellPoly out;
  auto acc = [&out](Mono m, const Rational& c) {
    auto& v = out[m];
    v += c;
    if (v == 0) out.erase(m);
  };
  for (const auto& [m, c] : p) {
    if (c0 != 0) acc(m, c * c0);
    acc(mono_mul(m, mono_unit(i)), c);
    acc(mono_mul(m, mono_unit(j)), -c);
  }
  return out;
}

// Integral over first <= s_first < ... < s_{k-1} < 1 of p, all of whose other
// variables are absent or already integrated.
inline Rational simplex_integral(const CellPoly& p, int first, int k) {
  CellPoly cur = p;
  for (int j = first; j < k; ++j) {
    CellPoly next;
    for (const auto& [m, c] : cur) {
      const int e = mono_get(m, j) + 1;
      Mono rest = m - mono_get(m, j) * mono_unit(j);
      Mono up = j + 1 < k ? mono_mul(rest, e * mono_unit(j + 1)) : rest;
      auto& v = next[up];
      v += c / e;
    }
    cur = std::move(next);
  }
  Rational total(0);
  for (const auto& [m, c] : cur) total += c;
  return total;
}

// Sum over orderings of the free points. With fixed = r >= 0, theta_r = 0 is the
// lowest point and only the others are integrated.
inline Rational integrate_cells(const AmplitudeSpec& s, int fixed) {
  std::vector<int> free;
  for (int a = 0; a < s.k; ++a)
    if (a != fixed) free.push_back(a);
  std::vector<std::vector<int>> orders;
  std::vector<int> perm = free;
  do orders.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  const int shift = fixed >= 0 ? 1 : 0;
  auto parts = parallel_map(orders.size(), [&](std::size_t c) {
    std::vector<int> rank(s.k, 0);
    for (std::size_t r = 0; r < orders[c].size(); ++r) rank[orders[c][r]] = static_cast<int>(r) + shift;
    CellPoly p{{Mono{0}, Rational(1)}};
    for (auto [a, b] : s.edges) {
      // frac(theta_a - theta_b) - 1/2, affine on the cell.
      const Rational c0 = rank[a] < rank[b] ? Rational(1, 2) : Rational(-1, 2);
      p = times_affine(p, c0, rank[a], rank[b]);
    }
    if (fixed >= 0) std::erase_if(p, [](const auto& t) { return mono_get(t.first, 0) != 0; });
    return simplex_integral(p, shift, s.k);
  });
  Rational total(0);
  for (const auto& v : parts) total += v;
  return total;
}

}  // namespace detail

// Exact integral over the k-torus of prod_e P(theta_a - theta_b) dtheta^1...dtheta^k,
// summed over the k! ordering cells.
inline Amplitude amplitude(const AmplitudeSpec& s) {
  detail::check_spec(s);
  if (!s.dtheta_vertices.empty()) {
    std::vector<int> v = s.dtheta_vertices;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (static_cast<int>(v.size()) != s.k) return {Rational(0), "not a top form: dtheta missing at some vertex"};
  }
  for (auto [a, b] : s.edges)
    if (a == b) return {Rational(0), "tadpole edge"};
  return {detail::integrate_cells(s, -1), ""};
}

// Same integral with theta_r pinned at 0, using rotation invariance.
inline Rational amplitude_pinned(const AmplitudeSpec& s, int r) {
  detail::check_spec(s);
  if (r < 0 || r >= s.k) throw std::invalid_argument("amplitude_pinned: vertex out of range");
  for (auto [a, b] : s.edges)
    if (a == b) return Rational(0);
  return detail::integrate_cells(s, r);
}

struct MonteCarlo {
  double mean = 0;
  double stderr_ = 0;
};

inline MonteCarlo amplitude_monte_carlo(const AmplitudeSpec& s, std::size_t samples, std::uint64_t seed) {
  detail::check_spec(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> th(s.k);
  double sum = 0, sq = 0;
  for (std::size_t n = 0; n < samples; ++n) {
    for (auto& t : th) t = unif(rng);
    double v = 1;
    for (auto [a, b] : s.edges) {
      const double d = th[a] - th[b];
      v *= d - std::floor(d) - 0.5;
    }
    sum += v;
    sq += v * v;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, sq / samples - mean * mean);
  return {mean, std::sqrt(var / samples)};
}

// Bernoulli numbers B_0..B_m with B_1 = -1/2.
inline std::vector<Rational> bernoulli_numbers(int m) {
  std::vector<Rational> b(m + 1);
  b[0] = 1;
  for (int n = 1; n <= m; ++n) {
    // sum_{j=0}^{n} C(n+1, j) B_j = 0
    Rational acc(0);
    mpz_class binom = 1;
    for (int j = 0; j < n; ++j) {
      acc += Rational(binom) * b[j];
      binom = binom * (n + 1 - j) / (j + 1);
    }
    b[n] = -acc / Rational(n + 1);
  }
  return b;
}

inline Rational bernoulli(int k) { return bernoulli_numbers(k)[k]; }

// 2 zeta(k) / (2 pi i)^k = -B_k / k! for even k >= 2; zero for odd k.
inline Rational wheel_zeta(int k) {
  if (k < 2) throw std::invalid_argument("wheel_zeta: k >= 2");
  if (k % 2) return Rational(0);
  mpz_class f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return -bernoulli(k) / Rational(f);
}

struct HeatKernel {
  double image_sum = 0;
  double fourier_sum = 0;
};

// Scalar factor of K_t on R/Z via the Gaussian image sum and its Poisson dual,
// each summed until the next term is below tol.
inline HeatKernel heat_kernel(double t, double theta1, double theta2, double tol = 1e-15) {
  if (!(t > 0)) throw std::domain_error("heat_kernel: t must be positive");
  const double pi = std::acos(-1.0);
  double d = theta1 - theta2;
  d -= std::floor(d);
  HeatKernel out;
  const double norm = 1.0 / std::sqrt(4 * pi * t);
  out.image_sum = norm * std::exp(-d * d / (4 * t));
  for (int m = 1;; ++m) {
    const double a = norm * std::exp(-(d + m) * (d + m) / (4 * t));
    const double b = norm * std::exp(-(d - m) * (d - m) / (4 * t));
    out.image_sum += a + b;
    if (a + b < tol && m > 1) break;
  }
  out.fourier_sum = 1;
  for (int n = 1;; ++n) {
    const double g = std::exp(-4 * pi * pi * n * n * t);
    out.fourier_sum += 2 * g * std::cos(2 * pi * n * d);
    if (2 * g < tol) break;
  }
  return out;
}

// Heat kernel value after checking that both series agree to within tol.
inline double heat_kernel_checked(double t, double theta1, double theta2, double tol = 1e-10) {
  const HeatKernel h = heat_kernel(t, theta1, theta2);
  if (std::abs(h.image_sum - h.fourier_sum) > tol) throw std::runtime_error("heat_kernel: series disagree");
  return h.image_sum;
}

// Partial Fourier sum of the sawtooth: -sum_{n=1}^{N} sin(2 pi n d) / (pi n).
inline double sawtooth_fourier(double d, int terms) {
  const double pi = std::acos(-1.0);
  double s = 0;
  for (int n = 1; n <= terms; ++n) s -= std::sin(2 * pi * n * d) / (pi * n);
  return s;
}

namespace detail {
// d*K_t in the Fourier form: -sum_n 4 pi n sin(2 pi n d) exp(-4 pi^2 n^2 t).
inline double dstar_heat(double t, double d, double tol) {
  const double pi = std::acos(-1.0);
  double s = 0;
  for (int n = 1;; ++n) {
    const double g = std::exp(-4 * pi * pi * n * n * t);
    s -= 4 * pi * n * std::sin(2 * pi * n * d) * g;
    if (4 * pi * n * g < tol) break;
  }
  return s;
}
}  // namespace detail

// P_eps^L = int_eps^L d*K_t dt by composite Simpson in log t.
inline double effective_propagator(double eps, double L, double theta1, double theta2, int panels = 4000) {
  if (!(eps > 0) || !(L > eps)) throw std::domain_error("effective_propagator: need 0 < eps < L");
  if (panels % 2) ++panels;
  const double d = theta1 - theta2;
  const double a = std::log(eps), b = std::log(L), h = (b - a) / panels;
  auto f = [&](double s) {
    const double t = std::exp(s);
    return detail::dstar_heat(t, d, 1e-16) * t;
  };
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4 : 2);
  return sum * h / 3;
}

// Closed form of the same integral, mode by mode.
inline double effective_propagator_modes(double eps, double L, double theta1, double theta2) {
  const double pi = std::acos(-1.0);
  const double d = theta1 - theta2;
  double s = 0;
  for (int n = 1;; ++n) {
    const double w = std::exp(-4 * pi * pi * n * n * eps) - std::exp(-4 * pi * pi * n * n * L);
    s -= std::sin(2 * pi * n * d) / (pi * n) * w;
    if (w / n < 1e-17) break;
  }
  return s;
}

}  // namespace fedbv
