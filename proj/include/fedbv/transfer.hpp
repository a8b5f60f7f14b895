#pragma once

#include "fedbv/bv.hpp"
#include "fedbv/circle.hpp"
#include "fedbv/graph.hpp"

#include <set>
#include <stdexcept>

namespace fedbv {

struct TransferOptions {
  bool prune = true;      // skip graphs with a vertex of degree above its label's y-degree
  bool check_flat = true;  // reject gamma that fails Fedosov's equation
};

namespace detail {

// Circle amplitude of g with its edges oriented as stored, dtheta at every vertex.
inline Rational graph_amplitude(const Graph& g) {
  AmplitudeSpec s;
  s.k = g.num_vertices();
  s.edges = g.edges();
  return amplitude(s).value;
}

template <CoefficientRing R>
void require_flat(const WeylForm<R>& gamma, const Chart<R>& c) {
  if (!flatness_residual(gamma, c).is_zero()) throw std::invalid_argument("gamma does not solve Fedosov's equation");
}

// Policy of the transfer. Every vertex of a graph with an edge has degree at
// least two, so graph terms are exact wherever the vertex is: through W-1.
// Graph contractions differentiate the jets, which costs x-degrees.
inline TruncationPolicy transfer_policy(const TruncationPolicy& p) {
  TruncationPolicy r = residual_policy(p).with_u(0, 0);
  r.x_degree = std::max(0, p.x_degree - 4);
  return r;
}

// hbar^{b1} amplitude W_G / |Aut G|; labels by vertex kind.
template <CoefficientRing R>
BVForm<R> graph_term(const Graph& g, const std::vector<BVForm<R>>& by_kind, const std::vector<KernelEntry<R>>& kernel,
                     bool prune) {
  std::vector<BVForm<R>> labels;
  for (int k : g.kind) labels.push_back(by_kind[k]);
  const BVForm<R> zero = labels.front().zero();
  if (prune) {
    const auto deg = g.degrees();
    for (int a = 0; a < g.num_vertices(); ++a)
      if (deg[a] > max_y_degree(labels[a])) return zero;
  }
  const Rational amp = graph_amplitude(g);
  if (amp == 0) return zero;
  auto w = graph_weight(g, labels, kernel, amp);
  return w.value.shifted_hbar(g.first_betti()) * make_rational(1, automorphism_order(g));
}

// Graphs for the transfer: connected, no tadpoles, at most max_v vertices and
// first Betti number at most hbar. Vertex kinds come from `kinds`, which maps a
// graph to the list of kind assignments to include.
template <class F>
std::vector<Graph> transfer_graphs(int max_v, int hbar, F&& kinds) {
  std::set<CanonicalKey> seen;
  CensusBounds b{max_v, max_v - 1 + hbar, hbar, true};
  for (const auto& g : enumerate_graphs(b)) {
    bool zero_genus = true;
    for (int x : g.genus) zero_genus &= x == 0;
    if (!zero_genus) continue;
    for (const auto& kind : kinds(g)) {
      Graph h = g;
      h.kind = kind;
      seen.insert(canonical_key(h));
    }
  }
  std::vector<Graph> out;
  for (const auto& k : seen) out.push_back(from_canonical_key(k));
  return out;
}

}  // namespace detail

// Vertex label of the transfer: -d_TM gamma in the BV bundle. The sign comes from
// d_TM anticommuting with nabla.
template <CoefficientRing R>
BVForm<R> transfer_vertex(const WeylForm<R>& gamma, const TruncationPolicy& p) {
  // d_TM lowers weight, so apply it before cutting to p.
  TruncationPolicy wide = gamma.policy().with_u(p.u_min, p.u_max);
  return (d_tm(to_bv(gamma, wide)) * Rational(-1)).with_policy(p);
}

// gamma_inf = sum_G hbar^{b1(G)} W_G(P, -d_TM gamma) / |Aut G| over connected graphs
// without tadpoles. A vertex carries one theta, so at most dim vertices occur.
// Exact through weight W-1 of the chart's policy.
template <CoefficientRing R>
BVForm<R> gamma_infinity(const WeylForm<R>& gamma, const Chart<R>& c, const TransferOptions& opt = {}) {
  if (opt.check_flat) detail::require_flat(gamma, c);
  const TruncationPolicy p = detail::transfer_policy(c.policy);
  const BVForm<R> v = transfer_vertex(gamma, p);
  const auto kernel = omega_kernel(c.omega);
  const auto graphs = detail::transfer_graphs(c.dim(), p.hbar, [](const Graph& g) {
    return std::vector<std::vector<int>>{std::vector<int>(g.num_vertices(), 0)};
  });
  auto parts = parallel_map(graphs.size(), [&](std::size_t i) { return detail::graph_term(graphs[i], {v}, kernel, opt.prune); });
  BVForm<R> out = v;
  for (const auto& t : parts) out += t;
  return out;
}

// The same sum over labeled graphs: edge multiplicities m_ab on vertices
// 1..k, weighted by 1 / (k! prod m_ab!), edges oriented a < b.
template <CoefficientRing R>
BVForm<R> gamma_infinity_labeled(const WeylForm<R>& gamma, const Chart<R>& c) {
  const TruncationPolicy p = detail::transfer_policy(c.policy);
  const BVForm<R> v = transfer_vertex(gamma, p);
  const auto kernel = omega_kernel(c.omega);
  const int cap = max_y_degree(v);
  BVForm<R> out = v;
  for (int k = 2; k <= c.dim(); ++k) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) pairs.emplace_back(a, b);
    const int max_e = k - 1 + p.hbar;
    Rational kfact(1);
    for (int i = 2; i <= k; ++i) kfact *= i;
    std::vector<int> m(pairs.size(), 0);
    while (true) {
      const int e = std::accumulate(m.begin(), m.end(), 0);
      if (e <= max_e) {
        std::vector<std::pair<int, int>> edges;
        Rational w = Rational(1) / kfact;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          for (int r = 0; r < m[i]; ++r) edges.push_back(pairs[i]);
          for (int r = 2; r <= m[i]; ++r) w /= r;
        }
        Graph g = Graph::from_edges(k, edges);
        bool fits = g.connected() && g.first_betti() <= p.hbar;
        for (int d : g.degrees()) fits = fits && d <= cap;
        if (fits) {
          const Rational amp = detail::graph_amplitude(g);
          if (amp != 0) {
            std::vector<BVForm<R>> labels(k, v);
            out += graph_weight(g, labels, kernel, amp).value.shifted_hbar(g.first_betti()) * w;
          }
        }
      }
      std::size_t q = 0;
      while (q < m.size() && m[q] == max_e) m[q++] = 0;
      if (q == m.size()) break;
      ++m[q];
    }
  }
  return out;
}

// [O]_inf = sum over connected graphs with one vertex labelled O (kind 1) and the
// others -d_TM gamma (kind 0), hbar^{b1} W_G / |Aut G|, automorphisms fixing the
// O vertex. O sits first in the product. O = 1 gives 1.
template <CoefficientRing R>
BVForm<R> local_to_global(const BVForm<R>& o, const WeylForm<R>& gamma, const Chart<R>& c,
                          const TransferOptions& opt = {}) {
  if (opt.check_flat) detail::require_flat(gamma, c);
  const TruncationPolicy p = detail::transfer_policy(c.policy).with_u(o.policy().u_min, o.policy().u_max);
  const BVForm<R> obs = o.with_policy(p);
  const BVForm<R> v = transfer_vertex(gamma, p);
  const auto kernel = omega_kernel(c.omega);
  const auto graphs = detail::transfer_graphs(c.dim() + 1, p.hbar, [](const Graph& g) {
    std::vector<std::vector<int>> out;
    for (int r = 0; r < g.num_vertices(); ++r) {
      std::vector<int> kind(g.num_vertices(), 0);
      kind[r] = 1;
      out.push_back(kind);
    }
    return out;
  });
  auto parts = parallel_map(graphs.size(), [&](std::size_t i) {
    // Put the O vertex first so it leads the product.
    const Graph& g0 = graphs[i];
    std::vector<int> pos(g0.num_vertices());
    int next = 1;
    for (int a = 0; a < g0.num_vertices(); ++a) pos[a] = g0.kind[a] == 1 ? 0 : next++;
    std::vector<std::pair<int, int>> e;
    for (auto [a, b] : g0.edges()) e.emplace_back(pos[a], pos[b]);
    std::vector<int> kind(g0.num_vertices(), 0);
    kind[0] = 1;
    const Graph g = Graph::from_edges(g0.num_vertices(), e, {}, kind);
    return detail::graph_term(g, {v, obs}, kernel, opt.prune);
  });
  BVForm<R> out = obs;
  for (const auto& t : parts) out += t;
  return out;
}

template <CoefficientRing R>
BVForm<R> local_to_global(const WeylForm<R>& o, const WeylForm<R>& gamma, const Chart<R>& c,
                          const TransferOptions& opt = {}) {
  return local_to_global(to_bv(o, c.policy), gamma, c, opt);
}

// [nabla O + (1/hbar)[gamma, O]]_inf - (nabla + hbar Delta + {gamma_inf, -})[O]_inf,
// exact through weight W-2: the bracket with the theta dx part of gamma_inf
// lowers weight by one.
template <CoefficientRing R>
BVForm<R> cochain_residual(const WeylForm<R>& o, const WeylForm<R>& gamma, const BVForm<R>& gamma_inf,
                           const Chart<R>& c) {
  TransferOptions opt;
  opt.check_flat = false;
  const WeylForm<R> src = nabla(o, c) + hbar_commutator(gamma, o, c.omega);
  const BVForm<R> lhs = local_to_global(src, gamma, c, opt);
  const BVForm<R> x = local_to_global(o, gamma, c, opt);
  const BVForm<R> rhs = nabla(x, c) + bv_delta(x, c.omega).times(Generator::Hbar) + bv_bracket(gamma_inf, x, c.omega);
  const TruncationPolicy p = residual_policy(detail::transfer_policy(c.policy));
  return (lhs - rhs).with_policy(p).truncated_x(exact_x_degree(p));
}

// Weight of the wheel with k vertices labelled a (no hbar factors beyond b1 = 1):
// hbar W_{C_k} / |Aut C_k|, edges a -> a+1 mod k.
template <class S>
S wheel_term(int k, const S& a, const std::vector<KernelEntry<typename S::Ring>>& kernel) {
  if (k < 2) throw std::invalid_argument("wheel_term: k >= 2");
  const AmplitudeSpec spec = wheel_spec(k);
  const Graph g = Graph::from_edges(k, spec.edges);
  auto w = graph_weight(g, std::vector<S>(k, a), kernel, amplitude(spec).value);
  return w.value.shifted_hbar(1) * make_rational(1, automorphism_order(g));
}

}  // namespace fedbv
