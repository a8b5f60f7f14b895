#pragma once

#include "fedbv/parallel.hpp"
#include "fedbv/section.hpp"
#include "fedbv/weyl_ops.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace fedbv {

// Half-edge graph: attach maps half-edges to vertices, sigma is an involution
// whose 2-orbits are edges and whose fixed points are tails.
struct Graph {
  std::vector<int> genus;   // g(v)
  std::vector<int> kind;    // vertex decoration class, preserved by automorphisms
  std::vector<int> attach;  // pi
  std::vector<int> sigma;

  int num_vertices() const { return static_cast<int>(genus.size()); }
  int num_half_edges() const { return static_cast<int>(attach.size()); }

  // Edge e joins half-edges 2e and 2e+1, oriented first -> second.
  static Graph from_edges(int v, const std::vector<std::pair<int, int>>& edges, std::vector<int> genus = {},
                          std::vector<int> kind = {}) {
    Graph g;
    g.genus = genus.empty() ? std::vector<int>(v, 0) : std::move(genus);
    g.kind = kind.empty() ? std::vector<int>(v, 0) : std::move(kind);
    if (static_cast<int>(g.genus.size()) != v || static_cast<int>(g.kind.size()) != v)
      throw std::invalid_argument("graph: label count differs from vertex count");
    for (auto [a, b] : edges) {
      if (a < 0 || b < 0 || a >= v || b >= v) throw std::invalid_argument("graph: edge endpoint out of range");
      const int h = g.num_half_edges();
      g.attach.push_back(a);
      g.attach.push_back(b);
      g.sigma.push_back(h + 1);
      g.sigma.push_back(h);
    }
    g.validate();
    return g;
  }

  // Adds a tail (sigma fixed point) at vertex v.
  void add_tail(int v) {
    const int h = num_half_edges();
    attach.push_back(v);
    sigma.push_back(h);
    validate();
  }

  void validate() const {
    if (attach.size() != sigma.size()) throw std::invalid_argument("graph: attach/sigma size mismatch");
    for (int h = 0; h < num_half_edges(); ++h) {
      if (sigma[h] < 0 || sigma[h] >= num_half_edges() || sigma[sigma[h]] != h)
        throw std::invalid_argument("graph: sigma is not an involution");
      if (attach[h] < 0 || attach[h] >= num_vertices()) throw std::invalid_argument("graph: attach out of range");
    }
    for (int g : genus)
      if (g < 0) throw std::invalid_argument("graph: negative vertex genus");
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int h = 0; h < num_half_edges(); ++h)
      if (h < sigma[h]) out.emplace_back(attach[h], attach[sigma[h]]);
    return out;
  }
  int num_edges() const { return static_cast<int>(edges().size()); }

  std::vector<int> tails() const {
    std::vector<int> t(num_vertices(), 0);
    for (int h = 0; h < num_half_edges(); ++h)
      if (sigma[h] == h) ++t[attach[h]];
    return t;
  }

  // Edge ends at each vertex; a self-loop counts twice, tails are not counted.
  std::vector<int> degrees() const {
    std::vector<int> d(num_vertices(), 0);
    for (auto [a, b] : edges()) {
      ++d[a];
      ++d[b];
    }
    return d;
  }

  bool has_tadpole() const {
    for (auto [a, b] : edges())
      if (a == b) return true;
    return false;
  }

  int components() const {
    std::vector<int> parent(num_vertices());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    int c = num_vertices();
    for (auto [a, b] : edges()) {
      const int ra = find(a), rb = find(b);
      if (ra != rb) {
        parent[ra] = rb;
        --c;
      }
    }
    return c;
  }
  bool connected() const { return num_vertices() > 0 && components() == 1; }

  int first_betti() const { return num_edges() - num_vertices() + components(); }
};

// b1(|G|) + sum_v g(v).
inline int genus(const Graph& g) { return g.first_betti() + std::accumulate(g.genus.begin(), g.genus.end(), 0); }

using CanonicalKey = std::vector<int>;

namespace detail {

inline CanonicalKey relabeled_key(const Graph& g, const std::vector<int>& pos, const std::vector<int>& tails) {
  const int v = g.num_vertices();
  CanonicalKey key{v};
  std::vector<int> order(v);
  for (int a = 0; a < v; ++a) order[pos[a]] = a;
  for (int a : order) {
    key.push_back(g.genus[a]);
    key.push_back(g.kind[a]);
    key.push_back(tails[a]);
  }
  std::vector<std::pair<int, int>> e;
  for (auto [a, b] : g.edges()) e.emplace_back(std::min(pos[a], pos[b]), std::max(pos[a], pos[b]));
  std::sort(e.begin(), e.end());
  for (auto [a, b] : e) {
    key.push_back(a);
    key.push_back(b);
  }
  return key;
}

// Calls f(pos) for each vertex relabeling that keeps the (genus, kind, tails,
// degree) profile sorted; every isomorphism class representative is among them.
template <class F>
void for_each_profile_order(const Graph& g, F&& f) {
  const int v = g.num_vertices();
  const auto tails = g.tails();
  const auto deg = g.degrees();
  std::vector<std::tuple<int, int, int, int>> prof(v);
  for (int a = 0; a < v; ++a) prof[a] = {g.genus[a], g.kind[a], tails[a], deg[a]};
  std::vector<int> order(v);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return prof[a] < prof[b]; });
  // Permute within blocks of equal profile only.
  std::vector<std::pair<int, int>> blocks;
  for (int s = 0; s < v;) {
    int e = s + 1;
    while (e < v && prof[order[e]] == prof[order[s]]) ++e;
    blocks.emplace_back(s, e);
    s = e;
  }
  std::vector<int> pos(v);
  auto rec = [&](auto&& self, std::size_t b) -> void {
    if (b == blocks.size()) {
      for (int r = 0; r < v; ++r) pos[order[r]] = r;
      f(pos, tails);
      return;
    }
    auto [s, e] = blocks[b];
    std::sort(order.begin() + s, order.begin() + e);
    do self(self, b + 1);
    while (std::next_permutation(order.begin() + s, order.begin() + e));
  };
  rec(rec, 0);
}

}  // namespace detail

// Lexicographically least relabeled signature; equal exactly for isomorphic graphs.
inline CanonicalKey canonical_key(const Graph& g) {
  CanonicalKey best;
  detail::for_each_profile_order(g, [&](const std::vector<int>& pos, const std::vector<int>& tails) {
    CanonicalKey k = detail::relabeled_key(g, pos, tails);
    if (best.empty() || k < best) best = std::move(k);
  });
  return best;
}

// Graph rebuilt from its canonical key, edges oriented low -> high.
inline Graph from_canonical_key(const CanonicalKey& key) {
  const int v = key.at(0);
  std::vector<int> genus(v), kind(v), tails(v);
  for (int a = 0; a < v; ++a) {
    genus[a] = key[1 + 3 * a];
    kind[a] = key[2 + 3 * a];
    tails[a] = key[3 + 3 * a];
  }
  std::vector<std::pair<int, int>> e;
  for (std::size_t i = 1 + 3 * v; i + 1 < key.size(); i += 2) e.emplace_back(key[i], key[i + 1]);
  Graph g = Graph::from_edges(v, e, genus, kind);
  for (int a = 0; a < v; ++a)
    for (int t = 0; t < tails[a]; ++t) g.add_tail(a);
  return g;
}

inline Graph canonical_form(const Graph& g) { return from_canonical_key(canonical_key(g)); }

// |Aut(G)| on vertices and half-edges: label-preserving vertex permutations that
// fix the edge multiset, times m! for each m-fold edge, 2^m for m-fold loops and
// t! for t tails at a vertex.
inline long long automorphism_order(const Graph& g) {
  const CanonicalKey self = canonical_key(g);
  long long vertex_perms = 0;
  // Relabelings onto the canonical key form a coset of the vertex automorphism group.
  detail::for_each_profile_order(g, [&](const std::vector<int>& pos, const std::vector<int>& tails) {
    if (detail::relabeled_key(g, pos, tails) == self) ++vertex_perms;
  });
  std::map<std::pair<int, int>, int> mult;
  for (auto [a, b] : g.edges()) ++mult[{std::min(a, b), std::max(a, b)}];
  auto fact = [](int m) {
    long long f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  long long out = vertex_perms;
  for (const auto& [e, m] : mult) {
    out *= fact(m);
    if (e.first == e.second) out <<= m;
  }
  for (int t : g.tails()) out *= fact(t);
  return out;
}

struct CensusBounds {
  int max_vertices = 2;
  int max_edges = 1;
  int max_genus = 0;
  bool forbid_tadpoles = true;
};

// Connected graphs with at least one edge, no tails, genus(G) <= max_genus,
// one per isomorphism class, in canonical key order.
inline std::vector<Graph> enumerate_graphs(const CensusBounds& b) {
  std::set<CanonicalKey> seen;
  for (int v = 1; v <= b.max_vertices; ++v) {
    std::vector<std::pair<int, int>> pairs;
    for (int x = 0; x < v; ++x)
      for (int y = x; y < v; ++y)
        if (x != y || !b.forbid_tadpoles) pairs.emplace_back(x, y);
    if (pairs.empty()) continue;
    for (int e = std::max(1, v - 1); e <= b.max_edges; ++e) {
      const int b1 = e - v + 1;
      if (b1 > b.max_genus) break;
      // Multisets of e pairs as nondecreasing index sequences.
      std::vector<int> idx(e, 0);
      while (true) {
        std::vector<std::pair<int, int>> edges;
        for (int i : idx) edges.push_back(pairs[i]);
        Graph g = Graph::from_edges(v, edges);
        if (g.connected()) {
          // Vertex genus labels with sum <= max_genus - b1.
          std::vector<int> lab(v, 0);
          auto rec = [&](auto&& self, int a, int left) -> void {
            if (a == v) {
              Graph h = g;
              h.genus = lab;
              seen.insert(canonical_key(h));
              return;
            }
            for (int x = 0; x <= left; ++x) {
              lab[a] = x;
              self(self, a + 1, left - x);
            }
            lab[a] = 0;
          };
          rec(rec, 0, b.max_genus - b1);
        }
        int p = e - 1;
        while (p >= 0 && idx[p] == static_cast<int>(pairs.size()) - 1) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < e; ++q) idx[q] = idx[p];
      }
    }
  }
  std::vector<Graph> out;
  for (const auto& k : seen) out.push_back(from_canonical_key(k));
  return out;
}

// One line per graph: "V E genus |Aut| : g(v)... : a-b ...".
inline std::string census_text(const std::vector<Graph>& graphs) {
  std::ostringstream os;
  os << "# vertices edges genus aut : vertex genus : edges\n";
  for (const auto& g : graphs) {
    os << g.num_vertices() << ' ' << g.num_edges() << ' ' << genus(g) << ' ' << automorphism_order(g) << " :";
    for (int x : g.genus) os << ' ' << x;
    os << " :";
    for (auto [a, b] : g.edges()) os << ' ' << a << '-' << b;
    os << '\n';
  }
  return os.str();
}

// Nonzero entries K^{ij} of an edge kernel acting as K^{ij} d/dy^i (x) d/dy^j.
template <class R>
struct KernelEntry {
  int i = 0, j = 0;
  R value;
};

template <CoefficientRing R>
std::vector<KernelEntry<R>> omega_kernel(const SymplecticData<R>& s) {
  std::vector<KernelEntry<R>> k;
  for (int i = 0; i < s.dim(); ++i)
    for (const auto& [j, w] : s.row(i)) k.push_back({i, j, w});
  return k;
}

template <CoefficientRing R>
std::vector<KernelEntry<R>> matrix_kernel(int dim, const typename R::Context& ctx, const std::vector<Rational>& m) {
  if (m.size() != static_cast<std::size_t>(dim * dim)) throw std::invalid_argument("kernel: matrix size");
  std::vector<KernelEntry<R>> k;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      if (m[i * dim + j] != 0) k.push_back({i, j, R::constant(ctx, m[i * dim + j])});
  return k;
}

template <class S>
int max_y_degree(const S& a) {
  int d = -1;
  for (const auto& [k, c] : a.terms()) d = std::max(d, y_degree(k));
  return d;
}

template <class S>
S derive_y_mono(const S& a, Mono m) {
  S out = a;
  for (int i = 0; i < a.dim() && !out.is_zero(); ++i)
    for (int e = 0; e < mono_get(m, i); ++e) out = out.derive_y(i);
  return out;
}

template <class S>
struct GraphWeight {
  S value;
  bool slot_mismatch = false;
};

// amplitude * Mult(prod_e K^{ij} d_i at the edge's first end, d_j at its second)
// applied to labels[0] (x) ... (x) labels[V-1]; no hbar factors.
template <class S>
GraphWeight<S> graph_weight(const Graph& g, const std::vector<S>& labels,
                            const std::vector<KernelEntry<typename S::Ring>>& kernel, const Rational& amplitude) {
  using R = typename S::Ring;
  const int v = g.num_vertices();
  if (static_cast<int>(labels.size()) != v) throw std::invalid_argument("graph_weight: one label per vertex");
  const S zero = labels.front().zero();
  const auto deg = g.degrees();
  std::vector<int> cap(v);
  for (int a = 0; a < v; ++a) {
    cap[a] = max_y_degree(labels[a]);
    if (deg[a] > cap[a]) return {zero, true};
  }
  if (amplitude == 0) return {zero, false};
  const auto edges = g.edges();
  // Collects the kernel coefficient of each distribution of derivatives.
  std::map<std::vector<Mono>, R> states;
  std::vector<Mono> cur(v, 0);
  const R one = R::constant(labels.front().context(), 1);
  auto rec = [&](auto&& self, std::size_t e, const R& coeff) -> void {
    if (e == edges.size()) {
      auto it = states.find(cur);
      if (it == states.end()) states.emplace(cur, coeff);
      else it->second += coeff;
      return;
    }
    auto [a, b] = edges[e];
    for (const auto& k : kernel) {
      cur[a] += mono_unit(k.i);
      cur[b] += mono_unit(k.j);
      if (mono_degree(cur[a]) <= cap[a] && mono_degree(cur[b]) <= cap[b]) self(self, e + 1, coeff * k.value);
      cur[a] -= mono_unit(k.i);
      cur[b] -= mono_unit(k.j);
    }
  };
  rec(rec, 0, one);
  std::map<std::pair<int, Mono>, S> memo;
  auto derived = [&](int a, Mono m) -> const S& {
    auto key = std::make_pair(a, m);
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, derive_y_mono(labels[a], m)).first;
    return it->second;
  };
  S out = zero;
  for (const auto& [st, coeff] : states) {
    if (coeff.is_zero()) continue;
    S prod = derived(0, st[0]);
    for (int a = 1; a < v && !prod.is_zero(); ++a) prod = prod * derived(a, st[a]);
    if (!prod.is_zero()) out += prod.scaled(coeff);
  }
  return {out * amplitude, false};
}

// Splits F = sum_g hbar^g F_g.
template <class S>
std::vector<S> hbar_components(const S& f) {
  std::vector<S> out;
  for (const auto& [k, c] : f.terms()) {
    if (k.h < 0) throw std::invalid_argument("hbar_components: negative hbar power");
    while (static_cast<int>(out.size()) <= k.h) out.push_back(f.zero());
    TermKey k0 = k;
    k0.h = 0;
    out[k.h].add(k0, c);
  }
  return out;
}

struct FlowBounds {
  int max_vertices = 4;
  int max_edges = 5;
  bool prune = true;  // skip graphs with a vertex of degree above its label's y-degree
};

// W(P, F) = sum_G hbar^{g(G)} W_G(P, F) / |Aut(G)| over connected graphs, loops
// allowed, a vertex of genus g labelled by F_g. The kernel entries K^{ij} are
// those of P^{ij}, so each edge acts as P^{ij} d_i (x) d_j and e^{W/hbar} = e^{hbar d_P} e^{F/hbar}
// with d_P = 1/2 P^{ij} d_i d_j. Graphs with a single vertex and no edge give F.
template <class S>
S hrg_flow(const std::vector<KernelEntry<typename S::Ring>>& kernel, const S& f, const FlowBounds& b) {
  const std::vector<S> comps = hbar_components(f);
  const int gmax = f.policy().hbar;
  CensusBounds cb{b.max_vertices, b.max_edges, gmax, false};
  std::vector<Graph> graphs = enumerate_graphs(cb);
  auto parts = parallel_map(graphs.size(), [&](std::size_t gi) {
    const Graph& g = graphs[gi];
    std::vector<S> labels;
    for (int x : g.genus) labels.push_back(x < static_cast<int>(comps.size()) ? comps[x] : f.zero());
    for (const auto& l : labels)
      if (l.is_zero()) return f.zero();
    if (b.prune) {
      const auto deg = g.degrees();
      for (int a = 0; a < g.num_vertices(); ++a)
        if (deg[a] > max_y_degree(labels[a])) return f.zero();
    }
    auto w = graph_weight(g, labels, kernel, Rational(1));
    return w.value.shifted_hbar(genus(g)) * make_rational(1, automorphism_order(g));
  });
  S out = f;
  for (const auto& p : parts) out += p;
  return out;
}

}  // namespace fedbv
