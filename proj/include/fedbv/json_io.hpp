#pragma once

#include "fedbv/circle.hpp"
#include "fedbv/format.hpp"
#include "fedbv/trace.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fedbv {

using Json = nlohmann::ordered_json;

// Malformed input. line/column are 1-based; 0 when the error is not tied to a
// place in the file. path is the JSON pointer of the offending value.
class InputError : public std::invalid_argument {
 public:
  InputError(const std::string& what, std::string path = {}, std::size_t line = 0, std::size_t column = 0)
      : std::invalid_argument(describe(what, path, line, column)), path_(std::move(path)), line_(line), column_(column) {}
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string describe(const std::string& what, const std::string& path, std::size_t line, std::size_t col) {
    std::string s;
    if (line) s += "line " + std::to_string(line) + ", column " + std::to_string(col) + ": ";
    if (!path.empty()) s += path + ": ";
    return s + what;
  }
  std::string path_;
  std::size_t line_, column_;
};

// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Parses JSON text; syntax errors carry the line and column of the byte at fault.
inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw InputError(msg, {}, line, col);
  }
}

namespace detail {

inline const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InputError("expected an object", path);
  auto it = j.find(key);
  if (it == j.end()) throw InputError("missing key '" + key + "'", path);
  return *it;
}

inline int as_int(const Json& j, const std::string& path, int lo, int hi) {
  if (!j.is_number_integer()) throw InputError("expected an integer", path);
  const long long v = j.get<long long>();
  if (v < lo || v > hi)
    throw InputError("value " + std::to_string(v) + " outside " + std::to_string(lo) + ".." + std::to_string(hi), path);
  return static_cast<int>(v);
}

inline const std::string& as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw InputError("expected a string", path);
  return j.get_ref<const std::string&>();
}

inline void expect_array(const Json& j, std::size_t size, const std::string& path) {
  if (!j.is_array()) throw InputError("expected an array", path);
  if (j.size() != size) throw InputError("expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()), path);
}

// Runs a grammar parser, turning its error into an InputError at path.
template <class F>
auto parse_expr(const std::string& text, const std::string& path, F&& parse) {
  try {
    return parse(text);
  } catch (const ParseError& e) {
    std::string what = e.what();
    if (auto p = what.rfind(" at position "); p != std::string::npos) what.resize(p);
    throw InputError(what + " (expression column " + std::to_string(e.position() + 1) + ")", path);
  }
}

inline JetPoly poly_at(const Json& j, const std::string& path, const JetContext& ctx) {
  return parse_expr(as_string(j, path), path, [&](const std::string& s) { return parse_poly(s, ctx); });
}

inline Rational rational_at(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  const std::string& s = as_string(j, path);
  return parse_expr(s, path, [](const std::string& t) {
    detail::Scanner sc(t);
    const int sign = sc.accept('-') ? -1 : 1;
    if (sign > 0) sc.accept('+');
    Rational v = sc.rational();
    if (!sc.done()) sc.fail("trailing characters");
    return sign > 0 ? v : Rational(-v);
  });
}

template <class T, class F>
std::vector<T> matrix_at(const Json& j, const std::string& path, int d, F&& entry) {
  expect_array(j, d, path);
  std::vector<T> out;
  for (int i = 0; i < d; ++i) {
    const std::string row = path + "/" + std::to_string(i);
    expect_array(j[i], d, row);
    for (int k = 0; k < d; ++k) out.push_back(entry(j[i][k], row + "/" + std::to_string(k)));
  }
  return out;
}

inline TruncationPolicy truncation_at(const Json& j, const std::string& path) {
  const int w = as_int(member(j, "weight", path), path + "/weight", 0, 64);
  const int x = as_int(member(j, "x_degree", path), path + "/x_degree", 0, 64);
  int h = w / 2;
  if (j.contains("hbar")) h = as_int(j["hbar"], path + "/hbar", 0, w / 2);
  return TruncationPolicy::make(w, x, h);
}

}  // namespace detail

// { "n", "omega": [[poly]], "gamma_lower": {"ijk": poly}, "omega_k": [[[poly]]]?,
//   "truncation": {"weight", "x_degree", "hbar"?} }. Indices in "ijk" are 1-based
// digits; each entry is copied to every permutation.
inline Chart<JetPoly> chart_from_json(const Json& j) {
  using namespace detail;
  const int n = as_int(member(j, "n", ""), "/n", 1, kMaxVars / 2);
  const int d = 2 * n;
  const TruncationPolicy p = truncation_at(member(j, "truncation", ""), "/truncation");
  const JetContext ctx{d, p.x_degree};
  auto poly = [&](const Json& e, const std::string& path) { return poly_at(e, path, ctx); };
  auto omega = matrix_at<JetPoly>(member(j, "omega", ""), "/omega", d, poly);

  std::vector<JetPoly> gamma(d * d * d, JetPoly(ctx));
  std::vector<bool> set(d * d * d, false);
  if (j.contains("gamma_lower")) {
    const Json& g = j["gamma_lower"];
    if (!g.is_object()) throw InputError("expected an object", "/gamma_lower");
    for (const auto& [key, val] : g.items()) {
      const std::string path = "/gamma_lower/" + key;
      if (key.size() != 3) throw InputError("key must be three index digits", path);
      int ix[3];
      for (int a = 0; a < 3; ++a) {
        ix[a] = key[a] - '1';
        if (ix[a] < 0 || ix[a] >= d) throw InputError("index digit outside 1.." + std::to_string(d), path);
      }
      JetPoly v = poly(val, path);
      const int at = (ix[0] * d + ix[1]) * d + ix[2];
      if (set[at] && !(gamma[at] == v)) throw InputError("conflicts with a permutation given earlier", path);
      set_symmetric(gamma, d, ix[0], ix[1], ix[2], v);
      const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      for (const auto& q : perm) set[(ix[q[0]] * d + ix[q[1]]) * d + ix[q[2]]] = true;
    }
  }

  std::vector<std::vector<JetPoly>> omega_k;
  if (j.contains("omega_k")) {
    const Json& w = j["omega_k"];
    if (!w.is_array()) throw InputError("expected an array", "/omega_k");
    for (std::size_t k = 0; k < w.size(); ++k)
      omega_k.push_back(matrix_at<JetPoly>(w[k], "/omega_k/" + std::to_string(k), d, poly));
  }
  try {
    return Chart<JetPoly>::build(n, ctx, std::move(omega), std::move(gamma), std::move(omega_k), p);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what(), "/omega");
  }
}

// Flat torus: { "n", "omega": [[rational]], "omega_k": [[[rational]]]?, "weight" }.
struct TorusSpec {
  int n = 1;
  std::vector<Rational> omega;
  std::vector<std::vector<Rational>> omega_k;
  int weight = 5;
};

inline TorusSpec torus_from_json(const Json& j) {
  using namespace detail;
  TorusSpec t;
  t.n = as_int(member(j, "n", ""), "/n", 1, 2);
  const int d = 2 * t.n;
  t.omega = matrix_at<Rational>(member(j, "omega", ""), "/omega", d, rational_at);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (t.omega[a * d + b] != -t.omega[b * d + a]) throw InputError("omega must be antisymmetric", "/omega");
  if (j.contains("omega_k")) {
    const Json& w = j["omega_k"];
    if (!w.is_array()) throw InputError("expected an array", "/omega_k");
    for (std::size_t k = 0; k < w.size(); ++k)
      t.omega_k.push_back(matrix_at<Rational>(w[k], "/omega_k/" + std::to_string(k), d, rational_at));
  }
  t.weight = as_int(member(j, "weight", ""), "/weight", 2 * t.n + 1, 12);
  return t;
}

inline GlobalSetup setup_from(const TorusSpec& t) {
  try {
    return GlobalSetup::make(t.n, t.omega, t.omega_k, t.weight);
  } catch (const std::logic_error& e) {
    throw InputError(e.what(), "/omega");
  }
}

// { "k", "edges": [[a, b]], "dtheta_vertices": [v]? }, vertices 0-based.
inline AmplitudeSpec amplitude_from_json(const Json& j) {
  using namespace detail;
  AmplitudeSpec s;
  s.k = as_int(member(j, "k", ""), "/k", 1, kMaxVars);
  const Json& e = member(j, "edges", "");
  if (!e.is_array()) throw InputError("expected an array", "/edges");
  for (std::size_t i = 0; i < e.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    expect_array(e[i], 2, path);
    s.edges.emplace_back(as_int(e[i][0], path + "/0", 0, s.k - 1), as_int(e[i][1], path + "/1", 0, s.k - 1));
  }
  if (j.contains("dtheta_vertices")) {
    const Json& v = j["dtheta_vertices"];
    if (!v.is_array()) throw InputError("expected an array", "/dtheta_vertices");
    for (std::size_t i = 0; i < v.size(); ++i)
      s.dtheta_vertices.push_back(as_int(v[i], "/dtheta_vertices/" + std::to_string(i), 0, s.k - 1));
  }
  return s;
}

inline Json to_json(const TruncationPolicy& p) {
  return Json{{"weight", p.weight}, {"x_degree", p.x_degree}, {"hbar", p.hbar}};
}

// [{"key": "dx1 y2", "coeff": "..."}], in key order.
template <CoefficientRing R, bool BV>
Json to_json(const Section<R, BV>& a) {
  Json out = Json::array();
  for (const auto& [k, c] : a.terms()) out.push_back(Json{{"key", format(k, a.dim())}, {"coeff", format(c)}});
  return out;
}

inline std::string format(const TauPoly& t) {
  return format(FourierElement::wave(FourierContext{1}, Frequency{}, t));
}

inline Json to_json(const LaurentTau& s) {
  Json out = Json::array();
  for (const auto& [e, v] : s)
    if (!v.is_zero()) out.push_back(Json{{"hbar_exp", e}, {"value", format(v)}});
  return out;
}

inline Json to_json(const LaurentQ& s) {
  Json out = Json::array();
  for (const auto& [e, v] : s) out.push_back(Json{{"hbar_exp", e}, {"value", to_string(v)}});
  return out;
}

}  // namespace fedbv
