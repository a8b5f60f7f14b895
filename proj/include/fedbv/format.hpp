#pragma once

#include "fedbv/parse.hpp"
#include "fedbv/section.hpp"

#include <ostream>
#include <string>

namespace fedbv {

// "dx1 dx3 th2 hbar^2 u^-1 y1^2 y2"; empty for the unit key.
inline std::string format(const TermKey& k, int dim) {
  std::string out;
  auto word = [&](const std::string& w) {
    if (!out.empty()) out += ' ';
    out += w;
  };
  auto power = [](const std::string& base, int e) { return e == 1 ? base : base + "^" + std::to_string(e); };
  for (int i = 0; i < dim; ++i)
    if (k.dx & (1u << i)) word("dx" + std::to_string(i + 1));
  for (int i = 0; i < dim; ++i)
    if (k.th & (1u << i)) word("th" + std::to_string(i + 1));
  if (k.h != 0) word(power("hbar", k.h));
  if (k.u != 0) word(power("u", k.u));
  for (int i = 0; i < dim; ++i)
    if (int e = mono_get(k.y, i)) word(power("y" + std::to_string(i + 1), e));
  return out;
}

// One line per term: "[coefficient] key".
template <CoefficientRing R, bool BV>
std::string format(const Section<R, BV>& a) {
  if (a.is_zero()) return "0";
  std::string out;
  for (const auto& [k, c] : a.terms()) {
    if (!out.empty()) out += '\n';
    out += "[" + format(c) + "]";
    const std::string key = format(k, a.dim());
    if (!key.empty()) out += " " + key;
  }
  return out;
}

template <CoefficientRing R, bool BV>
void PrintTo(const Section<R, BV>& a, std::ostream* os) {
  *os << "\n" << format(a);
}

}  // namespace fedbv
