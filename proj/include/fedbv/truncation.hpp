#pragma once

#include <stdexcept>
#include <string>

namespace fedbv {

// Cut-offs applied after every binary operation.
// weight: 2*(hbar exponent) + (y degree); x_degree: jet order of coefficients.
struct TruncationPolicy {
  int weight = 6;
  int x_degree = 8;
  int hbar = 3;
  int u_min = 0;
  int u_max = 0;

  static TruncationPolicy make(int weight, int x_degree, int hbar = -1) {
    TruncationPolicy p;
    p.weight = weight;
    p.x_degree = x_degree;
    p.hbar = hbar < 0 ? weight / 2 : hbar;
    p.validate();
    return p;
  }

  TruncationPolicy with_u(int lo, int hi) const {
    TruncationPolicy p = *this;
    p.u_min = lo;
    p.u_max = hi;
    p.validate();
    return p;
  }

  void validate() const {
    if (weight < 0 || x_degree < 0 || hbar < 0 || u_max < 0)
      throw std::invalid_argument("truncation: negative bound");
    if (2 * hbar > weight) throw std::invalid_argument("truncation: hbar order exceeds weight/2");
    if (u_min > u_max) throw std::invalid_argument("truncation: u_min > u_max");
  }

  bool operator==(const TruncationPolicy&) const = default;
};

}  // namespace fedbv
