#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the algorithm under test beyond the basic containers.

#include <complex>
#include <random>
#include <set>
#include <vector>

#include "torusq/ffcore.hpp"

namespace oracle {

using torusq::BigInt;
using torusq::FactorShape;
using torusq::FpMatrix;
using torusq::FpPolynomial;
using torusq::IntMatrix;
using torusq::Residue;

inline std::set<Residue> squares_mod(Residue p) {
  std::set<Residue> s;
  for (Residue x = 1; x < p; ++x) s.insert(x * x % p);
  return s;
}

inline BigInt det3(const IntMatrix& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Factor shapes of a polynomial of degree <= 4 by trial division with every
// monic polynomial of degree 1 and 2.
inline std::vector<FactorShape> factor_shapes_brute(FpPolynomial f) {
  Residue p = f.modulus();
  f = f.monic();
  std::vector<FactorShape> out;
  for (int d = 1; d <= 2 && 2 * d <= f.degree() + (d == 1 ? 1 : 0); ++d) {
    // enumerate monic degree-d polynomials
    std::size_t count = 1;
    for (int i = 0; i < d; ++i) count *= static_cast<std::size_t>(p);
    for (std::size_t code = 0; code < count; ++code) {
      std::vector<Residue> c(d + 1, 0);
      std::size_t rest = code;
      for (int i = 0; i < d; ++i) {
        c[i] = static_cast<Residue>(rest % p);
        rest /= p;
      }
      c[d] = 1;
      FpPolynomial g(p, c);
      if (d == 2) {
        bool has_root = false;
        for (Residue x = 0; x < p; ++x) has_root |= g.eval(x) == 0;
        if (has_root) continue;
      }
      int mult = 0;
      while (f.degree() >= d && (f % g).is_zero()) {
        f = f / g;
        ++mult;
      }
      if (mult > 0) out.push_back({d, mult});
    }
  }
  if (f.degree() > 0) out.push_back({f.degree(), 1});
  std::sort(out.begin(), out.end(), [](const FactorShape& a, const FactorShape& b) {
    return std::tie(a.degree, a.multiplicity) < std::tie(b.degree, b.multiplicity);
  });
  return out;
}

// Product of random integral symplectic transvections x -> x + c * omega(v, x) v.
template <class Rng>
IntMatrix random_symplectic(int n, int steps, Rng& rng) {
  std::uniform_int_distribution<int> coord(-1, 1);
  std::uniform_int_distribution<int> sign(0, 1);
  IntMatrix j = torusq::symplectic_gram(n);
  IntMatrix acc = IntMatrix::identity(2 * n);
  for (int s = 0; s < steps; ++s) {
    IntMatrix v(2 * n, 1);
    bool nonzero = false;
    for (int i = 0; i < 2 * n; ++i) {
      v(i, 0) = coord(rng);
      nonzero |= v(i, 0) != 0;
    }
    if (!nonzero) v(0, 0) = 1;
    IntMatrix outer = v * v.transpose() * j;
    int c = sign(rng) ? 1 : -1;
    IntMatrix t = IntMatrix::identity(2 * n);
    for (int a = 0; a < 2 * n; ++a)
      for (int b = 0; b < 2 * n; ++b) t(a, b) += c * outer(a, b);
    acc = acc * t;
  }
  return acc;
}

// All of SL(2, F_p) by enumeration.
inline std::vector<FpMatrix> sl2_elements(Residue p) {
  std::vector<FpMatrix> out;
  for (Residue a = 0; a < p; ++a)
    for (Residue b = 0; b < p; ++b)
      for (Residue c = 0; c < p; ++c)
        for (Residue d = 0; d < p; ++d)
          if (torusq::mod(a * d - b * c, p) == 1) out.emplace_back(2, 2, p, std::vector<Residue>{a, b, c, d});
  return out;
}

}  // namespace oracle
