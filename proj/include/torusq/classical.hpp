#pragma once

// Classical dynamics on the 2n-torus: ergodic symplectic integer matrices and
// Birkhoff averages of torus characters.

#include <cmath>
#include <complex>
#include <deque>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "torusq/ffcore.hpp"

namespace torusq {

/// An integer covector xi in the dual lattice; the character x -> e^{2 pi i <xi, x>}.
using LatticeVector = std::vector<long long>;

/// A point of T = R^{2n} / Z^{2n}, coordinates kept in [0, 1).
class TorusPoint {
 public:
  explicit TorusPoint(std::vector<double> coords) : x_(std::move(coords)) {
    for (auto& c : x_) c = wrap(c);
  }
  const std::vector<double>& coords() const { return x_; }
  std::size_t size() const { return x_.size(); }

  static double wrap(double c) {
    double r = c - std::floor(c);
    return r >= 1.0 ? 0.0 : r;
  }

  template <class Rng>
  static TorusPoint random(std::size_t dim, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(dim);
    for (auto& v : c) v = u(rng);
    return TorusPoint(std::move(c));
  }

 private:
  std::vector<double> x_;
};

enum class ErgodicRejection { kNone, kNotSquareEven, kNotSymplectic, kRootOfUnityEigenvalue, kReducibleCharPoly };

inline const char* to_string(ErgodicRejection r) {
  switch (r) {
    case ErgodicRejection::kNone: return "accepted";
    case ErgodicRejection::kNotSquareEven: return "not-square-even";
    case ErgodicRejection::kNotSymplectic: return "not-symplectic";
    case ErgodicRejection::kRootOfUnityEigenvalue: return "root-of-unity-eigenvalue";
    case ErgodicRejection::kReducibleCharPoly: return "reducible-charpoly";
  }
  return "unknown";
}

/// A validated A in Sp(2n, Z) with irreducible, non-cyclotomic characteristic polynomial.
class ErgodicElement {
 public:
  ErgodicElement(SymplecticIntMatrix a, IntPolynomial charpoly) : a_(std::move(a)), charpoly_(std::move(charpoly)) {}
  const SymplecticIntMatrix& matrix() const { return a_; }
  const IntPolynomial& charpoly() const { return charpoly_; }
  int n() const { return a_.n(); }
  FpMatrix reduce(Residue p) const { return a_.reduce(p); }

 private:
  SymplecticIntMatrix a_;
  IntPolynomial charpoly_;
};

struct ErgodicValidation {
  bool symplectic = false;
  bool irreducible_over_q = false;
  bool no_root_of_unity = false;
  ErgodicRejection rejection = ErgodicRejection::kNone;
  std::string reason;
  std::optional<IntPolynomial> charpoly;
  std::optional<ErgodicElement> element;

  bool accepted() const { return element.has_value(); }
};

/// The m-th cyclotomic polynomial, by exact division of x^m - 1.
inline IntPolynomial cyclotomic(int m) {
  if (m < 1) throw std::invalid_argument("cyclotomic: m must be positive");
  std::vector<BigInt> c(m + 1, 0);
  c[0] = -1;
  c[m] = 1;
  IntPolynomial f(c);
  for (int d = 1; d < m; ++d)
    if (m % d == 0) f = f.divmod(cyclotomic(d)).first;
  return f;
}

inline int euler_phi(int m) {
  int result = m;
  for (int q = 2; q * q <= m; ++q) {
    if (m % q == 0) {
      while (m % q == 0) m /= q;
      result -= result / q;
    }
  }
  if (m > 1) result -= result / m;
  return result;
}

/// Orders m of the roots of unity among the roots of f (phi(m) <= deg f).
inline std::vector<int> root_of_unity_orders(const IntPolynomial& f) {
  std::vector<int> orders;
  int deg = f.degree();
  // phi(m) >= sqrt(m / 2), so phi(m) <= deg forces m <= 2 deg^2
  for (int m = 1; m <= 2 * deg * deg + 2; ++m)
    if (euler_phi(m) <= deg && f.divisible_by(cyclotomic(m))) orders.push_back(m);
  return orders;
}

inline ErgodicValidation validate_ergodic(const IntMatrix& a) {
  ErgodicValidation v;
  if (a.rows() != a.cols() || a.rows() % 2 != 0 || a.rows() == 0) {
    v.rejection = ErgodicRejection::kNotSquareEven;
    v.reason = "matrix must be square of even dimension";
    return v;
  }
  if (a.rows() > 4) throw std::invalid_argument("validate_ergodic: only n <= 2 is supported");
  v.symplectic = is_symplectic(a);
  IntPolynomial f = char_poly(a);
  v.charpoly = f;
  auto orders = root_of_unity_orders(f);
  v.no_root_of_unity = orders.empty();
  auto irr = is_irreducible(f);
  v.irreducible_over_q = irr.irreducible;

  if (!v.symplectic) {
    v.rejection = ErgodicRejection::kNotSymplectic;
    v.reason = "A^T J A != J for A = " + a.str();
  } else if (!v.no_root_of_unity) {
    v.rejection = ErgodicRejection::kRootOfUnityEigenvalue;
    v.reason = "charpoly " + f.str() + " divisible by cyclotomic polynomial of order " + std::to_string(orders.front());
  } else if (!v.irreducible_over_q) {
    v.rejection = ErgodicRejection::kReducibleCharPoly;
    v.reason = "charpoly " + f.str() + " reducible: " + irr.detail;
  } else {
    v.element.emplace(SymplecticIntMatrix(a), f);
  }
  return v;
}

/// The Arnold cat map [[2,1],[1,1]].
inline ErgodicElement cat_map() {
  auto v = validate_ergodic(IntMatrix(2, 2, {2, 1, 1, 1}));
  return *v.element;
}

/// Integral symplectic transvection x -> x + sign * omega(v, x) v.
inline IntMatrix transvection(const std::vector<int>& v, int sign) {
  int dim = static_cast<int>(v.size());
  IntMatrix j = symplectic_gram(dim / 2);
  IntMatrix t = IntMatrix::identity(dim);
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      BigInt acc = 0;  // (v v^T J)_{ab}
      for (int k = 0; k < dim; ++k) acc += BigInt(v[a]) * v[k] * j(k, b);
      t(a, b) += sign * acc;
    }
  return t;
}

/// A prime is usable for Hecke sweeps when A mod p is regular (minimal
/// polynomial = characteristic polynomial) and P_A mod p is squarefree, so the
/// centralizer of A mod p is a torus.
inline bool nondegenerate_mod_p(const IntMatrix& a, const IntPolynomial& charpoly, Residue p) {
  if (!is_regular(a.reduce(p))) return false;
  for (const auto& s : factor_shapes_mod_p(charpoly, p))
    if (s.multiplicity > 1) return false;
  return true;
}

/// True when P_A mod p is a product of distinct linear factors.
inline bool splits_completely_mod_p(const IntPolynomial& charpoly, Residue p) {
  auto shapes = factor_shapes_mod_p(charpoly, p);
  return std::all_of(shapes.begin(), shapes.end(), [](const FactorShape& s) { return s.degree == 1 && s.multiplicity == 1; });
}

/// Extra requirements on the element returned by find_ergodic_sp4.
struct Sp4SearchFilter {
  std::vector<Residue> nondegenerate_at{3, 5, 7};
  /// When non-empty, P_A must split into distinct linear factors mod at least one of these primes.
  std::vector<Residue> split_at_one_of{};
};

/// Deterministic breadth-first search over words in elementary transvections of
/// Sp(4, Z) (directions e_i and e_i + e_j, both signs); returns the first
/// product that passes validate_ergodic and the filter.
inline ErgodicElement find_ergodic_sp4(const Sp4SearchFilter& filter = {}, int max_length = 6) {
  auto admissible = [&](const IntMatrix& m, const IntPolynomial& f) {
    for (Residue p : filter.nondegenerate_at)
      if (!nondegenerate_mod_p(m, f, p)) return false;
    if (filter.split_at_one_of.empty()) return true;
    return std::any_of(filter.split_at_one_of.begin(), filter.split_at_one_of.end(),
                       [&](Residue p) { return nondegenerate_mod_p(m, f, p) && splits_completely_mod_p(f, p); });
  };
  std::vector<IntMatrix> gens;
  std::vector<std::vector<int>> dirs;
  for (int i = 0; i < 4; ++i) {
    std::vector<int> e(4, 0);
    e[i] = 1;
    dirs.push_back(e);
  }
  for (int i = 0; i < 4; ++i)
    for (int k = i + 1; k < 4; ++k) {
      std::vector<int> e(4, 0);
      e[i] = e[k] = 1;
      dirs.push_back(e);
    }
  for (const auto& d : dirs)
    for (int s : {1, -1}) gens.push_back(transvection(d, s));

  std::deque<std::pair<IntMatrix, int>> frontier{{IntMatrix::identity(4), 0}};
  while (!frontier.empty()) {
    auto [m, len] = frontier.front();
    frontier.pop_front();
    if (len > 0) {
      auto v = validate_ergodic(m);
      if (v.accepted() && admissible(m, *v.charpoly)) return *v.element;
    }
    if (len == max_length) continue;
    for (const auto& g : gens) frontier.emplace_back(m * g, len + 1);
  }
  throw std::runtime_error("find_ergodic_sp4: search exhausted; enlarge max_length");
}

/// (1/N) sum_{k=1..N} e^{2 pi i <xi, A^k x>}, iterating A on the torus in double precision.
inline std::complex<double> birkhoff_average(const ErgodicElement& a, const LatticeVector& xi, const TorusPoint& x,
                                             std::size_t count) {
  if (count == 0) throw std::invalid_argument("birkhoff_average: N must be >= 1");
  std::size_t dim = a.matrix().dim();
  if (xi.size() != dim || x.size() != dim) throw std::invalid_argument("birkhoff_average: dimension mismatch");
  bool zero = std::all_of(xi.begin(), xi.end(), [](long long c) { return c == 0; });
  if (zero) return {1.0, 0.0};

  std::vector<double> m(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) m[i * dim + j] = static_cast<double>(a.matrix().matrix()(i, j));
  std::vector<double> y = x.coords(), next(dim);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 1; k <= count; ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < dim; ++j) s += m[i * dim + j] * y[j];
      next[i] = TorusPoint::wrap(s);
    }
    y.swap(next);
    double phase = 0;
    for (std::size_t i = 0; i < dim; ++i) phase += static_cast<double>(xi[i]) * y[i];
    phase -= std::floor(phase);
    acc += std::polar(1.0, 2.0 * std::numbers::pi * phase);
  }
  return acc / static_cast<double>(count);
}

/// |Sp(2n, F_p)| = p^{n^2} prod_{i=1..n} (p^{2i} - 1).
inline BigInt symplectic_group_order(int n, Residue p) {
  BigInt order = 1;
  BigInt bp = p;
  for (int i = 0; i < n * n; ++i) order *= bp;
  for (int i = 1; i <= n; ++i) {
    BigInt q = 1;
    for (int k = 0; k < 2 * i; ++k) q *= bp;
    order *= q - 1;
  }
  return order;
}

/// Smallest k >= 1 with A^k = I mod p.
inline std::uint64_t period_mod_p(const FpMatrix& a) {
  FpMatrix id = FpMatrix::identity(a.rows(), a.modulus());
  FpMatrix m = a;
  std::uint64_t k = 1;
  while (m != id) {
    m = m * a;
    ++k;
    if (k > 100000000ULL) throw std::runtime_error("period_mod_p: period too large");
  }
  return k;
}

}  // namespace torusq
