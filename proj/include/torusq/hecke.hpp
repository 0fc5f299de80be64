#pragma once

/**
 * @file hecke.hpp
 * @brief The Hecke torus C_A (centralizer of A mod p in Sp(2n, F_p)) and its characters.
 *
 * Elements are stored in generator coordinates: with generators g_1, g_2 of
 * orders N_1, N_2, index e_1 + N_1 e_2 holds g_1^{e_1} g_2^{e_2}. Cyclic tori
 * have a single generator.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "torusq/classical.hpp"
#include "torusq/ffcore.hpp"

namespace torusq {

/// Raised for primes where A mod p is not regular or P_A mod p is not squarefree.
class DegeneratePrimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classification of P_A mod p by its irreducible factors.
struct SplitType {
  std::vector<FactorShape> factors;

  bool degenerate() const {
    return std::any_of(factors.begin(), factors.end(), [](const FactorShape& f) { return f.multiplicity > 1; });
  }
  bool split() const {
    return !degenerate() && std::all_of(factors.begin(), factors.end(), [](const FactorShape& f) { return f.degree == 1; });
  }
  bool nonsplit() const {
    return !degenerate() && std::none_of(factors.begin(), factors.end(), [](const FactorShape& f) { return f.degree == 1; });
  }

  /// "split", "nonsplit", "mixed" or "degenerate", followed by the factor degrees.
  std::string label() const {
    std::string kind = degenerate() ? "degenerate" : split() ? "split" : nonsplit() ? "nonsplit" : "mixed";
    std::string degs;
    for (const auto& f : factors)
      for (int m = 0; m < f.multiplicity; ++m) degs += (degs.empty() ? "" : ",") + std::to_string(f.degree);
    return kind + "(" + degs + ")";
  }
};

inline SplitType split_type(const IntPolynomial& charpoly, Residue p) { return {factor_shapes_mod_p(charpoly, p)}; }

/// f(A) for a polynomial over F_p.
inline FpMatrix evaluate_polynomial(const FpPolynomial& f, const FpMatrix& a) {
  FpMatrix acc(a.rows(), a.cols(), a.modulus());
  for (int k = f.degree(); k >= 0; --k) acc = acc * a + FpMatrix::identity(a.rows(), a.modulus()).scaled(f.coeff(k));
  return acc;
}

/// One factor of the torus: the restriction to ker g(A), where g is a
/// self-reciprocal irreducible factor f of P_A mod p (an anisotropic factor
/// when deg f >= 2) or the product f f* of a factor with its reciprocal.
struct TorusFactor {
  std::vector<FpPolynomial> polys;
  bool anisotropic = false;
  std::vector<std::vector<Residue>> subspace;  ///< basis of ker g(A)
};

inline std::vector<TorusFactor> torus_factors(const FpMatrix& a) {
  auto irreducible = factor_small_mod_p(char_poly(a));
  std::vector<bool> used(irreducible.size(), false);
  std::vector<TorusFactor> out;
  for (std::size_t i = 0; i < irreducible.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    TorusFactor tf;
    tf.polys.push_back(irreducible[i]);
    FpPolynomial recip = irreducible[i].reciprocal();
    FpPolynomial g = irreducible[i];
    if (recip == irreducible[i]) {
      tf.anisotropic = irreducible[i].degree() >= 2;
    } else {
      for (std::size_t j = i + 1; j < irreducible.size(); ++j)
        if (!used[j] && irreducible[j] == recip) {
          used[j] = true;
          tf.polys.push_back(recip);
          g = g * recip;
          break;
        }
      if (tf.polys.size() != 2) throw std::logic_error("torus_factors: reciprocal factor missing");
    }
    tf.subspace = evaluate_polynomial(g, a).kernel();
    out.push_back(std::move(tf));
  }
  return out;
}

/// Reference sign of Tr rho(B): the product of -1 over anisotropic factors on
/// which B acts nontrivially.
inline int reference_trace_sign(const std::vector<TorusFactor>& factors, const FpMatrix& b) {
  int sign = 1;
  for (const auto& f : factors) {
    if (!f.anisotropic) continue;
    for (const auto& v : f.subspace)
      if (b.apply(v) != v) {
        sign = -sign;
        break;
      }
  }
  return sign;
}

/// Multiplicative order of an invertible matrix.
inline std::uint64_t element_order(const FpMatrix& b, std::uint64_t limit) {
  FpMatrix id = FpMatrix::identity(b.rows(), b.modulus());
  FpMatrix m = b;
  for (std::uint64_t k = 1; k <= limit; ++k) {
    if (m == id) return k;
    m = m * b;
  }
  throw std::runtime_error("element_order: order exceeds group size");
}

struct TorusStructure {
  std::vector<FpMatrix> generators;
  std::vector<std::uint64_t> orders;
};

/// Generators of a finite abelian matrix group with at most two invariant
/// factors: g_1 of maximal order N_1, and g_2 generating the quotient by <g_1>
/// with <g_1> and <g_2> intersecting trivially. Certified by regeneration.
inline TorusStructure torus_structure(const std::vector<FpMatrix>& elements) {
  if (elements.empty()) throw std::invalid_argument("torus_structure: empty group");
  const std::uint64_t size = elements.size();
  std::vector<std::uint64_t> ord(elements.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    ord[i] = element_order(elements[i], size);
    if (ord[i] > ord[best]) best = i;
  }
  TorusStructure s;
  const FpMatrix& g1 = elements[best];
  const std::uint64_t n1 = ord[best];
  s.generators.push_back(g1);
  s.orders.push_back(n1);
  if (n1 != size) {
    const std::uint64_t k = size / n1;
    std::map<FpMatrix, std::uint64_t> cyclic;  // g1^e -> e
    FpMatrix pw = FpMatrix::identity(g1.rows(), g1.modulus());
    for (std::uint64_t e = 0; e < n1; ++e) {
      cyclic.emplace(pw, e);
      pw = pw * g1;
    }
    std::optional<FpMatrix> g2;
    for (const auto& h : elements) {
      FpMatrix hp = h;
      std::uint64_t j = 1;
      while (!cyclic.count(hp)) {
        hp = hp * h;
        ++j;
      }
      if (j != k) continue;
      std::uint64_t e = cyclic.at(hp);  // h^k = g1^e with k | e
      if (e % k != 0) throw std::logic_error("torus_structure: quotient lift inconsistent");
      FpMatrix corr = g1.pow((n1 - e / k) % n1);
      g2 = h * corr;
      break;
    }
    if (!g2) throw std::runtime_error("torus_structure: group is not 2-generated (unsupported)");
    s.generators.push_back(*g2);
    s.orders.push_back(k);
  }
  // certify: the products g1^a g2^b are pairwise distinct and exhaust the group
  std::map<FpMatrix, int> seen;
  FpMatrix b2 = FpMatrix::identity(g1.rows(), g1.modulus());
  std::uint64_t n2 = s.orders.size() > 1 ? s.orders[1] : 1;
  for (std::uint64_t e2 = 0; e2 < n2; ++e2) {
    FpMatrix acc = b2;
    for (std::uint64_t e1 = 0; e1 < n1; ++e1) {
      if (!seen.emplace(acc, 0).second) throw std::logic_error("torus_structure: generators are not independent");
      acc = acc * g1;
    }
    if (n2 > 1) b2 = b2 * s.generators[1];
  }
  if (seen.size() != size) throw std::logic_error("torus_structure: regeneration count mismatch");
  for (const auto& e : elements)
    if (!seen.count(e)) throw std::logic_error("torus_structure: element not regenerated");
  return s;
}

/// C_A with its group structure.
class HeckeTorus {
 public:
  HeckeTorus(FpMatrix a, SplitType split, const std::vector<FpMatrix>& elements)
      : a_(std::move(a)), split_(std::move(split)), factors_(torus_factors(a_)) {
    auto s = torus_structure(elements);
    generators_ = s.generators;
    orders_ = s.orders;
    if (orders_.size() == 1) orders_.push_back(1);
    FpMatrix b2 = FpMatrix::identity(a_.rows(), a_.modulus());
    for (std::uint64_t e2 = 0; e2 < orders_[1]; ++e2) {
      FpMatrix acc = b2;
      for (std::uint64_t e1 = 0; e1 < orders_[0]; ++e1) {
        index_.emplace(acc, elements_.size());
        elements_.push_back(acc);
        acc = acc * generators_[0];
      }
      if (generators_.size() > 1) b2 = b2 * generators_[1];
    }
  }

  Residue p() const { return a_.modulus(); }
  int n() const { return static_cast<int>(a_.rows() / 2); }
  const FpMatrix& a() const { return a_; }
  const SplitType& split() const { return split_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<FpMatrix>& elements() const { return elements_; }
  const FpMatrix& element(std::size_t i) const { return elements_[i]; }
  /// Generators in use (one for cyclic tori).
  const std::vector<FpMatrix>& generators() const { return generators_; }
  /// Orders (N_1, N_2), N_2 = 1 for cyclic tori.
  const std::vector<std::uint64_t>& orders() const { return orders_; }
  bool cyclic() const { return orders_[1] == 1; }
  const std::vector<TorusFactor>& factors() const { return factors_; }
  int reference_sign(std::size_t element) const { return reference_trace_sign(factors_, elements_[element]); }

  std::optional<std::size_t> index_of(const FpMatrix& b) const {
    auto it = index_.find(b);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::pair<std::uint64_t, std::uint64_t> coords(std::size_t i) const { return {i % orders_[0], i / orders_[0]}; }
  std::size_t index(std::uint64_t e1, std::uint64_t e2) const {
    return static_cast<std::size_t>((e1 % orders_[0]) + orders_[0] * (e2 % orders_[1]));
  }
  std::size_t product(std::size_t i, std::size_t j) const {
    auto [a1, a2] = coords(i);
    auto [b1, b2] = coords(j);
    return index(a1 + b1, a2 + b2);
  }
  std::size_t inverse(std::size_t i) const {
    auto [a1, a2] = coords(i);
    return index(orders_[0] - a1, orders_[1] - a2);
  }

 private:
  FpMatrix a_;
  SplitType split_;
  std::vector<TorusFactor> factors_;
  std::vector<FpMatrix> generators_;
  std::vector<std::uint64_t> orders_;
  std::vector<FpMatrix> elements_;
  std::map<FpMatrix, std::size_t> index_;
};

/// All invertible symplectic elements of F_p[A]; for regular A this is the
/// full centralizer of A in Sp(2n, F_p).
inline HeckeTorus centralizer(const FpMatrix& a, const IntPolynomial& charpoly) {
  const Residue p = a.modulus();
  if (!is_symplectic(a)) throw std::invalid_argument("centralizer: A is not symplectic mod p");
  SplitType split = split_type(charpoly, p);
  if (!is_regular(a))
    throw DegeneratePrimeError("p = " + std::to_string(p) + ": A mod p is not regular (minimal polynomial != characteristic polynomial)");
  if (split.degenerate())
    throw DegeneratePrimeError("p = " + std::to_string(p) + ": P_A mod p has a repeated factor " + split.label());
  const std::size_t d = a.rows();
  std::vector<FpMatrix> powers{FpMatrix::identity(d, p)};
  for (std::size_t k = 1; k < d; ++k) powers.push_back(powers.back() * a);
  std::vector<FpMatrix> elements;
  std::vector<Residue> c(d, 0);
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= static_cast<std::size_t>(p);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    FpMatrix b(d, d, p);
    for (std::size_t k = 0; k < d; ++k) {
      Residue ck = static_cast<Residue>(rest % static_cast<std::size_t>(p));
      rest /= static_cast<std::size_t>(p);
      if (ck != 0) b = b + powers[k].scaled(ck);
    }
    if (b.invertible() && is_symplectic(b)) elements.push_back(b);
  }
  return HeckeTorus(a, std::move(split), elements);
}

inline HeckeTorus centralizer(const ErgodicElement& a, const PrimeModulus& pm) {
  if (a.n() != pm.n()) throw std::invalid_argument("centralizer: dimension mismatch");
  return centralizer(a.reduce(pm.p()), a.charpoly());
}

/// chi(g_1^{e_1} g_2^{e_2}) = exp(2 pi i (j_1 e_1 / N_1 + j_2 e_2 / N_2)).
class TorusCharacter {
 public:
  TorusCharacter(std::uint64_t j1, std::uint64_t j2, std::uint64_t n1, std::uint64_t n2) : j_{j1 % n1, j2 % n2}, n_{n1, n2} {}

  std::uint64_t j1() const { return j_[0]; }
  std::uint64_t j2() const { return j_[1]; }
  bool trivial() const { return j_[0] == 0 && j_[1] == 0; }
  /// Index of this character in characters(T).
  std::size_t index() const { return static_cast<std::size_t>(j_[0] + n_[0] * j_[1]); }

  /// The value as an exact fraction k / (N_1 N_2) of a full turn.
  std::uint64_t phase_numerator(std::uint64_t e1, std::uint64_t e2) const {
    std::uint64_t den = n_[0] * n_[1];
    return (j_[0] * (e1 % n_[0]) * n_[1] + j_[1] * (e2 % n_[1]) * n_[0]) % den;
  }
  std::uint64_t phase_denominator() const { return n_[0] * n_[1]; }

  std::complex<double> value(const HeckeTorus& t, std::size_t element) const {
    auto [e1, e2] = t.coords(element);
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(phase_numerator(e1, e2)) /
                               static_cast<double>(phase_denominator()));
  }

  TorusCharacter conjugate() const { return {n_[0] - j_[0], n_[1] - j_[1], n_[0], n_[1]}; }
  TorusCharacter operator*(const TorusCharacter& o) const { return {j_[0] + o.j_[0], j_[1] + o.j_[1], n_[0], n_[1]}; }
  bool operator==(const TorusCharacter& o) const = default;

 private:
  std::uint64_t j_[2];
  std::uint64_t n_[2];
};

/// All |T| characters, indexed like the elements (j_1 + N_1 j_2).
inline std::vector<TorusCharacter> characters(const HeckeTorus& t) {
  std::vector<TorusCharacter> out;
  for (std::uint64_t j2 = 0; j2 < t.orders()[1]; ++j2)
    for (std::uint64_t j1 = 0; j1 < t.orders()[0]; ++j1) out.emplace_back(j1, j2, t.orders()[0], t.orders()[1]);
  return out;
}

/// |T| x |T| matrix X(chi, B) = chi(B).
inline Eigen::MatrixXcd character_table(const HeckeTorus& t) {
  auto chars = characters(t);
  const auto m = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXcd x(m, m);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index b = 0; b < m; ++b) x(c, b) = chars[static_cast<std::size_t>(c)].value(t, static_cast<std::size_t>(b));
  return x;
}

}  // namespace torusq
