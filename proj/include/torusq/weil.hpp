#pragma once

/**
 * @file weil.hpp
 * @brief The Weil representation of Sp(2n, F_p) on the quantum torus.
 *
 * Symplectic matrices act on column vectors xi = (lambda; mu), and rho(B) is
 * normalized by the Egorov identity rho(B) pi(xi) rho(B)^{-1} = pi(B xi).
 *
 * Generators and their operators (S symmetric, M invertible):
 *
 *   t(M) = [[M, 0], [0, M^{-T}]]   f(x) -> sigma(det M) f(M^{-1} x)
 *   u(S) = [[I, 0], [-S, I]]       f(x) -> psi(nu x^T S x) f(x)
 *   w    = [[0, I], [-I, 0]]       f(x) -> gamma p^{-n/2} sum_y psi(x.y) f(y)
 *
 * The chirp multiplies by a quadratic phase, which under this action moves mu,
 * so its matrix is lower unipotent. gamma is found by searching the 4p-th roots
 * of unity for the value making rho(w)^2 = rho(t(-I)) and (rho(w) rho(u(I)))^3 = I.
 */

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusq/ffcore.hpp"
#include "torusq/heisenberg.hpp"

namespace torusq {

// ---------------------------------------------------------------------------
// block helpers
// ---------------------------------------------------------------------------

inline FpMatrix block(const FpMatrix& m, std::size_t r0, std::size_t c0, std::size_t rows, std::size_t cols) {
  FpMatrix out(rows, cols, m.modulus());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = m(r0 + i, c0 + j);
  return out;
}

inline FpMatrix from_blocks(const FpMatrix& a, const FpMatrix& b, const FpMatrix& c, const FpMatrix& d) {
  std::size_t n = a.rows();
  FpMatrix out(2 * n, 2 * n, a.modulus());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = a(i, j);
      out(i, n + j) = b(i, j);
      out(n + i, j) = c(i, j);
      out(n + i, n + j) = d(i, j);
    }
  return out;
}

inline bool is_symmetric(const FpMatrix& s) { return s == s.transpose(); }

// ---------------------------------------------------------------------------
// generators and words
// ---------------------------------------------------------------------------

struct SpGenerator {
  enum class Kind { kDilation, kChirp, kFourier };
  Kind kind = Kind::kFourier;
  FpMatrix block;  ///< M for t(M), S for u(S), unused for w

  static SpGenerator t(FpMatrix m) { return {Kind::kDilation, std::move(m)}; }
  static SpGenerator u(FpMatrix s) { return {Kind::kChirp, std::move(s)}; }
  static SpGenerator w() { return {Kind::kFourier, FpMatrix()}; }

  std::string str() const {
    switch (kind) {
      case Kind::kDilation: return "t" + block.str();
      case Kind::kChirp: return "u" + block.str();
      case Kind::kFourier: return "w";
    }
    return "?";
  }
};

/// The symplectic matrix of a generator.
inline FpMatrix generator_matrix(const SpGenerator& g, int n, Residue p) {
  std::size_t k = static_cast<std::size_t>(n);
  FpMatrix id = FpMatrix::identity(k, p);
  FpMatrix zero(k, k, p);
  switch (g.kind) {
    case SpGenerator::Kind::kDilation:
      return from_blocks(g.block, zero, zero, g.block.inverse().transpose());
    case SpGenerator::Kind::kChirp:
      return from_blocks(id, zero, g.block.scaled(p - 1), id);
    case SpGenerator::Kind::kFourier:
      return symplectic_gram(n, p);
  }
  throw std::logic_error("generator_matrix: unknown kind");
}

/// A product of generators, leftmost factor first.
struct SpWord {
  std::vector<SpGenerator> factors;

  FpMatrix evaluate(int n, Residue p) const {
    FpMatrix acc = FpMatrix::identity(static_cast<std::size_t>(2 * n), p);
    for (const auto& g : factors) acc = acc * generator_matrix(g, n, p);
    return acc;
  }
  bool uses_fourier() const {
    for (const auto& g : factors)
      if (g.kind == SpGenerator::Kind::kFourier) return true;
    return false;
  }
  std::string str() const {
    std::string s;
    for (const auto& g : factors) s += (s.empty() ? "" : " ") + g.str();
    return s.empty() ? "[]" : s;
  }
};

/// Bruhat-type word for B in Sp(2n, F_p) when the upper-right block is zero
/// (B = t(A) u(-A^T C)) or invertible (B = u(-D B12^{-1}) t(B12) w u(-B12^{-1} A)).
/// Returns nullopt for the remaining cells. Identity factors are omitted; the
/// result is verified by re-multiplication.
inline std::optional<SpWord> sp_word(const FpMatrix& b) {
  if (b.rows() != b.cols() || b.rows() % 2 != 0) throw std::invalid_argument("sp_word: matrix must be 2n x 2n");
  if (!b.invertible()) throw std::invalid_argument("sp_word: matrix not invertible");
  const Residue p = b.modulus();
  const std::size_t n = b.rows() / 2;
  FpMatrix a = block(b, 0, 0, n, n), b12 = block(b, 0, n, n, n), c = block(b, n, 0, n, n), d = block(b, n, n, n, n);
  FpMatrix id = FpMatrix::identity(n, p);
  SpWord word;
  auto push_t = [&](const FpMatrix& m) {
    if (m != id) word.factors.push_back(SpGenerator::t(m));
  };
  auto push_u = [&](const FpMatrix& s) {
    if (!s.is_zero()) word.factors.push_back(SpGenerator::u(s));
  };
  auto neg = [&](const FpMatrix& m) { return m.scaled(p - 1); };

  if (b12.is_zero()) {
    if (!a.invertible()) return std::nullopt;
    push_t(a);
    push_u(neg(a.transpose() * c));
  } else if (b12.invertible()) {
    FpMatrix binv = b12.inverse();
    push_u(neg(d * binv));
    push_t(b12);
    word.factors.push_back(SpGenerator::w());
    push_u(neg(binv * a));
  } else {
    return std::nullopt;
  }
  for (const auto& g : word.factors)
    if (g.kind == SpGenerator::Kind::kChirp && !is_symmetric(g.block)) return std::nullopt;
  if (word.evaluate(static_cast<int>(n), p) != b) return std::nullopt;
  return word;
}

/// Word of length <= 4 for B in SL(2, F_p); never fails.
inline SpWord sl2_word(const FpMatrix& b) {
  if (b.rows() != 2 || b.cols() != 2) throw std::invalid_argument("sl2_word: expected a 2x2 matrix");
  if (b.det() != 1) throw std::invalid_argument("sl2_word: matrix not in SL(2, F_p)");
  auto word = sp_word(b);
  if (!word) throw std::logic_error("sl2_word: Bruhat decomposition failed");
  return *word;
}

// ---------------------------------------------------------------------------
// generator operators
// ---------------------------------------------------------------------------

/// f(x) -> sigma(det M) f(M^{-1} x).
inline QOperator dilation_operator(const FpMatrix& m, const PrimeModulus& pm) {
  if (!m.invertible()) throw std::invalid_argument("dilation_operator: singular M");
  PhaseSpace space(pm);
  FpMatrix minv = m.inverse();
  double sign = legendre(m.det(), pm.p());
  std::vector<std::size_t> cols(pm.dim());
  for (std::size_t x = 0; x < pm.dim(); ++x) cols[x] = space.encode(minv.apply(space.decode(x)));
  return QOperator::generalized_permutation(std::move(cols), std::vector<Complex>(pm.dim(), Complex(sign, 0.0)));
}

/// f(x) -> psi(nu x^T S x) f(x).
inline QOperator chirp_operator(const FpMatrix& s, const PrimeModulus& pm) {
  if (!is_symmetric(s)) throw std::invalid_argument("chirp_operator: S must be symmetric");
  PhaseSpace space(pm);
  PhaseTable psi(pm.p());
  std::vector<std::size_t> cols(pm.dim());
  std::vector<Complex> vals(pm.dim());
  for (std::size_t x = 0; x < pm.dim(); ++x) {
    auto v = space.decode(x);
    auto sv = s.apply(v);
    Residue q = 0;
    for (std::size_t i = 0; i < v.size(); ++i) q = mod(q + v[i] * sv[i], pm.p());
    cols[x] = x;
    vals[x] = psi(pm.nu() * q);
  }
  return QOperator::generalized_permutation(std::move(cols), std::move(vals));
}

/// f(x) -> gamma p^{-n/2} sum_y psi(x.y) f(y).
inline QOperator fourier_operator(const PrimeModulus& pm, Complex gamma) {
  PhaseSpace space(pm);
  PhaseTable psi(pm.p());
  auto d = static_cast<Eigen::Index>(pm.dim());
  DenseMatrix m(d, d);
  double scale = std::pow(static_cast<double>(pm.p()), -0.5 * pm.n());
  std::vector<std::vector<Residue>> pts(pm.dim());
  for (std::size_t x = 0; x < pm.dim(); ++x) pts[x] = space.decode(x);
  for (std::size_t x = 0; x < pm.dim(); ++x)
    for (std::size_t y = 0; y < pm.dim(); ++y) {
      Residue dot = 0;
      for (int i = 0; i < pm.n(); ++i) dot += pts[x][i] * pts[y][i];
      m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = gamma * scale * psi(dot);
    }
  return QOperator::dense(std::move(m));
}

/// The unique 4p-th root of unity gamma for which rho(w)^2 = rho(t(-I)) and
/// (rho(w) rho(u(I)))^3 = I.
inline Complex solve_fourier_normalization(const PrimeModulus& pm) {
  const std::size_t n = static_cast<std::size_t>(pm.n());
  QOperator parity = dilation_operator(FpMatrix::identity(n, pm.p()).scaled(pm.p() - 1), pm);
  QOperator chirp = chirp_operator(FpMatrix::identity(n, pm.p()), pm);
  QOperator raw = fourier_operator(pm, Complex(1.0, 0.0));
  QOperator id = QOperator::identity(pm.dim());
  const Residue order = 4 * pm.p();
  std::optional<Complex> found;
  for (Residue k = 0; k < order; ++k) {
    Complex g = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order));
    QOperator w = raw.scaled(g);
    if ((w * w).max_abs_diff(parity) > 1e-9) continue;
    QOperator wl = w * chirp;
    if ((wl * wl * wl).max_abs_diff(id) > 1e-9) continue;
    if (found) throw std::runtime_error("solve_fourier_normalization: normalization not unique");
    found = g;
  }
  if (!found) throw std::runtime_error("solve_fourier_normalization: no consistent normalization");
  return *found;
}

// ---------------------------------------------------------------------------
// Egorov checks and the Schur intertwiner
// ---------------------------------------------------------------------------

/// max over xi of |rho pi(xi) - pi(B xi) rho|, which equals the Egorov defect for unitary rho.
inline double egorov_deviation(const QOperator& rho, const FpMatrix& b, const std::vector<std::vector<Residue>>& xis,
                               const PrimeModulus& pm) {
  PhaseTable psi(pm.p());
  double worst = 0.0;
  DenseMatrix r = rho.to_dense();
  for (const auto& xi : xis) {
    QOperator lhs_pi = pi_op(xi, pm, psi);
    QOperator rhs_pi = pi_op(b.apply(xi), pm, psi);
    DenseMatrix lhs = lhs_pi.right_apply(r);
    DenseMatrix rhs = rhs_pi.left_apply(r);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// The standard basis of F_p^{2n}.
inline std::vector<std::vector<Residue>> standard_phase_basis(int n) {
  std::vector<std::vector<Residue>> out;
  for (int i = 0; i < 2 * n; ++i) {
    std::vector<Residue> e(static_cast<std::size_t>(2 * n), 0);
    e[static_cast<std::size_t>(i)] = 1;
    out.push_back(e);
  }
  return out;
}

template <class Rng>
std::vector<std::vector<Residue>> random_phase_points(const PrimeModulus& pm, std::size_t count, Rng& rng) {
  std::uniform_int_distribution<Residue> d(0, pm.p() - 1);
  std::vector<std::vector<Residue>> out(count, std::vector<Residue>(static_cast<std::size_t>(2 * pm.n())));
  for (auto& v : out)
    for (auto& c : v) c = d(rng);
  return out;
}

/// sum_xi pi(B xi) C pi(xi)^{-1} for a seeded random C, rescaled to be unitary.
/// The overall phase is arbitrary.
inline QOperator schur_intertwiner(const FpMatrix& b, const PrimeModulus& pm, std::uint64_t seed = 1, int max_tries = 8) {
  if (!is_symplectic(b)) throw std::invalid_argument("schur_intertwiner: B is not symplectic");
  PhaseSpace space(pm);
  PhaseTable psi(pm.p());
  const auto d = static_cast<Eigen::Index>(pm.dim());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    DenseMatrix c(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) c(i, j) = Complex(gauss(rng), gauss(rng));
    DenseMatrix m = DenseMatrix::Zero(d, d);
    for (std::size_t idx = 0; idx < space.phase_points(); ++idx) {
      auto xi = space.decode_phase(idx);
      QOperator left = pi_op(b.apply(xi), pm, psi);
      std::vector<Residue> neg(xi.size());
      for (std::size_t k = 0; k < xi.size(); ++k) neg[k] = mod(-xi[k], pm.p());
      QOperator right = pi_op(neg, pm, psi);
      // (L C R)[x, R.cols[z]] = L.val[x] * C[L.cols[x], z] * R.val[z]
      for (std::size_t x = 0; x < pm.dim(); ++x) {
        const Complex lv = left.values()[x];
        const auto row = static_cast<Eigen::Index>(left.cols()[x]);
        for (std::size_t z = 0; z < pm.dim(); ++z)
          m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(right.cols()[z])) +=
              lv * c(row, static_cast<Eigen::Index>(z)) * right.values()[z];
      }
    }
    double norm2 = (m * m.adjoint()).trace().real() / static_cast<double>(d);
    if (norm2 < 1e-12 * static_cast<double>(space.phase_points())) continue;
    return QOperator::dense(m / std::sqrt(norm2));
  }
  throw std::runtime_error("schur_intertwiner: retry limit exceeded");
}

// ---------------------------------------------------------------------------
// the representation
// ---------------------------------------------------------------------------

enum class RhoMethod { kGeneratorFormula, kBruhatWord, kSchurIntertwiner };

inline const char* to_string(RhoMethod m) {
  switch (m) {
    case RhoMethod::kGeneratorFormula: return "generator-formula";
    case RhoMethod::kBruhatWord: return "bruhat-word";
    case RhoMethod::kSchurIntertwiner: return "schur-intertwiner";
  }
  return "unknown";
}

struct RhoEntry {
  QOperator op;
  RhoMethod method;
};

/// rho on Sp(2n, F_p): exact words through the generator formulas where a word
/// exists (all of SL(2, F_p) for n = 1), Schur intertwiners otherwise. Every
/// inserted operator is checked for unitarity and the Egorov identity. Safe for
/// concurrent use; insertion is idempotent.
class WeilRep {
 public:
  explicit WeilRep(const PrimeModulus& pm, std::uint64_t seed = 1)
      : pm_(pm), seed_(seed), gamma_(solve_fourier_normalization(pm)) {}

  const PrimeModulus& modulus() const { return pm_; }
  Complex gamma() const { return gamma_; }
  double tolerance() const { return 1e-9 * std::pow(static_cast<double>(pm_.p()), 0.5 * pm_.n()); }

  QOperator generator(const SpGenerator& g) const {
    switch (g.kind) {
      case SpGenerator::Kind::kDilation: return dilation_operator(g.block, pm_);
      case SpGenerator::Kind::kChirp: return chirp_operator(g.block, pm_);
      case SpGenerator::Kind::kFourier: return fourier_operator(pm_, gamma_);
    }
    throw std::logic_error("WeilRep::generator: unknown kind");
  }

  QOperator evaluate(const SpWord& word) const {
    QOperator acc = QOperator::identity(pm_.dim());
    for (const auto& g : word.factors) acc = acc * generator(g);
    return acc;
  }

  /// True when rho(B) comes from generator formulas, i.e. its phase is canonical.
  bool has_word(const FpMatrix& b) const { return sp_word(b).has_value(); }

  const RhoEntry& entry(const FpMatrix& b) const {
    {
      std::shared_lock lock(mutex_);
      auto it = cache_.find(b);
      if (it != cache_.end()) return it->second;
    }
    RhoEntry fresh = build(b);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.emplace(b, std::move(fresh));
    return it->second;
  }

  QOperator rho(const FpMatrix& b) const { return entry(b).op; }
  RhoMethod method(const FpMatrix& b) const { return entry(b).method; }

  std::size_t cache_size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
  }

 private:
  RhoEntry build(const FpMatrix& b) const {
    if (b.rows() != static_cast<std::size_t>(2 * pm_.n()) || b.modulus() != pm_.p())
      throw std::invalid_argument("WeilRep::rho: matrix does not match modulus");
    if (!is_symplectic(b)) throw std::invalid_argument("WeilRep::rho: matrix is not symplectic");
    RhoEntry e{QOperator::identity(pm_.dim()), RhoMethod::kBruhatWord};
    if (auto word = sp_word(b)) {
      e.op = evaluate(*word);
      e.method = word->factors.size() <= 1 ? RhoMethod::kGeneratorFormula : RhoMethod::kBruhatWord;
    } else {
      e.op = schur_intertwiner(b, pm_, seed_);
      e.method = RhoMethod::kSchurIntertwiner;
    }
    if (e.op.unitarity_defect() > 1e-9) throw std::runtime_error("WeilRep::rho: operator not unitary for " + b.str());
    double eg = egorov_deviation(e.op, b, standard_phase_basis(pm_.n()), pm_);
    if (eg > tolerance()) throw std::runtime_error("WeilRep::rho: Egorov identity fails for " + b.str());
    return e;
  }

  PrimeModulus pm_;
  std::uint64_t seed_;
  Complex gamma_;
  mutable std::shared_mutex mutex_;
  mutable std::map<FpMatrix, RhoEntry> cache_;
};

struct MultiplicativityReport {
  std::size_t pairs = 0;
  double max_deviation = 0.0;
  std::size_t failures = 0;
  std::vector<std::pair<FpMatrix, FpMatrix>> witnesses;
};

/// |rho(B1) rho(B2) - rho(B1 B2)| over the given pairs.
inline MultiplicativityReport check_multiplicativity(const WeilRep& rep,
                                                     const std::vector<std::pair<FpMatrix, FpMatrix>>& pairs,
                                                     double tolerance = 1e-9) {
  MultiplicativityReport r;
  for (const auto& [b1, b2] : pairs) {
    double dev = (rep.rho(b1) * rep.rho(b2)).max_abs_diff(rep.rho(b1 * b2));
    ++r.pairs;
    r.max_deviation = std::max(r.max_deviation, dev);
    if (dev > tolerance) {
      ++r.failures;
      if (r.witnesses.size() < 4) r.witnesses.emplace_back(b1, b2);
    }
  }
  return r;
}

/// Random element of Sp(2n, F_p) as a product of random generators.
template <class Rng>
FpMatrix random_symplectic_mod_p(int n, Residue p, Rng& rng, int steps = 6) {
  std::uniform_int_distribution<Residue> d(0, p - 1);
  std::size_t k = static_cast<std::size_t>(n);
  FpMatrix acc = FpMatrix::identity(2 * k, p);
  for (int s = 0; s < steps; ++s) {
    FpMatrix sym(k, k, p);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j) sym(i, j) = sym(j, i) = d(rng);
    FpMatrix m(k, k, p);
    do {
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = d(rng);
    } while (!m.invertible());
    acc = acc * generator_matrix(SpGenerator::u(sym), n, p) * generator_matrix(SpGenerator::t(m), n, p) *
          generator_matrix(SpGenerator::w(), n, p);
  }
  return acc;
}

}  // namespace torusq
