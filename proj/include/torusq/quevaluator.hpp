#pragma once

/**
 * @file quevaluator.hpp
 * @brief Trace functions, Hecke character sums and the QUE bound checks.
 *
 * For xi in F_p^{2n} and B in the Hecke torus T,
 *
 *     F(xi, B)   = Tr(pi(xi) rho(B)),
 *     a_chi(xi)  = sum_B F(xi, B) chi(B),
 *
 * and the bound under test is |a_chi(xi)| <= 2^n p^{n/2} for xi != 0. With
 * projectors P_chi onto H_chi, a_chi(xi) = |T| Tr(pi(xi) P_{conj chi}), so for a
 * unit vector v spanning a one-dimensional H_chi, <v|pi(xi)v> = a_{conj chi}(xi) / |T|.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "torusq/classical.hpp"
#include "torusq/eigenspaces.hpp"
#include "torusq/hecke.hpp"
#include "torusq/heisenberg.hpp"
#include "torusq/torus_rep.hpp"
#include "torusq/weil.hpp"

namespace torusq {

// ---------------------------------------------------------------------------
// trace function
// ---------------------------------------------------------------------------

/// F(xi, B) = Tr(pi(xi) rho(B)) in O(p^n) from the sparse form of pi(xi).
inline Complex trace_F(const LatticeVector& xi, const FpMatrix& b, const WeilRep& rep) {
  QOperator pi = pi_op(xi, rep.modulus());
  QOperator r = rep.rho(b);
  if (r.is_generalized_permutation()) return (pi * r).trace();
  return pi.trace_with(r.dense_ref());
}

/// |F(xi, B) - F(S xi, S B S^{-1})|. When B or S B S^{-1} is only reached by a
/// Schur intertwiner its phase is arbitrary, and the magnitudes are compared.
inline double check_invariance(const LatticeVector& xi, const FpMatrix& b, const FpMatrix& s, const WeilRep& rep) {
  PhaseSpace space(rep.modulus());
  auto red = space.reduce(xi);
  auto sxi = s.apply(red);
  LatticeVector moved(sxi.begin(), sxi.end());
  FpMatrix conj = s * b * s.inverse();
  Complex lhs = trace_F(xi, b, rep), rhs = trace_F(moved, conj, rep);
  if (rep.has_word(b) && rep.has_word(conj)) return std::abs(lhs - rhs);
  return std::abs(std::abs(lhs) - std::abs(rhs));
}

/// F over all of F_p^{2n} x T; column k holds (F(xi_k, B))_B.
class TraceTable {
 public:
  TraceTable(const TorusRep& rep, const PrimeModulus& pm) : space_(pm), torus_size_(rep.torus().size()) {
    PhaseTable psi(pm.p());
    const auto nt = static_cast<Eigen::Index>(torus_size_);
    f_.resize(nt, static_cast<Eigen::Index>(space_.phase_points()));
    for (std::size_t k = 0; k < space_.phase_points(); ++k) {
      QOperator pi = pi_op(space_.decode_phase(k), pm, psi);
      for (Eigen::Index b = 0; b < nt; ++b) f_(b, static_cast<Eigen::Index>(k)) = pi.trace_with(rep.op(static_cast<std::size_t>(b)));
    }
  }

  const PhaseSpace& space() const { return space_; }
  std::size_t phase_points() const { return space_.phase_points(); }
  std::size_t torus_size() const { return torus_size_; }
  Complex operator()(std::size_t xi_index, std::size_t b) const {
    return f_(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(xi_index));
  }
  /// F(xi, B) for an unreduced lattice vector; reduction makes F periodic mod p.
  Complex at(const LatticeVector& xi, std::size_t b) const { return (*this)(space_.encode_phase(space_.reduce(xi)), b); }
  const Eigen::MatrixXcd& matrix() const { return f_; }

 private:
  PhaseSpace space_;
  std::size_t torus_size_;
  Eigen::MatrixXcd f_;
};

inline Complex character_sum(std::size_t xi_index, const TorusCharacter& chi, const HeckeTorus& t, const TraceTable& table) {
  Complex acc{0.0, 0.0};
  for (std::size_t b = 0; b < t.size(); ++b) acc += table(xi_index, b) * chi.value(t, b);
  return acc;
}

/// All a_chi(xi): row = character index, column = phase-point index.
inline Eigen::MatrixXcd all_character_sums(const HeckeTorus& t, const TraceTable& table) {
  return character_table(t) * table.matrix();
}

// ---------------------------------------------------------------------------
// per-prime analysis context
// ---------------------------------------------------------------------------

/// The objects shared by every check at one prime: A, rho and the torus.
class HeckeContext {
 public:
  HeckeContext(ErgodicElement a, Residue p, std::uint64_t seed = 1)
      : a_(std::move(a)),
        pm_(p, a_.n()),
        weil_(std::make_unique<WeilRep>(pm_, seed)),
        torus_(std::make_unique<HeckeTorus>(centralizer(a_, pm_))) {}

  const ErgodicElement& element() const { return a_; }
  const PrimeModulus& modulus() const { return pm_; }
  const WeilRep& weil() const { return *weil_; }
  const HeckeTorus& torus() const { return *torus_; }

 private:
  ErgodicElement a_;
  PrimeModulus pm_;
  std::unique_ptr<WeilRep> weil_;
  std::unique_ptr<HeckeTorus> torus_;
};

/// A linearization of rho on the torus plus everything derived from it.
class HeckeAnalysis {
 public:
  explicit HeckeAnalysis(const HeckeContext& ctx, const TorusLinearizationOptions& opt = {})
      : ctx_(&ctx),
        rep_(linearize_on_torus(ctx.torus(), ctx.weil(), opt)),
        table_(rep_, ctx.modulus()),
        sums_(all_character_sums(ctx.torus(), table_)) {}

  const HeckeContext& context() const { return *ctx_; }
  const TorusRep& rep() const { return rep_; }
  const TraceTable& table() const { return table_; }
  /// a_chi(xi) with chi along rows and xi along columns.
  const Eigen::MatrixXcd& sums() const { return sums_; }

  const EigenspaceDecomposition& decomposition() const {
    std::call_once(dec_once_, [this] { dec_ = std::make_unique<EigenspaceDecomposition>(decompose(rep_)); });
    return *dec_;
  }

 private:
  const HeckeContext* ctx_;
  TorusRep rep_;
  TraceTable table_;
  Eigen::MatrixXcd sums_;
  mutable std::once_flag dec_once_;
  mutable std::unique_ptr<EigenspaceDecomposition> dec_;
};

// ---------------------------------------------------------------------------
// bound verification
// ---------------------------------------------------------------------------

struct BoundWitness {
  std::vector<Residue> xi;
  std::size_t chi = 0;
  double value = 0.0;
  double bound = 0.0;
  std::string str() const {
    std::string s = "xi=(";
    for (std::size_t i = 0; i < xi.size(); ++i) s += (i ? "," : "") + std::to_string(xi[i]);
    return s + ") chi=" + std::to_string(chi) + " value=" + std::to_string(value) + " bound=" + std::to_string(bound);
  }
};

/// A trigonometric polynomial used for the averaged form of the bound.
struct QueFixture {
  std::string name;
  FourierPolynomial f;
};

/// Real trigonometric polynomials with Fourier support in {-1, 0, 1}^{2n}, so no
/// nonzero frequency reduces to 0 mod p.
inline std::vector<QueFixture> que_fixtures(int n) {
  const std::size_t d = static_cast<std::size_t>(2 * n);
  auto vec = [&](std::initializer_list<std::pair<std::size_t, long long>> entries) {
    LatticeVector v(d, 0);
    for (auto [i, c] : entries) v[i] = c;
    return v;
  };
  auto neg = [](LatticeVector v) {
    for (auto& c : v) c = -c;
    return v;
  };
  std::vector<QueFixture> out;
  {
    LatticeVector e = vec({{0, 1}});
    out.push_back({"cos(2 pi x1)", {{e, {0.5, 0.0}}, {neg(e), {0.5, 0.0}}}});
  }
  {
    LatticeVector e = vec({{0, 1}, {d - 1, 1}});
    LatticeVector g = vec({{0, 1}, {static_cast<std::size_t>(n), -1}});
    out.push_back({"0.3 + sin(2 pi (x1 + x2n)) + 0.5 cos(2 pi (x1 - x_{n+1}))",
                   {{vec({}), {0.3, 0.0}},
                    {e, {0.0, -0.5}},
                    {neg(e), {0.0, 0.5}},
                    {g, {0.25, 0.0}},
                    {neg(g), {0.25, 0.0}}}});
  }
  return out;
}

struct BoundReport {
  Residue p = 0;
  int n = 0;
  std::string split_type;
  std::size_t torus_order = 0;

  double bound = 0.0;      ///< 2^n p^{n/2}
  double max_abs = 0.0;    ///< max |a_chi(xi)| over xi != 0
  double max_ratio = 0.0;  ///< max |a_chi(xi)| / p^{n/2}
  BoundWitness argmax;
  std::size_t checked = 0;
  std::size_t violation_count = 0;          ///< all (xi, chi) over the bound
  std::size_t trivial_chi_violations = 0;   ///< of which chi = 1
  std::vector<BoundWitness> violations;     ///< first few witnesses

  /// Eigenvector form. With |T| = p^n it reads |<v|pi(xi)v>| <= 2^n p^{-n/2};
  /// in general the character-sum bound gives 2^n p^{n/2} / |T|, which is the
  /// bound checked here. The unabsorbed value is kept for comparison.
  double eigen_bound = 0.0;
  double eigen_bound_unabsorbed = 0.0;  ///< 2^n p^{-n/2}
  double eigen_max = 0.0;               ///< max |<v|pi(xi)v>| over one-dimensional H_chi, chi != 1
  std::size_t eigenvectors_checked = 0;
  std::size_t eigen_unabsorbed_violations = 0;
  std::vector<BoundWitness> eigen_violations;
  double eigen_identity_defect = 0.0;  ///< | |T| <v|pi(xi) v> - a_{conj chi}(xi) |
  double eigen_max_multidim = 0.0;     ///< same quantity over bases of larger H_chi (recorded only)

  double averaged_max_ratio = 0.0;  ///< max |<v|pi(f)v> - integral f| / (C_f p^{-n/2}), recorded only
  std::vector<std::string> averaged_violations;

  double xi0_defect = 0.0;       ///< max |a_chi(0) - |T| dim H_{conj chi}|
  double parseval_defect = 0.0;  ///< relative defect of sum_chi |a_chi|^2 = |T| sum_B |F|^2

  /// The bound holds everywhere and the internal cross-checks agree.
  bool pass() const { return violation_count == 0 && consistent(); }
  bool consistent() const { return xi0_defect < 1e-6 && parseval_defect < 1e-8 && eigen_identity_defect < 1e-8; }
};

inline TorusCharacter character_at(const HeckeTorus& t, std::size_t index) { return characters(t)[index]; }

inline BoundReport verify_que_bound(const HeckeAnalysis& an, double rel_tol = 1e-6) {
  const HeckeContext& ctx = an.context();
  const HeckeTorus& t = ctx.torus();
  const PrimeModulus& pm = ctx.modulus();
  const PhaseSpace& space = an.table().space();
  const double sqrt_pn = std::pow(static_cast<double>(pm.p()), 0.5 * pm.n());
  const double two_n = std::pow(2.0, pm.n());
  const auto chars = characters(t);

  BoundReport r;
  r.p = pm.p();
  r.n = pm.n();
  r.split_type = t.split().label();
  r.torus_order = t.size();
  r.bound = two_n * sqrt_pn;
  r.eigen_bound = r.bound / static_cast<double>(t.size());
  r.eigen_bound_unabsorbed = two_n / sqrt_pn;

  const Eigen::MatrixXcd& a = an.sums();
  for (Eigen::Index k = 1; k < a.cols(); ++k)
    for (Eigen::Index c = 0; c < a.rows(); ++c) {
      double v = std::abs(a(c, k));
      ++r.checked;
      if (v > r.max_abs) {
        r.max_abs = v;
        r.argmax = {space.decode_phase(static_cast<std::size_t>(k)), static_cast<std::size_t>(c), v, r.bound};
      }
      if (v > r.bound * (1.0 + rel_tol)) {
        ++r.violation_count;
        if (chars[static_cast<std::size_t>(c)].trivial()) ++r.trivial_chi_violations;
        if (r.violations.size() < 16)
          r.violations.push_back({space.decode_phase(static_cast<std::size_t>(k)), static_cast<std::size_t>(c), v, r.bound});
      }
    }
  r.max_ratio = r.max_abs / sqrt_pn;

  // Parseval per xi
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    double lhs = a.col(k).squaredNorm();
    double rhs = static_cast<double>(t.size()) * an.table().matrix().col(k).squaredNorm();
    r.parseval_defect = std::max(r.parseval_defect, std::abs(lhs - rhs) / std::max(1.0, rhs));
  }

  const EigenspaceDecomposition& dec = an.decomposition();
  for (std::size_t c = 0; c < chars.size(); ++c) {
    double expect = static_cast<double>(t.size() * dec.spaces[chars[c].conjugate().index()].dimension());
    r.xi0_defect = std::max(r.xi0_defect, std::abs(a(static_cast<Eigen::Index>(c), 0) - Complex(expect, 0.0)));
  }

  // eigenvector form, and the averaged form for the fixtures
  PhaseTable psi(pm.p());
  std::vector<QOperator> pis;
  pis.reserve(space.phase_points());
  for (std::size_t k = 0; k < space.phase_points(); ++k) pis.push_back(pi_op(space.decode_phase(k), pm, psi));
  auto fixtures = que_fixtures(pm.n());
  std::vector<DenseMatrix> quantized;
  std::vector<double> fixture_const;
  for (const auto& fx : fixtures) {
    quantized.push_back(quantize(fx.f, pm).to_dense());
    double cf = 0.0;
    for (const auto& [xi, coef] : fx.f)
      if (std::any_of(xi.begin(), xi.end(), [](long long v) { return v != 0; })) cf += std::abs(coef);
    fixture_const.push_back(two_n * cf);
  }
  for (std::size_t c = 0; c < dec.spaces.size(); ++c) {
    const Eigenspace& s = dec.spaces[c];
    if (s.dimension() == 0 || s.chi.trivial()) continue;
    const bool one_dim = s.dimension() == 1;
    for (Eigen::Index col = 0; col < s.basis.cols(); ++col) {
      DenseVector v = s.basis.col(col);
      if (one_dim) ++r.eigenvectors_checked;
      for (std::size_t k = 1; k < pis.size(); ++k) {
        Complex m = v.dot(pis[k].apply(v));
        double mag = std::abs(m);
        if (!one_dim) {
          r.eigen_max_multidim = std::max(r.eigen_max_multidim, mag);
          continue;
        }
        Complex via_sum = a(static_cast<Eigen::Index>(s.chi.conjugate().index()), static_cast<Eigen::Index>(k)) /
                          static_cast<double>(t.size());
        r.eigen_identity_defect = std::max(r.eigen_identity_defect, std::abs(m - via_sum) * static_cast<double>(t.size()));
        r.eigen_max = std::max(r.eigen_max, mag);
        if (mag > r.eigen_bound_unabsorbed * (1.0 + rel_tol)) ++r.eigen_unabsorbed_violations;
        if (mag > r.eigen_bound * (1.0 + rel_tol) && r.eigen_violations.size() < 16)
          r.eigen_violations.push_back({space.decode_phase(k), c, mag, r.eigen_bound});
      }
      if (!one_dim) continue;
      for (std::size_t f = 0; f < fixtures.size(); ++f) {
        Complex val = v.dot(quantized[f] * v);
        double dev = std::abs(val - integral(fixtures[f].f));
        double bnd = fixture_const[f] / sqrt_pn;
        r.averaged_max_ratio = std::max(r.averaged_max_ratio, dev / bnd);
        if (dev > bnd * (1.0 + rel_tol) && r.averaged_violations.size() < 16)
          r.averaged_violations.push_back(fixtures[f].name + " chi=" + std::to_string(c) + " dev=" + std::to_string(dev));
      }
    }
  }
  return r;
}

/// max over xi of the distance between the sorted multisets {|a_chi(xi)|}_chi
/// of two linearizations.
inline double twist_invariance_deviation(const HeckeAnalysis& x, const HeckeAnalysis& y) {
  const auto& a = x.sums();
  const auto& b = y.sums();
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("twist_invariance_deviation: shape mismatch");
  double worst = 0.0;
  std::vector<double> u(static_cast<std::size_t>(a.rows())), w(u.size());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    for (Eigen::Index c = 0; c < a.rows(); ++c) {
      u[static_cast<std::size_t>(c)] = std::abs(a(c, k));
      w[static_cast<std::size_t>(c)] = std::abs(b(c, k));
    }
    std::sort(u.begin(), u.end());
    std::sort(w.begin(), w.end());
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(u[i] - w[i]));
  }
  return worst;
}

/// The character eps of T with rho_y = eps rho_x, and the check that
/// a^y_chi = a^x_{chi eps} exactly; returns the largest deviation.
inline double twist_relabeling_deviation(const HeckeAnalysis& x, const HeckeAnalysis& y) {
  const HeckeTorus& t = x.context().torus();
  // eps(g_i) = rho_y(g_i) / rho_x(g_i) is a root of unity of order dividing N_i
  std::uint64_t shift[2] = {0, 0};
  for (std::size_t i = 0; i < t.generators().size(); ++i) {
    Complex ratio = y.rep().generator_scales()[i] / x.rep().generator_scales()[i];
    double turns = std::arg(ratio) / (2.0 * std::numbers::pi);
    auto n = static_cast<double>(t.orders()[i]);
    shift[i] = static_cast<std::uint64_t>(std::llround((turns - std::floor(turns)) * n)) % t.orders()[i];
  }
  TorusCharacter eps(shift[0], shift[1], t.orders()[0], t.orders()[1]);
  double worst = 0.0;
  for (const auto& chi : characters(t)) {
    auto row_y = y.sums().row(static_cast<Eigen::Index>(chi.index()));
    auto row_x = x.sums().row(static_cast<Eigen::Index>((chi * eps).index()));
    worst = std::max(worst, (row_y - row_x).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// split primes: explicit formulas
// ---------------------------------------------------------------------------

/// F_p^x with a fixed primitive root and a discrete-log table.
class MultiplicativeGroup {
 public:
  explicit MultiplicativeGroup(Residue p) : p_(p), dlog_(static_cast<std::size_t>(p), -1) {
    for (Residue g = 2; g < p || p == 3; ++g) {
      Residue x = 1;
      std::uint64_t k = 0;
      std::fill(dlog_.begin(), dlog_.end(), -1);
      bool ok = true;
      for (; k < static_cast<std::uint64_t>(p - 1); ++k) {
        if (dlog_[static_cast<std::size_t>(x)] != -1) {
          ok = false;
          break;
        }
        dlog_[static_cast<std::size_t>(x)] = static_cast<std::int64_t>(k);
        x = x * g % p;
      }
      if (ok) {
        generator_ = g;
        return;
      }
    }
    throw std::logic_error("MultiplicativeGroup: no primitive root");
  }
  Residue p() const { return p_; }
  Residue generator() const { return generator_; }
  std::uint64_t order() const { return static_cast<std::uint64_t>(p_ - 1); }
  std::uint64_t log(Residue a) const {
    Residue r = mod(a, p_);
    if (r == 0) throw std::domain_error("MultiplicativeGroup::log of zero");
    return static_cast<std::uint64_t>(dlog_[static_cast<std::size_t>(r)]);
  }
  /// chi_e(a) = exp(2 pi i e log(a) / (p - 1)).
  Complex character(std::uint64_t e, Residue a) const {
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>((e * log(a)) % order()) / static_cast<double>(order()));
  }
  /// Exponent of the Legendre symbol.
  std::uint64_t legendre_exponent() const { return order() / 2; }

 private:
  Residue p_;
  Residue generator_ = 0;
  std::vector<std::int64_t> dlog_;
};

/// Sign eps' with Tr(pi(lambda, mu) rho(diag(a, a^{-1}))) = sigma(a) psi(eps' (lambda mu / 2)(1 + a)/(1 - a)),
/// measured on the exact n = 1 representation at p (or at 5 when p = 3, where 1 + a always vanishes).
inline int measure_trace_orientation(Residue p) {
  if (p == 3) p = 5;
  WeilRep rep{PrimeModulus(p, 1)};
  PhaseTable psi(p);
  const Residue a = 2;
  FpMatrix d(2, 2, p, {a, 0, 0, inv_mod(a, p)});
  Complex tr = trace_F({1, 1}, d, rep);
  Residue c = (p + 1) / 2 * mod(1 + a, p) % p * inv_mod(mod(1 - a, p), p) % p;
  for (int eps : {1, -1})
    if (std::abs(tr - static_cast<double>(legendre(a, p)) * psi(eps * c)) < 1e-9) return eps;
  throw std::runtime_error("measure_trace_orientation: neither sign matches");
}

/// sigma(a) psi(eps' (lambda mu / 2) (1 + a) / (1 - a)).
inline Complex split_trace_formula(Residue lambda, Residue mu, Residue a, const PrimeModulus& pm, int eps_prime) {
  const Residue p = pm.p();
  a = mod(a, p);
  if (a == 0 || a == 1) throw std::invalid_argument("split_trace_formula: a must not be 0 or 1");
  Residue c = pm.nu() * mod(lambda * mu, p) % p * mod(1 + a, p) % p * inv_mod(mod(1 - a, p), p) % p;
  return static_cast<double>(legendre(a, p)) * PhaseTable(p)(eps_prime * c);
}

/// sum_{a != 0, 1} sigma(a) psi(c (1 + a) / (1 - a)) chi'(a), with chi' = chi_e.
inline Complex gauss_sum_oracle(Residue c, std::uint64_t chi_exponent, const MultiplicativeGroup& group) {
  const Residue p = group.p();
  PhaseTable psi(p);
  Complex acc{0.0, 0.0};
  for (Residue a = 2; a < p; ++a) {
    Residue t = mod(1 + a, p) * inv_mod(mod(1 - a, p), p) % p;
    acc += static_cast<double>(legendre(a, p)) * psi(mod(c, p) * t % p) * group.character(chi_exponent, a);
  }
  return acc;
}

/// Symplectic eigenbasis of A at a prime where P_A splits into distinct linear
/// factors: P = [v_1..v_n w_1..w_n] with A v_j = alpha_j v_j, A w_j = alpha_j^{-1} w_j
/// and omega(v_i, w_j) = delta_ij, so P^{-1} T P is the diagonal torus.
struct SplitConjugation {
  FpMatrix basis;    ///< P
  FpMatrix inverse;  ///< S = P^{-1}; the transported frequency is eta = S xi
  MultiplicativeGroup group;
  std::vector<std::vector<Residue>> coords;             ///< per torus element: (a_1, ..., a_n)
  std::vector<std::vector<std::uint64_t>> transported;  ///< per character: exponents (e_1, ..., e_n)

  /// Number of trivial transported components.
  int m(std::size_t chi) const {
    return static_cast<int>(std::count(transported[chi].begin(), transported[chi].end(), 0U));
  }
};

inline std::optional<SplitConjugation> split_conjugation(const HeckeTorus& t) {
  if (!t.split().split()) return std::nullopt;
  const Residue p = t.p();
  const int n = t.n();
  const std::size_t d = static_cast<std::size_t>(2 * n);
  const FpMatrix& a = t.a();
  FpPolynomial f = char_poly(a);
  std::vector<Residue> roots;
  for (Residue r = 1; r < p; ++r)
    if (f.eval(r) == 0) roots.push_back(r);
  if (roots.size() != d) return std::nullopt;
  std::vector<Residue> alphas;
  for (Residue r : roots)
    if (r < inv_mod(r, p)) alphas.push_back(r);
  if (alphas.size() != static_cast<std::size_t>(n)) return std::nullopt;

  FpMatrix pm(d, d, p);
  auto eigvec = [&](Residue lam) {
    auto k = (a - FpMatrix::identity(d, p).scaled(lam)).kernel();
    if (k.size() != 1) throw std::logic_error("split_conjugation: eigenspace is not a line");
    return k.front();
  };
  for (int j = 0; j < n; ++j) {
    auto v = eigvec(alphas[static_cast<std::size_t>(j)]);
    auto w = eigvec(inv_mod(alphas[static_cast<std::size_t>(j)], p));
    Residue om = symplectic_pairing(v, w, p);
    Residue scale = inv_mod(om, p);
    for (auto& c : w) c = c * scale % p;
    for (std::size_t i = 0; i < d; ++i) {
      pm(i, static_cast<std::size_t>(j)) = v[i];
      pm(i, static_cast<std::size_t>(n + j)) = w[i];
    }
  }
  if (!is_symplectic(pm)) throw std::logic_error("split_conjugation: eigenbasis is not symplectic");
  SplitConjugation sc{pm, pm.inverse(), MultiplicativeGroup(p), {}, {}};

  for (const auto& b : t.elements()) {
    FpMatrix diag = sc.inverse * b * pm;
    std::vector<Residue> c(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(j)] = diag(static_cast<std::size_t>(j), static_cast<std::size_t>(j));
    sc.coords.push_back(c);
  }
  // images of the standard torus generators g at coordinate j
  std::vector<std::size_t> gen_index;
  for (int j = 0; j < n; ++j) {
    std::vector<Residue> diag(d, 1);
    diag[static_cast<std::size_t>(j)] = sc.group.generator();
    diag[static_cast<std::size_t>(n + j)] = inv_mod(sc.group.generator(), p);
    FpMatrix dm(d, d, p);
    for (std::size_t i = 0; i < d; ++i) dm(i, i) = diag[i];
    auto idx = t.index_of(pm * dm * sc.inverse);
    if (!idx) throw std::logic_error("split_conjugation: diagonal element missing from the torus");
    gen_index.push_back(*idx);
  }
  for (const auto& chi : characters(t)) {
    std::vector<std::uint64_t> e;
    for (std::size_t idx : gen_index) {
      auto [e1, e2] = t.coords(idx);
      std::uint64_t num = chi.phase_numerator(e1, e2), den = chi.phase_denominator();
      std::uint64_t scaled = num * sc.group.order();
      if (scaled % den != 0) throw std::logic_error("split_conjugation: transported character not of order p - 1");
      e.push_back(scaled / den);
    }
    sc.transported.push_back(e);
  }
  return sc;
}

/// The n = 1 standard-torus character sum of the split convention,
/// sum_{a != 0} Tr(pi(lambda, mu) R_a) chi_e(a) with R_a f(x) = f(a^{-1} x):
/// the a = 1 term is the boundary term p [lambda = mu = 0].
struct StandardTorusSum {
  Complex oracle;    ///< the a != 0, 1 part, via gauss_sum_oracle
  Complex boundary;  ///< the a = 1 term
  Complex total() const { return oracle + boundary; }
};

inline StandardTorusSum standard_torus_sum(Residue lambda, Residue mu, std::uint64_t e, const MultiplicativeGroup& g,
                                           int eps_prime) {
  const Residue p = g.p();
  Residue c = mod(eps_prime * ((p + 1) / 2) % p * mod(lambda * mu, p), p);
  StandardTorusSum s;
  s.oracle = gauss_sum_oracle(c, (e + g.legendre_exponent()) % g.order(), g);
  s.boundary = (mod(lambda, p) == 0 && mod(mu, p) == 0) ? Complex(static_cast<double>(p), 0.0) : Complex(0.0, 0.0);
  return s;
}

struct RefinedReport {
  bool applicable = false;
  std::string reason;
  std::size_t generic_checked = 0;
  std::vector<std::size_t> generic_by_m;   ///< counts per m = 0..n
  std::vector<double> max_by_m;            ///< max |a_chi| over generic xi per m
  std::vector<double> bound_by_m;          ///< 2^n p^{(n - m)/2}
  std::vector<BoundWitness> violations;    ///< generic xi only
  double nongeneric_max_ratio = 0.0;       ///< max |a_chi| / refined bound over non-generic xi (recorded)
  std::size_t nongeneric_over_refined = 0;

  bool pass() const { return !applicable || violations.empty(); }
};

/// m(chi) and the refined bound |a_chi(xi)| <= 2^n p^{(n - m)/2} at split primes;
/// xi is generic when every pair (lambda_j, mu_j) of S xi has lambda_j mu_j != 0.
inline RefinedReport refined_bound(const HeckeAnalysis& an, double rel_tol = 1e-6) {
  RefinedReport r;
  const HeckeTorus& t = an.context().torus();
  auto sc = split_conjugation(t);
  if (!sc) {
    r.reason = "prime is not split (" + t.split().label() + ")";
    return r;
  }
  r.applicable = true;
  const int n = t.n();
  const Residue p = t.p();
  r.generic_by_m.assign(static_cast<std::size_t>(n + 1), 0);
  r.max_by_m.assign(static_cast<std::size_t>(n + 1), 0.0);
  for (int m = 0; m <= n; ++m)
    r.bound_by_m.push_back(std::pow(2.0, n) * std::pow(static_cast<double>(p), 0.5 * (n - m)));
  const PhaseSpace& space = an.table().space();
  for (std::size_t k = 1; k < space.phase_points(); ++k) {
    auto xi = space.decode_phase(k);
    auto eta = sc->inverse.apply(xi);
    bool generic = true;
    for (int j = 0; j < n; ++j) generic &= eta[static_cast<std::size_t>(j)] * eta[static_cast<std::size_t>(n + j)] % p != 0;
    for (std::size_t c = 0; c < t.size(); ++c) {
      int m = sc->m(c);
      double v = std::abs(an.sums()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)));
      double bound = r.bound_by_m[static_cast<std::size_t>(m)];
      if (generic) {
        ++r.generic_checked;
        ++r.generic_by_m[static_cast<std::size_t>(m)];
        r.max_by_m[static_cast<std::size_t>(m)] = std::max(r.max_by_m[static_cast<std::size_t>(m)], v);
        if (v > bound * (1.0 + rel_tol) + 1e-9 && r.violations.size() < 16) r.violations.push_back({xi, c, v, bound});
      } else {
        r.nongeneric_max_ratio = std::max(r.nongeneric_max_ratio, v / bound);
        if (v > bound * (1.0 + rel_tol) + 1e-9) ++r.nongeneric_over_refined;
      }
    }
  }
  return r;
}

struct TraceFormulaReport {
  int eps_prime = 0;
  std::size_t checked = 0;
  double max_deviation = 0.0;
  std::vector<std::string> witnesses;
};

/// Closed form against Tr(pi(lambda, mu) rho(diag(a, a^{-1}))) for all lambda, mu and a != 0, 1.
inline TraceFormulaReport check_trace_formula(const WeilRep& rep, int eps_prime, double tol = 1e-10) {
  const PrimeModulus& pm = rep.modulus();
  if (pm.n() != 1) throw std::invalid_argument("check_trace_formula: n = 1 only");
  const Residue p = pm.p();
  TraceFormulaReport r;
  r.eps_prime = eps_prime;
  for (Residue a = 2; a < p; ++a) {
    FpMatrix d(2, 2, p, {a, 0, 0, inv_mod(a, p)});
    for (Residue l = 0; l < p; ++l)
      for (Residue m = 0; m < p; ++m) {
        double dev = std::abs(trace_F({l, m}, d, rep) - split_trace_formula(l, m, a, pm, eps_prime));
        ++r.checked;
        r.max_deviation = std::max(r.max_deviation, dev);
        if (dev > tol && r.witnesses.size() < 8)
          r.witnesses.push_back("(lambda,mu,a)=(" + std::to_string(l) + "," + std::to_string(m) + "," + std::to_string(a) + ")");
      }
  }
  return r;
}

struct FactorizationReport {
  bool applicable = false;
  std::string reason;
  std::size_t generic_pairs = 0;
  std::size_t generic_raw_matches = 0;  ///< generic pairs matching the product of oracle sums alone
  std::size_t all_pairs = 0;
  std::size_t reconciled_matches = 0;   ///< all xi != 0 after adding the a = 1 boundary terms
  std::size_t raw_matches_all = 0;      ///< all xi != 0 without boundary terms
  double max_rel_deviation = 0.0;       ///< after reconciliation

  double generic_fraction() const { return generic_pairs ? static_cast<double>(generic_raw_matches) / generic_pairs : 0.0; }
  double reconciled_fraction() const { return all_pairs ? static_cast<double>(reconciled_matches) / all_pairs : 0.0; }
  double raw_fraction_all() const { return all_pairs ? static_cast<double>(raw_matches_all) / all_pairs : 0.0; }
  bool pass() const { return !applicable || (generic_fraction() >= 0.95 && reconciled_matches == all_pairs); }
};

/// a_chi(xi) against prod_j a^1_{chi'_j}(eta_j) with eta = S xi and chi' the
/// transported character, relative tolerance rel_tol.
inline FactorizationReport factorization_check(const HeckeAnalysis& an, int eps_prime, double rel_tol = 1e-6) {
  FactorizationReport r;
  const HeckeTorus& t = an.context().torus();
  auto sc = split_conjugation(t);
  if (!sc) {
    r.reason = "prime is not split (" + t.split().label() + ")";
    return r;
  }
  r.applicable = true;
  const int n = t.n();
  const Residue p = t.p();
  // one-dimensional sums for every exponent and (lambda, mu)
  const std::uint64_t order = sc->group.order();
  std::vector<StandardTorusSum> one(order * static_cast<std::uint64_t>(p * p));
  for (std::uint64_t e = 0; e < order; ++e)
    for (Residue l = 0; l < p; ++l)
      for (Residue m = 0; m < p; ++m)
        one[(e * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(l)) * static_cast<std::uint64_t>(p) +
            static_cast<std::uint64_t>(m)] = standard_torus_sum(l, m, e, sc->group, eps_prime);
  auto lookup = [&](std::uint64_t e, Residue l, Residue m) -> const StandardTorusSum& {
    return one[(e * static_cast<std::uint64_t>(p) + static_cast<std::uint64_t>(l)) * static_cast<std::uint64_t>(p) +
               static_cast<std::uint64_t>(m)];
  };
  const PhaseSpace& space = an.table().space();
  for (std::size_t k = 1; k < space.phase_points(); ++k) {
    auto eta = sc->inverse.apply(space.decode_phase(k));
    bool generic = true;
    for (int j = 0; j < n; ++j) generic &= eta[static_cast<std::size_t>(j)] * eta[static_cast<std::size_t>(n + j)] % p != 0;
    for (std::size_t c = 0; c < t.size(); ++c) {
      Complex raw(1.0, 0.0), full(1.0, 0.0);
      for (int j = 0; j < n; ++j) {
        const auto& s = lookup(sc->transported[c][static_cast<std::size_t>(j)], eta[static_cast<std::size_t>(j)],
                               eta[static_cast<std::size_t>(n + j)]);
        raw *= s.oracle;
        full *= s.total();
      }
      Complex lhs = an.sums()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k));
      double dev_raw = std::abs(lhs - raw) / std::max(1.0, std::abs(raw));
      double dev_full = std::abs(lhs - full) / std::max(1.0, std::abs(full));
      ++r.all_pairs;
      r.max_rel_deviation = std::max(r.max_rel_deviation, dev_full);
      if (dev_full <= rel_tol) ++r.reconciled_matches;
      if (dev_raw <= rel_tol) ++r.raw_matches_all;
      if (generic) {
        ++r.generic_pairs;
        if (dev_raw <= rel_tol) ++r.generic_raw_matches;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// cyclic versus Hecke averaging
// ---------------------------------------------------------------------------

struct DemoRow {
  std::string kind;  ///< "hecke" (joint eigenvector) or "cyclic" (eigenvector of rho(A) only)
  std::string label;
  Complex cyclic_average;  ///< <v| (1/|<A>|) sum_{B in <A>} rho(B) pi(xi) rho(B)^{-1} |v>
  Complex hecke_average;   ///< <v| (1/|T|) sum_{B in T} rho(B) pi(xi) rho(B)^{-1} |v>
  double integral = 0.0;
};

struct DemoReport {
  std::size_t cyclic_order = 0;  ///< |<A>| (mod p)
  std::size_t torus_order = 0;
  std::vector<Residue> xi;
  double bound = 0.0;  ///< 2^n p^{n/2} / |T|
  std::vector<DemoRow> rows;
  std::size_t bound_violations = 0;  ///< rows whose Hecke column exceeds the bound
};

/// For each Hecke eigenvector in a one-dimensional H_chi (chi != 1), and for
/// each eigenvalue of rho(A) shared by several of them, the <A>-average and the
/// C_A-average of <v|pi(xi)v>. The integral of a nonzero character is 0.
inline DemoReport cyclic_vs_hecke_demo(const HeckeAnalysis& an, const std::vector<Residue>& xi, double rel_tol = 1e-6) {
  const HeckeContext& ctx = an.context();
  const HeckeTorus& t = ctx.torus();
  const PrimeModulus& pm = ctx.modulus();
  DemoReport r;
  r.xi = xi;
  r.torus_order = t.size();
  r.bound = std::pow(2.0, pm.n()) * std::pow(static_cast<double>(pm.p()), 0.5 * pm.n()) / static_cast<double>(t.size());
  std::size_t a_index = *t.index_of(t.a());
  std::vector<std::size_t> cyc;
  for (std::size_t b = 0;; b = t.product(b, a_index)) {
    if (!cyc.empty() && b == 0) break;
    cyc.push_back(b);
  }
  r.cyclic_order = cyc.size();
  QOperator pi = pi_op(xi, pm, PhaseTable(pm.p()));
  auto average = [&](const std::vector<std::size_t>& group, const DenseVector& v) {
    Complex acc{0.0, 0.0};
    for (std::size_t b : group) {
      DenseVector w = an.rep().op(b).adjoint() * v;
      acc += w.dot(pi.apply(w));
    }
    return acc / static_cast<double>(group.size());
  };
  std::vector<std::size_t> all(t.size());
  for (std::size_t b = 0; b < t.size(); ++b) all[b] = b;

  const auto& dec = an.decomposition();
  std::map<std::uint64_t, std::vector<std::size_t>> by_a_eigenvalue;  // chi(A) phase numerator -> spaces
  for (std::size_t c = 0; c < dec.spaces.size(); ++c) {
    const auto& s = dec.spaces[c];
    if (s.dimension() != 1 || s.chi.trivial()) continue;
    DenseVector v = s.basis.col(0);
    DemoRow row{"hecke", "chi=" + std::to_string(c), average(cyc, v), average(all, v), 0.0};
    if (std::abs(row.hecke_average) > r.bound * (1.0 + rel_tol)) ++r.bound_violations;
    r.rows.push_back(row);
    auto [e1, e2] = t.coords(a_index);
    by_a_eigenvalue[s.chi.phase_numerator(e1, e2)].push_back(c);
  }
  for (const auto& [phase, spaces] : by_a_eigenvalue) {
    if (spaces.size() < 2) continue;
    DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(pm.dim()));
    for (std::size_t c : spaces) v += dec.spaces[c].basis.col(0);
    v.normalize();
    DemoRow row{"cyclic", "rho(A)-eigenspace mixing " + std::to_string(spaces.size()) + " characters", average(cyc, v),
                average(all, v), 0.0};
    if (std::abs(row.hecke_average) > r.bound * (1.0 + rel_tol)) ++r.bound_violations;
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace torusq
