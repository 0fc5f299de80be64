#pragma once

/**
 * @file heisenberg.hpp
 * @brief The quantum torus at Planck constant 1/p.
 *
 * Operators act on functions F_p^n -> C, stored as vectors of length p^n with
 * x = (x_1, ..., x_n) encoded as x_1 + x_2 p + ... + x_n p^{n-1}.
 *
 * A lattice vector xi = (lambda, mu) in Z^n x Z^n is reduced mod p and acts by
 *
 *     (pi(lambda, mu) f)(x) = psi(nu * lambda.mu + mu.x) f(x + lambda),
 *
 * with psi(t) = exp(2 pi i t / p) and nu = (p+1)/2. These operators are
 * generalized permutations: one unimodular entry per row and column.
 */

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "torusq/classical.hpp"
#include "torusq/ffcore.hpp"

namespace torusq {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

/// psi(k) = exp(2 pi i k / p) from a precomputed table, so every phase is an exact
/// function of an integer exponent.
class PhaseTable {
 public:
  explicit PhaseTable(Residue p) : p_(p), roots_(static_cast<std::size_t>(p)) {
    for (Residue k = 0; k < p; ++k)
      roots_[static_cast<std::size_t>(k)] = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(p));
  }
  Complex operator()(Residue k) const { return roots_[static_cast<std::size_t>(mod(k, p_))]; }
  Residue modulus() const { return p_; }

 private:
  Residue p_;
  std::vector<Complex> roots_;
};

/// Coordinates on F_p^n and F_p^{2n}.
class PhaseSpace {
 public:
  explicit PhaseSpace(const PrimeModulus& pm) : p_(pm.p()), n_(pm.n()), dim_(pm.dim()) {}

  std::size_t dim() const { return dim_; }
  /// p^{2n}, the number of reduced lattice vectors.
  std::size_t phase_points() const { return dim_ * dim_; }

  std::vector<Residue> decode(std::size_t idx) const {
    std::vector<Residue> x(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<Residue>(idx % static_cast<std::size_t>(p_));
      idx /= static_cast<std::size_t>(p_);
    }
    return x;
  }

  std::size_t encode(const std::vector<Residue>& x) const {
    std::size_t idx = 0;
    for (int i = n_ - 1; i >= 0; --i) idx = idx * static_cast<std::size_t>(p_) + static_cast<std::size_t>(mod(x[static_cast<std::size_t>(i)], p_));
    return idx;
  }

  /// xi = (lambda, mu) as 2n residues; index = lambda_idx + p^n * mu_idx.
  std::vector<Residue> decode_phase(std::size_t idx) const {
    auto lam = decode(idx % dim_);
    auto mu = decode(idx / dim_);
    lam.insert(lam.end(), mu.begin(), mu.end());
    return lam;
  }

  std::size_t encode_phase(const std::vector<Residue>& xi) const {
    std::vector<Residue> lam(xi.begin(), xi.begin() + n_), mu(xi.begin() + n_, xi.end());
    return encode(lam) + dim_ * encode(mu);
  }

  std::vector<Residue> reduce(const LatticeVector& xi) const {
    if (xi.size() != static_cast<std::size_t>(2 * n_)) throw std::invalid_argument("PhaseSpace: lattice vector has wrong length");
    std::vector<Residue> out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = mod(static_cast<Residue>(xi[i] % p_), p_);
    return out;
  }

 private:
  Residue p_;
  int n_;
  std::size_t dim_;
};

/// An operator on the p^n-dimensional quantum space. Generalized permutations
/// keep their sparse form (row x has its only entry `values[x]` in column
/// `cols[x]`); everything else is dense.
class QOperator {
 public:
  enum class Kind { kGeneralizedPermutation, kDense };

  static QOperator generalized_permutation(std::vector<std::size_t> cols, std::vector<Complex> values) {
    if (cols.size() != values.size()) throw std::invalid_argument("QOperator: size mismatch");
    QOperator q;
    q.kind_ = Kind::kGeneralizedPermutation;
    q.dim_ = cols.size();
    q.cols_ = std::move(cols);
    q.values_ = std::move(values);
    return q;
  }

  static QOperator dense(DenseMatrix m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("QOperator: dense operator must be square");
    QOperator q;
    q.kind_ = Kind::kDense;
    q.dim_ = static_cast<std::size_t>(m.rows());
    q.dense_ = std::move(m);
    return q;
  }

  static QOperator identity(std::size_t dim) {
    std::vector<std::size_t> cols(dim);
    for (std::size_t i = 0; i < dim; ++i) cols[i] = i;
    return generalized_permutation(std::move(cols), std::vector<Complex>(dim, Complex(1.0, 0.0)));
  }

  Kind kind() const { return kind_; }
  bool is_generalized_permutation() const { return kind_ == Kind::kGeneralizedPermutation; }
  std::size_t dim() const { return dim_; }
  const std::vector<std::size_t>& cols() const { return cols_; }
  const std::vector<Complex>& values() const { return values_; }

  DenseMatrix to_dense() const {
    if (kind_ == Kind::kDense) return dense_;
    DenseMatrix m = DenseMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (std::size_t x = 0; x < dim_; ++x) m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(cols_[x])) = values_[x];
    return m;
  }

  const DenseMatrix& dense_ref() const {
    if (kind_ != Kind::kDense) throw std::logic_error("QOperator::dense_ref on sparse operator");
    return dense_;
  }

  Complex trace() const {
    Complex t{0.0, 0.0};
    if (kind_ == Kind::kDense) return dense_.trace();
    for (std::size_t x = 0; x < dim_; ++x)
      if (cols_[x] == x) t += values_[x];
    return t;
  }

  QOperator adjoint() const {
    if (kind_ == Kind::kDense) return dense(dense_.adjoint());
    std::vector<std::size_t> cols(dim_);
    std::vector<Complex> vals(dim_);
    for (std::size_t x = 0; x < dim_; ++x) {
      cols[cols_[x]] = x;
      vals[cols_[x]] = std::conj(values_[x]);
    }
    return generalized_permutation(std::move(cols), std::move(vals));
  }

  QOperator scaled(Complex s) const {
    QOperator q = *this;
    if (kind_ == Kind::kDense) {
      q.dense_ *= s;
    } else {
      for (auto& v : q.values_) v *= s;
    }
    return q;
  }

  friend QOperator operator*(const QOperator& a, const QOperator& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("QOperator: dimension mismatch");
    if (a.is_generalized_permutation() && b.is_generalized_permutation()) {
      std::vector<std::size_t> cols(a.dim_);
      std::vector<Complex> vals(a.dim_);
      for (std::size_t x = 0; x < a.dim_; ++x) {
        std::size_t mid = a.cols_[x];
        cols[x] = b.cols_[mid];
        vals[x] = a.values_[x] * b.values_[mid];
      }
      return generalized_permutation(std::move(cols), std::move(vals));
    }
    if (a.is_generalized_permutation()) return dense(a.left_apply(b.dense_));
    if (b.is_generalized_permutation()) return dense(b.right_apply(a.dense_));
    return dense(a.dense_ * b.dense_);
  }

  /// this * m for a generalized permutation.
  DenseMatrix left_apply(const DenseMatrix& m) const {
    DenseMatrix out(m.rows(), m.cols());
    for (std::size_t x = 0; x < dim_; ++x)
      out.row(static_cast<Eigen::Index>(x)) = values_[x] * m.row(static_cast<Eigen::Index>(cols_[x]));
    return out;
  }

  /// m * this for a generalized permutation.
  DenseMatrix right_apply(const DenseMatrix& m) const {
    DenseMatrix out = DenseMatrix::Zero(m.rows(), m.cols());
    for (std::size_t x = 0; x < dim_; ++x)
      out.col(static_cast<Eigen::Index>(cols_[x])) = m.col(static_cast<Eigen::Index>(x)) * values_[x];
    return out;
  }

  DenseVector apply(const DenseVector& v) const {
    if (kind_ == Kind::kDense) return dense_ * v;
    DenseVector out(v.size());
    for (std::size_t x = 0; x < dim_; ++x) out(static_cast<Eigen::Index>(x)) = values_[x] * v(static_cast<Eigen::Index>(cols_[x]));
    return out;
  }

  /// Tr(this * m) in O(dim) for a generalized permutation.
  Complex trace_with(const DenseMatrix& m) const {
    if (kind_ == Kind::kDense) return (dense_ * m).trace();
    Complex t{0.0, 0.0};
    for (std::size_t x = 0; x < dim_; ++x) t += values_[x] * m(static_cast<Eigen::Index>(cols_[x]), static_cast<Eigen::Index>(x));
    return t;
  }

  double max_abs_diff(const QOperator& other) const {
    if (is_generalized_permutation() && other.is_generalized_permutation()) {
      double worst = 0.0;
      for (std::size_t x = 0; x < dim_; ++x) {
        if (cols_[x] != other.cols_[x]) return std::max({worst, std::abs(values_[x]), std::abs(other.values_[x])});
        worst = std::max(worst, std::abs(values_[x] - other.values_[x]));
      }
      return worst;
    }
    return (to_dense() - other.to_dense()).cwiseAbs().maxCoeff();
  }

  double unitarity_defect() const {
    if (is_generalized_permutation()) {
      double worst = 0.0;
      std::vector<bool> seen(dim_, false);
      for (std::size_t x = 0; x < dim_; ++x) {
        if (seen[cols_[x]]) return 1.0;
        seen[cols_[x]] = true;
        worst = std::max(worst, std::abs(std::abs(values_[x]) - 1.0));
      }
      return worst;
    }
    DenseMatrix prod = dense_ * dense_.adjoint();
    return (prod - DenseMatrix::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff();
  }

 private:
  Kind kind_ = Kind::kDense;
  std::size_t dim_ = 0;
  std::vector<std::size_t> cols_;
  std::vector<Complex> values_;
  DenseMatrix dense_;
};

/// pi(xi) for a reduced xi = (lambda, mu) in F_p^{2n}.
inline QOperator pi_op(const std::vector<Residue>& xi, const PrimeModulus& pm, const PhaseTable& psi) {
  const int n = pm.n();
  const Residue p = pm.p();
  if (xi.size() != static_cast<std::size_t>(2 * n)) throw std::invalid_argument("pi_op: xi must have 2n coordinates");
  PhaseSpace space(pm);
  std::vector<Residue> lam(xi.begin(), xi.begin() + n), mu(xi.begin() + n, xi.end());
  Residue lm = 0;
  for (int i = 0; i < n; ++i) lm += mod(lam[i], p) * mod(mu[i], p);
  Residue base = pm.nu() * mod(lm, p) % p;
  std::vector<std::size_t> cols(pm.dim());
  std::vector<Complex> vals(pm.dim());
  for (std::size_t idx = 0; idx < pm.dim(); ++idx) {
    auto x = space.decode(idx);
    Residue phase = base;
    for (int i = 0; i < n; ++i) {
      phase += mod(mu[i], p) * x[i];
      x[i] = mod(x[i] + lam[i], p);
    }
    cols[idx] = space.encode(x);
    vals[idx] = psi(phase);
  }
  return QOperator::generalized_permutation(std::move(cols), std::move(vals));
}

/// pi(xi) for an integer lattice vector; xi is reduced mod p first, so
/// pi(xi + p eta) and pi(xi) are the same operator.
inline QOperator pi_op(const LatticeVector& xi, const PrimeModulus& pm) {
  return pi_op(PhaseSpace(pm).reduce(xi), pm, PhaseTable(pm.p()));
}

/// Result of the exhaustive check of pi(xi) pi(eta) = psi(eps nu omega(xi, eta)) pi(xi + eta).
struct RelationReport {
  int epsilon = 0;  ///< measured orientation sign
  std::size_t pairs = 0;
  double max_deviation = 0.0;
  std::size_t failures = 0;
  std::vector<std::pair<std::size_t, std::size_t>> witnesses;  ///< phase-point indices of failing pairs
};

/// Orientation sign eps for which pi(xi) pi(eta) = psi(eps nu omega(xi, eta)) pi(xi + eta).
inline int measure_relation_sign(const PrimeModulus& pm) {
  PhaseTable psi(pm.p());
  std::vector<Residue> xi(2 * pm.n(), 0), eta(2 * pm.n(), 0);
  xi[0] = 1;                             // lambda_1 = 1
  eta[static_cast<std::size_t>(pm.n())] = 1;  // mu_1 = 1, omega(xi, eta) = 1
  std::vector<Residue> sum(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) sum[i] = xi[i] + eta[i];
  QOperator lhs = pi_op(xi, pm, psi) * pi_op(eta, pm, psi);
  QOperator rhs = pi_op(sum, pm, psi);
  Residue w = symplectic_pairing(xi, eta, pm.p());
  for (int eps : {1, -1})
    if (lhs.max_abs_diff(rhs.scaled(psi(eps * pm.nu() * w))) < 1e-9) return eps;
  throw std::runtime_error("measure_relation_sign: neither orientation matches");
}

inline RelationReport check_relations(const PrimeModulus& pm, double tolerance = 1e-10) {
  PhaseTable psi(pm.p());
  PhaseSpace space(pm);
  RelationReport rep;
  rep.epsilon = measure_relation_sign(pm);
  std::size_t count = space.phase_points();
  std::vector<QOperator> ops;
  std::vector<std::vector<Residue>> pts;
  ops.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    pts.push_back(space.decode_phase(i));
    ops.push_back(pi_op(pts.back(), pm, psi));
  }
  std::vector<Residue> sum(2 * pm.n());
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = mod(pts[i][k] + pts[j][k], pm.p());
      Complex phase = psi(rep.epsilon * pm.nu() * symplectic_pairing(pts[i], pts[j], pm.p()));
      double dev = (ops[i] * ops[j]).max_abs_diff(ops[space.encode_phase(sum)].scaled(phase));
      rep.max_deviation = std::max(rep.max_deviation, dev);
      ++rep.pairs;
      if (dev > tolerance) {
        ++rep.failures;
        if (rep.witnesses.size() < 8) rep.witnesses.emplace_back(i, j);
      }
    }
  return rep;
}

/// Finitely supported Fourier series f = sum a_xi e^{2 pi i <xi, .>}.
using FourierPolynomial = std::map<LatticeVector, Complex>;

/// The coefficient at xi = 0, i.e. the integral of f over the torus.
inline Complex integral(const FourierPolynomial& f) {
  for (const auto& [xi, a] : f)
    if (std::all_of(xi.begin(), xi.end(), [](long long c) { return c == 0; })) return a;
  return {0.0, 0.0};
}

/// sum a_xi pi(xi).
inline QOperator quantize(const FourierPolynomial& f, const PrimeModulus& pm) {
  DenseMatrix acc = DenseMatrix::Zero(static_cast<Eigen::Index>(pm.dim()), static_cast<Eigen::Index>(pm.dim()));
  PhaseTable psi(pm.p());
  PhaseSpace space(pm);
  for (const auto& [xi, a] : f) {
    QOperator op = pi_op(space.reduce(xi), pm, psi);
    for (std::size_t x = 0; x < pm.dim(); ++x)
      acc(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(op.cols()[x])) += a * op.values()[x];
  }
  return QOperator::dense(std::move(acc));
}

struct SelfAdjointnessReport {
  double hermitian_defect = 0.0;   ///< max |Q - Q^dagger|
  Complex phase_correction{1.0, 0.0};  ///< pi(-xi) = phase_correction * pi(xi)^dagger (worst over support)
};

/// Self-adjointness of quantize(f) for real f (a_{-xi} = conj a_xi), with the
/// phase relating pi(-xi) to pi(xi)^dagger recorded.
inline SelfAdjointnessReport check_self_adjoint(const FourierPolynomial& f, const PrimeModulus& pm) {
  SelfAdjointnessReport rep;
  QOperator q = quantize(f, pm);
  rep.hermitian_defect = (q.to_dense() - q.to_dense().adjoint()).cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (const auto& [xi, a] : f) {
    (void)a;
    LatticeVector neg(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) neg[i] = -xi[i];
    QOperator plus = pi_op(xi, pm), minus = pi_op(neg, pm);
    QOperator adj = plus.adjoint();
    // ratio of the first nonzero entries
    Complex ratio = minus.values()[0] / adj.values()[0];
    double dev = std::abs(ratio - Complex(1.0, 0.0));
    if (dev >= worst) {
      worst = dev;
      rep.phase_correction = ratio;
    }
  }
  return rep;
}

}  // namespace torusq
