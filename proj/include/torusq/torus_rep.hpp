#pragma once

/**
 * @file torus_rep.hpp
 * @brief A genuine (not just projective) representation of a Hecke torus.
 *
 * Each torus generator g of order N gets an operator M_g from WeilRep::rho
 * (exact formulas where available, a Schur intertwiner otherwise). M_g^N is a
 * scalar c; M_g is rescaled by an N-th root of 1/c, and the remaining N-fold
 * choice of root is the "root choice". The default fixes each generator's
 * trace to be a positive multiple of a reference sign (see RootChoice); the
 * result satisfies Tr rho(B) = sign(B) p^{dim ker(B - I) / 2} on the whole
 * torus. Any two choices differ by a character of the torus.
 */

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "torusq/hecke.hpp"
#include "torusq/weil.hpp"

namespace torusq {

enum class RootChoice {
  /// Per generator, the root making Tr rho(g) closest to reference_sign(g) times
  /// a positive number. Anisotropic torus factors contribute -1, so for n = 1
  /// traces are +1 (split) or -1 (nonsplit) away from the identity, and the
  /// exceptional eigenspace sits at the trivial character.
  kReferenceSign,
  /// Per generator, the root making Tr rho(g) closest to the positive real axis.
  kPositiveTrace,
  /// The restriction of WeilRep::rho itself; needs exact words for every element (n = 1).
  kRestriction,
};

struct TorusLinearizationOptions {
  RootChoice choice = RootChoice::kReferenceSign;
  /// Extra twist: generator i is multiplied by exp(2 pi i shift_i / N_i).
  std::vector<std::uint64_t> shifts{0, 0};
};

class TorusRep {
 public:
  TorusRep(const HeckeTorus& torus, std::vector<DenseMatrix> ops, std::vector<Complex> generator_scales, RootChoice choice)
      : torus_(&torus), ops_(std::move(ops)), scales_(std::move(generator_scales)), choice_(choice) {
    traces_.reserve(ops_.size());
    for (const auto& m : ops_) traces_.push_back(m.trace());
  }

  const HeckeTorus& torus() const { return *torus_; }
  std::size_t dim() const { return static_cast<std::size_t>(ops_.front().rows()); }
  const DenseMatrix& op(std::size_t element) const { return ops_[element]; }
  Complex trace(std::size_t element) const { return traces_[element]; }
  /// Scalars applied to the raw generator operators.
  const std::vector<Complex>& generator_scales() const { return scales_; }
  RootChoice choice() const { return choice_; }

  /// max over elements of |arg Tr rho(B)|, 0 when every trace is positive.
  double max_trace_angle() const {
    double worst = 0.0;
    for (const auto& t : traces_) worst = std::max(worst, std::abs(std::arg(t)));
    return worst;
  }

  /// max over B of |Tr rho(B) - reference_sign(B) p^{dim ker(B - I) / 2}|.
  double reference_trace_defect() const {
    double worst = 0.0;
    const double p = static_cast<double>(torus_->p());
    for (std::size_t b = 0; b < traces_.size(); ++b) {
      const FpMatrix& m = torus_->element(b);
      double fixed = static_cast<double>((m - FpMatrix::identity(m.rows(), m.modulus())).kernel().size());
      worst = std::max(worst, std::abs(traces_[b] - Complex(torus_->reference_sign(b) * std::pow(p, 0.5 * fixed), 0.0)));
    }
    return worst;
  }

  /// max |rho(B1) rho(B2) - rho(B1 B2)| over all pairs of generators and elements.
  double homomorphism_defect() const {
    double worst = 0.0;
    for (const auto& g : torus_->generators()) {
      std::size_t gi = *torus_->index_of(g);
      for (std::size_t b = 0; b < ops_.size(); ++b) {
        std::size_t prod = torus_->product(gi, b);
        worst = std::max(worst, (ops_[gi] * ops_[b] - ops_[prod]).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }

 private:
  const HeckeTorus* torus_;
  std::vector<DenseMatrix> ops_;
  std::vector<Complex> scales_;
  RootChoice choice_;
  std::vector<Complex> traces_;
};

namespace detail {

inline Complex root_of_unity(double numerator, double denominator) {
  return std::polar(1.0, 2.0 * std::numbers::pi * numerator / denominator);
}

inline DenseMatrix matrix_power(const DenseMatrix& m, std::uint64_t e) {
  DenseMatrix acc = DenseMatrix::Identity(m.rows(), m.cols()), base = m;
  while (e > 0) {
    if (e & 1U) acc = acc * base;
    base = base * base;
    e >>= 1U;
  }
  return acc;
}

}  // namespace detail

/// Linearize rho on the torus. Throws if M_g^N is not scalar or the generator
/// operators do not commute.
inline TorusRep linearize_on_torus(const HeckeTorus& torus, const WeilRep& rep, const TorusLinearizationOptions& opt = {}) {
  const double tol = 1e-8;
  const std::size_t ng = torus.cyclic() ? 1 : 2;
  std::vector<DenseMatrix> gens;
  std::vector<Complex> scales;
  for (std::size_t i = 0; i < ng; ++i) {
    const FpMatrix& g = torus.generators()[i];
    const std::uint64_t order = torus.orders()[i];
    DenseMatrix m = rep.rho(g).to_dense();
    Complex scale(1.0, 0.0);
    if (opt.choice != RootChoice::kRestriction) {
      DenseMatrix mn = detail::matrix_power(m, order);
      Complex c = mn(0, 0);
      if ((mn - c * DenseMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("linearize_on_torus: M_g^N is not scalar for g = " + g.str());
      Complex base = std::polar(1.0, -std::arg(c) / static_cast<double>(order));
      double target = opt.choice == RootChoice::kReferenceSign ? reference_trace_sign(torus.factors(), g) : 1.0;
      Complex tr = target * base * m.trace();
      // the N-th root of unity zeta maximizing Re(zeta tr) / |tr|
      double best = -2.0;
      for (std::uint64_t k = 0; k < order; ++k) {
        Complex z = detail::root_of_unity(static_cast<double>(k), static_cast<double>(order));
        double score = (z * tr).real() / std::abs(tr);
        if (score > best + 1e-12) {
          best = score;
          scale = base * z;
        }
      }
    } else if (!rep.has_word(g)) {
      throw std::invalid_argument("linearize_on_torus: restriction needs exact words for every generator");
    }
    std::uint64_t shift = i < opt.shifts.size() ? opt.shifts[i] : 0;
    scale *= detail::root_of_unity(static_cast<double>(shift % order), static_cast<double>(order));
    m *= scale;
    if ((detail::matrix_power(m, order) - DenseMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() > tol)
      throw std::runtime_error("linearize_on_torus: rho(g)^N != I after rescaling for g = " + g.str());
    gens.push_back(std::move(m));
    scales.push_back(scale);
  }
  if (ng == 2 && (gens[0] * gens[1] - gens[1] * gens[0]).cwiseAbs().maxCoeff() > tol)
    throw std::runtime_error("linearize_on_torus: generator operators do not commute");

  std::vector<DenseMatrix> ops(torus.size());
  const auto d = static_cast<Eigen::Index>(rep.modulus().dim());
  DenseMatrix b2 = DenseMatrix::Identity(d, d);
  for (std::uint64_t e2 = 0; e2 < torus.orders()[1]; ++e2) {
    DenseMatrix acc = b2;
    for (std::uint64_t e1 = 0; e1 < torus.orders()[0]; ++e1) {
      ops[torus.index(e1, e2)] = acc;
      acc = acc * gens[0];
    }
    if (ng == 2) b2 = b2 * gens[1];
  }
  if (opt.choice == RootChoice::kRestriction) {
    // every element must agree with the exactly linearized rho
    for (std::size_t b = 0; b < torus.size(); ++b) {
      if (!rep.has_word(torus.element(b))) throw std::invalid_argument("linearize_on_torus: restriction needs exact words");
    }
  }
  return TorusRep(torus, std::move(ops), std::move(scales), opt.choice);
}

/// max over B in T of |TorusRep(B) - rep.rho(B)|, for comparing a linearization
/// with the restriction of an exact one.
inline double restriction_deviation(const TorusRep& tr, const WeilRep& rep) {
  double worst = 0.0;
  for (std::size_t b = 0; b < tr.torus().size(); ++b)
    worst = std::max(worst, (tr.op(b) - rep.rho(tr.torus().element(b)).to_dense()).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace torusq
