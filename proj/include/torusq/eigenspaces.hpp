#pragma once

/**
 * @file eigenspaces.hpp
 * @brief Hecke eigenspaces: projectors, the decomposition H = (+) H_chi and Hecke averaging.
 *
 * H_chi = {v : rho(B) v = chi(B) v for all B in T}. Its orthogonal projector is
 * (1/|T|) sum_B conj(chi(B)) rho(B).
 */

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "torusq/heisenberg.hpp"
#include "torusq/torus_rep.hpp"

namespace torusq {

inline DenseMatrix projector(const TorusCharacter& chi, const TorusRep& rep) {
  const auto d = static_cast<Eigen::Index>(rep.dim());
  DenseMatrix p = DenseMatrix::Zero(d, d);
  for (std::size_t b = 0; b < rep.torus().size(); ++b) p += std::conj(chi.value(rep.torus(), b)) * rep.op(b);
  return p / static_cast<double>(rep.torus().size());
}

struct Eigenspace {
  TorusCharacter chi;
  DenseMatrix basis;  ///< dim x k, orthonormal columns
  std::size_t dimension() const { return static_cast<std::size_t>(basis.cols()); }
};

struct EigenspaceDecomposition {
  std::vector<Eigenspace> spaces;  ///< one per character, in characters(T) order
  std::size_t total_dimension = 0;
  double max_idempotency_defect = 0.0;   ///< max |P^2 - P|
  double max_hermitian_defect = 0.0;     ///< max |P - P^dagger|
  double max_trace_rank_defect = 0.0;    ///< max |Tr P - rank|
  double completeness_defect = 0.0;      ///< |sum_chi P_chi - I|
  double max_eigen_residual = 0.0;       ///< max |rho(B) v - chi(B) v|
  double max_cross_overlap = 0.0;        ///< max |<v, v'>| across different characters

  std::vector<std::size_t> dimensions() const {
    std::vector<std::size_t> out;
    for (const auto& s : spaces) out.push_back(s.dimension());
    return out;
  }
  /// Indices of nontrivial characters with dim H_chi > 1.
  std::vector<std::size_t> exceptional() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < spaces.size(); ++i)
      if (!spaces[i].chi.trivial() && spaces[i].dimension() > 1) out.push_back(i);
    return out;
  }
};

/// Eigenspaces by applying each projector to the standard basis and
/// orthonormalizing with a column-pivoted QR.
inline EigenspaceDecomposition decompose(const TorusRep& rep) {
  const HeckeTorus& t = rep.torus();
  const auto d = static_cast<Eigen::Index>(rep.dim());
  EigenspaceDecomposition out;
  DenseMatrix sum = DenseMatrix::Zero(d, d);
  for (const auto& chi : characters(t)) {
    DenseMatrix p = projector(chi, rep);
    sum += p;
    out.max_idempotency_defect = std::max(out.max_idempotency_defect, (p * p - p).cwiseAbs().maxCoeff());
    out.max_hermitian_defect = std::max(out.max_hermitian_defect, (p - p.adjoint()).cwiseAbs().maxCoeff());
    double tr = p.trace().real();
    auto rank = static_cast<Eigen::Index>(std::llround(tr));
    out.max_trace_rank_defect = std::max(out.max_trace_rank_defect, std::abs(tr - static_cast<double>(rank)));
    DenseMatrix basis(d, rank);
    if (rank > 0) {
      Eigen::ColPivHouseholderQR<DenseMatrix> qr(p);
      DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(d, rank);
      basis = q;
    }
    out.total_dimension += static_cast<std::size_t>(rank);
    out.spaces.push_back({chi, std::move(basis)});
  }
  out.completeness_defect = (sum - DenseMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  for (const auto& s : out.spaces) {
    if (s.dimension() == 0) continue;
    for (std::size_t b = 0; b < t.size(); ++b) {
      DenseMatrix r = rep.op(b) * s.basis - s.chi.value(t, b) * s.basis;
      out.max_eigen_residual = std::max(out.max_eigen_residual, r.cwiseAbs().maxCoeff());
    }
  }
  for (std::size_t i = 0; i < out.spaces.size(); ++i)
    for (std::size_t j = i + 1; j < out.spaces.size(); ++j) {
      if (out.spaces[i].dimension() == 0 || out.spaces[j].dimension() == 0) continue;
      out.max_cross_overlap =
          std::max(out.max_cross_overlap, (out.spaces[i].basis.adjoint() * out.spaces[j].basis).cwiseAbs().maxCoeff());
    }
  return out;
}

/// (1/|T|) sum_B rho(B) pi(xi) rho(B)^{-1}.
inline DenseMatrix hecke_average(const std::vector<Residue>& xi, const TorusRep& rep, const PrimeModulus& pm) {
  QOperator pi = pi_op(xi, pm, PhaseTable(pm.p()));
  const auto d = static_cast<Eigen::Index>(rep.dim());
  DenseMatrix acc = DenseMatrix::Zero(d, d);
  for (std::size_t b = 0; b < rep.torus().size(); ++b) acc += pi.right_apply(rep.op(b)) * rep.op(b).adjoint();
  return acc / static_cast<double>(rep.torus().size());
}

/// Largest matrix element of the averaged operator between eigenvectors of
/// different characters.
inline double off_diagonal_block_norm(const DenseMatrix& avg, const EigenspaceDecomposition& dec) {
  double worst = 0.0;
  for (std::size_t i = 0; i < dec.spaces.size(); ++i)
    for (std::size_t j = 0; j < dec.spaces.size(); ++j) {
      if (i == j || dec.spaces[i].dimension() == 0 || dec.spaces[j].dimension() == 0) continue;
      worst = std::max(worst, (dec.spaces[i].basis.adjoint() * avg * dec.spaces[j].basis).cwiseAbs().maxCoeff());
    }
  return worst;
}

}  // namespace torusq
