#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "torusq/classical.hpp"
#include "torusq/eigenspaces.hpp"
#include "torusq/hecke.hpp"
#include "torusq/torus_rep.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace torusq;

namespace {

ErgodicElement sp4_fixture() { return *validate_ergodic(fixtures::sp4_bound_matrix()).element; }
ErgodicElement sp4_split_fixture() { return *validate_ergodic(fixtures::sp4_split_matrix()).element; }

std::string pattern(const std::vector<std::size_t>& dims) {
  std::string s;
  for (auto d : dims) s += std::to_string(d);
  return s;
}

// Sp(4, F_p) as the closure of J, the elementary symplectic shears and the
// Levi elements diag(M, M^{-T}) for elementary M, by breadth-first search.
std::set<FpMatrix> sp4_closure(Residue p) {
  auto mat = [p](std::vector<Residue> e) { return FpMatrix(4, 4, p, std::move(e)); };
  std::vector<FpMatrix> gens = {
      mat({0, 0, 1, 0, 0, 0, 0, 1, p - 1, 0, 0, 0, 0, p - 1, 0, 0}),  // J
      mat({1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}),          // upper shear, S = e11
      mat({1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1}),          // upper shear, S = e12 + e21
      mat({1, 0, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 0, 1}),          // upper shear, S = e22
      mat({1, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, p - 1, 1}),      // Levi, M = [[1,1],[0,1]]
      mat({1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, p - 1, 0, 0, 0, 1}),      // Levi, M = [[1,0],[1,1]]
  };
  std::set<FpMatrix> seen{FpMatrix::identity(4, p)};
  std::deque<FpMatrix> queue{FpMatrix::identity(4, p)};
  while (!queue.empty()) {
    FpMatrix x = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      FpMatrix y = x * g;
      if (seen.insert(y).second) queue.push_back(y);
    }
  }
  return seen;
}

}  // namespace

TEST(Centralizer, CatMapOrders) {
  const std::vector<std::pair<Residue, std::size_t>> expect = {{3, 4}, {7, 8}, {11, 10}, {13, 14}, {19, 18}, {29, 28}};
  for (auto [p, order] : expect) {
    HeckeTorus t = centralizer(cat_map(), PrimeModulus(p, 1));
    EXPECT_EQ(t.size(), order) << "p=" << p;
    EXPECT_TRUE(t.cyclic());
    EXPECT_EQ(t.split().split(), order == static_cast<std::size_t>(p - 1)) << t.split().label();
  }
}

TEST(Centralizer, MatchesFullScanOfSl2) {
  for (Residue p : {3, 7, 11}) {
    HeckeTorus t = centralizer(cat_map(), PrimeModulus(p, 1));
    FpMatrix a = cat_map().reduce(p);
    std::set<FpMatrix> brute;
    for (const auto& b : oracle::sl2_elements(p))
      if (a * b == b * a) brute.insert(b);
    std::set<FpMatrix> got(t.elements().begin(), t.elements().end());
    EXPECT_EQ(got, brute) << "p=" << p;
  }
}

TEST(Centralizer, MatchesFullScanOfSp4F3) {
  auto group = sp4_closure(3);
  ASSERT_EQ(group.size(), 51840U);
  ErgodicElement a = sp4_fixture();
  FpMatrix am = a.reduce(3);
  std::set<FpMatrix> brute;
  for (const auto& b : group)
    if (am * b == b * am) brute.insert(b);
  HeckeTorus t = centralizer(a, PrimeModulus(3, 2));
  std::set<FpMatrix> got(t.elements().begin(), t.elements().end());
  EXPECT_EQ(got, brute);
  EXPECT_EQ(t.size(), 10U);  // p^2 + 1 for an irreducible quartic
}

TEST(Centralizer, RejectsDegeneratePrimes) {
  // the cat map is ramified at 5: P_A = (x - 3)^2 mod 5
  EXPECT_THROW(centralizer(cat_map(), PrimeModulus(5, 1)), DegeneratePrimeError);
  IntPolynomial unipotent(std::vector<BigInt>{1, -2, 1});
  EXPECT_THROW(centralizer(FpMatrix::identity(2, 7), unipotent), DegeneratePrimeError);
  EXPECT_THROW(centralizer(FpMatrix(2, 2, 7, {1, 1, 0, 1}), unipotent), DegeneratePrimeError);
}

TEST(Torus, StructureAndIndexing) {
  HeckeTorus t = centralizer(sp4_split_fixture(), PrimeModulus(fixtures::kSp4SplitPrime, 2));
  EXPECT_EQ(t.size(), 144U);
  EXPECT_FALSE(t.cyclic());
  EXPECT_EQ(t.orders()[0] * t.orders()[1], t.size());
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t i = pick(rng), j = pick(rng);
    ASSERT_EQ(t.element(t.product(i, j)), t.element(i) * t.element(j));
    ASSERT_EQ(t.element(t.inverse(i)) * t.element(i), FpMatrix::identity(4, t.p()));
    ASSERT_EQ(*t.index_of(t.element(i)), i);
  }
  EXPECT_EQ(t.element(0), FpMatrix::identity(4, t.p()));
}

TEST(Torus, FactorsAndMixedSplitType) {
  HeckeTorus t7 = centralizer(cat_map(), PrimeModulus(7, 1));
  ASSERT_EQ(t7.factors().size(), 1U);
  EXPECT_TRUE(t7.factors()[0].anisotropic);
  HeckeTorus t11 = centralizer(cat_map(), PrimeModulus(11, 1));
  ASSERT_EQ(t11.factors().size(), 1U);
  EXPECT_FALSE(t11.factors()[0].anisotropic);
  EXPECT_EQ(t11.factors()[0].polys.size(), 2U);
  HeckeTorus m = centralizer(sp4_fixture(), PrimeModulus(7, 2));
  EXPECT_EQ(m.split().label(), "mixed(1,1,2)");
  EXPECT_EQ(m.size(), 48U);  // (p - 1)(p + 1)
}

TEST(Characters, OrthogonalityRelations) {
  for (auto [a, p] : {std::pair{cat_map(), Residue{11}}, {sp4_fixture(), Residue{5}}, {sp4_split_fixture(), Residue{13}}}) {
    HeckeTorus t = centralizer(a, PrimeModulus(p, a.n()));
    Eigen::MatrixXcd x = character_table(t);
    Eigen::MatrixXcd gram = x * x.adjoint() / static_cast<double>(t.size());
    EXPECT_LT((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-10);
    // characters are homomorphisms
    auto chars = characters(t);
    for (std::size_t c = 0; c < chars.size(); c += 7)
      for (std::size_t i = 0; i < t.size(); i += 5)
        for (std::size_t j = 0; j < t.size(); j += 3)
          ASSERT_LT(std::abs(chars[c].value(t, t.product(i, j)) - chars[c].value(t, i) * chars[c].value(t, j)), 1e-12);
    EXPECT_EQ((chars[1] * chars[1].conjugate()).index(), 0U);
  }
}

TEST(TorusRepresentation, ReferenceTracesAndHomomorphism) {
  for (auto [a, p] : {std::pair{cat_map(), Residue{7}}, {cat_map(), Residue{11}}, {sp4_fixture(), Residue{3}},
                      {sp4_fixture(), Residue{7}}}) {
    PrimeModulus pm(p, a.n());
    HeckeTorus t = centralizer(a, pm);
    WeilRep rep(pm);
    TorusRep tr = linearize_on_torus(t, rep);
    EXPECT_LT(tr.reference_trace_defect(), 1e-9) << "p=" << p;
    EXPECT_LT(tr.homomorphism_defect(), 1e-9) << "p=" << p;
    EXPECT_NEAR(tr.trace(0).real(), static_cast<double>(pm.dim()), 1e-9);
  }
}

TEST(TorusRepresentation, RootChoicesDifferByACharacter) {
  PrimeModulus pm(7, 1);
  HeckeTorus t = centralizer(cat_map(), pm);
  WeilRep rep(pm);
  TorusRep ref = linearize_on_torus(t, rep);
  TorusRep pos = linearize_on_torus(t, rep, {RootChoice::kPositiveTrace, {0, 0}});
  TorusRep res = linearize_on_torus(t, rep, {RootChoice::kRestriction, {0, 0}});
  EXPECT_LT(restriction_deviation(res, rep), 1e-9);
  std::size_t g = *t.index_of(t.generators()[0]);
  EXPECT_LT(std::abs(std::arg(pos.trace(g))), std::numbers::pi / static_cast<double>(t.size()) + 1e-9);
  EXPECT_LT(std::abs(std::arg(-ref.trace(g))), 1e-9);  // nonsplit: reference sign -1
  for (const TorusRep* other : {&pos, &res}) {
    // rho'(B) = eps(B) rho(B) with eps a character of T
    Eigen::Index r = 0, c = 0;
    ref.op(1).cwiseAbs().maxCoeff(&r, &c);
    Complex z = other->op(1)(r, c) / ref.op(1)(r, c);
    for (std::size_t b = 0; b < t.size(); ++b) {
      Complex eps = std::pow(z, static_cast<double>(b));
      ASSERT_LT((other->op(b) - eps * ref.op(b)).cwiseAbs().maxCoeff(), 1e-9) << b;
    }
    EXPECT_NEAR(std::abs(std::pow(z, static_cast<double>(t.size())) - 1.0), 0.0, 1e-9);
  }
}

TEST(Eigenspaces, DimensionPatterns) {
  struct Case {
    ErgodicElement a;
    Residue p;
    std::string expect;
  };
  std::vector<Case> cases = {{cat_map(), 7, "01111111"},
                             {cat_map(), 11, "2111111111"},
                             {cat_map(), 13, "01111111111111"},
                             {sp4_fixture(), 3, "0111111111"},
                             {sp4_fixture(), 5, "2" + std::string(23, '1')}};
  for (const auto& c : cases) {
    PrimeModulus pm(c.p, c.a.n());
    HeckeTorus t = centralizer(c.a, pm);
    WeilRep rep(pm);
    auto dec = decompose(linearize_on_torus(t, rep));
    EXPECT_EQ(pattern(dec.dimensions()), c.expect) << "p=" << c.p;
    EXPECT_EQ(dec.total_dimension, pm.dim());
    EXPECT_LT(dec.max_idempotency_defect, 1e-10);
    EXPECT_LT(dec.max_hermitian_defect, 1e-10);
    EXPECT_LT(dec.max_trace_rank_defect, 1e-9);
    EXPECT_LT(dec.completeness_defect, 1e-10);
    EXPECT_LT(dec.max_eigen_residual, 1e-9);
    EXPECT_LT(dec.max_cross_overlap, 1e-9);
    EXPECT_TRUE(dec.exceptional().empty());
  }
}

TEST(Eigenspaces, MixedTorusFollowsProductLaw) {
  // T = T_split x T_aniso with |T| = 6 x 8; on the tensor factors the
  // multiplicities are (2,1,...,1) and (0,1,...,1), so nontrivial characters
  // reach dimension 2.
  PrimeModulus pm(7, 2);
  HeckeTorus t = centralizer(sp4_fixture(), pm);
  WeilRep rep(pm);
  auto dec = decompose(linearize_on_torus(t, rep));
  EXPECT_EQ(dec.total_dimension, 49U);
  std::map<std::size_t, int> histogram;
  for (auto d : dec.dimensions()) ++histogram[d];
  EXPECT_EQ(histogram[2], 7);
  EXPECT_EQ(histogram[0], 6);
  EXPECT_EQ(histogram[1], 35);
  EXPECT_EQ(dec.spaces[0].dimension(), 0U);
}

TEST(Eigenspaces, HeckeAverageIsBlockDiagonal) {
  PrimeModulus pm(11, 1);
  HeckeTorus t = centralizer(cat_map(), pm);
  WeilRep rep(pm);
  TorusRep tr = linearize_on_torus(t, rep);
  auto dec = decompose(tr);
  for (std::vector<Residue> xi : {std::vector<Residue>{1, 0}, {3, 5}, {0, 7}}) {
    DenseMatrix avg = hecke_average(xi, tr, pm);
    EXPECT_LT(off_diagonal_block_norm(avg, dec), 1e-10);
    // the average commutes with the torus
    for (std::size_t b = 0; b < t.size(); ++b) ASSERT_LT((avg * tr.op(b) - tr.op(b) * avg).cwiseAbs().maxCoeff(), 1e-10);
  }
}
