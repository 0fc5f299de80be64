#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "torusq/classical.hpp"
#include "fixtures.hpp"

using namespace torusq;

TEST(ValidateErgodic, CatMapAccepted) {
  auto v = validate_ergodic(IntMatrix(2, 2, {2, 1, 1, 1}));
  ASSERT_TRUE(v.accepted());
  EXPECT_TRUE(v.symplectic);
  EXPECT_TRUE(v.irreducible_over_q);
  EXPECT_TRUE(v.no_root_of_unity);
  EXPECT_EQ(v.element->charpoly(), IntPolynomial({1, -3, 1}));
}

TEST(ValidateErgodic, RejectionsCarryDistinctCodes) {
  auto id = validate_ergodic(IntMatrix::identity(2));
  EXPECT_FALSE(id.accepted());
  EXPECT_EQ(id.rejection, ErgodicRejection::kRootOfUnityEigenvalue);

  auto rot = validate_ergodic(IntMatrix(2, 2, {0, 1, -1, 0}));
  EXPECT_EQ(rot.rejection, ErgodicRejection::kRootOfUnityEigenvalue);
  EXPECT_NE(rot.reason.find("order 4"), std::string::npos);

  auto bad = validate_ergodic(IntMatrix(2, 2, {2, 1, 1, 2}));
  EXPECT_EQ(bad.rejection, ErgodicRejection::kNotSymplectic);

  auto odd = validate_ergodic(IntMatrix::identity(3));
  EXPECT_EQ(odd.rejection, ErgodicRejection::kNotSquareEven);

  // [[2,1],[1,1]] (+) [[2,1],[1,1]] is symplectic and hyperbolic but its charpoly is a square
  IntMatrix sum(4, 4, {2, 0, 1, 0, 0, 2, 0, 1, 1, 0, 1, 0, 0, 1, 0, 1});
  auto red = validate_ergodic(sum);
  EXPECT_TRUE(red.symplectic);
  EXPECT_EQ(red.rejection, ErgodicRejection::kReducibleCharPoly);
}

TEST(ValidateErgodic, CyclotomicPolynomials) {
  EXPECT_EQ(cyclotomic(1), IntPolynomial({-1, 1}));
  EXPECT_EQ(cyclotomic(4), IntPolynomial({1, 0, 1}));
  EXPECT_EQ(cyclotomic(6), IntPolynomial({1, -1, 1}));
  EXPECT_EQ(cyclotomic(12), IntPolynomial({1, 0, -1, 0, 1}));
  EXPECT_EQ(root_of_unity_orders(IntPolynomial({1, -1, 1})), std::vector<int>{6});
}

TEST(FindErgodicSp4, ReproducesRecordedFixtures) {
  ErgodicElement a = find_ergodic_sp4();
  EXPECT_EQ(a.matrix().matrix(), fixtures::sp4_bound_matrix());
  EXPECT_EQ(a.charpoly(), IntPolynomial({1, -10, 19, -10, 1}));
  EXPECT_TRUE(a.charpoly().is_palindromic());
  EXPECT_TRUE(is_symplectic(a.matrix().matrix()));
  for (Residue p : {3, 5, 7}) EXPECT_TRUE(nondegenerate_mod_p(a.matrix().matrix(), a.charpoly(), p)) << p;

  Sp4SearchFilter split{{}, {5, 7, 11, 13}};
  ErgodicElement b = find_ergodic_sp4(split);
  EXPECT_EQ(b.matrix().matrix(), fixtures::sp4_split_matrix());
  EXPECT_EQ(b.charpoly(), IntPolynomial({1, -13, 25, -13, 1}));
  EXPECT_TRUE(splits_completely_mod_p(b.charpoly(), 13));
  EXPECT_TRUE(nondegenerate_mod_p(b.matrix().matrix(), b.charpoly(), 13));
}

TEST(FindErgodicSp4, FixtureFactorShapes) {
  IntPolynomial f({1, -10, 19, -10, 1});
  EXPECT_EQ(factor_shapes_mod_p(f, 3), (std::vector<FactorShape>{{4, 1}}));
  EXPECT_EQ(factor_shapes_mod_p(f, 5), (std::vector<FactorShape>{{2, 1}, {2, 1}}));
  EXPECT_EQ(factor_shapes_mod_p(f, 7), (std::vector<FactorShape>{{1, 1}, {1, 1}, {2, 1}}));
}

TEST(Birkhoff, ZeroCharacterIsExactlyOne) {
  std::mt19937_64 rng(1);
  auto x = TorusPoint::random(2, rng);
  EXPECT_EQ(birkhoff_average(cat_map(), {0, 0}, x, 17), std::complex<double>(1.0, 0.0));
  EXPECT_THROW(birkhoff_average(cat_map(), {1, 0}, x, 0), std::invalid_argument);
}

TEST(Birkhoff, FixedPointOrbitIsConstant) {
  TorusPoint origin({0.0, 0.0});
  for (std::size_t n : {1U, 10U, 1000U}) {
    auto avg = birkhoff_average(cat_map(), {1, 0}, origin, n);
    EXPECT_NEAR(avg.real(), 1.0, 1e-15);
    EXPECT_NEAR(avg.imag(), 0.0, 1e-15);
  }
}

TEST(Birkhoff, MedianOverRandomPointsIsSmall) {
  std::mt19937_64 rng(2024);
  std::vector<double> mags;
  for (int i = 0; i < 20; ++i) mags.push_back(std::abs(birkhoff_average(cat_map(), {1, 0}, TorusPoint::random(2, rng), 1000000)));
  std::nth_element(mags.begin(), mags.begin() + 10, mags.end());
  EXPECT_LT(mags[10], 0.02);
}

TEST(Period, DividesSymplecticGroupOrder) {
  std::vector<IntMatrix> mats{cat_map().matrix().matrix(), fixtures::sp4_bound_matrix(), fixtures::sp4_split_matrix()};
  for (const auto& a : mats) {
    int n = static_cast<int>(a.rows() / 2);
    for (Residue p : {3, 5, 7, 11, 13}) {
      auto period = period_mod_p(a.reduce(p));
      EXPECT_EQ(symplectic_group_order(n, p) % period, 0) << a.str() << " mod " << p;
      EXPECT_EQ(a.reduce(p).pow(period), FpMatrix::identity(a.rows(), p));
    }
  }
  EXPECT_EQ(symplectic_group_order(1, 7), 336);
  EXPECT_EQ(symplectic_group_order(2, 3), 51840);
}
