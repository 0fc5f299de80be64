#include <gtest/gtest.h>

#include <random>

#include "torusq/quevaluator.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace torusq;

namespace {

ErgodicElement sp4_fixture() { return *validate_ergodic(fixtures::sp4_bound_matrix()).element; }

}  // namespace

TEST(TraceFunction, ConjugationInvariance) {
  std::mt19937_64 rng(21);
  for (auto [p, n] : {std::pair<Residue, int>{7, 1}, {11, 1}, {3, 2}}) {
    PrimeModulus pm(p, n);
    WeilRep rep(pm);
    std::uniform_int_distribution<long long> coord(0, p - 1);
    for (int trial = 0; trial < 20; ++trial) {
      FpMatrix b = random_symplectic_mod_p(n, p, rng), s = random_symplectic_mod_p(n, p, rng);
      LatticeVector xi(static_cast<std::size_t>(2 * n));
      for (auto& c : xi) c = coord(rng);
      ASSERT_LT(check_invariance(xi, b, s, rep), rep.tolerance() * 10) << b << s;
    }
  }
}

TEST(TraceFunction, TableAgreesWithDirectTraces) {
  PrimeModulus pm(7, 1);
  HeckeContext ctx(cat_map(), 7);
  HeckeAnalysis an(ctx);
  const auto& table = an.table();
  for (std::size_t k = 0; k < table.phase_points(); k += 3) {
    auto xi = table.space().decode_phase(k);
    LatticeVector lv(xi.begin(), xi.end());
    for (std::size_t b = 0; b < ctx.torus().size(); ++b) {
      // trace of the dense product, computed without the sparse shortcut
      DenseMatrix prod = pi_op(lv, pm).to_dense() * an.rep().op(b);
      ASSERT_LT(std::abs(table(k, b) - prod.trace()), 1e-10);
    }
  }
  EXPECT_LT(std::abs(table.at({8, -6}, 2) - table.at({1, 1}, 2)), 1e-15);
}

TEST(CharacterSums, MatchDirectSummation) {
  HeckeContext ctx(cat_map(), 13);
  HeckeAnalysis an(ctx);
  auto chars = characters(ctx.torus());
  for (std::size_t k = 0; k < an.table().phase_points(); k += 5)
    for (const auto& chi : chars) {
      Complex direct{0.0, 0.0};
      for (std::size_t b = 0; b < ctx.torus().size(); ++b) direct += an.table()(k, b) * chi.value(ctx.torus(), b);
      ASSERT_LT(std::abs(an.sums()(static_cast<Eigen::Index>(chi.index()), static_cast<Eigen::Index>(k)) - direct), 1e-10);
      ASSERT_LT(std::abs(character_sum(k, chi, ctx.torus(), an.table()) - direct), 1e-10);
    }
}

TEST(Bound, HoldsAtAnisotropicPrimes) {
  for (Residue p : {3, 7, 13, 17, 23}) {
    HeckeContext ctx(cat_map(), p);
    ASSERT_TRUE(ctx.torus().split().nonsplit()) << p;
    HeckeAnalysis an(ctx);
    auto r = verify_que_bound(an);
    EXPECT_TRUE(r.pass()) << "p=" << p << " max ratio " << r.max_ratio;
    EXPECT_LE(r.max_ratio, 2.0 * (1.0 + 1e-6));
    EXPECT_EQ(r.eigen_unabsorbed_violations, 0U);
    EXPECT_TRUE(r.eigen_violations.empty());
    EXPECT_TRUE(r.averaged_violations.empty());
    EXPECT_EQ(r.checked, (p * p - 1) * static_cast<std::size_t>(p + 1));
  }
}

TEST(Bound, ConsistencyIdentities) {
  for (Residue p : {7, 11}) {
    HeckeContext ctx(cat_map(), p);
    HeckeAnalysis an(ctx);
    auto r = verify_que_bound(an);
    EXPECT_TRUE(r.consistent()) << "p=" << p;
    EXPECT_LT(r.eigen_identity_defect, 1e-9);
    EXPECT_LT(r.xi0_defect, 1e-9);
    EXPECT_LT(r.parseval_defect, 1e-12);
  }
}

TEST(Bound, SplitPrimeEigenlineSumsReachPMinusTwo) {
  // On an eigenline of A mod p every nonidentity B acts by a scalar on xi and
  // F(xi, B) = sigma(a); the trivial character then collects p - 2.
  const Residue p = 11;
  HeckeContext ctx(cat_map(), p);
  HeckeAnalysis an(ctx);
  auto r = verify_que_bound(an);
  auto sc = split_conjugation(ctx.torus());
  ASSERT_TRUE(sc.has_value());
  EXPECT_GT(r.violation_count, 0U);
  EXPECT_EQ(r.trivial_chi_violations, r.violation_count);
  EXPECT_NEAR(r.max_abs, static_cast<double>(p - 2), 1e-9);
  EXPECT_EQ(r.argmax.chi, 0U);
  auto eta = sc->inverse.apply(r.argmax.xi);
  EXPECT_TRUE(eta[0] == 0 || eta[1] == 0);
  EXPECT_TRUE(r.consistent());
}

TEST(Bound, SmallestSp4FixturePrime) {
  HeckeContext ctx(sp4_fixture(), 3);
  HeckeAnalysis an(ctx);
  auto r = verify_que_bound(an);
  EXPECT_TRUE(r.pass()) << r.max_ratio;
  EXPECT_LE(r.max_abs, 4.0 * 3.0);
}

TEST(Refined, TrivialTransportedComponentAtSplitPrimes) {
  for (Residue p : {11, 19}) {
    HeckeContext ctx(cat_map(), p);
    HeckeAnalysis an(ctx);
    auto r = refined_bound(an);
    ASSERT_TRUE(r.applicable);
    EXPECT_TRUE(r.pass()) << p;
    EXPECT_LE(r.max_by_m[1], 2.0 + 1e-6);
    EXPECT_LE(r.max_by_m[0], 2.0 * std::sqrt(static_cast<double>(p)) * (1.0 + 1e-6));
    EXPECT_EQ(r.generic_by_m[1], static_cast<std::size_t>((p - 1) * (p - 1)));
  }
  HeckeContext nonsplit(cat_map(), 7);
  HeckeAnalysis an(nonsplit);
  auto r = refined_bound(an);
  EXPECT_FALSE(r.applicable);
  EXPECT_TRUE(r.pass());
}

TEST(SplitFormulas, MultiplicativeGroup) {
  for (Residue p : {3, 7, 11, 13}) {
    MultiplicativeGroup g(p);
    std::set<std::uint64_t> logs;
    for (Residue a = 1; a < p; ++a) {
      logs.insert(g.log(a));
      EXPECT_EQ(pow_mod(g.generator(), g.log(a), p), a);
      EXPECT_NEAR(std::abs(g.character(g.legendre_exponent(), a) - static_cast<double>(legendre(a, p))), 0.0, 1e-12);
    }
    EXPECT_EQ(logs.size(), static_cast<std::size_t>(p - 1));
  }
}

TEST(SplitFormulas, TraceFormulaExactUnderMeasuredSign) {
  for (Residue p : {11, 13, 19}) {
    int eps = measure_trace_orientation(p);
    WeilRep rep{PrimeModulus(p, 1)};
    auto r = check_trace_formula(rep, eps);
    EXPECT_EQ(r.checked, static_cast<std::size_t>(p * p * (p - 2)));
    EXPECT_LT(r.max_deviation, 1e-10) << "p=" << p;
    auto wrong = check_trace_formula(rep, -eps);
    EXPECT_GT(wrong.max_deviation, 1e-3);
  }
  EXPECT_EQ(measure_trace_orientation(3), measure_trace_orientation(5));
}

TEST(SplitFormulas, GaussSumOracleNormAndWeilBound) {
  for (Residue p : {11, 13}) {
    MultiplicativeGroup g(p);
    for (Residue c = 1; c < p; ++c) {
      double energy = 0.0;
      for (std::uint64_t e = 0; e < g.order(); ++e) {
        Complex s = gauss_sum_oracle(c, e, g);
        EXPECT_LE(std::abs(s), 2.0 * std::sqrt(static_cast<double>(p)) + 1e-9);
        energy += std::norm(s);
      }
      // Plancherel on F_p^x: sum_e |S_e|^2 = (p - 1)(p - 2)
      EXPECT_NEAR(energy, static_cast<double>((p - 1) * (p - 2)), 1e-8);
    }
  }
}

TEST(SplitFormulas, ConjugationDiagonalizesTheTorus) {
  HeckeContext ctx(cat_map(), 19);
  auto sc = split_conjugation(ctx.torus());
  ASSERT_TRUE(sc.has_value());
  EXPECT_TRUE(is_symplectic(sc->basis));
  EXPECT_EQ(sc->basis * sc->inverse, FpMatrix::identity(2, 19));
  for (std::size_t b = 0; b < ctx.torus().size(); ++b) {
    FpMatrix d = sc->inverse * ctx.torus().element(b) * sc->basis;
    ASSERT_EQ(d(0, 1), 0);
    ASSERT_EQ(d(1, 0), 0);
    ASSERT_EQ(d(0, 0) * d(1, 1) % 19, 1);
  }
  std::set<std::uint64_t> exps;
  for (const auto& e : sc->transported) exps.insert(e[0]);
  EXPECT_EQ(exps.size(), ctx.torus().size());
  EXPECT_FALSE(split_conjugation(HeckeContext(cat_map(), 7).torus()).has_value());
}

TEST(SplitFormulas, OneDimensionalFactorizationIsExact) {
  HeckeContext ctx(cat_map(), 11);
  HeckeAnalysis an(ctx);
  auto r = factorization_check(an, measure_trace_orientation(11));
  ASSERT_TRUE(r.applicable);
  EXPECT_EQ(r.reconciled_matches, r.all_pairs);
  EXPECT_EQ(r.generic_raw_matches, r.generic_pairs);
  EXPECT_LT(r.max_rel_deviation, 1e-10);
  // only the frequencies with lambda mu = 0 need the boundary term, and only xi = 0 has a nonzero one
  EXPECT_EQ(r.raw_matches_all, r.all_pairs);
}

TEST(Twist, SortedMagnitudesAgreeAcrossRootChoices) {
  for (auto [a, p] : {std::pair{cat_map(), Residue{7}}, {cat_map(), Residue{11}}, {sp4_fixture(), Residue{3}}}) {
    HeckeContext ctx(a, p);
    HeckeAnalysis ref(ctx);
    HeckeAnalysis pos(ctx, {RootChoice::kPositiveTrace, {0, 0}});
    HeckeAnalysis shifted(ctx, {RootChoice::kReferenceSign, {3, 0}});
    EXPECT_LT(twist_invariance_deviation(ref, pos), 1e-8);
    EXPECT_LT(twist_invariance_deviation(ref, shifted), 1e-8);
    EXPECT_LT(twist_relabeling_deviation(ref, pos), 1e-8);
    EXPECT_LT(twist_relabeling_deviation(ref, shifted), 1e-8);
  }
}

TEST(Demo, HeckeEigenvectorsAveragedBothWays) {
  HeckeContext ctx(cat_map(), 13);
  HeckeAnalysis an(ctx);
  auto d = cyclic_vs_hecke_demo(an, {1, 0});
  EXPECT_EQ(d.torus_order, 14U);
  EXPECT_EQ(d.bound_violations, 0U);
  ASSERT_FALSE(d.rows.empty());
  for (const auto& row : d.rows) {
    if (row.kind != "hecke") continue;
    EXPECT_LT(std::abs(row.cyclic_average - row.hecke_average), 1e-10) << row.label;
    EXPECT_LE(std::abs(row.hecke_average), d.bound * (1.0 + 1e-6));
  }
}

TEST(Fixtures, QuantizationsAreSelfAdjoint) {
  for (int n : {1, 2}) {
    PrimeModulus pm(5, n);
    for (const auto& fx : que_fixtures(n)) {
      auto sa = check_self_adjoint(fx.f, pm);
      EXPECT_LT(sa.hermitian_defect, 1e-12) << fx.name;
    }
  }
}
