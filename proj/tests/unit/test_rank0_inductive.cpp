#include <gtest/gtest.h>

#include "wallcross_testkit.hpp"

using namespace wallcross;

namespace {

const GeometryParams Q5{};
const ChernData kOS(0, 5, make_q(-5, 2), make_q(5, 6));

TableSet wide_tables() {
    TableSet t;
    t.pt.add_window({0, 20, Rational(-40), Rational(40)});
    t.dt1.add_window({0, 20, Rational(-40), Rational(40)});
    return t;
}

TEST(Vn, Examples) {
    EXPECT_EQ(make_vn(kOS, 2, Q5), ChernData(-1, 15, make_q(-25, 2), make_q(15, 2)));
    EXPECT_EQ(make_vn(kOS, 0, Q5), kOS - ChernData(1, 0, 0, 0));
    for (long n = 0; n <= 5; ++n) EXPECT_EQ(make_vn(kOS, n, Q5).c, kOS.c + Rational(n) * Q5.H3());
}

TEST(Mvn, Membership) {
    const ChernData vn = make_vn(kOS, 2, Q5);
    EXPECT_TRUE(in_Mvn(kOS, 2, vn, Q5));
    const ChernData negative_delta(-1, 15, -30, 0);
    ASSERT_LT(delta_H(negative_delta, Q5), 0);
    EXPECT_FALSE(in_Mvn(kOS, 2, negative_delta, Q5));
    EXPECT_FALSE(in_Mvn(kOS, 2, kOS, Q5));
}

TEST(Mvn, KappaWindow) {
    // n - k/3 < kappa <= n + k
    EXPECT_EQ(kappa_window(1, 2, KappaWindow::Adopted), std::make_pair(2L, 3L));
    EXPECT_EQ(kappa_window(3, 2, KappaWindow::Adopted), std::make_pair(2L, 5L));
    const auto printed = kappa_window(1, 2, KappaWindow::Printed);
    EXPECT_GT(printed.first, printed.second);
}

TEST(PtConversion, Examples) {
    const HeadLookup lk = pt_conversion(ChernData(-1, 15, make_q(-25, 2), make_q(15, 2)), Q5);
    EXPECT_EQ(lk.kind, TableKind::PT);
    EXPECT_EQ(lk.m, -15);
    EXPECT_EQ(lk.deg, 10);
    const HeadLookup zero = pt_conversion(ChernData(-1, 0, 7, 3), Q5);
    EXPECT_EQ(zero.m, -3);
    EXPECT_EQ(zero.deg, 7);
}

TEST(PtConversion, InverseAndDualRoundTrip) {
    testkit::Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const long kappa = rng.uniform(-4, 6);
        const Rational m = rng.rational(40, 6), deg = rng.rational(20, 2);
        const ChernData a = pt_class(kappa, m, deg, Q5);
        const HeadLookup lk = pt_conversion(a, Q5);
        EXPECT_EQ(lk.m, m);
        EXPECT_EQ(lk.deg, deg);
        if (i < 100) {
            const ChernData ideal = negate(dualize(twist(a, kappa, Q5)));
            EXPECT_EQ(ideal, ChernData(1, 0, -deg, -m));
        }
    }
}

TEST(ACoefficient, MatchesSeriesOracle) {
    long nonzero = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto inst = testkit::inductive_instance(seed, Q5);
        const auto got = a_coefficient(inst.ctx, inst.target, inst.mu, false, inst.tables, testkit::map_provider(inst.j), Q5);
        const Rational want = testkit::product_oracle(testkit::oracle_input(inst, Q5), inst.tables, Q5);
        EXPECT_EQ(got.value, want) << "seed " << seed;
        nonzero += want != 0;
    }
    EXPECT_GT(nonzero, 0);
}

TEST(ACoefficient, ShuffleInvariantAndConsistent) {
    long checked = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto inst = testkit::inductive_instance(seed, Q5);
        const auto r = a_coefficient(inst.ctx, inst.target, inst.mu, false, inst.tables, testkit::map_provider(inst.j), Q5, true);
        EXPECT_TRUE(testkit::shuffle_invariant(r.decompositions, inst.target, true, 100, seed, Q5, &checked));
        for (const auto& d : r.decompositions) {
            ChernData sum = d.head;
            for (const auto& p : d.parts) sum = sum + Rational(p.q) * p.cls;
            EXPECT_EQ(sum, inst.target);
            if (!d.parts.empty()) {
                for (const auto& p : d.parts) EXPECT_LT(rank0_k(p.cls, Q5), rank0_k(inst.v, Q5));
            }
        }
    }
    EXPECT_GT(checked, 0);
}

TEST(ACoefficient, BaseCaseIsTheHeadLookup) {
    // k = 1 admits no rank-0 parts
    TableSet t = wide_tables();
    t.pt.insert(Rational(-15), 10, Rational(4));
    const InductiveContext ctx{kOS, 2};
    const ChernData vn = make_vn(kOS, 2, Q5);
    const auto r = a_coefficient(ctx, vn, bmt_line(vn, Q5).g, false, t, testkit::map_provider({}), Q5, true);
    EXPECT_EQ(r.value, 4);
    for (const auto& d : r.decompositions) EXPECT_TRUE(d.parts.empty());
}

TEST(Method2, StructureSheafHeadOnly) {
    TableSet t = wide_tables();
    t.pt.insert(Rational(-15), 10, Rational(1));
    const Method2Result r = method2(kOS, 2, t, Q5);
    EXPECT_EQ(r.chi, 10);
    EXPECT_EQ(r.prefactor, make_q(-1, 10));
    EXPECT_EQ(r.value, make_q(-1, 10));
    t.pt.insert(Rational(-14), 10, Rational(3));
    EXPECT_EQ(method2(kOS, 2, t, Q5).value, make_q(-1, 10));
}

TEST(Method2, MissingHeadListsKey) {
    try {
        method2(kOS, 2, testkit::minimal_tables(), Q5);
        FAIL();
    } catch (const IncompleteInputError& e) {
        EXPECT_EQ(e.missing_keys(), std::vector<std::string>{key_name(TableKind::PT, -15, 10)});
    }
}

TEST(Method2, ValidatorRejectsBadN) {
    EXPECT_FALSE(validate_n(kOS, 0, Q5, {}).ok());
    EXPECT_TRUE(validate_n(kOS, 2, Q5, {}).ok());
    EXPECT_THROW(method2(kOS, 0, wide_tables(), Q5), Error);
}

}  // namespace
