#include <gtest/gtest.h>

#include "wallcross_testkit.hpp"

using namespace wallcross;

namespace {

const GeometryParams Q5{};
const ChernData kOS(0, 5, make_q(-5, 2), make_q(5, 6));
const ChernData kO2S(0, 10, -10, make_q(20, 3));

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::InvalidArgument;
}

TEST(Bound, Examples) {
    EXPECT_TRUE(bound_ok(kOS, Q5));
    EXPECT_TRUE(q_negative(ChernData(0, 10, 0, make_q(15, 2)), Q5));
    EXPECT_FALSE(bound_ok(ChernData(0, 5, 0, 0), Q5));
}

TEST(Bound, FormsAgreeOnRandomClasses) {
    testkit::Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const ChernData v(0, Rational(rng.uniform(1, 6)) * Q5.H3(), rng.rational(30, 2), rng.rational(60, 6));
        EXPECT_NO_THROW(bound_ok(v, Q5)) << v.str();
    }
}

TEST(Mv, Examples) {
    const MvBounds b = mv_bounds(kOS, Q5);
    EXPECT_EQ(b.m_max, make_q(1, 3));
    EXPECT_TRUE(in_Mv(kOS, 1, 0, 0, Q5));
    EXPECT_TRUE(in_Mv(kOS, 0, 0, 0, Q5));
    EXPECT_FALSE(in_Mv(kOS, 0, 1, 0, Q5));
    EXPECT_FALSE(in_Mv(kOS, 0, 0, 1, Q5));
}

TEST(Splittings, StructureSheaves) {
    const auto s1 = enumerate_splittings(kOS, Q5).splittings;
    ASSERT_EQ(s1.size(), 1u);
    EXPECT_EQ(s1[0].k1, -1);
    EXPECT_EQ(s1[0].k2, 0);
    EXPECT_EQ(s1[0].beta1, 0);
    EXPECT_EQ(s1[0].beta2, 0);
    EXPECT_EQ(s1[0].m1, 0);
    EXPECT_EQ(s1[0].m2, 0);
    EXPECT_EQ(s1[0].chi, 5);
    EXPECT_EQ(s1[0].wall.g, make_q(-1, 2));
    EXPECT_EQ(s1[0].wall.c0, 0);

    const auto s2 = enumerate_splittings(kO2S, Q5).splittings;
    ASSERT_EQ(s2.size(), 1u);
    EXPECT_EQ(s2[0].k1, -2);
    EXPECT_EQ(s2[0].chi, 15);
    EXPECT_TRUE(enumerate_splittings(ChernData(0, 10, 0, make_q(15, 2)), Q5).splittings.empty());
}

TEST(Splittings, InvariantsHoldOnEveryFactor) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto inst = testkit::direct_instance(seed, Q5);
        if (!inst) continue;
        for (const auto& sp : enumerate_splittings(inst->v, Q5).splittings) {
            EXPECT_EQ(sp.v1(Q5) + sp.v2(Q5), inst->v);
            EXPECT_EQ(sp.k2 - sp.k1, rank0_k(inst->v, Q5));
            EXPECT_LE(sp.m1, castelnuovo_bound(sp.beta1, Q5));
            EXPECT_LE(-sp.m2, castelnuovo_bound(sp.beta2, Q5));
            EXPECT_EQ(sp.chi, euler_pairing(sp.v2(Q5), sp.v1(Q5), Q5));
        }
    }
}

TEST(Method1, StructureSheaves) {
    const TableSet t = testkit::minimal_tables();
    EXPECT_EQ(method1(kOS, t, Q5).value, 5);
    EXPECT_EQ(method1(kO2S, t, Q5).value, 15);
}

TEST(Method1, VanishingAndErrors) {
    const Method1Result r = method1(ChernData(0, 10, 0, make_q(15, 2)), TableSet{}, Q5);
    EXPECT_TRUE(r.vanishing);
    EXPECT_EQ(r.value, 0);
    EXPECT_EQ(kind_of([] { method1(ChernData(0, 5, 0, 0), testkit::minimal_tables(), Q5); }), ErrorKind::BoundViolated);
    EXPECT_EQ(kind_of([] { method1(ChernData(1, 5, 0, 0), testkit::minimal_tables(), Q5); }), ErrorKind::NotRankZeroDim2);
    try {
        method1(kOS, TableSet{}, Q5);
        FAIL();
    } catch (const IncompleteInputError& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IncompleteInput);
        EXPECT_EQ(e.missing_keys().size(), 2u);
    }
}

TEST(Method1, TwistInvariantWithTwistClosedTables) {
    const TableSet t = testkit::minimal_tables();
    for (long a = -3; a <= 3; ++a) {
        EXPECT_EQ(method1(twist(kOS, a, Q5), t, Q5).value, 5) << "a = " << a;
        EXPECT_EQ(method1(twist(kO2S, a, Q5), t, Q5).value, 15) << "a = " << a;
    }
}

TEST(Method1, IntegralOnAdmissibleInstances) {
    long done = 0;
    for (std::uint64_t seed = 1; done < 30 && seed < 3000; ++seed) {
        const auto inst = testkit::direct_instance(seed, Q5);
        if (!inst) continue;
        EXPECT_TRUE(is_integer(method1(inst->v, inst->tables, Q5).value)) << inst->v.str();
        ++done;
    }
    EXPECT_EQ(done, 30);
}

TEST(Walls, StructureSheaf) {
    const WallsReport rep = walls_report(kOS, Q5);
    EXPECT_EQ(rep.lf, rep.lv);
    ASSERT_EQ(rep.walls.size(), 1u);
    EXPECT_EQ(rep.walls[0].line, rep.lf);
    EXPECT_EQ(rep.walls[0].splittings.size(), 1u);
}

TEST(Walls, ParallelToLf) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto inst = testkit::direct_instance(seed, Q5);
        if (!inst) continue;
        const WallsReport rep = walls_report(inst->v, Q5);
        for (const auto& w : rep.walls) {
            EXPECT_EQ(w.line.g, inst->v.s / inst->v.c);
            EXPECT_GE(w.line.c0, rep.lf.c0);
        }
    }
    const WallsReport none = walls_report(ChernData(0, 10, 0, make_q(15, 2)), Q5);
    EXPECT_TRUE(none.walls.empty());
    EXPECT_EQ(none.lf.g, 0);
}

}  // namespace
