#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"

using namespace dcj;

TEST_CASE("state_dimension counts closed and truncated spaces") {
    auto s11 = fixtures::v11(2, 1, 1);
    CHECK(state_dimension(s11) == 4); // 2 walker placements x 2 task placements

    auto s7 = fixtures::v7(3, 2, 0);
    CHECK(state_dimension(s7) == 3); // C(3,2) occupancies x 1 task vector

    auto s1 = fixtures::v1(2, 1.0, 2.0, 1.0, 3);
    CHECK(state_dimension(s1) == 16); // (3+1)^2 box

    auto s2 = fixtures::v2(3);
    CHECK(state_dimension(s2) == 3ull * 5 * 5 * 5);

    auto s10 = fixtures::v10(2, 2, 1);
    CHECK(state_dimension(s10) == 9ull * 4); // 3^2 task box x 2^2 walker box
}

TEST_CASE("apply_edit moves and guards") {
    NetworkState s = fixtures::make_state({0, 0}, {2, 0});

    auto moved = apply_edit(s, {EditKind::TaskMove, 0, 1});
    CHECK(moved.tasks == CountVec{1, 1});
    CHECK(s.tasks == CountVec{2, 0}); // source untouched

    NetworkState empty = fixtures::make_state({0, 0}, {0, 0});
    CHECK_THROWS_AS(apply_edit(empty, {EditKind::TaskRemove, 0, 0}), Error);
    try {
        apply_edit(empty, {EditKind::TaskRemove, 0, 0});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NegativeCount);
    }

    NetworkState occ = fixtures::make_state({1, 0}, {0, 0});
    try {
        apply_edit(occ, {EditKind::DcAdd, 0, 0}, ParticleKind::Exclusion);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ExclusionViolated);
    }
    // zero-range walkers may pile up
    auto piled = apply_edit(occ, {EditKind::DcAdd, 0, 0}, ParticleKind::ZeroRange);
    CHECK(piled.occupancy == CountVec{2, 0});
}

TEST_CASE("edits invert and conserve totals") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int ns = 2 + static_cast<int>(rng() % 4);
        NetworkState s;
        for (int i = 0; i < ns; ++i) {
            s.tasks.push_back(static_cast<Count>(rng() % 5));
            s.occupancy.push_back(static_cast<Count>(rng() % 3));
        }
        const int a = static_cast<int>(rng() % ns);
        int b = static_cast<int>(rng() % ns);
        if (b == a) b = (a + 1) % ns;

        if (s.tasks[a] > 0) {
            auto fwd = apply_edit(s, {EditKind::TaskMove, a, b});
            CHECK(fwd.total_tasks() == s.total_tasks());
            auto back = apply_edit(fwd, {EditKind::TaskMove, b, a});
            CHECK(back == s);
        }
        if (s.occupancy[a] > 0) {
            auto fwd = apply_edit(s, {EditKind::DcMove, a, b}, ParticleKind::ZeroRange);
            CHECK(fwd.total_dcs() == s.total_dcs());
            auto back = apply_edit(fwd, {EditKind::DcMove, b, a}, ParticleKind::ZeroRange);
            CHECK(back == s);
        }
    }
}

TEST_CASE("variant traits encode boundary structure") {
    CHECK(variant_traits(Variant::V1).kind == ParticleKind::None);
    CHECK_FALSE(variant_traits(Variant::V1).needs_m);
    CHECK(variant_traits(Variant::V4).needs_n);
    CHECK(variant_traits(Variant::V6).dcs_open);
    CHECK(variant_traits(Variant::V7).needs_m);
    CHECK(variant_traits(Variant::V7).needs_n);
    CHECK_FALSE(variant_traits(Variant::V8).needs_m);
    CHECK(variant_traits(Variant::V8).needs_n);
    CHECK(variant_traits(Variant::V12).kind == ParticleKind::ZeroRange);
    for (int i = 0; i < 12; ++i) {
        const auto v = static_cast<Variant>(i);
        CHECK(variant_from_name(variant_name(v)) == v);
    }
}

TEST_CASE("spec validation rejects inconsistent tags") {
    auto bad = fixtures::v2();
    bad.conserved_m = 2; // single walker must be exactly one
    CHECK_THROWS_AS(bad.validate(), Error);

    auto v1m = fixtures::v1();
    v1m.conserved_m = 1; // V1 has no walkers
    CHECK_THROWS_AS(v1m.validate(), Error);

    auto nocap = fixtures::v5();
    nocap.truncation.n_max.reset();
    CHECK_THROWS_AS(nocap.validate(), Error);
}

TEST_CASE("admissibility tracks manifolds") {
    auto spec = fixtures::v7(3, 2, 3);
    CHECK(spec.admissible(fixtures::make_state({1, 1, 0}, {3, 0, 0})));
    CHECK_FALSE(spec.admissible(fixtures::make_state({1, 1, 0}, {2, 0, 0}))); // |n| != N
    CHECK_FALSE(spec.admissible(fixtures::make_state({2, 0, 0}, {3, 0, 0}))); // exclusion
    CHECK_FALSE(spec.admissible(fixtures::make_state({1, 0, 0}, {3, 0, 0}))); // |y| != M

    // every reachable single-walker state has exactly one occupied site
    auto v3 = fixtures::v3();
    CHECK(v3.canonical_state().total_dcs() == 1);
    CHECK(v3.admissible(v3.canonical_state()));
}

TEST_CASE("state serialization is walker-then-tasks") {
    CHECK(to_string(fixtures::make_state({1, 0}, {2, 3})) == "y=1;0|n=2;3");
}

TEST_CASE("composition and subset enumeration") {
    int count = 0;
    for_each_composition(2, 3, [&](const CountVec& v) {
        CHECK(v.size() == 3);
        CHECK(v[0] + v[1] + v[2] == 2);
        ++count;
    });
    CHECK(count == 6);

    count = 0;
    for_each_subset(2, 4, [&](const CountVec& v) {
        Count s = 0;
        for (Count c : v) {
            CHECK(c <= 1);
            s += c;
        }
        CHECK(s == 2);
        ++count;
    });
    CHECK(count == 6);

    CHECK(binomial(4, 2) == 6);
    CHECK(compositions(3, 3) == 10);
}
