#include <catch_amalgamated.hpp>

#include <cmath>

#include "pvim/errors.hpp"
#include "pvim/interval_set.hpp"

using namespace pvim;

namespace {
const double inf = INFINITY;
const IntervalSet R = IntervalSet::real_line();
const IntervalSet unit_open = IntervalSet(Interval::open(0, 1));
}  // namespace

TEST_CASE("intervals: membership and emptiness") {
    CHECK(Interval::closed(0, 1).contains(0));
    CHECK_FALSE(Interval::right_open(0, 1).contains(1));
    CHECK(Interval::open(0, 0).empty());
    CHECK(Interval::point(2).degenerate());
    CHECK(Interval::point(inf).empty());
    CHECK_FALSE(Interval::real_line().contains(inf));
    CHECK(Interval::closed(2, 1).empty());
}

TEST_CASE("sets normalize: sorted, merged, empties dropped") {
    const IntervalSet s({Interval::closed(3, 4), Interval::right_open(0, 1), Interval::closed(1, 2), Interval::open(5, 5)});
    REQUIRE(s.parts().size() == 2);
    CHECK(s.parts()[0] == Interval::closed(0, 2));
    CHECK(s.parts()[1] == Interval::closed(3, 4));
    // (0,1) and (1,2) leave 1 out, so they stay apart.
    CHECK(IntervalSet({Interval::open(0, 1), Interval::open(1, 2)}).parts().size() == 2);
}

TEST_CASE("set algebra") {
    const IntervalSet a = IntervalSet::closed(0, 2);
    const IntervalSet b = IntervalSet(Interval::open(1, 3));
    CHECK(a.unite(b) == IntervalSet(Interval::right_open(0, 3)));
    CHECK(a.intersect(b) == IntervalSet(Interval::left_open(1, 2)));
    CHECK(a.difference(b) == IntervalSet::closed(0, 1));
    CHECK(a.complement() == IntervalSet({Interval::open(-inf, 0), Interval::open(2, inf)}));
    CHECK(a.complement().complement() == a);
    CHECK(IntervalSet::point(0.5).complement_within(unit_open) ==
          IntervalSet({Interval::open(0, 0.5), Interval::open(0.5, 1)}));
    CHECK(IntervalSet::point(1).subset_of(a));
    CHECK_FALSE(b.subset_of(a));
    CHECK(IntervalSet().subset_of(IntervalSet()));
}

TEST_CASE("closure, isolated points, hull, measure") {
    const IntervalSet holed({Interval::right_open(0, 0.5), Interval::left_open(0.5, 1)});
    CHECK(holed.closure() == IntervalSet::closed(0, 1));
    CHECK(holed.complement_within(IntervalSet::closed(0, 1)).isolated_points() == std::vector<double>{0.5});
    CHECK(holed.measure() == 1.0);
    CHECK(holed.hull()->lo == 0.0);
    CHECK_FALSE(IntervalSet().hull().has_value());
    CHECK(IntervalSet::point(3).measure() == 0.0);
    CHECK(R.measure() == inf);
    CHECK(IntervalSet::closed(0, 1).all_closed());
    CHECK_FALSE(holed.all_closed());
}

TEST_CASE("assertions live inside their ambient space") {
    const Assertion a(IntervalSet(Interval{-inf, 0.4, false, true}), unit_open);
    CHECK(a.set == IntervalSet(Interval::left_open(0, 0.4)));
    CHECK(a.complement().set == IntervalSet(Interval::open(0.4, 1)));
    CHECK(a.complement().complement().set == a.set);
    CHECK(a.contains(0.4));
    CHECK_FALSE(a.contains(0.0));
}

TEST_CASE("null grammar") {
    CHECK(parse_assertion("theta<=0.5", R).set == IntervalSet(Interval{-inf, 0.5, false, true}));
    CHECK(parse_assertion("theta < 0.5", R).set == IntervalSet(Interval{-inf, 0.5, false, false}));
    CHECK(parse_assertion("theta>=0.5", R).set == IntervalSet(Interval{0.5, inf, true, false}));
    CHECK(parse_assertion("mu>0.5", R).set == IntervalSet(Interval{0.5, inf, false, false}));
    CHECK(parse_assertion("theta==0.5", R).set == IntervalSet::point(0.5));
    CHECK(parse_assertion("0.5>=theta", R).set == parse_assertion("theta<=0.5", R).set);
    CHECK(parse_assertion("0.2<=theta<=0.4", R).set == IntervalSet::closed(0.2, 0.4));
    CHECK(parse_assertion("-0.82<=theta<0.52", R).set == IntervalSet(Interval::right_open(-0.82, 0.52)));
    CHECK(parse_assertion("theta<=1e-3", R).set.supremum() == 0.001);
    CHECK(parse_assertion("theta<=0.5", unit_open).set == IntervalSet(Interval::left_open(0, 0.5)));
}

TEST_CASE("null grammar rejects malformed or empty nulls") {
    for (const char* bad : {"", "theta", "theta<=", "theta<=abc", "0.4<=theta>=0.2", "theta~0.1", "0.5<=theta<=0.4",
                            "1 2 3"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_assertion(bad, R), DomainError);
    }
    CHECK_THROWS_AS(parse_assertion("theta<=0", unit_open), DomainError);
}

TEST_CASE("formatting") {
    CHECK(IntervalSet({Interval::right_open(0, 0.5), Interval::left_open(0.5, 1)}).to_string() == "[0, 0.5) U (0.5, 1]");
    CHECK(IntervalSet::point(2).to_string() == "{2}");
    CHECK(IntervalSet().to_string() == "{}");
}
