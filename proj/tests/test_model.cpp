#include <cmath>

#include "doctest.h"
#include "idset/errors.hpp"
#include "idset/examples.hpp"
#include "idset/model.hpp"

using namespace idset;

TEST_CASE("unbounded axes keep their step when the truncation doubles") {
    auto a = axis_nodes(Interval::real_line(), 5.0, 21, 5.0);
    auto b = axis_nodes(Interval::real_line(), 5.0, 21, 10.0);
    REQUIRE(a.nodes.size() == 21);
    REQUIRE(b.nodes.size() == 41);
    CHECK(a.nodes.front() == doctest::Approx(-5.0));
    CHECK(b.nodes.back() == doctest::Approx(10.0));
    CHECK(b.nodes[1] - b.nodes[0] == doctest::Approx(0.5));
    CHECK(a.boundary.front() != 0);
    CHECK(a.boundary[10] == 0);
    // every node of the coarser grid is a node of the finer one
    for (double v : a.nodes) {
        bool found = false;
        for (double w : b.nodes) found = found || std::abs(v - w) < 1e-12;
        CHECK(found);
    }
}

TEST_CASE("bounded axes ignore the truncation and have no boundary flags") {
    auto a = axis_nodes(Interval::closed(0.0, 1.0), 5.0, 11, 20.0);
    REQUIRE(a.nodes.size() == 11);
    CHECK(a.nodes.back() == doctest::Approx(1.0));
    for (auto f : a.boundary) CHECK(f == 0);
}

TEST_CASE("parameter grid points are exact decimals and neighbors stay inside") {
    ParameterBox box{{-1.5, 0.0}, {2.5, 2.0}, {21, 21}, {"a", "b"}};
    CHECK(box.size() == 441);
    auto p = box.point(10 * 21 + 10);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 1.0);
    CHECK_FALSE(box.neighbor(0, 0, -1).has_value());
    CHECK(box.neighbor(0, 1, 1).value() == 1);
    CHECK(box.neighbor(0, 0, 1).value() == 21);
}

TEST_CASE("a single-resolution coordinate is pinned at its lower end") {
    ParameterBox box{{0.3}, {0.3}, {1}, {"t"}};
    CHECK(box.size() == 1);
    CHECK(box.point(0)[0] == 0.3);
}

TEST_CASE("distributions normalize positive weights") {
    auto F = DiscreteDistribution::normalized({{{1.0}, 2.0}, {{3.0}, 6.0}});
    CHECK(F[0].weight == doctest::Approx(0.25));
    CHECK(F.mean(0) == doctest::Approx(2.5));
    CHECK_THROWS_AS(DiscreteDistribution::normalized({{{1.0}, -1.0}}), Error);
}

TEST_CASE("sections follow the support predicate and reject empties") {
    IntervalRegConfig cfg;
    auto m = build_interval_model(cfg);
    auto grid = m.make_grid();
    Vec z{0.2, 0.9, 0.0};
    Vec th{0.5, 0.25};
    auto idx = section(m, grid, z, th);
    CHECK(idx.size() == 15);
    for (auto i : idx) {
        CHECK(grid.point(i)[0] >= 0.2 - 1e-9);
        CHECK(grid.point(i)[0] <= 0.9 + 1e-9);
    }
    Vec outside{7.0, 8.0, 0.0};
    CHECK_THROWS_AS(section(m, grid, outside, th), EmptySection);
}

TEST_CASE("compacted images keep support values") {
    EntryGameConfig cfg;
    auto m = build_entry_model(cfg);
    auto grid = m.make_grid();
    Vec z{1.0, 1.0, 0.0};
    auto img = moment_image(m, grid, z, cfg.theta0());
    auto c = img.compact();
    CHECK(c.size() < img.size());
    CHECK(c.max_abs() == img.max_abs());
}
