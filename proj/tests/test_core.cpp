#include "somfrechet/core.hpp"
#include "somfrechet/parallel.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

using namespace somfrechet;

TEST_CASE("volume accepts a well-formed 100x50 matrix with 10x10 extents")
{
    std::vector<double> flat(100 * 50, 0.25);
    const Volume v = validate_volume(flat, 100, 50, Extents{10, 10}, "s1");
    CHECK(v.voxels() == 100);
    CHECK(v.timepoints() == 50);
    CHECK(v.extents() == Extents{10, 10});
    CHECK(v.at(99, 49) == 0.25);
    CHECK(v.subject_id() == "s1");
}

TEST_CASE("volume rejects a non-finite entry and names its location")
{
    std::vector<double> flat(100 * 50, 0.0);
    flat[17 * 50 + 3] = std::numeric_limits<double>::quiet_NaN();
    try {
        validate_volume(flat, 100, 50);
        FAIL("accepted NaN");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("voxel 17") != std::string::npos);
        CHECK(msg.find("time 3") != std::string::npos);
    }
}

TEST_CASE("volume rejects an extent mismatch and degenerate shapes")
{
    std::vector<std::vector<double>> rows(99, std::vector<double>(50, 1.0));
    CHECK_THROWS_AS(validate_volume(rows, Extents{10, 10}), ValidationError);
    CHECK_THROWS_AS(validate_volume(std::vector<double>(10, 0.0), 10, 1), ValidationError);
    CHECK_THROWS_AS(validate_volume(std::vector<double>(10, 0.0), 4, 2), ValidationError);
    std::vector<std::vector<double>> ragged{{1, 2}, {1, 2, 3}};
    CHECK_THROWS_AS(validate_volume(ragged), ValidationError);
}

TEST_CASE("grid numbers units row-major")
{
    const GridSpec g(4, 6);
    CHECK(g.units() == 24);
    CHECK(g.coord(7) == GridSpec::Coord{1, 1});
    CHECK(g.index(3, 5) == 23);
    CHECK(g.squared_grid_distance(0, 23) == doctest::Approx(9.0 + 25.0));
    CHECK_THROWS_AS(GridSpec(0, 3), ValidationError);
}

TEST_CASE("assignment indicators partition the voxels")
{
    const Assignment a({0, 2, 2, 1, 0}, 4);
    std::vector<int> cover(5, 0);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto s = a.voxels_of(k);
        for (std::size_t v = 0; v < 5; ++v) cover[v] += s[v];
    }
    CHECK(cover == std::vector<int>(5, 1));
    CHECK(a.count(2) == 2);
    CHECK(a.count(3) == 0);
    CHECK_THROWS_AS(Assignment({0, 4}, 4), ValidationError);
}

TEST_CASE("som rejects weights of the wrong shape")
{
    CHECK_THROWS_AS(Som(GridSpec(2, 2), std::vector<double>(7, 0.0), 2), ValidationError);
    CHECK_THROWS_AS(Som(GridSpec(2, 2), std::vector<double>(8, 0.0), 2, Assignment({0}, 3)),
                    ValidationError);
}

TEST_CASE("metric names round-trip")
{
    for (auto m : kAllMetrics) CHECK(parse_metric(metric_name(m)) == m);
    CHECK(parse_metric("st-smd") == MetricKind::StSmd);
    CHECK_THROWS_AS(parse_metric("l2"), ValidationError);
}

TEST_CASE("distance matrix invariants")
{
    CHECK_THROWS_AS(DistanceMatrix(2, {0, 1, 2, 0}, MetricKind::TSmd), ValidationError);
    CHECK_THROWS_AS(DistanceMatrix(2, {1, 1, 1, 0}, MetricKind::TSmd), ValidationError);
    CHECK_THROWS_AS(DistanceMatrix(2, {0, -1, -1, 0}, MetricKind::TSmd), ValidationError);
    // 1 + 1 < 5 violates the triangle inequality, acceptable only when not closed.
    const std::vector<double> v{0, 1, 5, 1, 0, 1, 5, 1, 0};
    CHECK_NOTHROW(DistanceMatrix(3, v, MetricKind::TSmd, false));
    CHECK_THROWS_AS(DistanceMatrix(3, v, MetricKind::TSmd, true), ValidationError);

    const DistanceMatrix d = testing::reals_matrix({1, 2, 10});
    const std::size_t pick[] = {2, 0};
    const auto s = d.subset(pick);
    CHECK(s.size() == 2);
    CHECK(s(0, 1) == 9.0);
    CHECK(d.scaled(3.0)(0, 2) == 27.0);
}

TEST_CASE("grouped sample validates labels")
{
    const GroupedSample g({0, 1, 1, 2, 0});
    CHECK(g.groups() == 3);
    CHECK(g.members(0) == std::vector<std::size_t>{0, 4});
    CHECK_THROWS_AS(GroupedSample({0, 2}), ValidationError);
}

TEST_CASE("derived seeds are stable and distinct")
{
    static_assert(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 0, 5) != derive_seed(1, 1, 5));
    CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("parallel_for visits every index once and rethrows")
{
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::count(hits.begin(), hits.end(), 1) == 1000);
    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                     if (i == 7) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
