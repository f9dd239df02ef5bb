#include "somfrechet/synth.hpp"
#include "somfrechet/trainer.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace somfrechet;
using testing::som_from_rows;

TEST_CASE("bmu picks the nearest prototype with ties to the lowest index")
{
    const GridSpec g(1, 2);
    const Som s = som_from_rows(g, {{0, 0}, {3, 4}});
    const double x[] = {1, 1};
    CHECK(bmu_index(x, s) == 0);

    const GridSpec g6(2, 3);
    const Som six = som_from_rows(g6, {{1, 0}, {5, 5}, {5, 5}, {9, 9}, {5, 5}, {-1, 0}});
    const double w3[] = {9, 9};
    CHECK(bmu_index(w3, six) == 3);
    const double mid[] = {0, 0};  // equidistant from units 0 and 5
    CHECK(bmu_index(mid, six) == 0);

    const double wrong[] = {1, 2, 3};
    CHECK_THROWS_AS(bmu_index(wrong, s), ValidationError);
}

TEST_CASE("gaussian neighborhood kernel")
{
    const GridSpec g(3, 3);
    CHECK(neighborhood_kernel(4, 4, 0.7, g) == 1.0);
    CHECK(neighborhood_kernel(0, 1, 1.0, g) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(neighborhood_kernel(0, 1, 1.0, g) == doctest::Approx(0.60653).epsilon(1e-5));
    const GridSpec line(1, 4);
    CHECK(neighborhood_kernel(0, 3, 0.1, line) < 1e-6);
    CHECK(neighborhood_kernel(0, 3, 0.1, line) > 0.0);
    CHECK_THROWS_AS(neighborhood_kernel(0, 1, 0.0, g), ValidationError);
    CHECK_THROWS_AS(neighborhood_kernel(0, 1, -1.0, g), ValidationError);
}

TEST_CASE("batch step examples")
{
    SUBCASE("two inputs, one unit")
    {
        const Volume v = validate_volume(std::vector<double>{0, 0, 2, 2}, 2, 2);
        const Som s = som_from_rows(GridSpec(1, 1), {{5, -5}});
        const Som next = batch_step(s, v, 1.0);
        CHECK(next.weight(0)[0] == doctest::Approx(1.0));
        CHECK(next.weight(0)[1] == doctest::Approx(1.0));
    }
    SUBCASE("a single input is copied into every unit")
    {
        const Volume v = validate_volume(std::vector<double>{0.3, -2.0, 4.0}, 1, 3);
        const Som s = som_from_rows(GridSpec(2, 2), {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
        const Som next = batch_step(s, v, 1.5);
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t t = 0; t < 3; ++t) CHECK(next.weight(k)[t] == doctest::Approx(v.at(0, t)));
    }
    SUBCASE("a huge radius gives the column means")
    {
        std::mt19937_64 rng(3);
        const Volume v = testing::random_volume(rng, 30, 4);
        const Som s = testing::random_som(rng, GridSpec(3, 3), 4, 30);
        const Som next = batch_step(s, v, 1e6);
        for (std::size_t t = 0; t < 4; ++t) {
            double mean = 0.0;
            for (std::size_t i = 0; i < 30; ++i) mean += v.at(i, t);
            mean /= 30.0;
            for (std::size_t k = 0; k < 9; ++k) CHECK(std::abs(next.weight(k)[t] - mean) < 1e-6);
        }
    }
}

TEST_CASE("batch weights stay inside the per-time-point data range")
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Volume v = testing::random_volume(rng, 25, 5);
        const Som s = testing::random_som(rng, GridSpec(2, 3), 5, 25);
        const Som next = batch_step(s, v, 0.2 + rep * 0.1);
        for (std::size_t t = 0; t < 5; ++t) {
            double lo = v.at(0, t);
            double hi = lo;
            for (std::size_t i = 1; i < 25; ++i) {
                lo = std::min(lo, v.at(i, t));
                hi = std::max(hi, v.at(i, t));
            }
            for (std::size_t k = 0; k < 6; ++k) {
                CHECK(next.weight(k)[t] >= lo - 1e-12);
                CHECK(next.weight(k)[t] <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("schedule radius decays linearly to its floor")
{
    TrainingSchedule s;
    s.iterations = 10;
    s.sigma0 = 3.0;
    s.sigma_min = 0.5;
    CHECK(s.sigma_at(0) == 3.0);
    CHECK(s.sigma_at(1) == 3.0);
    CHECK(s.sigma_at(2) == doctest::Approx(2.7));
    CHECK(s.sigma_at(10) == 0.5);
    for (std::size_t i = 1; i < 10; ++i) CHECK(s.sigma_at(i + 1) <= s.sigma_at(i));
    CHECK(s.alpha_at(0) == doctest::Approx(0.1));
    CHECK(s.alpha_at(10) == doctest::Approx(0.001));

    TrainingSchedule bad;
    bad.sigma_min = 4.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = {};
    bad.iterations = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("batch training on a synthetic subject")
{
    ScenarioSpec spec;
    spec.scenario = Scenario::Temporal;
    spec.seed = 5;
    const Volume v = generate_subject(spec, Group::A, 0);
    TrainingSchedule sched;
    sched.iterations = 100;
    sched.sigma0 = 3.0;
    sched.seed = 9;
    const Som a = train_batch(v, GridSpec(3, 3), sched);
    CHECK(a.units() == 9);
    CHECK(a.voxels() == 100);
    CHECK(a.assignment() == assign(a, v));

    const Som b = train_batch(v, GridSpec(3, 3), sched, 3);
    CHECK(a == b);
}

TEST_CASE("one batch iteration equals one batch step from the initial weights")
{
    std::mt19937_64 rng(21);
    const Volume v = testing::random_volume(rng, 40, 6);
    TrainingSchedule sched;
    sched.iterations = 1;
    sched.sigma0 = 2.0;
    sched.seed = 77;
    const GridSpec g(2, 2);
    const Som trained = train_batch(v, g, sched);
    const Som stepped = batch_step(initialize_weights(v, g, 77), v, 2.0);
    CHECK(std::equal(trained.weights().begin(), trained.weights().end(), stepped.weights().begin()));
}

TEST_CASE("initial weights lie in the per-time-point range")
{
    std::mt19937_64 rng(8);
    const Volume v = testing::random_volume(rng, 20, 3);
    const Som s = initialize_weights(v, GridSpec(3, 3), 4);
    for (std::size_t t = 0; t < 3; ++t) {
        double lo = 1e300;
        double hi = -1e300;
        for (std::size_t i = 0; i < 20; ++i) {
            lo = std::min(lo, v.at(i, t));
            hi = std::max(hi, v.at(i, t));
        }
        for (std::size_t k = 0; k < 9; ++k) {
            CHECK(s.weight(k)[t] >= lo);
            CHECK(s.weight(k)[t] <= hi);
        }
    }
    CHECK(initialize_weights(v, GridSpec(3, 3), 4) == s);
}

TEST_CASE("sequential training edge cases")
{
    std::mt19937_64 rng(2);
    const Volume v = testing::random_volume(rng, 12, 4);
    TrainingSchedule sched;
    sched.iterations = 5;
    sched.sigma0 = 2.0;
    sched.seed = 3;
    const GridSpec g(2, 2);

    const Som frozen = train_sequential(v, g, sched, [](std::size_t) { return 0.0; });
    const Som init = initialize_weights(v, g, 3);
    CHECK(std::equal(frozen.weights().begin(), frozen.weights().end(), init.weights().begin()));

    const Volume one = validate_volume(std::vector<double>{4, -1, 2}, 1, 3);
    TrainingSchedule single = sched;
    single.iterations = 1;
    const Som jumped = train_sequential(one, GridSpec(1, 1), single, [](std::size_t) { return 1.0; });
    for (std::size_t t = 0; t < 3; ++t) CHECK(jumped.weight(0)[t] == doctest::Approx(one.at(0, t)));

    TrainingSchedule defaults;
    CHECK(defaults.alpha0 == 0.1);
    CHECK_NOTHROW(defaults.validate());
    CHECK(train_sequential(v, g, sched) == train_sequential(v, g, sched));
}

TEST_CASE("quantization error")
{
    const Volume v = validate_volume(std::vector<double>{0, 0, 0, 0}, 1, 4);
    const Som s = som_from_rows(GridSpec(1, 1), {{1, 1, 1, 1}});
    CHECK(quantization_error(s, v) == doctest::Approx(2.0));

    const Volume exact = validate_volume(std::vector<double>{1, 2, 3, 4}, 2, 2);
    const Som fits = som_from_rows(GridSpec(1, 2), {{3, 4}, {1, 2}});
    CHECK(quantization_error(fits, exact) == 0.0);

    std::mt19937_64 rng(12);
    const Volume r = testing::random_volume(rng, 15, 3);
    const Som rs = testing::random_som(rng, GridSpec(2, 2), 3, 15);
    std::vector<double> shifted_data(r.data().begin(), r.data().end());
    for (auto& x : shifted_data) x += 7.5;
    std::vector<double> shifted_w(rs.weights().begin(), rs.weights().end());
    for (auto& x : shifted_w) x += 7.5;
    const Volume r2 = validate_volume(shifted_data, 15, 3);
    const Som rs2(rs.grid(), shifted_w, 3);
    CHECK(quantization_error(rs2, r2) == doctest::Approx(quantization_error(rs, r)).epsilon(1e-9));
}

TEST_CASE("training lowers the quantization error for nearly every seed")
{
    ScenarioSpec spec;
    spec.scenario = Scenario::SpatioTemporal;
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        spec.seed = seed;
        const Volume v = generate_subject(spec, Group::A, 0);
        TrainingSchedule sched;
        sched.iterations = 20;
        sched.sigma0 = 3.0;
        sched.seed = seed;
        const Som init = initialize_weights(v, GridSpec(3, 3), seed);
        const Som trained = train_batch(v, GridSpec(3, 3), sched);
        if (quantization_error(trained, v) <= quantization_error(init, v)) ++improved;
    }
    CHECK(improved >= 95);
}
