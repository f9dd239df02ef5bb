#include "somfrechet/inference.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace somfrechet;
using testing::reals_matrix;

TEST_CASE("restricted Frechet mean of toy reals")
{
    const auto d = reals_matrix({1, 2, 10});
    const std::size_t all[] = {0, 1, 2};
    CHECK(restricted_frechet_mean(d, all) == 1);
    const std::size_t one[] = {2};
    CHECK(restricted_frechet_mean(d, one) == 2);
    CHECK(restricted_frechet_mean(d.scaled(5.0), all) == 1);
    CHECK_THROWS_AS(restricted_frechet_mean(d, std::span<const std::size_t>{}), ValidationError);

    const DistanceMatrix open(2, {0, 1, 1, 0}, MetricKind::TSmd, false);
    const std::size_t two[] = {0, 1};
    CHECK_THROWS_AS(restricted_frechet_mean(open, two), ValidationError);
    // {0, 2} ties; the lower index wins.
    CHECK(restricted_frechet_mean(reals_matrix({0, 2}), two) == 0);
}

TEST_CASE("Frechet variance")
{
    const auto d = reals_matrix({1, 2, 10});
    const std::size_t all[] = {0, 1, 2};
    CHECK(frechet_variance(d, all, 1) == doctest::Approx(32.5));
    CHECK(frechet_variance(d.scaled(3.0), all, 1) == doctest::Approx(9.0 * 32.5));
    CHECK(frechet_variance(reals_matrix({4, 4, 4}), all, 0) == 0.0);
    const std::size_t one[] = {0};
    CHECK_THROWS_AS(frechet_variance(d, one, 0), ValidationError);
    const std::size_t pair[] = {0, 1};
    CHECK_THROWS_AS(frechet_variance(d, pair, 2), ValidationError);
}

TEST_CASE("t statistic forms")
{
    CHECK(t_from_moments(2.0, 2.0, 2.0, 4, 4, 0.0, TForm::EqualSize) ==
          doctest::Approx(2.0 / (2.0 / std::sqrt(8.0))));
    CHECK(t_from_moments(2.0, 2.0, 2.0, 4, 4, 0.0, TForm::EqualSize) ==
          doctest::Approx(2.8284).epsilon(1e-4));
    CHECK(t_from_moments(0.0, 1.0, 3.0, 5, 6, 0.0, TForm::General) == 0.0);
    CHECK(t_from_moments(1.5, 1.0, 3.0, 5, 6, 1.5, TForm::General) == 0.0);
    CHECK(t_from_moments(1.0, 0.0, 0.0, 3, 3, 0.0, TForm::General) == kInfiniteStatistic);
    CHECK(t_from_moments(0.0, 0.0, 0.0, 3, 3, 0.0, TForm::General) == 0.0);

    // General form: S_p^2 = ((n1-1)S1^2 + (n2-1)S2^2)/(n1+n2-2).
    const double sp = std::sqrt((4 * 1.0 + 2 * 4.0) / 6.0);
    CHECK(t_from_moments(3.0, 1.0, 4.0, 5, 3, 0.5, TForm::General) ==
          doctest::Approx(2.5 / (sp * std::sqrt(1.0 / 5 + 1.0 / 3))));

    const auto d = reals_matrix({0, 1, 2, 10, 11, 12});
    const GroupedSample g({0, 0, 0, 1, 1, 1});
    const double dist = 10.0;  // between the restricted means 1 and 11
    CHECK(t_statistic(d, g) == doctest::Approx(t_from_moments(dist, 1.0, 1.0, 3, 3, 0.0, TForm::General)));
    CHECK(t_statistic(d, g, 10.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(t_statistic(d, GroupedSample({0, 0, 1, 1, 2, 2})), ValidationError);
}

TEST_CASE("F statistic")
{
    const auto d = reals_matrix({0, 2, 10, 12});
    const auto f = f_statistic(d, GroupedSample({0, 0, 1, 1}));
    CHECK(f.grand_mean_index == 1);
    CHECK(f.group_mean_index == std::vector<std::size_t>{0, 2});
    CHECK(f.ss_between == doctest::Approx(136.0));
    CHECK(f.ss_within == doctest::Approx(4.0));
    CHECK(f.statistic == doctest::Approx(34.0));

    const auto degenerate = f_statistic(reals_matrix({0, 0, 10, 10}), GroupedSample({0, 0, 1, 1}));
    CHECK(degenerate.ss_within == 0.0);
    CHECK(degenerate.statistic == kInfiniteStatistic);

    // All group means sit on the grand mean.
    const auto flat = f_statistic(reals_matrix({0, 0, 0, 0}), GroupedSample({0, 1, 0, 1}));
    CHECK(flat.ss_between == 0.0);
    CHECK(flat.statistic == 0.0);

    const auto singles = f_statistic(reals_matrix({0, 3, 5}), GroupedSample({0, 1, 2}));
    CHECK(singles.ss_within == 0.0);
}

TEST_CASE("permutation p-values")
{
    const double null[] = {0.5, 1.0, 2.0, 3.0};
    CHECK(permutation_p_value(1.0, null) == 0.75);
    CHECK(permutation_p_value(5.0, null) == 0.0);
    CHECK(permutation_p_value(5.0, null, true) == doctest::Approx(1.0 / 5.0));
    CHECK_THROWS_AS(permutation_p_value(1.0, std::span<const double>{}), ValidationError);
}

TEST_CASE("permuted labels keep group sizes and are prefix stable")
{
    const GroupedSample g({0, 0, 0, 1, 1, 2});
    for (std::size_t b = 0; b < 20; ++b) {
        auto l = permuted_labels(g, 99, b);
        CHECK(l == permuted_labels(g, 99, b));
        std::sort(l.begin(), l.end());
        CHECK(l == std::vector<std::size_t>{0, 0, 0, 1, 1, 2});
    }

    const auto d = reals_matrix({0, 1, 2, 3, 10, 11, 12, 13});
    const GroupedSample two({0, 0, 0, 0, 1, 1, 1, 1});
    PermutationOptions small;
    small.permutations = 30;
    small.seed = 4;
    PermutationOptions large = small;
    large.permutations = 80;
    large.workers = 3;
    const auto a = permutation_test(d, two, small);
    const auto b = permutation_test(d, two, large);
    CHECK(std::equal(a.null_distribution.begin(), a.null_distribution.end(),
                     b.null_distribution.begin()));
}

TEST_CASE("permutation test on separated and identity-labelled data")
{
    // Ten per group, so a shuffle almost never reproduces the observed split.
    std::vector<double> xs;
    std::vector<std::size_t> labels;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(i < 10 ? 0.5 * i : 20.0 + 0.5 * i);
        labels.push_back(i < 10 ? 0 : 1);
    }
    const auto d = reals_matrix(xs);
    const GroupedSample g(labels);
    PermutationOptions o;
    o.permutations = 200;
    o.seed = 1;
    const auto r = permutation_test(d, g, o);
    CHECK(r.p_value == 0.0);
    CHECK(r.null_distribution.size() == 200);
    CHECK(r.permutations == 200);

    // A seed whose single shuffle reproduces the observed labels gives p = 1.
    const auto tiny = reals_matrix({0, 0, 3, 3});
    const GroupedSample four({0, 0, 1, 1});
    std::uint64_t seed = 0;
    while (permuted_labels(four, seed, 0) != std::vector<std::size_t>{0, 0, 1, 1}) ++seed;
    PermutationOptions once;
    once.permutations = 1;
    once.seed = seed;
    CHECK(permutation_test(tiny, four, once).p_value == 1.0);

    PermutationOptions none;
    none.permutations = 0;
    CHECK_THROWS_AS(permutation_test(d, g, none), ValidationError);
}

TEST_CASE("permutation p-values are roughly uniform under the null")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 1.0);
    int low = 0;
    const int reps = 200;
    double mean_p = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        std::vector<double> xs(12);
        for (auto& x : xs) x = n(rng);
        const auto d = reals_matrix(xs);
        PermutationOptions o;
        o.permutations = 100;
        o.seed = static_cast<std::uint64_t>(rep);
        const auto r = permutation_test(d, GroupedSample({0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}), o);
        mean_p += r.p_value / reps;
        if (r.p_value <= 0.05) ++low;
    }
    CHECK(mean_p > 0.35);
    CHECK(mean_p < 0.65);
    CHECK(low <= 25);
}

TEST_CASE("F permutation test")
{
    const auto d = reals_matrix({0, 1, 2, 10, 11, 12, 20, 21, 22});
    PermutationOptions o;
    o.statistic = StatisticKind::F;
    o.permutations = 100;
    const auto r = permutation_test(d, GroupedSample({0, 0, 0, 1, 1, 1, 2, 2, 2}), o);
    CHECK(r.kind == StatisticKind::F);
    CHECK(r.p_value <= 0.05);
}

TEST_CASE("Bonferroni verdicts")
{
    const double ps[] = {0.013, 0.021, 0.2};
    const auto v = bonferroni_adjust(ps, 0.05);
    CHECK(v.threshold == doctest::Approx(0.0166667).epsilon(1e-5));
    CHECK(v.significant == std::vector<bool>{true, false, false});
    const double single[] = {0.049};
    CHECK(bonferroni_adjust(single, 0.05).threshold == 0.05);
    const double zeros[] = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (bool s : bonferroni_adjust(zeros, 0.05).significant) CHECK(s);
    CHECK_THROWS_AS(bonferroni_adjust(std::span<const double>{}, 0.05), ValidationError);
}
