#pragma once

#include "somfrechet/core.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace somfrechet {

/// Returned by the t and F statistics when the denominator vanishes under a
/// nonzero numerator.
inline constexpr double kInfiniteStatistic = std::numeric_limits<double>::infinity();

/// Restricted Fréchet means and variances of every group.
struct GroupStats {
    std::vector<std::size_t> mean_index;
    std::vector<double> variance;
    std::vector<std::size_t> group_sizes;
};

struct FTestResult {
    double ss_between = 0.0;
    double ss_within = 0.0;
    double statistic = 0.0;
    std::size_t grand_mean_index = 0;
    std::vector<std::size_t> group_mean_index;
};

/// The member minimizing the sum of squared distances to all other members
/// (scaled by 1/(n-1) when n > 1; scaling cannot change the choice). Ties go
/// to the lowest index. `d` must be closed.
std::size_t restricted_frechet_mean(const DistanceMatrix& d, std::span<const std::size_t> members);

/// Sum of squared distances to `mean_index` over the members, divided by n-1.
/// Needs at least two members.
double frechet_variance(const DistanceMatrix& d, std::span<const std::size_t> members,
                        std::size_t mean_index);

GroupStats group_stats(const DistanceMatrix& d, const GroupedSample& groups);

enum class TForm {
    /// Pooled variance ((n1-1)S1^2 + (n2-1)S2^2)/(n1+n2-2), scale sqrt(1/n1+1/n2).
    General,
    /// S_p^2 = S1^2 + S2^2 with scale 1/sqrt(N).
    EqualSize,
};

/// Fréchet t from the already computed ingredients.
double t_from_moments(double mean_distance, double var1, double var2, std::size_t n1,
                      std::size_t n2, double delta0, TForm form);

/// Fréchet t-statistic between two groups. The numerator distance is between
/// the groups' restricted means.
double t_statistic(const DistanceMatrix& d, const GroupedSample& groups, double delta0 = 0.0,
                   TForm form = TForm::General);

/// Between-group over within-group Fréchet variance ratio. The grand mean is
/// the restricted mean over all samples.
FTestResult f_statistic(const DistanceMatrix& d, const GroupedSample& groups);

struct PermutationOptions {
    std::size_t permutations = 100;
    std::uint64_t seed = 0;
    StatisticKind statistic = StatisticKind::T;
    double delta0 = 0.0;
    TForm form = TForm::General;
    /// Use (1 + #exceed) / (1 + B) instead of the plain proportion.
    bool add_one = false;
    std::size_t workers = 1;
};

/// Plain upper-tail proportion #{null >= observed} / B (or the add-one form).
double permutation_p_value(double observed, std::span<const double> null, bool add_one = false);

/// Labels of replicate `b`: the observed labels shuffled with a generator
/// seeded from (seed, b), so any prefix of replicates is stable in B.
std::vector<std::size_t> permuted_labels(const GroupedSample& groups, std::uint64_t seed,
                                         std::size_t replicate);

/// Permutation test on the group labels. Every replicate reuses the same
/// closed matrix; only the labels move.
TestResult permutation_test(const DistanceMatrix& d, const GroupedSample& groups,
                            const PermutationOptions& options);

struct BonferroniVerdict {
    double threshold = 0.0;
    std::vector<bool> significant;
};

/// Significant iff p < alpha / m.
BonferroniVerdict bonferroni_adjust(std::span<const double> p_values, double alpha = 0.05);

}  // namespace somfrechet
