#include "somfrechet/inference.hpp"

#include "somfrechet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace somfrechet {

namespace {

void require_closed(const DistanceMatrix& d)
{
    if (!d.closed())
        throw ValidationError("inference needs a metric-closed distance matrix");
}

void require_members(const DistanceMatrix& d, std::span<const std::size_t> members)
{
    if (members.empty()) throw ValidationError("empty member set");
    for (auto i : members)
        if (i >= d.size()) {
            std::ostringstream os;
            os << "member index " << i << " out of range for " << d.size() << " samples";
            throw ValidationError(os.str());
        }
}

double squared_distance_sum(const DistanceMatrix& d, std::span<const std::size_t> members,
                            std::size_t center)
{
    double s = 0.0;
    for (auto i : members) s += d(i, center) * d(i, center);
    return s;
}

double ratio_or_sentinel(double numerator, double denominator)
{
    if (denominator > 0.0) return numerator / denominator;
    if (numerator == 0.0) return 0.0;
    return std::copysign(kInfiniteStatistic, numerator);
}

std::size_t mean_of(const DistanceMatrix& d, std::span<const std::size_t> members)
{
    std::size_t best = members.front();
    double best_sum = squared_distance_sum(d, members, best);
    for (auto c : members) {
        const double s = squared_distance_sum(d, members, c);
        if (s < best_sum || (s == best_sum && c < best)) {
            best = c;
            best_sum = s;
        }
    }
    return best;
}

std::vector<std::vector<std::size_t>> members_by_label(std::span<const std::size_t> labels,
                                                       std::size_t groups)
{
    std::vector<std::vector<std::size_t>> out(groups);
    for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
    return out;
}

double t_for_labels(const DistanceMatrix& d, std::span<const std::size_t> labels, double delta0,
                    TForm form)
{
    const auto members = members_by_label(labels, 2);
    const std::size_t m1 = mean_of(d, members[0]);
    const std::size_t m2 = mean_of(d, members[1]);
    const double v1 = frechet_variance(d, members[0], m1);
    const double v2 = frechet_variance(d, members[1], m2);
    return t_from_moments(d(m1, m2), v1, v2, members[0].size(), members[1].size(), delta0, form);
}

FTestResult f_for_labels(const DistanceMatrix& d, std::span<const std::size_t> labels,
                         std::size_t groups)
{
    const auto members = members_by_label(labels, groups);
    std::vector<std::size_t> all(d.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    FTestResult out;
    out.grand_mean_index = mean_of(d, all);
    double between = 0.0;
    double within = 0.0;
    for (const auto& group : members) {
        const std::size_t m = mean_of(d, group);
        out.group_mean_index.push_back(m);
        const double dm = d(m, out.grand_mean_index);
        between += static_cast<double>(group.size()) * (dm * dm);
        within += squared_distance_sum(d, group, m);
    }
    const std::size_t n = d.size();
    out.ss_between = between / static_cast<double>(groups - 1);
    out.ss_within = n > groups ? within / static_cast<double>(n - groups) : 0.0;
    out.statistic = ratio_or_sentinel(out.ss_between, out.ss_within);
    return out;
}

}  // namespace

std::size_t restricted_frechet_mean(const DistanceMatrix& d, std::span<const std::size_t> members)
{
    require_closed(d);
    require_members(d, members);
    return mean_of(d, members);
}

double frechet_variance(const DistanceMatrix& d, std::span<const std::size_t> members,
                        std::size_t mean_index)
{
    require_members(d, members);
    if (members.size() < 2) throw ValidationError("Fréchet variance needs at least two members");
    if (std::find(members.begin(), members.end(), mean_index) == members.end())
        throw ValidationError("mean index is not a member of the group");
    return squared_distance_sum(d, members, mean_index) /
           static_cast<double>(members.size() - 1);
}

GroupStats group_stats(const DistanceMatrix& d, const GroupedSample& groups)
{
    require_closed(d);
    if (groups.size() != d.size()) throw ValidationError("labels do not match the matrix size");
    GroupStats out;
    for (std::size_t j = 0; j < groups.groups(); ++j) {
        const auto members = groups.members(j);
        const std::size_t m = mean_of(d, members);
        out.mean_index.push_back(m);
        out.variance.push_back(members.size() > 1 ? frechet_variance(d, members, m) : 0.0);
        out.group_sizes.push_back(members.size());
    }
    return out;
}

double t_from_moments(double mean_distance, double var1, double var2, std::size_t n1,
                      std::size_t n2, double delta0, TForm form)
{
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    if (form == TForm::EqualSize) {
        const double sp = std::sqrt(var1 + var2);
        return ratio_or_sentinel(mean_distance - delta0, sp / std::sqrt(a + b));
    }
    const double pooled = ((a - 1.0) * var1 + (b - 1.0) * var2) / (a + b - 2.0);
    return ratio_or_sentinel(mean_distance - delta0,
                             std::sqrt(pooled) * std::sqrt(1.0 / a + 1.0 / b));
}

double t_statistic(const DistanceMatrix& d, const GroupedSample& groups, double delta0, TForm form)
{
    require_closed(d);
    if (groups.size() != d.size()) throw ValidationError("labels do not match the matrix size");
    if (groups.groups() != 2) throw ValidationError("the t-statistic compares exactly two groups");
    return t_for_labels(d, groups.labels(), delta0, form);
}

FTestResult f_statistic(const DistanceMatrix& d, const GroupedSample& groups)
{
    require_closed(d);
    if (groups.size() != d.size()) throw ValidationError("labels do not match the matrix size");
    if (groups.groups() < 2) throw ValidationError("the F-statistic needs at least two groups");
    return f_for_labels(d, groups.labels(), groups.groups());
}

double permutation_p_value(double observed, std::span<const double> null, bool add_one)
{
    if (null.empty()) throw ValidationError("empty null distribution");
    const auto exceed = static_cast<double>(
        std::count_if(null.begin(), null.end(), [&](double s) { return s >= observed; }));
    const auto b = static_cast<double>(null.size());
    return add_one ? (1.0 + exceed) / (1.0 + b) : exceed / b;
}

std::vector<std::size_t> permuted_labels(const GroupedSample& groups, std::uint64_t seed,
                                         std::size_t replicate)
{
    std::vector<std::size_t> labels(groups.labels().begin(), groups.labels().end());
    std::mt19937_64 rng(derive_seed(seed, replicate));
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

TestResult permutation_test(const DistanceMatrix& d, const GroupedSample& groups,
                            const PermutationOptions& options)
{
    require_closed(d);
    if (options.permutations < 1) throw ValidationError("need at least one permutation");
    if (groups.size() != d.size()) throw ValidationError("labels do not match the matrix size");

    const std::size_t j = groups.groups();
    auto statistic = [&](std::span<const std::size_t> labels) {
        if (options.statistic == StatisticKind::T)
            return t_for_labels(d, labels, options.delta0, options.form);
        return f_for_labels(d, labels, j).statistic;
    };
    if (options.statistic == StatisticKind::T && j != 2)
        throw ValidationError("the t-statistic compares exactly two groups");
    if (options.statistic == StatisticKind::F && j < 2)
        throw ValidationError("the F-statistic needs at least two groups");

    TestResult out;
    out.metric = d.metric();
    out.kind = options.statistic;
    out.seed = options.seed;
    out.permutations = options.permutations;
    out.delta0 = options.delta0;
    out.add_one = options.add_one;
    out.statistic = statistic(groups.labels());
    out.null_distribution.resize(options.permutations);
    parallel_for(options.permutations, options.workers, [&](std::size_t b) {
        out.null_distribution[b] = statistic(permuted_labels(groups, options.seed, b));
    });
    out.p_value = permutation_p_value(out.statistic, out.null_distribution, options.add_one);
    return out;
}

BonferroniVerdict bonferroni_adjust(std::span<const double> p_values, double alpha)
{
    if (p_values.empty()) throw ValidationError("no p-values to adjust");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    BonferroniVerdict out;
    out.threshold = alpha / static_cast<double>(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0, 1]");
        out.significant.push_back(p < out.threshold);
    }
    return out;
}

}  // namespace somfrechet
