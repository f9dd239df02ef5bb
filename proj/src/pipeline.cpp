#include "somfrechet/pipeline.hpp"

#include "somfrechet/metrics.hpp"
#include "somfrechet/parallel.hpp"

#include <cmath>
#include <optional>

namespace somfrechet {

std::vector<Som> train_all(std::span<const Volume> volumes, const GridSpec& grid,
                           const TrainingSchedule& schedule, std::size_t workers)
{
    std::vector<std::optional<Som>> slots(volumes.size());
    parallel_for(volumes.size(), workers, [&](std::size_t i) {
        TrainingSchedule own = schedule;
        own.seed = derive_seed(schedule.seed, i);
        slots[i] = train_batch(volumes[i], grid, own);
    });
    std::vector<Som> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

ReplicateResult run_replicate(const ReplicateConfig& config, std::size_t replicate)
{
    ReplicateResult out;
    out.replicate = replicate;
    out.seed = derive_seed(config.seed, replicate);

    ScenarioSpec spec = config.scenario;
    spec.seed = derive_seed(out.seed, 1);
    const auto study = generate_study(spec, config.workers);

    std::vector<Volume> volumes;
    std::vector<std::size_t> labels;
    for (const auto& s : study) {
        volumes.push_back(s.volume);
        labels.push_back(s.group == Group::A ? 0 : 1);
    }
    TrainingSchedule schedule = config.schedule;
    schedule.seed = derive_seed(out.seed, 2);
    const auto soms = train_all(volumes, config.grid, schedule, config.workers);
    const GroupedSample groups(labels);

    for (const auto metric : config.metrics) {
        const auto closed = metric_closure(pairwise_distances(soms, metric, config.workers));
        PermutationOptions options;
        options.permutations = config.permutations;
        options.seed = derive_seed(out.seed, 3);
        options.workers = config.workers;
        out.tests.emplace(metric, permutation_test(closed, groups, options));
    }
    return out;
}

MeanSd mean_sd(std::span<const double> values)
{
    MeanSd out;
    out.count = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

}  // namespace somfrechet
