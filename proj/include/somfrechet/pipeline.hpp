#pragma once

#include "somfrechet/core.hpp"
#include "somfrechet/inference.hpp"
#include "somfrechet/synth.hpp"
#include "somfrechet/trainer.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace somfrechet {

/// Trains one map per volume. Subject i is seeded with derive_seed(schedule.seed, i).
std::vector<Som> train_all(std::span<const Volume> volumes, const GridSpec& grid,
                           const TrainingSchedule& schedule, std::size_t workers = 1);

/// One simulated study: generate, train, distances, closure, permutation t-tests.
struct ReplicateConfig {
    ScenarioSpec scenario;
    GridSpec grid{3, 3};
    TrainingSchedule schedule;
    std::size_t permutations = 100;
    std::vector<MetricKind> metrics{MetricKind::TSmd, MetricKind::SSmd, MetricKind::StSmd};
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

struct ReplicateResult {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::map<MetricKind, TestResult> tests;
};

/// Runs replicate `replicate`; every random stream is derived from
/// (config.seed, replicate), so replicates are independent and resumable.
ReplicateResult run_replicate(const ReplicateConfig& config, std::size_t replicate);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

/// Sample mean and (n-1) standard deviation.
MeanSd mean_sd(std::span<const double> values);

}  // namespace somfrechet
