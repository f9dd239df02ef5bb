#pragma once

#include "somfrechet/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace somfrechet {

/// (C10 + C01) / (C11 + C10 + C01). Two all-zero vectors are at distance 0.
double jaccard_distance(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

/// Compares the mean map's voxel set for unit k with the voxel set the
/// subject's data induces on the same unit when every subject voxel is
/// projected onto its BMU in the mean map.
double global_jaccard(const Som& mean_som, const Volume& subject, std::size_t unit);

/// Per-unit sample Jaccard index and the units sorted ascending by it (ties by
/// unit index). The front of `order` holds the most representative units.
struct UnitRanking {
    std::vector<double> index;
    std::vector<std::size_t> order;

    std::vector<std::size_t> best(std::size_t count) const;
};

UnitRanking sample_jaccard_index(const Som& mean_som, std::span<const Volume> group,
                                 std::size_t workers = 1);

/// For each unit in ranking order, |S(w_k) n reference| / |reference|. Since
/// the assignment partitions the voxels the fractions sum to one.
std::vector<double> overlap_report(const Som& som, const UnitRanking& ranking,
                                   std::span<const std::uint8_t> reference);

}  // namespace somfrechet
