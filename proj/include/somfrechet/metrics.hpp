#pragma once

#include "somfrechet/core.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace somfrechet {

/// Temporal sum of minimum distances: nearest-prototype Euclidean distances
/// summed in both directions, scaled by 1/(2V).
double t_smd(const Som& x, const Som& y, std::size_t voxels);

/// Proportion of positions at which two binary vectors disagree.
double hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Spatial SMD: as t_smd but with the Hamming distance between the units'
/// voxel indicators in place of the Euclidean distance between prototypes.
double s_smd(const Som& x, const Som& y);

/// Spatio-temporal SMD: for every unit, the Hamming distance between its voxel
/// set and the voxel set of its temporally nearest unit in the other map,
/// summed over both maps and halved.
double st_smd(const Som& x, const Som& y);

double som_distance(const Som& x, const Som& y, MetricKind kind);

/// All pairwise distances of `sample` under `kind` (not closed).
DistanceMatrix pairwise_distances(std::span<const Som> sample, MetricKind kind,
                                  std::size_t workers = 1);

/// Shortest-path distances through the complete graph on the sample points.
/// The result satisfies the triangle inequality and is flagged closed.
DistanceMatrix metric_closure(const DistanceMatrix& d);

}  // namespace somfrechet
