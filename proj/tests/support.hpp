#pragma once

#include "somfrechet/core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace somfrechet::testing {

inline Volume random_volume(std::mt19937_64& rng, std::size_t voxels, std::size_t timepoints)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> flat(voxels * timepoints);
    for (auto& x : flat) x = n(rng);
    return validate_volume(std::move(flat), voxels, timepoints);
}

/// Random prototypes plus a random voxel assignment.
inline Som random_som(std::mt19937_64& rng, const GridSpec& grid, std::size_t timepoints,
                      std::size_t voxels)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> unit(0, grid.units() - 1);
    std::vector<double> w(grid.units() * timepoints);
    for (auto& x : w) x = n(rng);
    std::vector<std::size_t> bmu(voxels);
    for (auto& b : bmu) b = unit(rng);
    return Som(grid, std::move(w), timepoints, Assignment(std::move(bmu), grid.units()));
}

/// |x_i - x_j| on a handful of reals: already a metric, so it is flagged closed.
inline DistanceMatrix reals_matrix(const std::vector<double>& xs)
{
    const std::size_t n = xs.size();
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i * n + j] = std::abs(xs[i] - xs[j]);
    return DistanceMatrix(n, std::move(v), MetricKind::TSmd, true);
}

inline Som som_from_rows(const GridSpec& grid, const std::vector<std::vector<double>>& rows,
                         std::vector<std::size_t> bmu = {})
{
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    const std::size_t t = rows.front().size();
    if (bmu.empty()) return Som(grid, std::move(flat), t);
    return Som(grid, std::move(flat), t, Assignment(std::move(bmu), grid.units()));
}

}  // namespace somfrechet::testing
