#pragma once

#include "somfrechet/core.hpp"

#include <cstdint>
#include <functional>
#include <span>

namespace somfrechet {

/// Iteration schedule shared by the batch and sequential trainers.
///
/// The neighborhood radius decays linearly from `sigma0` and is floored at
/// `sigma_min`; the sequential learning rate decays exponentially from
/// `alpha0` to 1% of it. `alpha0` is ignored by the batch trainer.
struct TrainingSchedule {
    std::size_t iterations = 100;
    double sigma0 = 3.0;
    double sigma_min = 0.1;
    double alpha0 = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
    /// Radius used at step `step` (0-based): sigma0 for step 0, then
    /// max(sigma0 * (1 - (step - 1) / iterations), sigma_min).
    double sigma_at(std::size_t step) const;
    /// alpha0 * 0.01^(step / iterations).
    double alpha_at(std::size_t step) const;
};

/// Index of the unit whose weight is Euclidean-closest to `x`; ties go to the
/// lowest index.
std::size_t bmu_index(std::span<const double> x, const Som& som);

/// Gaussian neighborhood exp(-|m_k - m_c|^2 / (2 sigma^2)) on grid coordinates.
double neighborhood_kernel(std::size_t k, std::size_t c, double sigma, const GridSpec& grid);

/// BMU of every voxel against the current weights.
Assignment assign(const Som& som, const Volume& volume, std::size_t workers = 1);

/// One batch update: every weight becomes the kernel-weighted mean of all
/// inputs, with BMUs taken from the pre-step weights. The returned map carries
/// the pre-step assignment.
Som batch_step(const Som& som, const Volume& volume, double sigma, std::size_t workers = 1);

/// Seeded uniform draws per time point over the range of that time point's
/// input values.
Som initialize_weights(const Volume& volume, const GridSpec& grid, std::uint64_t seed);

Som train_batch(const Volume& volume, const GridSpec& grid, const TrainingSchedule& schedule,
                std::size_t workers = 1);

/// Sequential (online) training. `alpha_override`, when set, replaces the
/// learning-rate schedule; it exists so degenerate schedules can be exercised.
Som train_sequential(const Volume& volume, const GridSpec& grid,
                     const TrainingSchedule& schedule,
                     const std::function<double(std::size_t)>& alpha_override = {});

/// Sum over voxels of the Euclidean distance to the voxel's BMU prototype.
double quantization_error(const Som& som, const Volume& volume);

}  // namespace somfrechet
