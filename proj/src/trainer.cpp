#include "somfrechet/trainer.hpp"

#include "somfrechet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace somfrechet {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        acc += d * d;
    }
    return acc;
}

std::size_t nearest_unit(std::span<const double> x, std::span<const double> weights,
                         std::size_t units)
{
    const std::size_t tp = x.size();
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < units; ++k) {
        const double d = squared_distance(x, weights.subspan(k * tp, tp));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

void require_same_length(const Som& som, const Volume& volume)
{
    if (som.timepoints() != volume.timepoints()) {
        std::ostringstream os;
        os << "map has " << som.timepoints() << " time points but volume has "
           << volume.timepoints();
        throw ValidationError(os.str());
    }
}

}  // namespace

void TrainingSchedule::validate() const
{
    if (iterations < 1) throw ValidationError("schedule needs at least one iteration");
    if (!(sigma0 > 0.0)) throw ValidationError("sigma0 must be positive");
    if (!(sigma_min > 0.0) || sigma_min > sigma0)
        throw ValidationError("sigma_min must lie in (0, sigma0]");
    if (!(alpha0 > 0.0) || alpha0 > 1.0) throw ValidationError("alpha0 must lie in (0, 1]");
}

double TrainingSchedule::sigma_at(std::size_t step) const
{
    if (step == 0) return sigma0;
    const double frac = static_cast<double>(step - 1) / static_cast<double>(iterations);
    return std::max(sigma0 * (1.0 - frac), sigma_min);
}

double TrainingSchedule::alpha_at(std::size_t step) const
{
    return alpha0 * std::pow(0.01, static_cast<double>(step) / static_cast<double>(iterations));
}

std::size_t bmu_index(std::span<const double> x, const Som& som)
{
    if (x.size() != som.timepoints()) {
        std::ostringstream os;
        os << "input has " << x.size() << " time points but map has " << som.timepoints();
        throw ValidationError(os.str());
    }
    return nearest_unit(x, som.weights(), som.units());
}

double neighborhood_kernel(std::size_t k, std::size_t c, double sigma, const GridSpec& grid)
{
    if (!(sigma > 0.0)) throw ValidationError("neighborhood radius must be positive");
    return std::exp(-grid.squared_grid_distance(k, c) / (2.0 * sigma * sigma));
}

Assignment assign(const Som& som, const Volume& volume, std::size_t workers)
{
    require_same_length(som, volume);
    std::vector<std::size_t> bmu(volume.voxels());
    parallel_for(volume.voxels(), workers,
                 [&](std::size_t v) { bmu[v] = bmu_index(volume.row(v), som); });
    return Assignment(std::move(bmu), som.units());
}

Som batch_step(const Som& som, const Volume& volume, double sigma, std::size_t workers)
{
    require_same_length(som, volume);
    const std::size_t units = som.units();
    const std::size_t tp = som.timepoints();
    Assignment before = assign(som, volume, workers);

    // Per-BMU voxel counts and input sums; the kernel depends on v only via c(v).
    std::vector<double> hits(units, 0.0);
    std::vector<double> sums(units * tp, 0.0);
    for (std::size_t v = 0; v < volume.voxels(); ++v) {
        const std::size_t c = before.unit_of(v);
        hits[c] += 1.0;
        const auto x = volume.row(v);
        for (std::size_t t = 0; t < tp; ++t) sums[c * tp + t] += x[t];
    }

    std::vector<double> weights(units * tp, 0.0);
    for (std::size_t k = 0; k < units; ++k) {
        double denom = 0.0;
        for (std::size_t c = 0; c < units; ++c) {
            if (hits[c] == 0.0) continue;
            const double h = neighborhood_kernel(k, c, sigma, som.grid());
            denom += h * hits[c];
            for (std::size_t t = 0; t < tp; ++t) weights[k * tp + t] += h * sums[c * tp + t];
        }
        for (std::size_t t = 0; t < tp; ++t) weights[k * tp + t] /= denom;
    }
    return Som(som.grid(), std::move(weights), tp, std::move(before));
}

Som initialize_weights(const Volume& volume, const GridSpec& grid, std::uint64_t seed)
{
    const std::size_t tp = volume.timepoints();
    std::vector<double> lo(tp, std::numeric_limits<double>::infinity());
    std::vector<double> hi(tp, -std::numeric_limits<double>::infinity());
    for (std::size_t v = 0; v < volume.voxels(); ++v)
        for (std::size_t t = 0; t < tp; ++t) {
            lo[t] = std::min(lo[t], volume.at(v, t));
            hi[t] = std::max(hi[t], volume.at(v, t));
        }

    std::mt19937_64 rng(seed);
    std::vector<double> weights(grid.units() * tp);
    for (std::size_t k = 0; k < grid.units(); ++k)
        for (std::size_t t = 0; t < tp; ++t) {
            if (lo[t] == hi[t]) {
                weights[k * tp + t] = lo[t];
                continue;
            }
            std::uniform_real_distribution<double> draw(lo[t], hi[t]);
            weights[k * tp + t] = draw(rng);
        }
    return Som(grid, std::move(weights), tp);
}

Som train_batch(const Volume& volume, const GridSpec& grid, const TrainingSchedule& schedule,
                std::size_t workers)
{
    schedule.validate();
    Som som = initialize_weights(volume, grid, schedule.seed);
    for (std::size_t step = 0; step < schedule.iterations; ++step)
        som = batch_step(som, volume, schedule.sigma_at(step), workers);
    return som.with_assignment(assign(som, volume, workers));
}

Som train_sequential(const Volume& volume, const GridSpec& grid,
                     const TrainingSchedule& schedule,
                     const std::function<double(std::size_t)>& alpha_override)
{
    schedule.validate();
    const Som init = initialize_weights(volume, grid, schedule.seed);
    std::vector<double> weights(init.weights().begin(), init.weights().end());
    const std::size_t tp = volume.timepoints();
    const std::size_t units = grid.units();

    std::mt19937_64 order_rng(derive_seed(schedule.seed, 0x5e9));
    std::vector<std::size_t> order(volume.voxels());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t step = 0; step < schedule.iterations; ++step) {
        const double alpha = alpha_override ? alpha_override(step) : schedule.alpha_at(step);
        const double sigma = schedule.sigma_at(step);
        std::shuffle(order.begin(), order.end(), order_rng);
        for (const std::size_t v : order) {
            const auto x = volume.row(v);
            const std::size_t c = nearest_unit(x, weights, units);
            for (std::size_t k = 0; k < units; ++k) {
                const double rate = alpha * neighborhood_kernel(k, c, sigma, grid);
                for (std::size_t t = 0; t < tp; ++t)
                    weights[k * tp + t] += rate * (x[t] - weights[k * tp + t]);
            }
        }
    }
    Som trained(grid, std::move(weights), tp);
    return trained.with_assignment(assign(trained, volume));
}

double quantization_error(const Som& som, const Volume& volume)
{
    require_same_length(som, volume);
    double total = 0.0;
    for (std::size_t v = 0; v < volume.voxels(); ++v) {
        const auto x = volume.row(v);
        total += std::sqrt(squared_distance(x, som.weight(bmu_index(x, som))));
    }
    return total;
}

}  // namespace somfrechet
