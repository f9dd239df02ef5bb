#include "somfrechet/metrics.hpp"

#include "somfrechet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace somfrechet {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void require_same_timepoints(const Som& x, const Som& y)
{
    if (x.timepoints() != y.timepoints()) {
        std::ostringstream os;
        os << "maps have " << x.timepoints() << " and " << y.timepoints() << " time points";
        throw ValidationError(os.str());
    }
}

void require_same_voxels(const Som& x, const Som& y)
{
    if (x.voxels() == 0 || y.voxels() == 0)
        throw ValidationError("spatial distances need maps with a voxel assignment");
    if (x.voxels() != y.voxels()) {
        std::ostringstream os;
        os << "maps assign " << x.voxels() << " and " << y.voxels() << " voxels";
        throw ValidationError(os.str());
    }
}

/// Prototype distances, row-major x.units() by y.units().
std::vector<double> prototype_distances(const Som& x, const Som& y)
{
    std::vector<double> d(x.units() * y.units());
    for (std::size_t a = 0; a < x.units(); ++a)
        for (std::size_t b = 0; b < y.units(); ++b)
            d[a * y.units() + b] = euclidean(x.weight(a), y.weight(b));
    return d;
}

/// Hamming distances between every pair of unit voxel sets, row-major
/// x.units() by y.units(), via |A| + |B| - 2|A n B|.
std::vector<double> indicator_hamming(const Som& x, const Som& y)
{
    const std::size_t kx = x.units();
    const std::size_t ky = y.units();
    std::vector<std::size_t> both(kx * ky, 0);
    std::vector<std::size_t> nx(kx, 0);
    std::vector<std::size_t> ny(ky, 0);
    const auto& ax = x.assignment();
    const auto& ay = y.assignment();
    for (std::size_t v = 0; v < ax.voxels(); ++v) {
        const std::size_t a = ax.unit_of(v);
        const std::size_t b = ay.unit_of(v);
        ++both[a * ky + b];
        ++nx[a];
        ++ny[b];
    }
    const double voxels = static_cast<double>(ax.voxels());
    std::vector<double> h(kx * ky);
    for (std::size_t a = 0; a < kx; ++a)
        for (std::size_t b = 0; b < ky; ++b)
            h[a * ky + b] = static_cast<double>(nx[a] + ny[b] - 2 * both[a * ky + b]) / voxels;
    return h;
}

/// Sum over rows of the row minimum plus sum over columns of the column minimum.
/// The two directions are accumulated separately so that swapping the maps
/// gives a bit-identical result.
double two_way_min_sum(const std::vector<double>& table, std::size_t rows, std::size_t cols)
{
    double forward = 0.0;
    for (std::size_t a = 0; a < rows; ++a) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < cols; ++b) m = std::min(m, table[a * cols + b]);
        forward += m;
    }
    double backward = 0.0;
    for (std::size_t b = 0; b < cols; ++b) {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < rows; ++a) m = std::min(m, table[a * cols + b]);
        backward += m;
    }
    return forward + backward;
}

}  // namespace

double t_smd(const Som& x, const Som& y, std::size_t voxels)
{
    require_same_timepoints(x, y);
    if (voxels < 1) throw ValidationError("t_smd needs V >= 1");
    const auto d = prototype_distances(x, y);
    return two_way_min_sum(d, x.units(), y.units()) / (2.0 * static_cast<double>(voxels));
}

double hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b)
{
    if (a.size() != b.size()) {
        std::ostringstream os;
        os << "binary vectors have lengths " << a.size() << " and " << b.size();
        throw ValidationError(os.str());
    }
    if (a.empty()) throw ValidationError("hamming distance of empty vectors");
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += (a[i] != 0) != (b[i] != 0) ? 1 : 0;
    return static_cast<double>(differ) / static_cast<double>(a.size());
}

double s_smd(const Som& x, const Som& y)
{
    require_same_voxels(x, y);
    const auto h = indicator_hamming(x, y);
    return two_way_min_sum(h, x.units(), y.units()) / (2.0 * static_cast<double>(x.voxels()));
}

double st_smd(const Som& x, const Som& y)
{
    require_same_timepoints(x, y);
    require_same_voxels(x, y);
    const std::size_t kx = x.units();
    const std::size_t ky = y.units();
    const auto d = prototype_distances(x, y);
    const auto h = indicator_hamming(x, y);

    double forward = 0.0;
    for (std::size_t a = 0; a < kx; ++a) {
        std::size_t best = 0;
        for (std::size_t b = 1; b < ky; ++b)
            if (d[a * ky + b] < d[a * ky + best]) best = b;
        forward += h[a * ky + best];
    }
    double backward = 0.0;
    for (std::size_t b = 0; b < ky; ++b) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < kx; ++a)
            if (d[a * ky + b] < d[best * ky + b]) best = a;
        backward += h[best * ky + b];
    }
    return 0.5 * (forward + backward);
}

double som_distance(const Som& x, const Som& y, MetricKind kind)
{
    switch (kind) {
    case MetricKind::TSmd:
        if (x.voxels() != y.voxels()) {
            std::ostringstream os;
            os << "maps assign " << x.voxels() << " and " << y.voxels() << " voxels";
            throw ValidationError(os.str());
        }
        if (x.voxels() == 0) throw ValidationError("T-SMD needs maps with a voxel assignment");
        return t_smd(x, y, x.voxels());
    case MetricKind::SSmd: return s_smd(x, y);
    case MetricKind::StSmd: return st_smd(x, y);
    }
    throw ValidationError("unknown metric");
}

DistanceMatrix pairwise_distances(std::span<const Som> sample, MetricKind kind,
                                  std::size_t workers)
{
    const std::size_t n = sample.size();
    for (std::size_t i = 1; i < n; ++i) {
        try {
            (void)som_distance(sample[0], sample[i], kind);
        } catch (const ValidationError& e) {
            std::ostringstream os;
            os << "sample member " << i << " is incompatible with member 0: " << e.what();
            throw ValidationError(os.str());
        }
    }
    if (n == 1) (void)som_distance(sample[0], sample[0], kind);

    std::vector<double> values(n * n, 0.0);
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) values[i * n + j] = som_distance(sample[i], sample[j], kind);
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) values[j * n + i] = values[i * n + j];
    return DistanceMatrix(n, std::move(values), kind, false);
}

DistanceMatrix metric_closure(const DistanceMatrix& d)
{
    const std::size_t n = d.size();
    std::vector<double> g(d.values().begin(), d.values().end());
    // Rounding can leave a path a few ulps shorter than the stored entry after
    // one pass; repeating until nothing moves makes the closure idempotent.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) {
                const double ik = g[i * n + k];
                for (std::size_t j = 0; j < n; ++j) {
                    const double via = ik + g[k * n + j];
                    if (via < g[i * n + j]) {
                        g[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        // Paths summed in opposite directions can round differently.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double m = std::min(g[i * n + j], g[j * n + i]);
                if (g[i * n + j] != m || g[j * n + i] != m) changed = true;
                g[i * n + j] = m;
                g[j * n + i] = m;
            }
    }
    return DistanceMatrix(n, std::move(g), d.metric(), true);
}

}  // namespace somfrechet
