#include "somfrechet/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace somfrechet {

Volume validate_volume(std::vector<double> flat, std::size_t voxels, std::size_t timepoints,
                       std::optional<Extents> extents, std::string subject_id)
{
    if (voxels < 1) throw ValidationError("volume needs at least one voxel");
    if (timepoints < 2) throw ValidationError("volume needs at least two time points");
    if (flat.size() != voxels * timepoints) {
        std::ostringstream os;
        os << "volume buffer holds " << flat.size() << " values, expected " << voxels << "x"
           << timepoints;
        throw ValidationError(os.str());
    }
    if (extents && extents->width * extents->height != voxels) {
        std::ostringstream os;
        os << "extent mismatch: " << extents->width << "x" << extents->height
           << " != " << voxels << " voxels";
        throw ValidationError(os.str());
    }
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (!std::isfinite(flat[i])) {
            std::ostringstream os;
            os << "non-finite value at voxel " << i / timepoints << ", time " << i % timepoints;
            throw ValidationError(os.str());
        }
    }
    Volume vol;
    vol.data_ = std::move(flat);
    vol.voxels_ = voxels;
    vol.timepoints_ = timepoints;
    vol.extents_ = extents;
    vol.subject_id_ = std::move(subject_id);
    return vol;
}

Volume validate_volume(std::span<const std::vector<double>> rows, std::optional<Extents> extents,
                       std::string subject_id)
{
    if (rows.empty()) throw ValidationError("volume needs at least one voxel");
    const std::size_t t = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * t);
    for (std::size_t v = 0; v < rows.size(); ++v) {
        if (rows[v].size() != t) {
            std::ostringstream os;
            os << "ragged input: voxel " << v << " has " << rows[v].size() << " time points, expected "
               << t;
            throw ValidationError(os.str());
        }
        flat.insert(flat.end(), rows[v].begin(), rows[v].end());
    }
    return validate_volume(std::move(flat), rows.size(), t, extents, std::move(subject_id));
}

GridSpec::GridSpec(std::size_t k1, std::size_t k2) : k1_(k1), k2_(k2)
{
    if (k1 < 1 || k2 < 1) throw ValidationError("grid dimensions must be positive");
}

double GridSpec::squared_grid_distance(std::size_t a, std::size_t b) const
{
    const auto ca = coord(a);
    const auto cb = coord(b);
    const double dr = static_cast<double>(ca.row) - static_cast<double>(cb.row);
    const double dc = static_cast<double>(ca.col) - static_cast<double>(cb.col);
    return dr * dr + dc * dc;
}

Assignment::Assignment(std::vector<std::size_t> bmu_of, std::size_t units)
    : bmu_of_(std::move(bmu_of)), units_(units)
{
    for (std::size_t v = 0; v < bmu_of_.size(); ++v) {
        if (bmu_of_[v] >= units_) {
            std::ostringstream os;
            os << "voxel " << v << " assigned to unit " << bmu_of_[v] << " of " << units_;
            throw ValidationError(os.str());
        }
    }
}

std::vector<std::uint8_t> Assignment::voxels_of(std::size_t unit) const
{
    std::vector<std::uint8_t> out(bmu_of_.size(), 0);
    for (std::size_t v = 0; v < bmu_of_.size(); ++v) out[v] = bmu_of_[v] == unit ? 1 : 0;
    return out;
}

std::size_t Assignment::count(std::size_t unit) const
{
    return static_cast<std::size_t>(std::count(bmu_of_.begin(), bmu_of_.end(), unit));
}

Som::Som(GridSpec grid, std::vector<double> weights, std::size_t timepoints, Assignment assignment)
    : grid_(grid), weights_(std::move(weights)), timepoints_(timepoints),
      assignment_(std::move(assignment))
{
    if (timepoints_ < 1) throw ValidationError("map weights need at least one time point");
    if (weights_.size() != grid_.units() * timepoints_) {
        std::ostringstream os;
        os << "map holds " << weights_.size() << " weight values, expected " << grid_.units()
           << "x" << timepoints_;
        throw ValidationError(os.str());
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!std::isfinite(weights_[i])) {
            std::ostringstream os;
            os << "non-finite weight at unit " << i / timepoints_ << ", time " << i % timepoints_;
            throw ValidationError(os.str());
        }
    }
    if (assignment_.voxels() > 0 && assignment_.units() != grid_.units())
        throw ValidationError("assignment unit count does not match the grid");
}

Som Som::with_assignment(Assignment assignment) const
{
    return Som(grid_, weights_, timepoints_, std::move(assignment));
}

std::string_view metric_name(MetricKind kind)
{
    switch (kind) {
    case MetricKind::TSmd: return "T-SMD";
    case MetricKind::SSmd: return "S-SMD";
    case MetricKind::StSmd: return "ST-SMD";
    }
    return "?";
}

MetricKind parse_metric(std::string_view name)
{
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (auto kind : kAllMetrics)
        if (metric_name(kind) == upper) return kind;
    throw ValidationError("unknown metric '" + std::string(name) +
                          "' (expected T-SMD, S-SMD or ST-SMD)");
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values, MetricKind metric,
                               bool closed)
    : n_(n), values_(std::move(values)), metric_(metric), closed_(closed)
{
    if (values_.size() != n_ * n_) throw ValidationError("distance matrix is not square");
    for (std::size_t i = 0; i < n_; ++i) {
        if (values_[i * n_ + i] != 0.0) {
            std::ostringstream os;
            os << "distance matrix diagonal entry " << i << " is not zero";
            throw ValidationError(os.str());
        }
        for (std::size_t j = 0; j < n_; ++j) {
            const double d = values_[i * n_ + j];
            if (!(d >= 0.0) || !std::isfinite(d)) {
                std::ostringstream os;
                os << "distance (" << i << "," << j << ") is negative or non-finite";
                throw ValidationError(os.str());
            }
            if (d != values_[j * n_ + i]) {
                std::ostringstream os;
                os << "distance matrix is asymmetric at (" << i << "," << j << ")";
                throw ValidationError(os.str());
            }
        }
    }
    if (closed_) {
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                for (std::size_t k = 0; k < n_; ++k)
                    if ((*this)(i, j) > (*this)(i, k) + (*this)(k, j) + 1e-9) {
                        std::ostringstream os;
                        os << "matrix flagged closed violates the triangle inequality at (" << i
                           << "," << j << "," << k << ")";
                        throw ValidationError(os.str());
                    }
    }
}

DistanceMatrix DistanceMatrix::subset(std::span<const std::size_t> indices) const
{
    const std::size_t m = indices.size();
    std::vector<double> out(m * m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) out[a * m + b] = (*this)(indices[a], indices[b]);
    return DistanceMatrix(m, std::move(out), metric_, closed_);
}

DistanceMatrix DistanceMatrix::scaled(double factor) const
{
    if (!(factor > 0.0)) throw ValidationError("scale factor must be positive");
    std::vector<double> out(values_);
    for (auto& d : out) d *= factor;
    return DistanceMatrix(n_, std::move(out), metric_, closed_);
}

GroupedSample::GroupedSample(std::vector<std::size_t> labels) : labels_(std::move(labels))
{
    std::size_t groups = 0;
    for (auto l : labels_) groups = std::max(groups, l + 1);
    sizes_.assign(groups, 0);
    for (auto l : labels_) ++sizes_[l];
    for (std::size_t j = 0; j < groups; ++j)
        if (sizes_[j] == 0) {
            std::ostringstream os;
            os << "condition " << j << " has no members";
            throw ValidationError(os.str());
        }
}

std::vector<std::size_t> GroupedSample::members(std::size_t group) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == group) out.push_back(i);
    return out;
}

}  // namespace somfrechet
