#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace somfrechet {

/// Thrown when input data violates a domain invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Optional 2-D voxel-grid extents. Only metadata: every metric works on the
/// flat voxel index.
struct Extents {
    std::size_t width = 0;
    std::size_t height = 0;

    bool operator==(const Extents&) const = default;
};

/// A subject's V x T matrix of voxel time series, stored row-major.
class Volume {
public:
    Volume() = default;

    std::size_t voxels() const noexcept { return voxels_; }
    std::size_t timepoints() const noexcept { return timepoints_; }
    const std::optional<Extents>& extents() const noexcept { return extents_; }
    const std::string& subject_id() const noexcept { return subject_id_; }

    std::span<const double> row(std::size_t v) const
    {
        return {data_.data() + v * timepoints_, timepoints_};
    }
    double at(std::size_t v, std::size_t t) const { return data_[v * timepoints_ + t]; }
    std::span<const double> data() const noexcept { return data_; }

private:
    friend Volume validate_volume(std::vector<double>, std::size_t, std::size_t,
                                  std::optional<Extents>, std::string);

    std::vector<double> data_;
    std::size_t voxels_ = 0;
    std::size_t timepoints_ = 0;
    std::optional<Extents> extents_;
    std::string subject_id_;
};

/// Builds a Volume from a flat row-major buffer of size voxels * timepoints.
/// Throws ValidationError on a non-finite entry (naming its voxel/time index),
/// on V < 1, T < 2, or on an extent mismatch.
Volume validate_volume(std::vector<double> flat, std::size_t voxels, std::size_t timepoints,
                       std::optional<Extents> extents = std::nullopt,
                       std::string subject_id = {});

/// Same as above for a list of rows; rows must all have the same length.
Volume validate_volume(std::span<const std::vector<double>> rows,
                       std::optional<Extents> extents = std::nullopt,
                       std::string subject_id = {});

/// Map grid of k1 rows by k2 columns. Units are numbered row-major from 0.
class GridSpec {
public:
    GridSpec(std::size_t k1, std::size_t k2);

    std::size_t rows() const noexcept { return k1_; }
    std::size_t cols() const noexcept { return k2_; }
    std::size_t units() const noexcept { return k1_ * k2_; }

    struct Coord {
        std::size_t row;
        std::size_t col;
        bool operator==(const Coord&) const = default;
    };

    Coord coord(std::size_t unit) const { return {unit / k2_, unit % k2_}; }
    std::size_t index(std::size_t row, std::size_t col) const { return row * k2_ + col; }

    /// Squared Euclidean distance between two units' grid coordinates.
    double squared_grid_distance(std::size_t a, std::size_t b) const;

    bool operator==(const GridSpec&) const = default;

private:
    std::size_t k1_;
    std::size_t k2_;
};

/// Voxel-to-unit map induced by a trained map. Every voxel belongs to exactly
/// one unit, so the per-unit indicator vectors partition the voxels.
class Assignment {
public:
    Assignment() = default;
    Assignment(std::vector<std::size_t> bmu_of, std::size_t units);

    std::size_t voxels() const noexcept { return bmu_of_.size(); }
    std::size_t units() const noexcept { return units_; }
    std::size_t unit_of(std::size_t voxel) const { return bmu_of_[voxel]; }
    std::span<const std::size_t> bmu_of() const noexcept { return bmu_of_; }

    /// Binarized indicator of the voxels assigned to `unit`.
    std::vector<std::uint8_t> voxels_of(std::size_t unit) const;
    std::size_t count(std::size_t unit) const;

    bool operator==(const Assignment&) const = default;

private:
    std::vector<std::size_t> bmu_of_;
    std::size_t units_ = 0;
};

/// A trained self-organizing map: K prototype time series and the assignment
/// of the training voxels.
class Som {
public:
    Som(GridSpec grid, std::vector<double> weights, std::size_t timepoints,
        Assignment assignment = {});

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t units() const noexcept { return grid_.units(); }
    std::size_t timepoints() const noexcept { return timepoints_; }
    std::size_t voxels() const noexcept { return assignment_.voxels(); }

    std::span<const double> weight(std::size_t unit) const
    {
        return {weights_.data() + unit * timepoints_, timepoints_};
    }
    std::span<const double> weights() const noexcept { return weights_; }
    const Assignment& assignment() const noexcept { return assignment_; }

    Som with_assignment(Assignment assignment) const;

    bool operator==(const Som&) const = default;

private:
    GridSpec grid_;
    std::vector<double> weights_;
    std::size_t timepoints_;
    Assignment assignment_;
};

enum class MetricKind { TSmd, SSmd, StSmd };

inline constexpr MetricKind kAllMetrics[] = {MetricKind::TSmd, MetricKind::SSmd,
                                             MetricKind::StSmd};

/// "T-SMD", "S-SMD", "ST-SMD".
std::string_view metric_name(MetricKind kind);
/// Accepts the canonical names case-insensitively ("t-smd" works).
MetricKind parse_metric(std::string_view name);

/// Symmetric n x n matrix of pairwise map distances.
class DistanceMatrix {
public:
    /// Validates symmetry, zero diagonal and non-negativity. When `closed` is
    /// set, the triangle inequality is also checked to within 1e-9.
    DistanceMatrix(std::size_t n, std::vector<double> values, MetricKind metric,
                   bool closed = false);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::span<const double> values() const noexcept { return values_; }
    MetricKind metric() const noexcept { return metric_; }
    bool closed() const noexcept { return closed_; }

    /// Principal submatrix on `indices`, in the given order.
    DistanceMatrix subset(std::span<const std::size_t> indices) const;
    DistanceMatrix scaled(double factor) const;

private:
    std::size_t n_;
    std::vector<double> values_;
    MetricKind metric_;
    bool closed_;
};

/// Condition labels for n samples; labels are in [0, J) and every condition
/// is non-empty.
class GroupedSample {
public:
    explicit GroupedSample(std::vector<std::size_t> labels);

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t groups() const noexcept { return sizes_.size(); }
    std::size_t label(std::size_t i) const { return labels_[i]; }
    std::span<const std::size_t> labels() const noexcept { return labels_; }
    std::span<const std::size_t> group_sizes() const noexcept { return sizes_; }
    std::vector<std::size_t> members(std::size_t group) const;

private:
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> sizes_;
};

enum class StatisticKind { T, F };

/// Outcome of a permutation test. `p_value` is the proportion of null draws
/// at or above `statistic` (or (1+x)/(1+B) when add-one smoothing was asked for).
struct TestResult {
    double statistic = 0.0;
    std::vector<double> null_distribution;
    double p_value = 1.0;
    MetricKind metric = MetricKind::TSmd;
    StatisticKind kind = StatisticKind::T;
    std::uint64_t seed = 0;
    std::size_t permutations = 0;
    double delta0 = 0.0;
    bool add_one = false;
};

}  // namespace somfrechet
