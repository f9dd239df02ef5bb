#include "somfrechet/jaccard.hpp"

#include "somfrechet/parallel.hpp"
#include "somfrechet/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace somfrechet {

double jaccard_distance(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y)
{
    if (x.size() != y.size()) {
        std::ostringstream os;
        os << "binary vectors have lengths " << x.size() << " and " << y.size();
        throw ValidationError(os.str());
    }
    std::size_t both = 0;
    std::size_t either_only = 0;
    for (std::size_t h = 0; h < x.size(); ++h) {
        const bool a = x[h] != 0;
        const bool b = y[h] != 0;
        if (a && b) ++both;
        else if (a != b) ++either_only;
    }
    if (both + either_only == 0) return 0.0;
    return static_cast<double>(either_only) / static_cast<double>(both + either_only);
}

namespace {

void require_compatible(const Som& mean_som, const Volume& subject)
{
    if (mean_som.timepoints() != subject.timepoints() || mean_som.voxels() != subject.voxels()) {
        std::ostringstream os;
        os << "mean map is " << mean_som.voxels() << "x" << mean_som.timepoints()
           << " but subject '" << subject.subject_id() << "' is " << subject.voxels() << "x"
           << subject.timepoints();
        throw ValidationError(os.str());
    }
}

std::vector<double> per_unit_jaccard(const Som& mean_som, const Volume& subject)
{
    require_compatible(mean_som, subject);
    const Assignment projected = assign(mean_som, subject);
    std::vector<double> out(mean_som.units());
    for (std::size_t k = 0; k < mean_som.units(); ++k)
        out[k] = jaccard_distance(mean_som.assignment().voxels_of(k), projected.voxels_of(k));
    return out;
}

}  // namespace

double global_jaccard(const Som& mean_som, const Volume& subject, std::size_t unit)
{
    if (unit >= mean_som.units()) throw ValidationError("unit index out of range");
    return per_unit_jaccard(mean_som, subject)[unit];
}

std::vector<std::size_t> UnitRanking::best(std::size_t count) const
{
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(count, order.size()))};
}

UnitRanking sample_jaccard_index(const Som& mean_som, std::span<const Volume> group,
                                 std::size_t workers)
{
    if (group.empty()) throw ValidationError("sample Jaccard index of an empty group");
    std::vector<std::vector<double>> per_subject(group.size());
    parallel_for(group.size(), workers,
                 [&](std::size_t i) { per_subject[i] = per_unit_jaccard(mean_som, group[i]); });

    UnitRanking out;
    out.index.assign(mean_som.units(), 0.0);
    for (const auto& values : per_subject)
        for (std::size_t k = 0; k < values.size(); ++k) out.index[k] += values[k];
    for (auto& v : out.index) v /= static_cast<double>(group.size());

    out.order.resize(mean_som.units());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return out.index[a] < out.index[b]; });
    return out;
}

std::vector<double> overlap_report(const Som& som, const UnitRanking& ranking,
                                   std::span<const std::uint8_t> reference)
{
    if (reference.size() != som.voxels()) {
        std::ostringstream os;
        os << "reference map has " << reference.size() << " voxels, map assigns " << som.voxels();
        throw ValidationError(os.str());
    }
    if (ranking.order.size() != som.units())
        throw ValidationError("ranking does not cover every unit of the map");
    std::vector<std::size_t> hits(som.units(), 0);
    std::size_t active = 0;
    for (std::size_t v = 0; v < reference.size(); ++v) {
        if (reference[v] == 0) continue;
        ++active;
        ++hits[som.assignment().unit_of(v)];
    }
    if (active == 0) throw ValidationError("reference map has no active voxel");
    std::vector<double> out;
    out.reserve(som.units());
    for (auto k : ranking.order)
        out.push_back(static_cast<double>(hits[k]) / static_cast<double>(active));
    return out;
}

}  // namespace somfrechet
