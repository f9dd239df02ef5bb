#include "somfrechet/synth.hpp"

#include "somfrechet/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace somfrechet {

std::string_view scenario_name(Scenario s)
{
    switch (s) {
    case Scenario::SpatioTemporal: return "SC1";
    case Scenario::Temporal: return "SC2";
    case Scenario::Spatial: return "SC3";
    }
    return "?";
}

Scenario parse_scenario(std::string_view name)
{
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (auto s : {Scenario::SpatioTemporal, Scenario::Temporal, Scenario::Spatial})
        if (scenario_name(s) == upper) return s;
    throw ValidationError("unknown scenario '" + std::string(name) + "' (expected SC1, SC2 or SC3)");
}

void ScenarioSpec::validate() const
{
    if (block < 1) throw ValidationError("signal blocks need a positive side length");
    if (width < 2 * block || height < 2 * block)
        throw ValidationError("image too small to hold two disjoint signal blocks");
    if (timepoints < 2) throw ValidationError("synthetic images need at least two time points");
    if (!(snr > 0.0) || !std::isfinite(snr)) throw ValidationError("SNR must be positive");
    if (n_per_group < 1) throw ValidationError("each group needs at least one subject");
}

double profile_value(ProfileKind kind, double t)
{
    switch (kind) {
    case ProfileKind::Signal1: return std::sin(2.0 * std::numbers::pi * 0.1 * t);
    case ProfileKind::Signal2: return std::sin(2.0 * std::numbers::pi * 0.05 * t);
    case ProfileKind::Background: return 0.0;
    }
    return 0.0;
}

namespace {

void fill_profile(ProfileKind kind, double noise_sigma, std::mt19937_64& rng, double* out,
                  std::size_t timepoints)
{
    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    for (std::size_t t = 0; t < timepoints; ++t) {
        out[t] = profile_value(kind, static_cast<double>(t + 1));
        if (noise_sigma > 0.0) out[t] += noise(rng);
    }
}

/// Marks a side x side block whose top-left corner is (row, col).
void paint_block(std::vector<ProfileKind>& map, std::size_t width, std::size_t side,
                 std::size_t row, std::size_t col, ProfileKind kind)
{
    for (std::size_t r = row; r < row + side; ++r)
        for (std::size_t c = col; c < col + side; ++c) map[r * width + c] = kind;
}

}  // namespace

std::vector<double> make_profile(ProfileKind kind, std::size_t timepoints, double noise_sigma,
                                 std::uint64_t seed)
{
    if (timepoints < 2) throw ValidationError("profile needs at least two time points");
    if (!(noise_sigma >= 0.0)) throw ValidationError("noise sigma must be non-negative");
    std::vector<double> out(timepoints);
    std::mt19937_64 rng(seed);
    fill_profile(kind, noise_sigma, rng, out.data(), timepoints);
    return out;
}

std::vector<ProfileKind> voxel_profiles(const ScenarioSpec& spec, Group group)
{
    spec.validate();
    const std::size_t w = spec.width;
    const std::size_t b = spec.block;
    const std::size_t last_row = spec.height - b;
    const std::size_t last_col = w - b;
    std::vector<ProfileKind> map(spec.width * spec.height, ProfileKind::Background);
    const bool a = group == Group::A;
    switch (spec.scenario) {
    case Scenario::SpatioTemporal:
        if (a) paint_block(map, w, b, 0, 0, ProfileKind::Signal1);
        else paint_block(map, w, b, last_row, last_col, ProfileKind::Signal2);
        break;
    case Scenario::Temporal:
        paint_block(map, w, b, 0, 0, a ? ProfileKind::Signal1 : ProfileKind::Signal2);
        break;
    case Scenario::Spatial:
        paint_block(map, w, b, 0, 0, ProfileKind::Signal1);
        if (a) paint_block(map, w, b, 0, last_col, ProfileKind::Signal2);
        else paint_block(map, w, b, last_row, 0, ProfileKind::Signal2);
        break;
    }
    return map;
}

std::uint64_t subject_seed(const ScenarioSpec& spec, Group group, std::size_t index)
{
    return derive_seed(spec.seed, group == Group::A ? 0 : 1, index);
}

Volume generate_subject(const ScenarioSpec& spec, Group group, std::size_t index)
{
    const auto profiles = voxel_profiles(spec, group);
    const std::size_t tp = spec.timepoints;
    std::vector<double> data(profiles.size() * tp);
    std::mt19937_64 rng(subject_seed(spec, group, index));
    for (std::size_t v = 0; v < profiles.size(); ++v)
        fill_profile(profiles[v], spec.noise_sigma(), rng, data.data() + v * tp, tp);

    std::ostringstream id;
    id << scenario_name(spec.scenario) << '_' << group_letter(group) << '_';
    id.width(3);
    id.fill('0');
    id << index;
    return validate_volume(std::move(data), profiles.size(), tp, Extents{spec.width, spec.height},
                           id.str());
}

std::vector<SyntheticSubject> generate_study(const ScenarioSpec& spec, std::size_t workers)
{
    spec.validate();
    const std::size_t n = spec.n_per_group;
    std::vector<std::optional<SyntheticSubject>> slots(2 * n);
    parallel_for(2 * n, workers, [&](std::size_t i) {
        const Group g = i < n ? Group::A : Group::B;
        const std::size_t idx = i % n;
        slots[i] = SyntheticSubject{generate_subject(spec, g, idx), g, idx, subject_seed(spec, g, idx)};
    });
    std::vector<SyntheticSubject> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace somfrechet
