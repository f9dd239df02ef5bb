#pragma once

#include "somfrechet/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace somfrechet {

enum class Scenario {
    SpatioTemporal,  // SC1: groups differ in profile and location
    Temporal,        // SC2: same locations, different profile
    Spatial,         // SC3: same profiles, different location
};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);

enum class ProfileKind { Signal1, Signal2, Background };

enum class Group { A, B };

inline char group_letter(Group g) { return g == Group::A ? 'A' : 'B'; }

/// Peak-to-peak amplitude of the sinusoidal signals.
inline constexpr double kSignalAmplitude = 2.0;

struct ScenarioSpec {
    Scenario scenario = Scenario::SpatioTemporal;
    std::size_t width = 10;
    std::size_t height = 10;
    std::size_t timepoints = 50;
    double snr = 2.0;
    std::size_t n_per_group = 20;
    /// Side length of the square signal blocks.
    std::size_t block = 4;
    std::uint64_t seed = 0;

    void validate() const;
    /// sigma = amplitude / (2 SNR).
    double noise_sigma() const { return kSignalAmplitude / (2.0 * snr); }
};

/// Noiseless profile value at time t seconds: sin(2 pi t / 10) for signal 1,
/// sin(2 pi t / 20) for signal 2, 0 for background.
double profile_value(ProfileKind kind, double t);

/// Profile sampled at t = 1..T plus i.i.d. N(0, noise_sigma^2) noise.
std::vector<double> make_profile(ProfileKind kind, std::size_t timepoints, double noise_sigma,
                                 std::uint64_t seed);

/// Noiseless profile of every voxel (row-major over the image) for one group.
std::vector<ProfileKind> voxel_profiles(const ScenarioSpec& spec, Group group);

/// Seed of one subject, mixed from (spec.seed, group, index).
std::uint64_t subject_seed(const ScenarioSpec& spec, Group group, std::size_t index);

Volume generate_subject(const ScenarioSpec& spec, Group group, std::size_t index);

struct SyntheticSubject {
    Volume volume;
    Group group;
    std::size_t index;
    std::uint64_t seed;
};

/// Group A subjects 0..n-1 followed by group B subjects 0..n-1.
std::vector<SyntheticSubject> generate_study(const ScenarioSpec& spec, std::size_t workers = 1);

}  // namespace somfrechet
