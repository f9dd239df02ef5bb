#include "somfrechet/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace somfrechet;

TEST_CASE("profiles")
{
    CHECK(profile_value(ProfileKind::Signal1, 2.5) == doctest::Approx(1.0));
    CHECK(profile_value(ProfileKind::Signal2, 5.0) == doctest::Approx(1.0));
    const auto bg = make_profile(ProfileKind::Background, 50, 0.0, 1);
    CHECK(std::all_of(bg.begin(), bg.end(), [](double x) { return x == 0.0; }));
    const auto s1 = make_profile(ProfileKind::Signal1, 20, 0.0, 1);
    CHECK(s1[0] == doctest::Approx(std::sin(2.0 * M_PI * 0.1)));
    for (double x : s1) CHECK(std::abs(x) <= kSignalAmplitude / 2.0);
}

TEST_CASE("noise level follows the SNR")
{
    ScenarioSpec spec;
    spec.snr = 2.0;
    CHECK(spec.noise_sigma() == 0.5);
    const auto draws = make_profile(ProfileKind::Background, 100000, spec.noise_sigma(), 123);
    double mean = 0.0;
    for (double x : draws) mean += x;
    mean /= static_cast<double>(draws.size());
    double var = 0.0;
    for (double x : draws) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(draws.size() - 1));
    CHECK(std::abs(sd - 0.5) / 0.5 < 0.02);
}

TEST_CASE("scenario masks")
{
    ScenarioSpec spec;
    spec.scenario = Scenario::Temporal;
    auto active = [](const std::vector<ProfileKind>& m) {
        std::vector<std::size_t> out;
        for (std::size_t v = 0; v < m.size(); ++v)
            if (m[v] != ProfileKind::Background) out.push_back(v);
        return out;
    };
    const auto a2 = voxel_profiles(spec, Group::A);
    const auto b2 = voxel_profiles(spec, Group::B);
    CHECK(active(a2) == active(b2));
    CHECK(a2 != b2);

    spec.scenario = Scenario::Spatial;
    auto a3 = voxel_profiles(spec, Group::A);
    auto b3 = voxel_profiles(spec, Group::B);
    CHECK(a3 != b3);
    std::sort(a3.begin(), a3.end());
    std::sort(b3.begin(), b3.end());
    CHECK(a3 == b3);

    spec.scenario = Scenario::SpatioTemporal;
    const auto a1 = voxel_profiles(spec, Group::A);
    const auto b1 = voxel_profiles(spec, Group::B);
    CHECK(active(a1) != active(b1));
    CHECK(std::count(a1.begin(), a1.end(), ProfileKind::Signal2) == 0);
    CHECK(std::count(b1.begin(), b1.end(), ProfileKind::Signal1) == 0);

    spec.width = 6;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("study generation is deterministic per seed")
{
    ScenarioSpec spec;
    spec.seed = 3;
    const auto one = generate_study(spec, 1);
    const auto two = generate_study(spec, 4);
    REQUIRE(one.size() == 40);
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].volume.voxels() == 100);
        CHECK(one[i].volume.timepoints() == 50);
        CHECK(one[i].group == (i < 20 ? Group::A : Group::B));
        CHECK(std::equal(one[i].volume.data().begin(), one[i].volume.data().end(),
                         two[i].volume.data().begin()));
        CHECK(one[i].volume.subject_id() == two[i].volume.subject_id());
    }
    CHECK(one[0].volume.subject_id() == "SC1_A_000");

    spec.seed = 4;
    const Volume other = generate_subject(spec, Group::A, 0);
    const auto first = one[0].volume.data();
    const auto it = std::mismatch(first.begin(), first.end(), other.data().begin());
    INFO("first differing entry at " << (it.first - first.begin()));
    CHECK(it.first != first.end());
    CHECK(subject_seed(spec, Group::A, 0) != subject_seed(spec, Group::B, 0));
}
