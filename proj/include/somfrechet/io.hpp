#pragma once

#include "somfrechet/core.hpp"
#include "somfrechet/jaccard.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace somfrechet::io {

namespace fs = std::filesystem;

/// Missing, unreadable or malformed input file. The message names the path.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Volume on disk: `<stem>.f32` holds little-endian float32 values, row-major
/// V x T; `<stem>.json` is the sidecar with dims, extents, subject id and seed.
/// Returns the sidecar path.
fs::path write_volume(const fs::path& dir, const Volume& volume, std::uint64_t seed = 0);
Volume read_volume(const fs::path& sidecar);

/// One row per subject, in sample order.
struct ManifestEntry {
    std::string subject_id;
    std::string group;
    std::uint64_t seed = 0;
    /// Sidecar path relative to the manifest's directory.
    std::string volume;
};

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const fs::path& path);

/// Group names in order of first appearance and the label of every entry.
struct ManifestGroups {
    std::vector<std::string> names;
    std::vector<std::size_t> labels;
};
ManifestGroups manifest_groups(const std::vector<ManifestEntry>& entries);

/// Map file: JSON with grid dims, K weight rows and the length-V assignment.
void write_som(const fs::path& path, const Som& som, const std::string& subject_id = {});
Som read_som(const fs::path& path);

/// CSV with a one-line `# metric=<name> closed=<0|1> n=<n>` header followed
/// by n rows of n values.
void write_distance_matrix(const fs::path& path, const DistanceMatrix& d);
DistanceMatrix read_distance_matrix(const fs::path& path);

/// JSON record of a test result; the null distribution goes to a separate CSV
/// with one value per line.
void write_test_result(const fs::path& record, const fs::path& null_csv, const TestResult& r,
                       const std::string& comparison = {});
TestResult read_test_result(const fs::path& record, const fs::path& null_csv);

/// Binary reference map: V values of 0 or 1 separated by whitespace or commas.
std::vector<std::uint8_t> read_reference_map(const fs::path& path);
void write_reference_map(const fs::path& path, const std::vector<std::uint8_t>& map);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace somfrechet::io
