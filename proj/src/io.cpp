#include "somfrechet/io.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace somfrechet::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const fs::path& path, const std::string& reason)
{
    throw DataError(path.string() + ": " + reason);
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const fs::path& path, const std::string& text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    if (last - first == 3 && std::strncmp(first, "inf", 3) == 0) return INFINITY;
    if (last - first == 4 && std::strncmp(first, "-inf", 4) == 0) return -INFINITY;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(path, "cannot parse number '" + text + "'");
    return v;
}

json read_json(const fs::path& path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        fail(path, std::string("malformed JSON: ") + e.what());
    }
}

template <class T>
T field(const fs::path& path, const json& j, const char* key)
{
    if (!j.contains(key)) fail(path, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(path, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open file for writing");
    out << text;
    if (!out) fail(path, "write failed");
}

fs::path write_volume(const fs::path& dir, const Volume& volume, std::uint64_t seed)
{
    const std::string stem = volume.subject_id().empty() ? "volume" : volume.subject_id();
    const fs::path data_path = dir / (stem + ".f32");
    const fs::path sidecar = dir / (stem + ".json");

    std::string bytes;
    bytes.reserve(volume.data().size() * 4);
    for (double v : volume.data()) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    write_text(data_path, bytes);

    json meta;
    meta["format"] = "f32le-row-major";
    meta["data"] = data_path.filename().string();
    meta["subject_id"] = volume.subject_id();
    meta["voxels"] = volume.voxels();
    meta["timepoints"] = volume.timepoints();
    if (volume.extents()) {
        meta["width"] = volume.extents()->width;
        meta["height"] = volume.extents()->height;
    }
    meta["seed"] = seed;
    write_text(sidecar, meta.dump(2) + "\n");
    return sidecar;
}

Volume read_volume(const fs::path& sidecar)
{
    const json meta = read_json(sidecar);
    const auto format = field<std::string>(sidecar, meta, "format");
    if (format != "f32le-row-major") fail(sidecar, "unsupported volume format '" + format + "'");
    const auto voxels = field<std::size_t>(sidecar, meta, "voxels");
    const auto timepoints = field<std::size_t>(sidecar, meta, "timepoints");
    const fs::path data_path = sidecar.parent_path() / field<std::string>(sidecar, meta, "data");
    std::optional<Extents> extents;
    if (meta.contains("width") || meta.contains("height"))
        extents = Extents{field<std::size_t>(sidecar, meta, "width"),
                          field<std::size_t>(sidecar, meta, "height")};

    const std::string bytes = read_text(data_path);
    if (bytes.size() != voxels * timepoints * 4) {
        std::ostringstream os;
        os << "expected " << voxels * timepoints * 4 << " bytes, found " << bytes.size();
        fail(data_path, os.str());
    }
    std::vector<double> flat(voxels * timepoints);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
        flat[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
    try {
        return validate_volume(std::move(flat), voxels, timepoints, extents,
                               meta.value("subject_id", std::string{}));
    } catch (const ValidationError& e) {
        fail(data_path, e.what());
    }
}

void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries)
{
    std::ostringstream out;
    out << "subject_id,group,seed,volume\n";
    for (const auto& e : entries)
        out << e.subject_id << ',' << e.group << ',' << e.seed << ',' << e.volume << '\n';
    write_text(path, out.str());
}

std::vector<ManifestEntry> read_manifest(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("subject_id,group,seed,volume", 0) != 0)
        fail(path, "missing manifest header 'subject_id,group,seed,volume'");
    std::vector<ManifestEntry> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 4 || cells[0].empty() || cells[1].empty() || cells[3].empty())
            fail(path, "line " + std::to_string(lineno) + ": expected 4 non-empty columns");
        ManifestEntry e;
        e.subject_id = cells[0];
        e.group = cells[1];
        try {
            e.seed = std::stoull(cells[2]);
        } catch (const std::exception&) {
            fail(path, "line " + std::to_string(lineno) + ": bad seed '" + cells[2] + "'");
        }
        e.volume = cells[3];
        out.push_back(std::move(e));
    }
    if (out.empty()) fail(path, "manifest lists no subjects");
    return out;
}

ManifestGroups manifest_groups(const std::vector<ManifestEntry>& entries)
{
    ManifestGroups out;
    for (const auto& e : entries) {
        std::size_t label = out.names.size();
        for (std::size_t j = 0; j < out.names.size(); ++j)
            if (out.names[j] == e.group) label = j;
        if (label == out.names.size()) out.names.push_back(e.group);
        out.labels.push_back(label);
    }
    return out;
}

void write_som(const fs::path& path, const Som& som, const std::string& subject_id)
{
    json j;
    j["subject_id"] = subject_id;
    j["k1"] = som.grid().rows();
    j["k2"] = som.grid().cols();
    j["timepoints"] = som.timepoints();
    j["voxels"] = som.voxels();
    json weights = json::array();
    for (std::size_t k = 0; k < som.units(); ++k) {
        const auto w = som.weight(k);
        weights.push_back(std::vector<double>(w.begin(), w.end()));
    }
    j["weights"] = std::move(weights);
    const auto bmu = som.assignment().bmu_of();
    j["assignment"] = std::vector<std::size_t>(bmu.begin(), bmu.end());
    write_text(path, j.dump() + "\n");
}

Som read_som(const fs::path& path)
{
    const json j = read_json(path);
    const auto k1 = field<std::size_t>(path, j, "k1");
    const auto k2 = field<std::size_t>(path, j, "k2");
    const auto tp = field<std::size_t>(path, j, "timepoints");
    const auto rows = field<std::vector<std::vector<double>>>(path, j, "weights");
    const auto bmu = field<std::vector<std::size_t>>(path, j, "assignment");
    try {
        const GridSpec grid(k1, k2);
        if (rows.size() != grid.units()) fail(path, "weight row count does not match k1*k2");
        std::vector<double> flat;
        for (const auto& r : rows) {
            if (r.size() != tp) fail(path, "weight row length does not match timepoints");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        return Som(grid, std::move(flat), tp, Assignment(bmu, grid.units()));
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
}

void write_distance_matrix(const fs::path& path, const DistanceMatrix& d)
{
    std::ostringstream out;
    out << "# metric=" << metric_name(d.metric()) << " closed=" << (d.closed() ? 1 : 0)
        << " n=" << d.size() << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j) out << ',';
            out << format_double(d(i, j));
        }
        out << '\n';
    }
    write_text(path, out.str());
}

DistanceMatrix read_distance_matrix(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::string header;
    if (!std::getline(in, header) || header.rfind("# ", 0) != 0)
        fail(path, "missing '# metric=... closed=... n=...' header");
    std::string metric;
    int closed = -1;
    long n = -1;
    std::istringstream hs(header.substr(2));
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) fail(path, "bad header token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            if (key == "metric") metric = value;
            else if (key == "closed") closed = std::stoi(value);
            else if (key == "n") n = std::stol(value);
            else fail(path, "unknown header key '" + key + "'");
        } catch (const std::logic_error&) {
            fail(path, "bad header value '" + token + "'");
        }
    }
    if (metric.empty() || (closed != 0 && closed != 1) || n < 0)
        fail(path, "header must set metric, closed (0/1) and n");

    const auto size = static_cast<std::size_t>(n);
    std::vector<double> values;
    values.reserve(size * size);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != size)
            fail(path, "row " + std::to_string(rows) + " has " + std::to_string(cells.size()) +
                           " values, expected " + std::to_string(size));
        for (const auto& c : cells) values.push_back(parse_double(path, c));
        ++rows;
    }
    if (rows != size) fail(path, "expected " + std::to_string(size) + " rows");
    try {
        return DistanceMatrix(size, std::move(values), parse_metric(metric), closed == 1);
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
}

void write_test_result(const fs::path& record, const fs::path& null_csv, const TestResult& r,
                       const std::string& comparison)
{
    json j;
    if (!comparison.empty()) j["comparison"] = comparison;
    j["metric"] = std::string(metric_name(r.metric));
    j["statistic_kind"] = r.kind == StatisticKind::T ? "t" : "F";
    j["statistic"] = format_double(r.statistic);
    j["p_value"] = format_double(r.p_value);
    j["permutations"] = r.permutations;
    j["seed"] = r.seed;
    j["delta0"] = format_double(r.delta0);
    j["add_one"] = r.add_one;
    j["null_distribution"] = null_csv.filename().string();
    write_text(record, j.dump(2) + "\n");

    std::ostringstream out;
    for (double v : r.null_distribution) out << format_double(v) << '\n';
    write_text(null_csv, out.str());
}

TestResult read_test_result(const fs::path& record, const fs::path& null_csv)
{
    const json j = read_json(record);
    TestResult r;
    try {
        r.metric = parse_metric(field<std::string>(record, j, "metric"));
    } catch (const ValidationError& e) {
        fail(record, e.what());
    }
    r.kind = field<std::string>(record, j, "statistic_kind") == "F" ? StatisticKind::F
                                                                    : StatisticKind::T;
    r.statistic = parse_double(record, field<std::string>(record, j, "statistic"));
    r.p_value = parse_double(record, field<std::string>(record, j, "p_value"));
    r.permutations = field<std::size_t>(record, j, "permutations");
    r.seed = field<std::uint64_t>(record, j, "seed");
    r.delta0 = parse_double(record, field<std::string>(record, j, "delta0"));
    r.add_one = field<bool>(record, j, "add_one");

    std::istringstream in(read_text(null_csv));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) r.null_distribution.push_back(parse_double(null_csv, line));
    }
    if (r.null_distribution.size() != r.permutations)
        fail(null_csv, "null distribution length does not match the permutation count");
    return r;
}

std::vector<std::uint8_t> read_reference_map(const fs::path& path)
{
    std::string text = read_text(path);
    for (auto& c : text)
        if (c == ',') c = ' ';
    std::istringstream in(text);
    std::vector<std::uint8_t> out;
    std::string token;
    while (in >> token) {
        if (token == "0") out.push_back(0);
        else if (token == "1") out.push_back(1);
        else fail(path, "reference maps hold only 0/1 values, found '" + token + "'");
    }
    if (out.empty()) fail(path, "reference map is empty");
    return out;
}

void write_reference_map(const fs::path& path, const std::vector<std::uint8_t>& map)
{
    std::ostringstream out;
    for (auto v : map) out << (v ? '1' : '0') << '\n';
    write_text(path, out.str());
}

}  // namespace somfrechet::io
