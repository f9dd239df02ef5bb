#include "somfrechet/cli.hpp"

#include "somfrechet/inference.hpp"
#include "somfrechet/io.hpp"
#include "somfrechet/jaccard.hpp"
#include "somfrechet/metrics.hpp"
#include "somfrechet/parallel.hpp"
#include "somfrechet/pipeline.hpp"
#include "somfrechet/synth.hpp"
#include "somfrechet/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace somfrechet::cli {

namespace {

namespace fs = std::filesystem;
using io::DataError;
using json = nlohmann::json;

/// Bad flag or config value, detected before any data is touched.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class Fn>
auto checked(Fn&& fn)
{
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
}

GridSpec parse_grid(const std::string& text)
{
    const auto x = text.find_first_of("xX");
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    try {
        if (x == std::string::npos) throw std::invalid_argument("no separator");
        std::size_t used = 0;
        k1 = std::stoul(text.substr(0, x), &used);
        if (used != x) throw std::invalid_argument("junk");
        const std::string rest = text.substr(x + 1);
        k2 = std::stoul(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("junk");
    } catch (const std::logic_error&) {
        throw UsageError("grid must look like 3x3, got '" + text + "'");
    }
    if (k1 * k2 < 2) throw UsageError("grid needs at least two units, got '" + text + "'");
    return GridSpec(k1, k2);
}

std::string grid_label(const GridSpec& g)
{
    return std::to_string(g.rows()) + "x" + std::to_string(g.cols());
}

std::string metric_stem(MetricKind m)
{
    std::string s(metric_name(m));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<MetricKind> parse_metrics(const std::string& text)
{
    std::string lower = text;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "all") return {std::begin(kAllMetrics), std::end(kAllMetrics)};
    std::vector<MetricKind> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        out.push_back(checked([&] { return parse_metric(item); }));
    if (out.empty()) throw UsageError("no metric given");
    return out;
}

/// Writes `<dir>/<name>.config` with the subcommand's resolved settings.
/// Execution-only settings (worker count, config path, directory) are left
/// out so runs differing only in parallelism or location produce identical files.
void write_resolved_config(const fs::path& dir, const CLI::App& sub,
                           const std::map<std::string, std::string>& overrides = {})
{
    std::ostringstream out;
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config" || name == "workers" || name == "dir")
            continue;
        std::string value;
        if (const auto it = overrides.find(name); it != overrides.end()) {
            value = it->second;
        } else if (opt->count() > 0) {
            const auto& results = opt->results();
            for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
        } else {
            value = opt->get_default_str();
            if (value.empty() && opt->get_expected_min() == 0) value = "false";
        }
        out << name << '=' << value << '\n';
    }
    io::write_text(dir / (sub.get_name() + ".config"), out.str());
}

struct Study {
    fs::path dir;
    std::vector<io::ManifestEntry> entries;
    io::ManifestGroups groups;
};

Study load_study(const fs::path& dir)
{
    Study s;
    s.dir = dir;
    s.entries = io::read_manifest(dir / "manifest.csv");
    s.groups = io::manifest_groups(s.entries);
    return s;
}

std::vector<Volume> load_volumes(const Study& s)
{
    std::vector<Volume> out;
    for (const auto& e : s.entries) out.push_back(io::read_volume(s.dir / e.volume));
    return out;
}

fs::path som_path(const Study& s, const io::ManifestEntry& e)
{
    return s.dir / "soms" / (e.subject_id + ".json");
}

std::vector<Som> load_soms(const Study& s)
{
    std::vector<Som> out;
    for (const auto& e : s.entries) out.push_back(io::read_som(som_path(s, e)));
    return out;
}

fs::path closed_path(const fs::path& dir, MetricKind m)
{
    return dir / "dist" / (metric_stem(m) + ".closed.csv");
}

DistanceMatrix load_closed(const Study& s, MetricKind m)
{
    auto d = io::read_distance_matrix(closed_path(s.dir, m));
    if (!d.closed()) throw DataError(closed_path(s.dir, m).string() + ": matrix is not closed");
    if (d.size() != s.entries.size())
        throw DataError(closed_path(s.dir, m).string() + ": matrix size does not match the manifest");
    return d;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string dir;
    std::string scenario = "SC1";
    double snr = 2.0;
    std::size_t width = 10;
    std::size_t height = 10;
    std::size_t timepoints = 50;
    std::size_t n = 20;
    std::size_t block = 4;
    std::uint64_t seed = 0;
};

void run_simulate(const SimulateArgs& a, const CLI::App& sub, std::size_t workers)
{
    const ScenarioSpec spec = checked([&] {
        ScenarioSpec s;
        s.scenario = parse_scenario(a.scenario);
        s.snr = a.snr;
        s.width = a.width;
        s.height = a.height;
        s.timepoints = a.timepoints;
        s.n_per_group = a.n;
        s.block = a.block;
        s.seed = a.seed;
        s.validate();
        return s;
    });
    const fs::path dir(a.dir);
    const auto study = generate_study(spec, workers);
    std::vector<io::ManifestEntry> entries;
    for (const auto& subj : study) {
        const auto sidecar = io::write_volume(dir / "volumes", subj.volume, subj.seed);
        entries.push_back({subj.volume.subject_id(), std::string(1, group_letter(subj.group)),
                           subj.seed, fs::relative(sidecar, dir).generic_string()});
    }
    io::write_manifest(dir / "manifest.csv", entries);
    write_resolved_config(dir, sub);
    std::cout << "wrote " << entries.size() << " volumes to " << dir.string() << '\n';
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string dir;
    std::string grid = "3x3";
    std::size_t iterations = 100;
    double sigma0 = 0.0;
    double sigma_min = 0.1;
    double alpha0 = 0.1;
    std::string algorithm = "batch";
    std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a, const CLI::App& sub, std::size_t workers)
{
    const GridSpec grid = parse_grid(a.grid);
    const TrainingSchedule schedule = checked([&] {
        TrainingSchedule s;
        s.iterations = a.iterations;
        s.sigma0 = a.sigma0 > 0.0 ? a.sigma0 : static_cast<double>(grid.rows());
        s.sigma_min = a.sigma_min;
        s.alpha0 = a.alpha0;
        s.seed = a.seed;
        s.validate();
        return s;
    });
    if (a.algorithm != "batch" && a.algorithm != "sequential")
        throw UsageError("algorithm must be 'batch' or 'sequential'");

    const Study study = load_study(a.dir);
    const auto volumes = load_volumes(study);
    std::vector<Som> soms;
    if (a.algorithm == "batch") {
        soms = train_all(volumes, grid, schedule, workers);
    } else {
        std::vector<std::optional<Som>> slots(volumes.size());
        parallel_for(volumes.size(), workers, [&](std::size_t i) {
            TrainingSchedule own = schedule;
            own.seed = derive_seed(schedule.seed, i);
            slots[i] = train_sequential(volumes[i], grid, own);
        });
        for (auto& s : slots) soms.push_back(std::move(*s));
    }
    for (std::size_t i = 0; i < soms.size(); ++i)
        io::write_som(som_path(study, study.entries[i]), soms[i], study.entries[i].subject_id);
    write_resolved_config(study.dir, sub);
    std::cout << "trained " << soms.size() << " maps (" << grid_label(grid) << ")\n";
}

// ---------------------------------------------------------------- dist

struct DistArgs {
    std::string dir;
    std::string metric = "all";
};

void run_dist(const DistArgs& a, const CLI::App& sub, std::size_t workers)
{
    const auto metrics = parse_metrics(a.metric);
    const Study study = load_study(a.dir);
    const auto soms = load_soms(study);
    for (const auto m : metrics) {
        DistanceMatrix raw = [&] {
            try {
                return pairwise_distances(soms, m, workers);
            } catch (const ValidationError& e) {
                throw DataError(e.what());
            }
        }();
        io::write_distance_matrix(study.dir / "dist" / (metric_stem(m) + ".raw.csv"), raw);
        io::write_distance_matrix(closed_path(study.dir, m), metric_closure(raw));
    }
    write_resolved_config(study.dir, sub);
    std::cout << "wrote distance matrices for " << metrics.size() << " metric(s)\n";
}

// ---------------------------------------------------------------- infer

struct InferArgs {
    std::string dir;
    std::string metric = "all";
    std::size_t permutations = 100;
    std::uint64_t seed = 0;
    std::string statistic = "t";
    double delta0 = 0.0;
    std::string form = "general";
    bool add_one = false;
    double alpha = 0.05;
};

void run_infer(const InferArgs& a, const CLI::App& sub, std::size_t workers)
{
    const auto requested = parse_metrics(a.metric);
    if (a.permutations < 1) throw UsageError("need at least one permutation");
    if (a.statistic != "t" && a.statistic != "F" && a.statistic != "f")
        throw UsageError("statistic must be 't' or 'F'");
    if (a.form != "general" && a.form != "equal") throw UsageError("form must be 'general' or 'equal'");
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");

    PermutationOptions options;
    options.permutations = a.permutations;
    options.seed = a.seed;
    options.statistic = a.statistic == "t" ? StatisticKind::T : StatisticKind::F;
    options.delta0 = a.delta0;
    options.form = a.form == "equal" ? TForm::EqualSize : TForm::General;
    options.add_one = a.add_one;
    options.workers = workers;

    const Study study = load_study(a.dir);
    const auto& names = study.groups.names;
    if (names.size() < 2) throw DataError("manifest lists a single condition; nothing to compare");
    // "all" means every metric the dist step produced.
    std::vector<MetricKind> metrics;
    for (const auto m : requested)
        if (a.metric != "all" || fs::exists(closed_path(study.dir, m))) metrics.push_back(m);
    if (metrics.empty()) throw DataError((study.dir / "dist").string() + ": no closed distance matrices");

    struct Comparison {
        std::string label;
        std::vector<std::size_t> indices;
        std::vector<std::size_t> labels;
    };
    std::vector<Comparison> comparisons;
    if (options.statistic == StatisticKind::F || names.size() == 2) {
        Comparison c;
        c.label = options.statistic == StatisticKind::F && names.size() > 2
                      ? std::string("all")
                      : names[0] + "-vs-" + names[1];
        for (std::size_t i = 0; i < study.entries.size(); ++i) c.indices.push_back(i);
        c.labels = study.groups.labels;
        comparisons.push_back(std::move(c));
    } else {
        for (std::size_t g1 = 0; g1 < names.size(); ++g1)
            for (std::size_t g2 = g1 + 1; g2 < names.size(); ++g2) {
                Comparison c;
                c.label = names[g1] + "-vs-" + names[g2];
                for (std::size_t i = 0; i < study.entries.size(); ++i) {
                    const auto l = study.groups.labels[i];
                    if (l != g1 && l != g2) continue;
                    c.indices.push_back(i);
                    c.labels.push_back(l == g1 ? 0 : 1);
                }
                comparisons.push_back(std::move(c));
            }
    }

    std::ostringstream summary;
    summary << "metric,comparison,statistic,p_value,bonferroni_threshold,significant\n";
    for (const auto m : metrics) {
        const DistanceMatrix full = load_closed(study, m);
        std::vector<TestResult> results;
        for (const auto& c : comparisons) {
            try {
                results.push_back(
                    permutation_test(full.subset(c.indices), GroupedSample(c.labels), options));
            } catch (const ValidationError& e) {
                throw DataError(c.label + ": " + e.what());
            }
            const std::string stem = metric_stem(m) + "_" + c.label;
            io::write_test_result(study.dir / "infer" / (stem + ".json"),
                                  study.dir / "infer" / (stem + ".null.csv"), results.back(),
                                  c.label);
        }
        std::vector<double> ps;
        for (const auto& r : results) ps.push_back(r.p_value);
        const auto verdict = bonferroni_adjust(ps, a.alpha);
        for (std::size_t i = 0; i < results.size(); ++i) {
            summary << metric_name(m) << ',' << comparisons[i].label << ','
                    << io::format_double(results[i].statistic) << ','
                    << io::format_double(results[i].p_value) << ','
                    << io::format_double(verdict.threshold) << ','
                    << (verdict.significant[i] ? "yes" : "no") << '\n';
        }
    }
    io::write_text(study.dir / "infer" / "summary.csv", summary.str());
    write_resolved_config(study.dir, sub);
    std::cout << summary.str();
}

// ---------------------------------------------------------------- rank / overlap

struct ConditionRanking {
    std::size_t mean_index;
    UnitRanking ranking;
};

std::vector<ConditionRanking> rank_conditions(const Study& study, MetricKind m,
                                              const std::vector<Som>& soms,
                                              const std::vector<Volume>& volumes,
                                              std::size_t workers)
{
    const DistanceMatrix d = load_closed(study, m);
    std::vector<ConditionRanking> out;
    for (std::size_t j = 0; j < study.groups.names.size(); ++j) {
        std::vector<std::size_t> members;
        std::vector<Volume> group;
        for (std::size_t i = 0; i < study.entries.size(); ++i)
            if (study.groups.labels[i] == j) {
                members.push_back(i);
                group.push_back(volumes[i]);
            }
        const std::size_t mean = restricted_frechet_mean(d, members);
        try {
            out.push_back({mean, sample_jaccard_index(soms[mean], group, workers)});
        } catch (const ValidationError& e) {
            throw DataError(study.groups.names[j] + ": " + e.what());
        }
    }
    return out;
}

struct RankArgs {
    std::string dir;
    std::string metric = "t-smd";
};

void run_rank(const RankArgs& a, const CLI::App& sub, std::size_t workers)
{
    const auto m = checked([&] { return parse_metric(a.metric); });
    const Study study = load_study(a.dir);
    const auto soms = load_soms(study);
    const auto volumes = load_volumes(study);
    const auto rankings = rank_conditions(study, m, soms, volumes, workers);
    const auto& names = study.groups.names;

    std::ostringstream table;
    table << "rank";
    for (const auto& n : names) table << ',' << n << "_unit," << n << "_jaccard";
    table << '\n';
    const std::size_t units = soms.front().units();
    for (std::size_t r = 0; r < units; ++r) {
        table << r + 1;
        for (const auto& c : rankings) {
            if (r < c.ranking.order.size()) {
                const auto k = c.ranking.order[r];
                table << ',' << k << ',' << io::format_double(c.ranking.index[k]);
            } else {
                table << ",,";
            }
        }
        table << '\n';
    }
    io::write_text(study.dir / "rank" / (metric_stem(m) + ".csv"), table.str());

    std::ostringstream means;
    means << "condition,mean_subject,best_units\n";
    for (std::size_t j = 0; j < names.size(); ++j) {
        means << names[j] << ',' << study.entries[rankings[j].mean_index].subject_id << ',';
        const auto best = rankings[j].ranking.best(3);
        for (std::size_t b = 0; b < best.size(); ++b) means << (b ? " " : "") << best[b];
        means << '\n';
    }
    io::write_text(study.dir / "rank" / (metric_stem(m) + ".means.csv"), means.str());
    write_resolved_config(study.dir, sub);
    std::cout << table.str();
}

struct OverlapArgs {
    std::string dir;
    std::string metric = "t-smd";
    std::vector<std::string> references;
};

void run_overlap(const OverlapArgs& a, const CLI::App& sub, std::size_t workers)
{
    const auto m = checked([&] { return parse_metric(a.metric); });
    if (a.references.empty()) throw UsageError("give at least one --reference CONDITION=PATH");
    std::vector<std::pair<std::string, fs::path>> refs;
    for (const auto& r : a.references) {
        const auto eq = r.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == r.size())
            throw UsageError("reference must look like CONDITION=PATH, got '" + r + "'");
        refs.emplace_back(r.substr(0, eq), fs::path(r.substr(eq + 1)));
    }

    const Study study = load_study(a.dir);
    const auto& names = study.groups.names;
    std::vector<std::size_t> which;
    for (const auto& [cond, path] : refs) {
        const auto it = std::find(names.begin(), names.end(), cond);
        if (it == names.end()) throw UsageError("no condition named '" + cond + "' in the manifest");
        which.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    const auto soms = load_soms(study);
    const auto volumes = load_volumes(study);
    const auto rankings = rank_conditions(study, m, soms, volumes, workers);

    std::vector<std::vector<double>> columns;
    for (std::size_t c = 0; c < refs.size(); ++c) {
        const auto reference = io::read_reference_map(refs[c].second);
        const auto& r = rankings[which[c]];
        try {
            columns.push_back(overlap_report(soms[r.mean_index], r.ranking, reference));
        } catch (const ValidationError& e) {
            throw DataError(refs[c].second.string() + ": " + e.what());
        }
    }

    std::ostringstream table;
    table << "rank";
    for (const auto& [cond, path] : refs) table << ',' << cond;
    table << '\n';
    const std::size_t units = soms.front().units();
    std::vector<double> sums(refs.size(), 0.0);
    for (std::size_t r = 0; r < units; ++r) {
        table << r + 1;
        for (std::size_t c = 0; c < columns.size(); ++c) {
            table << ',' << io::format_double(columns[c][r]);
            sums[c] += columns[c][r];
        }
        table << '\n';
    }
    table << "sum";
    for (double s : sums) table << ',' << io::format_double(s);
    table << '\n';
    io::write_text(study.dir / "overlap" / (metric_stem(m) + ".csv"), table.str());
    // Reference paths are recorded relative to the study so the record does
    // not depend on where the study lives.
    std::string recorded;
    for (const auto& [cond, path] : refs)
        recorded += (recorded.empty() ? "" : ",") + cond + "=" +
                    fs::proximate(path, study.dir).generic_string();
    write_resolved_config(study.dir, sub, {{"reference", recorded}});
    std::cout << table.str();
}

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::string dir;
    std::vector<std::string> scenarios{"SC1", "SC2", "SC3"};
    std::vector<double> snrs{2.0, 1.0, 0.5};
    std::vector<std::string> grids{"3x3"};
    std::size_t replicates = 0;
    std::size_t n = 20;
    std::size_t block = 4;
    std::size_t permutations = 100;
    std::size_t iterations = 100;
    double sigma_min = 0.1;
    std::uint64_t seed = 0;
};

std::string cell_key(std::string_view scenario, double snr, const std::string& grid)
{
    return std::string(scenario) + "_snr" + io::format_double(snr) + "_" + grid;
}

void run_report(const ReportArgs& a, const CLI::App& sub, std::size_t workers)
{
    const fs::path dir(a.dir);
    const fs::path rep_dir = dir / "replicates";

    if (a.replicates > 0) {
        struct Cell {
            ReplicateConfig config;
            std::string key;
        };
        std::vector<Cell> cells;
        for (const auto& sc : a.scenarios)
            for (double snr : a.snrs)
                for (const auto& g : a.grids) {
                    const GridSpec grid = parse_grid(g);
                    Cell cell{ReplicateConfig{}, {}};
                    cell.config.grid = grid;
                    checked([&] {
                        cell.config.scenario.scenario = parse_scenario(sc);
                        cell.config.scenario.snr = snr;
                        cell.config.scenario.n_per_group = a.n;
                        cell.config.scenario.block = a.block;
                        cell.config.scenario.validate();
                        cell.config.schedule.iterations = a.iterations;
                        cell.config.schedule.sigma0 = static_cast<double>(grid.rows());
                        cell.config.schedule.sigma_min = a.sigma_min;
                        cell.config.schedule.validate();
                        return 0;
                    });
                    if (a.permutations < 1) throw UsageError("need at least one permutation");
                    cell.config.permutations = a.permutations;
                    cell.config.seed = a.seed;
                    cell.config.workers = workers;
                    cell.key = cell_key(scenario_name(cell.config.scenario.scenario), snr,
                                        grid_label(grid));
                    cells.push_back(std::move(cell));
                }

        for (const auto& cell : cells)
            for (std::size_t r = 0; r < a.replicates; ++r) {
                std::ostringstream name;
                name << cell.key << "_r" << std::setw(3) << std::setfill('0') << r << ".json";
                const fs::path path = rep_dir / name.str();
                if (fs::exists(path)) continue;
                const auto result = run_replicate(cell.config, r);
                json j;
                j["scenario"] = std::string(scenario_name(cell.config.scenario.scenario));
                j["snr"] = cell.config.scenario.snr;
                j["grid"] = grid_label(cell.config.grid);
                j["replicate"] = r;
                j["seed"] = result.seed;
                for (const auto& [metric, test] : result.tests) {
                    j["p_values"][std::string(metric_name(metric))] = test.p_value;
                    j["statistics"][std::string(metric_name(metric))] = io::format_double(test.statistic);
                }
                io::write_text(path, j.dump(2) + "\n");
            }
        write_resolved_config(dir, sub);
    }

    std::vector<fs::path> files;
    if (fs::is_directory(rep_dir))
        for (const auto& entry : fs::directory_iterator(rep_dir))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
    if (files.empty())
        throw DataError(rep_dir.string() + ": no replicate results to aggregate");
    std::sort(files.begin(), files.end());

    // (scenario, snr, grid) -> metric -> p-values
    std::map<std::tuple<std::string, double, std::string>, std::map<std::string, std::vector<double>>>
        cells;
    for (const auto& f : files) {
        json j;
        try {
            j = json::parse(io::read_text(f));
            auto& cell = cells[{j.at("scenario").get<std::string>(), j.at("snr").get<double>(),
                                j.at("grid").get<std::string>()}];
            for (const auto& [metric, p] : j.at("p_values").items())
                cell[metric].push_back(p.get<double>());
        } catch (const json::exception& e) {
            throw DataError(f.string() + ": malformed replicate record: " + e.what());
        }
    }

    std::ostringstream csv;
    std::ostringstream md;
    csv << "scenario,snr,grid,metric,mean_p,sd_p,replicates\n";
    md << "| scenario | SNR | grid |";
    for (auto m : kAllMetrics) md << ' ' << metric_name(m) << " |";
    md << "\n|---|---|---|---|---|---|\n";
    for (const auto& [key, per_metric] : cells) {
        const auto& [scenario, snr, grid] = key;
        md << "| " << scenario << " | " << io::format_double(snr) << " | " << grid << " |";
        for (auto m : kAllMetrics) {
            const auto it = per_metric.find(std::string(metric_name(m)));
            if (it == per_metric.end()) {
                md << " - |";
                continue;
            }
            const auto ms = mean_sd(it->second);
            csv << scenario << ',' << io::format_double(snr) << ',' << grid << ','
                << metric_name(m) << ',' << io::format_double(ms.mean) << ','
                << io::format_double(ms.sd) << ',' << ms.count << '\n';
            std::ostringstream text;
            text << std::fixed << std::setprecision(3) << ms.mean << " ± " << ms.sd;
            md << ' ' << text.str() << " |";
        }
        md << '\n';
    }
    io::write_text(dir / "report" / "table.csv", csv.str());
    io::write_text(dir / "report" / "table.md", md.str());
    std::cout << md.str();
}

/// Expands a subcommand's `--config FILE` into ordinary flags. Every line is
/// `key=value` with the key being a long option of that subcommand; blank
/// lines and `#` comments are skipped. Flags given on the command line win.
std::vector<std::string> with_config_file(const CLI::App& app, int argc, const char* const* argv)
{
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    const CLI::App* sub = nullptr;
    std::size_t sub_at = 0;
    for (std::size_t i = 0; i < args.size() && !sub; ++i)
        if (const auto* s = app.get_subcommand_no_throw(args[i])) {
            sub = s;
            sub_at = i;
        }
    if (!sub) return args;

    std::string path;
    auto explicitly_given = [&](const std::string& flag) {
        for (std::size_t i = sub_at + 1; i < args.size(); ++i)
            if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    for (std::size_t i = sub_at + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::vector<std::string> injected;
    std::istringstream in(io::read_text(path));
    std::string line;
    std::size_t lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = path + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw UsageError(where + "expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (key.empty() || key == "config" || key == "help" || !opt)
            throw UsageError(where + "unknown key '" + key + "' for " + sub->get_name());
        if (explicitly_given(flag)) continue;
        if (opt->get_expected_min() == 0) {
            if (value == "true" || value == "1") injected.push_back(flag);
            else if (value != "false" && value != "0")
                throw UsageError(where + key + " takes true or false");
        } else {
            injected.push_back(flag);
            injected.push_back(value);
        }
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub_at) + 1, injected.begin(),
                injected.end());
    return args;
}

}  // namespace

int run(int argc, const char* const* argv)
{
    CLI::App app{"Train self-organizing maps on voxel time series and compare groups of maps"};
    app.name("somfrechet");
    app.require_subcommand(1);
    std::size_t workers = default_workers();
    app.add_option("--workers", workers,
                   "Worker threads (default: SOMFRECHET_WORKERS or hardware concurrency)")
        ->check(CLI::PositiveNumber);
    app.option_defaults()->always_capture_default();

    std::string config_path;
    auto configure = [&config_path](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value settings file");
    };

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic two-group study");
    configure(simulate);
    simulate->add_option("--dir", sim.dir, "Study directory")->required();
    simulate->add_option("--scenario", sim.scenario, "SC1, SC2 or SC3");
    simulate->add_option("--snr", sim.snr, "Signal-to-noise ratio");
    simulate->add_option("--width", sim.width, "Image width");
    simulate->add_option("--height", sim.height, "Image height");
    simulate->add_option("--timepoints", sim.timepoints, "Time points per voxel");
    simulate->add_option("--n", sim.n, "Subjects per group");
    simulate->add_option("--block", sim.block, "Side of the square signal blocks");
    simulate->add_option("--seed", sim.seed, "Base seed");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "Train one map per volume in the manifest");
    configure(train);
    train->add_option("--dir", tr.dir, "Study directory")->required();
    train->add_option("--grid", tr.grid, "Map size as ROWSxCOLS");
    train->add_option("--iterations", tr.iterations, "Training iterations");
    train->add_option("--sigma0", tr.sigma0, "Initial radius (0 = grid rows)");
    train->add_option("--sigma-min", tr.sigma_min, "Radius floor");
    train->add_option("--alpha0", tr.alpha0, "Initial learning rate (sequential only)");
    train->add_option("--algorithm", tr.algorithm, "batch or sequential");
    train->add_option("--seed", tr.seed, "Base seed");

    DistArgs di;
    auto* dist = app.add_subcommand("dist", "Pairwise map distances and their metric closure");
    configure(dist);
    dist->add_option("--dir", di.dir, "Study directory")->required();
    dist->add_option("--metric", di.metric, "t-smd, s-smd, st-smd, a comma list, or all");

    InferArgs in;
    auto* infer = app.add_subcommand("infer", "Permutation tests on the closed distance matrices");
    configure(infer);
    infer->add_option("--dir", in.dir, "Study directory")->required();
    infer->add_option("--metric", in.metric, "t-smd, s-smd, st-smd, a comma list, or all");
    infer->add_option("--B,--permutations", in.permutations, "Number of label permutations");
    infer->add_option("--seed", in.seed, "Permutation seed");
    infer->add_option("--stat", in.statistic, "t (pairwise) or F (all groups)");
    infer->add_option("--delta0", in.delta0, "Null separation of the means");
    infer->add_option("--form", in.form, "general or equal (equal-size t form)");
    infer->add_flag("--add-one", in.add_one, "Report (1+x)/(1+B) instead of x/B");
    infer->add_option("--alpha", in.alpha, "Family-wise level for the Bonferroni verdicts");

    RankArgs ra;
    auto* rank = app.add_subcommand("rank", "Rank mean-map units by sample Jaccard index");
    configure(rank);
    rank->add_option("--dir", ra.dir, "Study directory")->required();
    rank->add_option("--metric", ra.metric, "Metric that selects the mean maps");

    OverlapArgs ov;
    auto* overlap = app.add_subcommand("overlap", "Overlap of ranked units with reference maps");
    configure(overlap);
    overlap->add_option("--dir", ov.dir, "Study directory")->required();
    overlap->add_option("--metric", ov.metric, "Metric that selects the mean maps");
    overlap->add_option("--reference", ov.references, "CONDITION=PATH binary map (repeatable)");

    ReportArgs re;
    auto* report = app.add_subcommand("report", "Run and aggregate simulation replicates");
    configure(report);
    report->add_option("--dir", re.dir, "Report directory")->required();
    report->add_option("--scenarios", re.scenarios, "Scenarios to run")->delimiter(',');
    report->add_option("--snr", re.snrs, "SNR levels to run")->delimiter(',');
    report->add_option("--grids", re.grids, "Map sizes to run")->delimiter(',');
    report->add_option("--replicates", re.replicates, "Replicates per cell (0 = aggregate only)");
    report->add_option("--n", re.n, "Subjects per group");
    report->add_option("--block", re.block, "Side of the square signal blocks");
    report->add_option("--B,--permutations", re.permutations, "Permutations per test");
    report->add_option("--iterations", re.iterations, "Training iterations");
    report->add_option("--sigma-min", re.sigma_min, "Radius floor");
    report->add_option("--seed", re.seed, "Base seed");

    try {
        auto args = with_config_file(app, argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) run_simulate(sim, *simulate, workers);
        else if (*train) run_train(tr, *train, workers);
        else if (*dist) run_dist(di, *dist, workers);
        else if (*infer) run_infer(in, *infer, workers);
        else if (*rank) run_rank(ra, *rank, workers);
        else if (*overlap) run_overlap(ov, *overlap, workers);
        else if (*report) run_report(re, *report, workers);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace somfrechet::cli
