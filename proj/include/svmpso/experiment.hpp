#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "svmpso/common.hpp"
#include "svmpso/dataset.hpp"
#include "svmpso/model_io.hpp"
#include "svmpso/swarm.hpp"

namespace svmpso {

enum class RunMode { traditional, modified, both };

inline RunMode parse_run_mode(const std::string& s) {
    if (s == "traditional")
        return RunMode::traditional;
    if (s == "modified")
        return RunMode::modified;
    if (s == "both")
        return RunMode::both;
    throw ConfigError("mode must be traditional, modified or both (got '" + s + "')");
}

inline FitnessMode parse_fitness_mode(const std::string& s) {
    if (s == "train")
        return FitnessMode::train_accuracy;
    if (s == "combined")
        return FitnessMode::combined_accuracy;
    throw ConfigError("fitness mode must be train or combined (got '" + s + "')");
}

/// Everything one experiment needs: where the data lives, how to split it,
/// swarm settings, search box, solver settings, and what to run.
struct ExperimentSpec {
    std::string name = "experiment";
    std::string data_path;
    LoadOptions load;
    bool normalize_features = true;
    double train_fraction = 0.75;
    std::optional<std::size_t> train_count;  // overrides train_fraction when set
    std::uint64_t split_seed = 1;
    bool allow_any_split = false;  // lifts the test-share band check below
    RunMode mode = RunMode::both;
    SwarmConfig swarm;
    ParamRanges ranges;
    TrainConfig solver;                 // kernel/C are overwritten per particle
    std::vector<int> kernel_types{1, 2, 3};  // traditional-search runs
    std::string output_dir;            // empty: nothing written to disk

    void validate() const {
        if (data_path.empty())
            throw ConfigError("experiment needs a dataset path");
        if (!std::filesystem::exists(data_path))
            throw DataError("dataset file does not exist: " + data_path);
        swarm.validate();
        ranges.validate();
        if (kernel_types.empty())
            throw ConfigError("kernel_types must not be empty");
        for (int t : kernel_types)
            (void)ranges.for_type(t);
    }

    /// Test share sanity band: a tenth to a third of the samples, matching
    /// the sizing guidance the Table-I splits follow. `allow_any_split`
    /// turns the violation into a warning-free pass-through.
    void check_split_band(std::size_t total) const {
        if (allow_any_split)
            return;
        const double frac = effective_train_fraction(total);
        const double test_share = 1.0 - frac;
        if (test_share < 0.1 - 1e-9 || test_share > 1.0 / 3.0 + 1e-9)
            throw ConfigError(
                "test share " + format_double(test_share) +
                " falls outside [0.1, 1/3]; pass allow_any_split to override");
    }

    double effective_train_fraction(std::size_t total) const {
        if (!train_count)
            return train_fraction;
        if (*train_count == 0 || *train_count >= total)
            throw ConfigError("train_count must lie strictly between 0 and the dataset size");
        return static_cast<double>(*train_count) / static_cast<double>(total);
    }
};

/// Result of one `run_experiment` call: dataset bookkeeping plus one
/// SearchReport per executed mode, in execution order.
struct ComparisonReport {
    std::string name;
    std::string data_path;
    std::size_t total = 0, features = 0;
    std::size_t train_size = 0, test_size = 0;
    std::size_t train_positive = 0, train_negative = 0;
    bool normalized = true;
    std::uint64_t split_seed = 1;
    std::uint64_t swarm_seed = 1;
    SwarmConfig swarm;
    FeatureScaling scaling;  // identity-sized but empty when normalization is off
    std::vector<SearchReport> runs;
};

namespace detail {

inline nlohmann::ordered_json kernel_to_json(const KernelSpec& k) {
    nlohmann::ordered_json j;
    j["name"] = kernel_name(k.kind);
    switch (k.kind) {
    case KernelKind::polynomial: j["degree"] = k.degree; break;
    case KernelKind::rbf: j["sigma"] = k.sigma; break;
    case KernelKind::sigmoid:
        j["k1"] = k.k1;
        j["k2"] = k.k2;
        break;
    case KernelKind::linear: break;
    }
    return j;
}

/// Table-I-shaped row for one search run; timing stays out so report
/// bodies are byte-identical across reruns of the same seed.
inline nlohmann::ordered_json run_to_json(const SearchReport& run, std::uint64_t seed) {
    nlohmann::ordered_json row;
    row["mode"] = run.mode;
    row["kernel_type"] = run.best_type;
    row["kernel"] = kernel_to_json(decode_kernel(run.best_type, run.best_pos));
    row["c"] = run.best_pos.c;
    row["x1"] = run.best_pos.x1;
    row["x2"] = run.best_pos.x2;
    row["support_vectors"] = run.best_eval.support_count;
    row["train_errors"] = run.best_eval.train_errors;
    row["test_errors"] = run.best_eval.test_errors;
    row["train_size"] = run.best_eval.train_size;
    row["test_size"] = run.best_eval.test_size;
    row["accuracy_percent"] = run.best_eval.combined_accuracy;
    row["best_fitness"] = run.best_fitness;
    row["fitness_evaluations"] = run.fitness_evaluations;
    row["seed"] = seed;
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const IterationStat& st : run.per_iteration)
        curve.push_back(st.best_fitness);
    row["best_fitness_by_iteration"] = curve;
    return row;
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = report.name;
    j["dataset"] = {{"path", report.data_path},
                    {"samples", report.total},
                    {"characteristics", report.features},
                    {"train", report.train_size},
                    {"test", report.test_size},
                    {"train_positive", report.train_positive},
                    {"train_negative", report.train_negative},
                    {"normalized", report.normalized},
                    {"split_seed", report.split_seed}};
    j["settings"] = {{"particles", report.swarm.particles},
                     {"max_iters", report.swarm.max_iters},
                     {"k_scale", report.swarm.k_scale},
                     {"phi_personal", report.swarm.phi_personal},
                     {"phi_global", report.swarm.phi_global},
                     {"regen_percent", report.swarm.regen_percent},
                     {"fitness_mode", fitness_mode_name(report.swarm.fitness_mode)},
                     {"seed", report.swarm_seed}};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const SearchReport& run : report.runs)
        rows.push_back(detail::run_to_json(run, report.swarm_seed));
    j["rows"] = rows;
    return j;
}

/// Human-readable comparison table: kernel choice, parameters, error counts,
/// support vectors and accuracy per mode, plus the hardware-independent
/// fitness-evaluation counts and wall-clock seconds.
inline void print_table(const ComparisonReport& report, std::ostream& out) {
    out << "experiment: " << report.name << "  (" << report.total << " samples, "
        << report.features << " characteristics; train " << report.train_size << ", test "
        << report.test_size << "; seed " << report.swarm_seed << ")\n";
    out << std::left << std::setw(12) << "mode" << std::right << std::setw(3) << "T"
        << std::setw(10) << "C" << std::setw(10) << "x1" << std::setw(10) << "x2"
        << std::setw(6) << "SVs" << std::setw(16) << "errors(train)" << std::setw(15)
        << "errors(test)" << std::setw(12) << "accuracy%" << std::setw(12) << "fit.evals"
        << std::setw(10) << "time,s" << '\n';
    for (const SearchReport& run : report.runs) {
        std::ostringstream fmt;
        fmt << std::left << std::setw(12) << run.mode << std::right << std::setw(3)
            << run.best_type << std::fixed << std::setprecision(3) << std::setw(10)
            << run.best_pos.c << std::setw(10) << run.best_pos.x1 << std::setw(10)
            << run.best_pos.x2 << std::setw(6) << run.best_eval.support_count << std::setw(10)
            << run.best_eval.train_errors << " of " << std::left << std::setw(5)
            << run.best_eval.train_size << std::right << std::setw(7)
            << run.best_eval.test_errors << " of " << std::left << std::setw(5)
            << run.best_eval.test_size << std::right << std::setprecision(2) << std::setw(11)
            << run.best_eval.combined_accuracy << std::setw(12) << run.fitness_evaluations
            << std::setprecision(1) << std::setw(10) << run.elapsed_seconds;
        out << fmt.str() << '\n';
    }
}

inline void write_trace_csv(const SearchReport& run, std::ostream& out) {
    out << "run,iteration,particle,type,x1,x2,c,fitness,regenerated\n";
    for (const TraceRecord& t : run.trace)
        out << t.run << ',' << t.iteration << ',' << t.particle << ',' << t.type << ','
            << format_double(t.x1) << ',' << format_double(t.x2) << ',' << format_double(t.c)
            << ',' << format_double(t.fitness) << ',' << (t.regenerated ? 1 : 0) << '\n';
}

/// Scatter-data files an external plotting tool can render directly: one
/// file per (run, iteration, kernel type) holding `x1,c` pairs (sigmoid
/// rows carry `x1,c,x2`), plus a best-position marker file per iteration.
inline std::vector<std::string> emit_trace_plots_data(const ComparisonReport& report,
                                                      const std::string& dir) {
    bool any = false;
    for (const SearchReport& run : report.runs)
        any = any || !run.trace.empty() ||
              std::any_of(run.per_run.begin(), run.per_run.end(),
                          [](const SearchReport& leg) { return !leg.trace.empty(); });
    if (!any)
        throw SearchError("no particle trace captured; rerun with trace capture enabled");

    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const SearchReport& run : report.runs) {
        std::map<std::pair<std::size_t, int>, std::ofstream> files;
        auto file_for = [&](std::size_t iter, int type) -> std::ofstream& {
            auto key = std::make_pair(iter, type);
            auto it = files.find(key);
            if (it == files.end()) {
                std::ostringstream name;
                name << run.mode << "_iter" << std::setfill('0') << std::setw(3) << iter
                     << "_type" << type << ".csv";
                const std::string path = dir + "/" + name.str();
                written.push_back(path);
                it = files.emplace(key, std::ofstream(path)).first;
                if (!it->second)
                    throw DataError("cannot write trace plot file: " + path);
            }
            return it->second;
        };
        for (const TraceRecord& t : run.trace) {
            std::ofstream& f = file_for(t.iteration, t.type);
            f << format_double(t.x1) << ',' << format_double(t.c);
            if (t.type == 3)
                f << ',' << format_double(t.x2);
            f << '\n';
        }
        for (const IterationStat& st : run.per_iteration) {
            std::ostringstream name;
            name << run.mode << "_iter" << std::setfill('0') << std::setw(3) << st.iteration
                 << "_best.csv";
            const std::string path = dir + "/" + name.str();
            std::ofstream f(path);
            if (!f)
                throw DataError("cannot write trace plot file: " + path);
            f << "type,x1,c,x2\n"
              << st.best_type << ',' << format_double(st.best_pos.x1) << ','
              << format_double(st.best_pos.c) << ',' << format_double(st.best_pos.x2) << '\n';
            written.push_back(path);
        }
    }
    return written;
}

namespace detail {

inline void write_report_files(const ExperimentSpec& spec, const ComparisonReport& report) {
    if (spec.output_dir.empty())
        return;
    std::filesystem::create_directories(spec.output_dir);
    {
        std::ofstream out(spec.output_dir + "/report.json");
        if (!out)
            throw DataError("cannot write report file in " + spec.output_dir);
        out << report_to_json(report).dump(2) << '\n';
    }
    {
        std::ofstream out(spec.output_dir + "/report.txt");
        print_table(report, out);
    }
    for (const SearchReport& run : report.runs) {
        if (!run.trace.empty()) {
            std::ofstream out(spec.output_dir + "/trace_" + run.mode + ".csv");
            write_trace_csv(run, out);
        }
        const FeatureScaling* scaling = report.normalized ? &report.scaling : nullptr;
        save_model_file(run.best_model, spec.output_dir + "/model_" + run.mode + ".svm",
                        scaling);
    }
}

}  // namespace detail

/// Loads, normalizes and splits the dataset, then runs the requested
/// search modes and writes report/trace/model files when an output
/// directory is configured. A search failure after at least one completed
/// mode still writes the partial report before rethrowing.
inline ComparisonReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    Dataset raw = load_csv(spec.data_path, spec.load);
    ComparisonReport report;
    report.name = spec.name;
    report.data_path = spec.data_path;
    report.total = raw.size();
    report.features = raw.dim();
    report.normalized = spec.normalize_features;
    report.split_seed = spec.split_seed;
    report.swarm_seed = spec.swarm.seed;
    report.swarm = spec.swarm;

    Dataset ds = spec.normalize_features ? normalize(raw, &report.scaling) : std::move(raw);

    spec.check_split_band(ds.size());
    SplitSpec split;
    split.train_fraction = spec.effective_train_fraction(ds.size());
    split.seed = spec.split_seed;
    auto [train_set, test_set] = stratified_split(ds, split);
    report.train_size = train_set.size();
    report.test_size = test_set.size();
    report.train_positive = train_set.count_of(+1);
    report.train_negative = train_set.count_of(-1);

    auto run_one = [&](RunMode m) {
        if (m == RunMode::traditional)
            report.runs.push_back(traditional_search(train_set, test_set, spec.kernel_types,
                                                     spec.ranges, spec.swarm, spec.solver));
        else
            report.runs.push_back(
                modified_search(train_set, test_set, spec.ranges, spec.swarm, spec.solver));
    };

    try {
        if (spec.mode == RunMode::traditional || spec.mode == RunMode::both)
            run_one(RunMode::traditional);
        if (spec.mode == RunMode::modified || spec.mode == RunMode::both)
            run_one(RunMode::modified);
    } catch (...) {
        // keep whatever finished: a partial report beats losing the session
        if (!report.runs.empty())
            detail::write_report_files(spec, report);
        throw;
    }

    detail::write_report_files(spec, report);
    return report;
}

// ---------------------------------------------------------------------------
// JSON experiment configuration
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const char* where,
                                std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            ok = ok || it.key() == k;
        if (!ok)
            throw ConfigError(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

inline void parse_range_pair(const nlohmann::json& j, const char* where, double& lo,
                             double& hi) {
    if (!j.is_array() || j.size() != 2)
        throw ConfigError(std::string(where) + " must be a [min,max] pair");
    lo = j[0].get<double>();
    hi = j[1].get<double>();
}

inline void parse_type_range(const nlohmann::json& j, const char* where, TypeRange& r,
                             bool has_x2) {
    reject_unknown_keys(j, where, {"x1", "x2", "c"});
    if (j.contains("x1"))
        parse_range_pair(j["x1"], where, r.x1_min, r.x1_max);
    if (j.contains("x2")) {
        if (!has_x2)
            throw ConfigError(std::string(where) + " takes no x2 range");
        parse_range_pair(j["x2"], where, r.x2_min, r.x2_max);
    }
    if (j.contains("c"))
        parse_range_pair(j["c"], where, r.c_min, r.c_max);
}

}  // namespace detail

/// Reads an ExperimentSpec from a JSON file; every field is optional and
/// falls back to the defaults baked into the structs. Unknown keys are
/// rejected so typos fail loudly instead of silently using defaults.
inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }

    ExperimentSpec spec;
    detail::reject_unknown_keys(j, "config root",
                                {"name", "data", "split", "swarm", "ranges", "solver",
                                 "kernel_types", "mode", "output_dir"});
    if (j.contains("name"))
        spec.name = j["name"].get<std::string>();
    if (j.contains("mode"))
        spec.mode = parse_run_mode(j["mode"].get<std::string>());
    if (j.contains("output_dir"))
        spec.output_dir = j["output_dir"].get<std::string>();

    if (j.contains("data")) {
        const auto& d = j["data"];
        detail::reject_unknown_keys(
            d, "data", {"path", "label_column", "positive_label", "has_header", "normalize"});
        if (d.contains("path"))
            spec.data_path = d["path"].get<std::string>();
        if (d.contains("label_column")) {
            if (d["label_column"].is_number_integer())
                spec.load.label_column = std::to_string(d["label_column"].get<long>());
            else
                spec.load.label_column = d["label_column"].get<std::string>();
        }
        if (d.contains("positive_label"))
            spec.load.positive_label = d["positive_label"].get<std::string>();
        if (d.contains("has_header"))
            spec.load.has_header = d["has_header"].get<bool>();
        if (d.contains("normalize"))
            spec.normalize_features = d["normalize"].get<bool>();
    }

    if (j.contains("split")) {
        const auto& s = j["split"];
        detail::reject_unknown_keys(
            s, "split", {"train_fraction", "train_count", "seed", "allow_any_split"});
        if (s.contains("train_fraction"))
            spec.train_fraction = s["train_fraction"].get<double>();
        if (s.contains("train_count"))
            spec.train_count = s["train_count"].get<std::size_t>();
        if (s.contains("seed"))
            spec.split_seed = s["seed"].get<std::uint64_t>();
        if (s.contains("allow_any_split"))
            spec.allow_any_split = s["allow_any_split"].get<bool>();
    }

    if (j.contains("swarm")) {
        const auto& s = j["swarm"];
        detail::reject_unknown_keys(s, "swarm",
                                    {"particles", "k_scale", "phi_personal", "phi_global",
                                     "max_iters", "regen_percent", "seed", "fitness_mode",
                                     "threads", "capture_trace"});
        if (s.contains("particles"))
            spec.swarm.particles = s["particles"].get<std::size_t>();
        if (s.contains("k_scale"))
            spec.swarm.k_scale = s["k_scale"].get<double>();
        if (s.contains("phi_personal"))
            spec.swarm.phi_personal = s["phi_personal"].get<double>();
        if (s.contains("phi_global"))
            spec.swarm.phi_global = s["phi_global"].get<double>();
        if (s.contains("max_iters"))
            spec.swarm.max_iters = s["max_iters"].get<std::size_t>();
        if (s.contains("regen_percent"))
            spec.swarm.regen_percent = s["regen_percent"].get<double>();
        if (s.contains("seed"))
            spec.swarm.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("fitness_mode"))
            spec.swarm.fitness_mode = parse_fitness_mode(s["fitness_mode"].get<std::string>());
        if (s.contains("threads"))
            spec.swarm.threads = s["threads"].get<unsigned>();
        if (s.contains("capture_trace"))
            spec.swarm.capture_trace = s["capture_trace"].get<bool>();
    }

    if (j.contains("ranges")) {
        const auto& r = j["ranges"];
        detail::reject_unknown_keys(r, "ranges", {"polynomial", "rbf", "sigmoid"});
        if (r.contains("polynomial"))
            detail::parse_type_range(r["polynomial"], "ranges.polynomial",
                                     spec.ranges.polynomial, false);
        if (r.contains("rbf"))
            detail::parse_type_range(r["rbf"], "ranges.rbf", spec.ranges.rbf, false);
        if (r.contains("sigmoid"))
            detail::parse_type_range(r["sigmoid"], "ranges.sigmoid", spec.ranges.sigmoid, true);
    }

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        detail::reject_unknown_keys(s, "solver", {"tolerance", "max_passes", "sv_threshold"});
        if (s.contains("tolerance"))
            spec.solver.tolerance = s["tolerance"].get<double>();
        if (s.contains("max_passes"))
            spec.solver.max_passes = s["max_passes"].get<int>();
        if (s.contains("sv_threshold"))
            spec.solver.sv_threshold = s["sv_threshold"].get<double>();
    }

    if (j.contains("kernel_types")) {
        spec.kernel_types.clear();
        for (const auto& t : j["kernel_types"])
            spec.kernel_types.push_back(t.get<int>());
    }
    return spec;
}

}  // namespace svmpso
