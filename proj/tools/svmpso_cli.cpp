// Command-line front end: search for SVM hyperparameters with either PSO
// variant, compare the two, train at fixed hyperparameters, and score new
// data with a saved model.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "svmpso/experiment.hpp"
#include "svmpso/model_io.hpp"

namespace {

using namespace svmpso;

struct CommonFlags {
    std::string config;
    std::string data;
    std::string label_col;
    std::string positive_label;
    std::string out;
    std::string fitness_mode;
    std::optional<std::uint64_t> seed;
    bool trace = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config JSON");
    cmd->add_option("--data", f.data, "dataset CSV path (overrides config)");
    cmd->add_option("--label-col", f.label_col, "label column name or 0-based index");
    cmd->add_option("--positive-label", f.positive_label, "label value mapped to +1");
    cmd->add_option("--seed", f.seed, "swarm seed (overrides config)");
    cmd->add_option("--fitness-mode", f.fitness_mode, "fitness: train or combined");
    cmd->add_option("--out", f.out, "output directory for report/model/trace files");
    cmd->add_flag("--trace", f.trace, "capture per-iteration particle traces");
}

ExperimentSpec build_spec(const CommonFlags& f) {
    ExperimentSpec spec = f.config.empty() ? ExperimentSpec{} : load_experiment_spec(f.config);
    if (!f.data.empty())
        spec.data_path = f.data;
    if (!f.label_col.empty())
        spec.load.label_column = f.label_col;
    if (!f.positive_label.empty())
        spec.load.positive_label = f.positive_label;
    if (f.seed)
        spec.swarm.seed = *f.seed;
    if (!f.fitness_mode.empty())
        spec.swarm.fitness_mode = parse_fitness_mode(f.fitness_mode);
    if (!f.out.empty())
        spec.output_dir = f.out;
    if (f.trace)
        spec.swarm.capture_trace = true;
    return spec;
}

int run_search(const CommonFlags& flags, const std::string& mode_flag, bool force_both,
               bool force_trace) {
    ExperimentSpec spec = build_spec(flags);
    if (force_both)
        spec.mode = RunMode::both;
    else if (!mode_flag.empty())
        spec.mode = parse_run_mode(mode_flag);
    if (force_trace) {
        spec.swarm.capture_trace = true;
        if (spec.output_dir.empty())
            throw ConfigError("dump-trace needs --out (or output_dir in the config)");
    }

    ComparisonReport report = run_experiment(spec);
    print_table(report, std::cout);
    if (spec.swarm.capture_trace && !spec.output_dir.empty()) {
        auto files = emit_trace_plots_data(report, spec.output_dir + "/plots");
        std::cout << "trace: " << files.size() << " scatter files under " << spec.output_dir
                  << "/plots, raw trace CSV(s) in " << spec.output_dir << '\n';
    }
    return 0;
}

KernelSpec kernel_from_flags(const std::string& name, int degree, double sigma, double k1,
                             double k2) {
    if (name == "linear")
        return KernelSpec::linear();
    if (name == "polynomial")
        return KernelSpec::polynomial(degree);
    if (name == "rbf")
        return KernelSpec::rbf(sigma);
    if (name == "sigmoid")
        return KernelSpec::sigmoid(k1, k2);
    throw ConfigError("unknown kernel '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVM classifier training with swarm-searched kernel and parameters"};
    app.require_subcommand(1);

    CommonFlags opt_flags, cmp_flags, dump_flags;
    std::string opt_mode = "modified";

    CLI::App* opt = app.add_subcommand("optimize", "run one search mode");
    add_common_flags(opt, opt_flags);
    opt->add_option("--mode", opt_mode, "traditional, modified or both");

    CLI::App* cmp = app.add_subcommand("compare", "run both search modes on the same split");
    add_common_flags(cmp, cmp_flags);

    CLI::App* dmp = app.add_subcommand("dump-trace", "run a search and export particle traces");
    add_common_flags(dmp, dump_flags);
    std::string dump_mode = "modified";
    dmp->add_option("--mode", dump_mode, "traditional, modified or both");

    // train: fit one model at fixed hyperparameters
    std::string tr_data, tr_label_col, tr_positive, tr_out, tr_kernel = "rbf";
    int tr_degree = 3;
    double tr_sigma = 1.0, tr_k1 = 1.0, tr_k2 = -1.0, tr_c = 1.0;
    bool tr_no_normalize = false, tr_no_header = false;
    CLI::App* tr = app.add_subcommand("train", "train one SVM at fixed hyperparameters");
    tr->add_option("--data", tr_data, "dataset CSV path")->required();
    tr->add_option("--label-col", tr_label_col, "label column name or 0-based index")
        ->required();
    tr->add_option("--positive-label", tr_positive, "label value mapped to +1")->required();
    tr->add_option("--kernel", tr_kernel, "linear, polynomial, rbf or sigmoid");
    tr->add_option("--degree", tr_degree, "polynomial degree");
    tr->add_option("--sigma", tr_sigma, "rbf width");
    tr->add_option("--k1", tr_k1, "sigmoid slope");
    tr->add_option("--k2", tr_k2, "sigmoid offset (negative)");
    tr->add_option("--c", tr_c, "box constraint C");
    tr->add_option("--out", tr_out, "model file to write");
    tr->add_flag("--no-normalize", tr_no_normalize, "skip [0,1] characteristic scaling");
    tr->add_flag("--no-header", tr_no_header, "dataset CSV has no header row");

    // predict: score a CSV with a saved model
    std::string pr_model, pr_data, pr_label_col, pr_positive, pr_out;
    bool pr_no_header = false;
    CLI::App* pr = app.add_subcommand("predict", "classify rows with a saved model");
    pr->add_option("--model", pr_model, "model file from train/optimize")->required();
    pr->add_option("--data", pr_data, "CSV of characteristics (plus labels if --label-col)")
        ->required();
    pr->add_option("--label-col", pr_label_col, "score accuracy against this label column");
    pr->add_option("--positive-label", pr_positive, "label value mapped to +1");
    pr->add_option("--out", pr_out, "write one +1/-1 prediction per row here");
    pr->add_flag("--no-header", pr_no_header, "dataset CSV has no header row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (opt->parsed())
            return run_search(opt_flags, opt_mode, false, false);
        if (cmp->parsed())
            return run_search(cmp_flags, "", true, false);
        if (dmp->parsed())
            return run_search(dump_flags, dump_mode, false, true);

        if (tr->parsed()) {
            LoadOptions load;
            load.label_column = tr_label_col;
            load.positive_label = tr_positive;
            load.has_header = !tr_no_header;
            Dataset raw = load_csv(tr_data, load);
            FeatureScaling scaling;
            Dataset ds = tr_no_normalize ? std::move(raw) : normalize(raw, &scaling);

            TrainConfig cfg;
            cfg.kernel = kernel_from_flags(tr_kernel, tr_degree, tr_sigma, tr_k1, tr_k2);
            cfg.c = tr_c;
            SvmModel model = train(ds, cfg);
            const std::size_t errors = count_errors(model, ds);
            std::cout << "trained on " << ds.size() << " samples: " << cfg.kernel.describe()
                      << ", C=" << format_double(cfg.c) << '\n'
                      << "support vectors: " << model.support_count()
                      << ", training errors: " << errors << " of " << ds.size()
                      << ", converged: " << (model.diag.converged ? "yes" : "no") << '\n';
            if (!tr_out.empty()) {
                save_model_file(model, tr_out, tr_no_normalize ? nullptr : &scaling);
                std::cout << "model written to " << tr_out << '\n';
            }
            return 0;
        }

        if (pr->parsed()) {
            FeatureScaling scaling;
            SvmModel model = load_model_file(pr_model, &scaling);

            Matrix feats;
            std::vector<int> truth;
            if (!pr_label_col.empty()) {
                if (pr_positive.empty())
                    throw ConfigError("--label-col needs --positive-label");
                LoadOptions load;
                load.label_column = pr_label_col;
                load.positive_label = pr_positive;
                load.has_header = !pr_no_header;
                Dataset ds = load_csv(pr_data, load);
                feats = ds.features();
                truth = ds.labels();
            } else {
                feats = load_feature_csv(pr_data, !pr_no_header);
            }
            if (scaling.dim() > 0)
                feats = apply_scaling(feats, scaling);

            std::ofstream out_file;
            std::ostream* out = &std::cout;
            if (!pr_out.empty()) {
                out_file.open(pr_out);
                if (!out_file)
                    throw DataError("cannot write predictions to " + pr_out);
                out = &out_file;
            }
            std::size_t errors = 0;
            for (std::size_t i = 0; i < feats.rows(); ++i) {
                const int label = predict(model, feats.row(i));
                *out << (label > 0 ? "+1" : "-1") << '\n';
                if (!truth.empty() && label != truth[i])
                    ++errors;
            }
            if (!truth.empty())
                std::cerr << "accuracy: " << feats.rows() - errors << " of " << feats.rows()
                          << " ("
                          << format_double(100.0 * static_cast<double>(feats.rows() - errors) /
                                           static_cast<double>(feats.rows()))
                          << "%)\n";
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const SearchError& e) {
        std::cerr << "search error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
