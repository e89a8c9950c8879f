// Command-line harness: utility tables, sampling, experiment runs and reports.

#include "srinit/data.hpp"
#include "srinit/error.hpp"
#include "srinit/experiment.hpp"
#include "srinit/fitting.hpp"
#include "srinit/kernels.hpp"
#include "srinit/samplers.hpp"
#include "srinit/transform.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srinit;

namespace {

void fail(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

/// Writes to the named file, or stdout when the name is empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
            fs::create_directories(parent);
        }
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw Error(ErrorCode::Io, "cannot open " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::vector<double> linspace(double lo, double hi, int steps) {
    if (steps < 1) fail("steps must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        v[static_cast<std::size_t>(i)] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    }
    return v;
}

struct DatasetArgs {
    std::string name = "tsc";
    int points = 201;
    std::string data_dir;
    Eigen::Index train_size = 2000;

    void add(CLI::App* app) {
        app->add_option("--dataset", name, "tsc, sin, boolean or digits")
            ->check(CLI::IsMember({"tsc", "sin", "boolean", "digits"}));
        app->add_option("--points", points, "Grid size for tsc/sin");
        app->add_option("--data-dir", data_dir, "IDX directory for digits");
        app->add_option("--train-size", train_size, "Digits training subset size");
    }

    LabeledDataset load(std::uint64_t seed) const {
        if (name == "tsc") return gen_tsc(points);
        if (name == "sin") return gen_sine(points);
        if (name == "boolean") return gen_boolean();
        if (data_dir.empty()) fail("digits needs --data-dir");
        const fs::path dir(data_dir);
        const IdxData train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
        DigitsOptions opts;
        opts.train_size = train_size;
        opts.test_size = 0;
        opts.subset_seed = seed;
        return prepare_digits(train, train, opts).train;
    }
};

struct KernelTableArgs {
    int order = 0;
    double from = -1.0;
    double to = 1.0;
    int steps = 201;
    int max_order = kDefaultMaxOrder;
    std::string out;
};

void kernel_table(const KernelTableArgs& args) {
    const MollifierKernel kernel = build_kernel(args.order, args.max_order);
    Output out(args.out);
    auto& os = out.stream();
    os.precision(17);
    os << "z,value\n";
    for (double z : linspace(args.from, args.to, args.steps)) os << z << ',' << kernel(z) << '\n';
}

struct TransformGridArgs {
    DatasetArgs dataset;
    std::string coords = "raw";
    double a_min = -40.0;
    double a_max = 40.0;
    int a_steps = 81;
    std::optional<double> b_min;
    std::optional<double> b_max;
    int b_steps = 81;
    int max_order = kDefaultMaxOrder;
    std::uint64_t seed = 0;
    std::string out;
};

void transform_grid(const TransformGridArgs& args) {
    const LabeledDataset data = args.dataset.load(args.seed);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data, args.max_order);
    const Eigen::Index m = data.input_dim();
    const double M = data.input_radius();
    const bool alpha_beta = args.coords == "alpha-beta";
    const double reach = alpha_beta ? 1.0 : M * std::max(std::abs(args.a_min), std::abs(args.a_max)) *
                                                std::sqrt(static_cast<double>(m)) + 1.0;
    const auto as = linspace(args.a_min, args.a_max, args.a_steps);
    const auto bs = linspace(args.b_min.value_or(-reach), args.b_max.value_or(reach), args.b_steps);

    Output out(args.out);
    auto& os = out.stream();
    os.precision(12);
    const std::string a_name = alpha_beta ? "alpha" : "a";
    for (Eigen::Index i = 0; i < m; ++i) os << a_name << i + 1 << ',';
    os << (alpha_beta ? "beta" : "b") << ",T\n";

    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    Eigen::VectorXd a(m);
    while (true) {
        for (Eigen::Index i = 0; i < m; ++i) a[i] = as[idx[static_cast<std::size_t>(i)]];
        for (double b : bs) {
            double value;
            if (alpha_beta) {
                const HiddenUnitSample s = from_alpha_beta(a, b, M);
                value = t(s.a, s.b);
            } else {
                value = t(a, b);
            }
            for (Eigen::Index i = 0; i < m; ++i) os << a[i] << ',';
            os << b << ',' << value << '\n';
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == as.size()) idx[d++] = 0;
        if (d == idx.size()) break;
    }
}

struct SampleArgs {
    DatasetArgs dataset;
    std::string method = "ar-transformed";
    int units = 10;
    std::uint64_t seed = 0;
    std::vector<double> beta_shapes{100.0, 3.0};
    SamplerSettings settings;
    std::string out;
};

void sample(const SampleArgs& args) {
    const LabeledDataset data = args.dataset.load(args.seed);
    SamplerSettings s = args.settings;
    s.kind = parse_sampler(args.method);
    s.anneal.alpha_shape = args.beta_shapes.at(0);
    s.anneal.beta_shape = args.beta_shapes.at(1);
    const SampleBatch batch = sample_hidden(data, s, args.units, args.seed);
    Output out(args.out);
    write_samples_tsv(out.stream(), batch.samples);
}

/// Raw run flags; only those given on the command line or in the config file
/// override the experiment defaults.
struct RunArgs {
    std::string experiment = "tsc";
    std::string method = "sr";
    std::uint64_t seed = 0;
    std::string out;
    int units = 0;
    std::string sampler;
    double h = 1.0;
    std::int64_t iterations = 0;
    double a_max = 0.0;
    int grid = 0;
    double envelope_safety = 0.0;
    std::vector<double> beta_shapes;
    double learning_rate = 0.0;
    int batch_size = 0;
    double curvature_decay = 0.0;
    std::int64_t trace_stride = 0;
    double init_radius = 0.0;
    double logit_margin = 0.0;
    double cutoff = 0.0;
    int tsc_points = 0;
    std::string data_dir;
    Eigen::Index train_size = 0;
    Eigen::Index test_size = 0;
    std::string coding;
    std::string normalization;
    bool omit_timing = false;
};

ExperimentConfig build_run_config(const CLI::App& app, const RunArgs& r) {
    ExperimentConfig cfg = default_config(parse_experiment(r.experiment), parse_method(r.method));
    cfg.seed = r.seed;
    auto given = [&app](const char* name) { return app.count(name) > 0; };
    if (given("--units")) cfg.units = r.units;
    if (given("--sampler")) cfg.sampler.kind = parse_sampler(r.sampler);
    if (given("--pair-h")) cfg.h = r.h;
    if (given("--iterations")) cfg.iterations = r.iterations;
    if (given("--a-max")) cfg.sampler.a_max = r.a_max;
    if (given("--grid")) cfg.sampler.grid_per_axis = r.grid;
    if (given("--envelope-safety")) cfg.sampler.envelope_safety = r.envelope_safety;
    if (given("--beta-shapes")) {
        cfg.sampler.anneal.alpha_shape = r.beta_shapes.at(0);
        cfg.sampler.anneal.beta_shape = r.beta_shapes.at(1);
    }
    if (given("--learning-rate")) cfg.sgd.learning_rate = r.learning_rate;
    if (given("--batch-size")) cfg.sgd.batch_size = r.batch_size;
    if (given("--curvature-decay")) cfg.sgd.curvature_decay = r.curvature_decay;
    if (given("--trace-stride")) cfg.sgd.trace_stride = r.trace_stride;
    if (given("--init-radius")) cfg.init_radius = r.init_radius;
    if (given("--logit-margin")) cfg.logit_margin = r.logit_margin;
    if (given("--cutoff")) cfg.regression.cutoff = r.cutoff;
    if (given("--tsc-points")) cfg.tsc_points = r.tsc_points;
    if (given("--data-dir")) cfg.data_dir = r.data_dir;
    if (given("--train-size")) cfg.digits.train_size = r.train_size;
    if (given("--test-size")) cfg.digits.test_size = r.test_size;
    if (given("--coding")) {
        cfg.digits.coding = r.coding == "random" ? LabelCodebook::Scheme::RandomBinary
                                                 : LabelCodebook::Scheme::OneHot;
    }
    if (given("--normalization")) {
        cfg.digits.normalization.policy = r.normalization == "scale" ? NormalizationPolicy::ScaleOnly
                                                                     : NormalizationPolicy::ScaleCenter;
    }
    cfg.digits.subset_seed = r.seed;
    cfg.digits.code_seed = r.seed;
    cfg.omit_timing_in_trace = r.omit_timing;
    if (cfg.method == Method::Bp && given("--sampler")) fail("bp does not use a sampler");
    return cfg;
}

/// Turns each key = value line of the --config file into "--key value", skipping keys
/// already given as flags so the command line wins. Flags set to true become bare switches.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::string path;
    std::set<std::string> given;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].rfind("--", 0) != 0) continue;
        const auto eq = args[i].find('=');
        const std::string name = args[i].substr(0, eq);
        given.insert(name);
        if (name != "--config") continue;
        if (eq != std::string::npos) path = args[i].substr(eq + 1);
        else if (i + 1 < args.size()) path = args[i + 1];
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
    for (const auto& item : CLI::ConfigINI().from_config(in)) {
        if (item.name.empty() || item.name.front() == '+' || item.name.front() == '-') continue;
        const std::string flag = "--" + item.name;
        if (given.count(flag) != 0) continue;
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true") args.push_back(flag);
            continue;
        }
        args.push_back(flag);
        for (const auto& v : item.inputs) args.push_back(v);
    }
    return args;
}

void add_common(CLI::App* app, std::uint64_t& seed, std::string& out, const std::string& out_help) {
    app->add_option("--config", "Flat key = value file; flags override it")->type_name("FILE");
    app->add_option("--seed", seed, "Master seed for all randomness");
    app->add_option("--out", out, out_help);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-regression initialization for single-hidden-layer networks"};
    app.require_subcommand(1);

    KernelTableArgs kt;
    auto* kt_cmd = app.add_subcommand("kernel-table", "Tabulate a mollifier derivative as CSV (z,value)");
    std::uint64_t kt_seed = 0;
    add_common(kt_cmd, kt_seed, kt.out, "Output file (default stdout)");
    kt_cmd->add_option("--order", kt.order, "Derivative order k")->required();
    kt_cmd->add_option("--from", kt.from);
    kt_cmd->add_option("--to", kt.to);
    kt_cmd->add_option("--steps", kt.steps);
    kt_cmd->add_option("--max-order", kt.max_order);

    TransformGridArgs tg;
    auto* tg_cmd = app.add_subcommand("transform-grid", "Evaluate the empirical transform on a grid");
    add_common(tg_cmd, tg.seed, tg.out, "Output file (default stdout)");
    tg.dataset.add(tg_cmd);
    tg_cmd->add_option("--coords", tg.coords, "raw or alpha-beta")
        ->check(CLI::IsMember({"raw", "alpha-beta"}));
    tg_cmd->add_option("--a-min", tg.a_min);
    tg_cmd->add_option("--a-max", tg.a_max);
    tg_cmd->add_option("--a-steps", tg.a_steps);
    tg_cmd->add_option("--b-min", tg.b_min);
    tg_cmd->add_option("--b-max", tg.b_max);
    tg_cmd->add_option("--b-steps", tg.b_steps);
    tg_cmd->add_option("--max-order", tg.max_order);

    SampleArgs sa;
    auto* sa_cmd = app.add_subcommand("sample", "Draw hidden parameters; one TSV line a_1..a_m b per unit");
    add_common(sa_cmd, sa.seed, sa.out, "Output file (default stdout)");
    sa.dataset.add(sa_cmd);
    sa_cmd->add_option("--method", sa.method)
        ->check(CLI::IsMember({"ar", "ar-transformed", "annealed"}));
    sa_cmd->add_option("--units", sa.units, "Number of samples J");
    sa_cmd->add_option("--beta-shapes", sa.beta_shapes, "Annealed Beta shapes a,b")
        ->delimiter(',')
        ->expected(2);
    sa_cmd->add_option("--envelope-safety", sa.settings.envelope_safety);
    sa_cmd->add_option("--a-max", sa.settings.a_max, "Proposal half-width for a or alpha");
    sa_cmd->add_option("--grid", sa.settings.grid_per_axis, "Envelope grid points per axis");
    sa_cmd->add_option("--max-order", sa.settings.max_order);

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write a result bundle");
    add_common(run_cmd, ra.seed, ra.out, "Bundle directory");
    run_cmd->get_option("--seed")->required();
    run_cmd->add_option("--experiment", ra.experiment)
        ->check(CLI::IsMember({"tsc", "boolean", "digits"}));
    run_cmd->add_option("--method", ra.method)->check(CLI::IsMember({"sr", "sbp", "bp"}));
    run_cmd->add_option("--units", ra.units, "Sigmoid pairs J (bp uses 2J units)");
    run_cmd->add_option("--sampler", ra.sampler)
        ->check(CLI::IsMember({"ar", "ar-transformed", "annealed"}));
    run_cmd->add_option("--pair-h", ra.h, "Sigmoid pair half-width");
    run_cmd->add_option("--iterations", ra.iterations, "Trainer budget (0 = none)");
    run_cmd->add_option("--a-max", ra.a_max);
    run_cmd->add_option("--grid", ra.grid);
    run_cmd->add_option("--envelope-safety", ra.envelope_safety);
    run_cmd->add_option("--beta-shapes", ra.beta_shapes)->delimiter(',')->expected(2);
    run_cmd->add_option("--learning-rate", ra.learning_rate);
    run_cmd->add_option("--batch-size", ra.batch_size);
    run_cmd->add_option("--curvature-decay", ra.curvature_decay);
    run_cmd->add_option("--trace-stride", ra.trace_stride);
    run_cmd->add_option("--init-radius", ra.init_radius);
    run_cmd->add_option("--logit-margin", ra.logit_margin);
    run_cmd->add_option("--cutoff", ra.cutoff, "Relative singular value cutoff");
    run_cmd->add_option("--tsc-points", ra.tsc_points);
    run_cmd->add_option("--data-dir", ra.data_dir);
    run_cmd->add_option("--train-size", ra.train_size);
    run_cmd->add_option("--test-size", ra.test_size);
    run_cmd->add_option("--coding", ra.coding)->check(CLI::IsMember({"onehot", "random"}));
    run_cmd->add_option("--normalization", ra.normalization)
        ->check(CLI::IsMember({"scale", "center"}));
    run_cmd->add_flag("--omit-timing", ra.omit_timing, "Blank the seconds column of trace.csv");

    std::vector<std::string> bundles;
    std::string report_out;
    std::uint64_t report_seed = 0;
    auto* cmp_cmd = app.add_subcommand("compare", "Align traces of several bundles (long CSV)");
    add_common(cmp_cmd, report_seed, report_out, "Output file (default stdout)");
    cmp_cmd->add_option("bundles", bundles)->required();
    auto* tim_cmd = app.add_subcommand("timing", "Per-stage wall-clock seconds of bundles");
    add_common(tim_cmd, report_seed, report_out, "Output file (default stdout)");
    tim_cmd->add_option("bundles", bundles)->required();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const Error& e) {
        std::cerr << "error code=" << to_string(e.code()) << " message=\"" << e.what() << "\"\n";
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error code=InvalidConfig message=\"" << e.what() << "\"\n";
        return 2;
    }

    try {
        if (*kt_cmd) {
            kernel_table(kt);
        } else if (*tg_cmd) {
            transform_grid(tg);
        } else if (*sa_cmd) {
            sample(sa);
        } else if (*run_cmd) {
            const ExperimentConfig cfg = build_run_config(*run_cmd, ra);
            if (ra.out.empty()) fail("run needs --out DIR");
            const RunResult res = run_experiment(cfg, ra.out);
            std::cout << summary_line(cfg, res) << '\n';
        } else if (*cmp_cmd) {
            std::vector<fs::path> paths(bundles.begin(), bundles.end());
            Output out(report_out);
            compare(paths, out.stream());
        } else if (*tim_cmd) {
            std::vector<fs::path> paths(bundles.begin(), bundles.end());
            Output out(report_out);
            timing_report(paths, out.stream());
        }
    } catch (const Error& e) {
        std::cerr << "error code=" << to_string(e.code()) << " message=\"" << e.what() << "\"\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error code=Internal message=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
