#include "srinit/experiment.hpp"

#include "srinit/data.hpp"
#include "srinit/error.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace srinit {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Problem {
    LabeledDataset train;
    std::optional<LabeledDataset> test;
    LossKind loss = LossKind::Rmse;
    OutputActivation activation = OutputActivation::Linear;
    /// Empty for regression problems.
    Eigen::MatrixXd codebook;
};

Problem load_problem(const ExperimentConfig& cfg) {
    Problem p;
    switch (cfg.experiment) {
        case ExperimentId::Tsc:
            p.train = gen_tsc(cfg.tsc_points);
            p.test = gen_tsc(cfg.tsc_test_points);
            break;
        case ExperimentId::Boolean:
            p.train = gen_boolean();
            p.loss = LossKind::CrossEntropy;
            p.activation = OutputActivation::Sigmoid;
            p.codebook = binary_hypercube(3);
            break;
        case ExperimentId::Digits: {
            const IdxData train = load_idx(cfg.data_dir / "train-images-idx3-ubyte",
                                           cfg.data_dir / "train-labels-idx1-ubyte");
            const IdxData test = load_idx(cfg.data_dir / "t10k-images-idx3-ubyte",
                                          cfg.data_dir / "t10k-labels-idx1-ubyte");
            DigitsSplit split = prepare_digits(train, test, cfg.digits);
            p.train = std::move(split.train);
            p.test = std::move(split.test);
            p.loss = LossKind::CrossEntropy;
            p.activation = OutputActivation::Sigmoid;
            p.codebook = split.codebook.codes;
            break;
        }
    }
    return p;
}

template <class Net>
void measure(TracePoint& point, const Net& net, const Problem& p) {
    const bool classify = p.codebook.size() > 0;
    if (classify) {
        point.train_error =
            classification_error(forward_batch(net, p.train.inputs()), p.train.targets(), p.codebook);
    }
    if (p.test) {
        const Eigen::MatrixXd pred = forward_batch(net, p.test->inputs());
        point.test_error = classify ? classification_error(pred, p.test->targets(), p.codebook)
                                    : loss(pred, p.test->targets(), LossKind::Rmse);
    }
}

std::int64_t default_iterations(ExperimentId experiment, Method method) {
    if (method == Method::Sr) return 0;
    switch (experiment) {
        case ExperimentId::Tsc: return 500;
        case ExperimentId::Boolean: return 300;
        case ExperimentId::Digits: return 20000;
    }
    return 0;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct ParsedTrace {
    std::vector<std::string> header;
    std::map<std::int64_t, std::vector<std::string>> rows;
};

ParsedTrace read_trace(const fs::path& bundle) {
    std::ifstream in(bundle / "trace.csv");
    if (!in) throw Error(ErrorCode::Io, "missing trace.csv in " + bundle.string());
    ParsedTrace t;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "empty trace.csv in " + bundle.string());
    t.header = split_csv(line);
    if (t.header.empty() || t.header.front() != "iter") {
        throw Error(ErrorCode::IncompatibleMetrics, "trace.csv lacks an iter column");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv(line);
        fields.resize(t.header.size());
        t.rows[std::stoll(fields[0])] = std::move(fields);
    }
    return t;
}

}  // namespace

std::string_view to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::Tsc: return "tsc";
        case ExperimentId::Boolean: return "boolean";
        case ExperimentId::Digits: return "digits";
    }
    return "unknown";
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Sr: return "sr";
        case Method::Sbp: return "sbp";
        case Method::Bp: return "bp";
    }
    return "unknown";
}

ExperimentId parse_experiment(std::string_view s) {
    if (s == "tsc") return ExperimentId::Tsc;
    if (s == "boolean") return ExperimentId::Boolean;
    if (s == "digits") return ExperimentId::Digits;
    throw Error(ErrorCode::InvalidConfig, "unknown experiment '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
    if (s == "sr") return Method::Sr;
    if (s == "sbp") return Method::Sbp;
    if (s == "bp") return Method::Bp;
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + std::string(s) + "'");
}

ExperimentConfig default_config(ExperimentId experiment, Method method) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    cfg.method = method;
    switch (experiment) {
        case ExperimentId::Tsc:
            cfg.units = 100;
            cfg.sampler.kind = SamplerKind::ArTransformed;
            cfg.sampler.a_max = 40.0;
            cfg.sampler.grid_per_axis = 400;
            break;
        case ExperimentId::Boolean:
            cfg.units = 10;
            cfg.sampler.kind = SamplerKind::ArTransformed;
            cfg.sampler.a_max = 10.0;
            cfg.sampler.grid_per_axis = 60;
            break;
        case ExperimentId::Digits:
            cfg.units = 50;
            cfg.sampler.kind = SamplerKind::Annealed;
            cfg.sgd.trace_stride = 500;
            break;
    }
    cfg.iterations = default_iterations(experiment, method);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
    if (cfg.units < 1) fail("units must be >= 1");
    if (!(cfg.h > 0.0)) fail("h must be positive");
    if (cfg.iterations && *cfg.iterations < 0) fail("iterations must be >= 0");
    if (cfg.init_radius < 0.0) fail("init radius must be non-negative");
    if (cfg.experiment == ExperimentId::Digits && cfg.data_dir.empty()) {
        fail("digits experiment needs a data directory");
    }
    if (cfg.experiment == ExperimentId::Digits && cfg.sampler.kind != SamplerKind::Annealed &&
        cfg.method != Method::Bp) {
        fail("digits inputs are 784-dimensional; only the annealed sampler applies");
    }
    if (cfg.experiment == ExperimentId::Tsc && cfg.tsc_points < 2) fail("tsc needs >= 2 points");
}

std::optional<std::int64_t> RunResult::first_zero_train_error() const {
    for (const auto& p : trace) {
        if (p.train_error == 0.0) return p.iter;
    }
    return std::nullopt;
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
    validate(cfg);
    const Problem problem = load_problem(cfg);
    const std::int64_t iterations =
        cfg.iterations.value_or(default_iterations(cfg.experiment, cfg.method));
    const InitScheme scheme = cfg.experiment == ExperimentId::Digits
                                  ? InitScheme::gaussian_fanin()
                                  : InitScheme::interval(cfg.init_radius);
    Rng init_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    RunResult res;
    std::optional<SigmoidUnitNetwork> start;

    if (cfg.method == Method::Bp) {
        start = uniform_init(problem.train.input_dim(), 2 * cfg.units, problem.train.output_dim(),
                             scheme, problem.activation, init_rng);
    } else {
        auto t0 = Clock::now();
        const SampleBatch batch = sample_hidden(problem.train, cfg.sampler, cfg.units, cfg.seed);
        res.timing.sampling = seconds_since(t0);
        res.proposals = batch.proposals;
        res.envelope_violations = batch.envelope_violations;
        res.samples = batch.samples;
        SigmoidPairNetwork pair_net = SigmoidPairNetwork::from_samples(
            batch.samples, SigmoidPair(cfg.h), problem.train.output_dim(), problem.activation);
        if (cfg.method == Method::Sr) {
            t0 = Clock::now();
            fit_output_weights(pair_net, problem.train, cfg.regression, cfg.logit_margin);
            res.timing.regression = seconds_since(t0);
            if (iterations == 0) {
                TracePoint p{0, loss(forward_batch(pair_net, problem.train.inputs()),
                                     problem.train.targets(), problem.loss),
                             kNan, kNan, 0.0};
                measure(p, pair_net, problem);
                res.trace.push_back(p);
                res.status = TrainStatus::Converged;
                res.pair_net = std::move(pair_net);
            } else {
                start = expand_pairs(pair_net);
            }
        } else {
            start = expand_pairs(pair_net);
            reinit_output(*start, scheme, init_rng);
        }
    }

    if (start) {
        const Monitor monitor = [&problem](TracePoint& p, const SigmoidUnitNetwork& net) {
            measure(p, net, problem);
        };
        const auto t0 = Clock::now();
        TrainResult tr;
        if (cfg.experiment == ExperimentId::Digits) {
            SgdConfig sgd = cfg.sgd;
            sgd.iterations = iterations;
            sgd.seed = cfg.seed + 1;
            tr = train_sgd(*start, problem.train.inputs(), problem.train.targets(), problem.loss,
                           sgd, monitor);
        } else {
            BatchOptConfig batch = cfg.batch;
            batch.max_iterations = static_cast<int>(iterations);
            tr = train_batch(*start, problem.train.inputs(), problem.train.targets(), problem.loss,
                             batch, monitor);
        }
        res.timing.training = seconds_since(t0);
        res.trace = std::move(tr.trace);
        res.status = tr.status;
        res.unit_net = std::move(tr.net);
    }

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        {
            std::ofstream os(out_dir / "trace.csv");
            TrainTrace trace = res.trace;
            if (cfg.omit_timing_in_trace) {
                for (auto& p : trace) p.seconds = kNan;
            }
            write_trace_csv(os, trace);
        }
        {
            std::ofstream os(out_dir / "model.txt");
            if (res.pair_net) write_model(os, *res.pair_net);
            else write_model(os, *res.unit_net);
        }
        if (cfg.method != Method::Bp) {
            std::ofstream os(out_dir / "samples.tsv");
            write_samples_tsv(os, res.samples);
        }
        {
            std::ofstream os(out_dir / "timing.csv");
            os << "stage,seconds\nsampling," << res.timing.sampling << "\nregression,"
               << res.timing.regression << "\ntraining," << res.timing.training << '\n';
        }
        std::ofstream os(out_dir / "summary.txt");
        os << summary_line(cfg, res) << '\n';
    }
    return res;
}

std::string summary_line(const ExperimentConfig& cfg, const RunResult& result) {
    std::ostringstream os;
    os.precision(10);
    const TracePoint& last = result.final_point();
    auto num = [&os](const char* key, double v) {
        os << ' ' << key << '=';
        if (std::isnan(v)) os << "na";
        else os << v;
    };
    os << "experiment=" << to_string(cfg.experiment) << " method=" << to_string(cfg.method)
       << " seed=" << cfg.seed << " units=" << cfg.units << " iterations=" << last.iter;
    num("initial_loss", result.trace.front().loss);
    num("final_loss", last.loss);
    num("initial_train_error", result.trace.front().train_error);
    num("final_train_error", last.train_error);
    num("initial_test_error", result.trace.front().test_error);
    num("final_test_error", last.test_error);
    os << " status=" << to_string(result.status) << " proposals=" << result.proposals;
    return os.str();
}

void write_samples_tsv(std::ostream& os, const std::vector<HiddenUnitSample>& samples) {
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : samples) {
        for (Eigen::Index i = 0; i < s.a.size(); ++i) os << s.a[i] << '\t';
        os << s.b << '\n';
    }
    os.precision(old_precision);
}

std::map<std::string, std::string> read_summary(const fs::path& bundle) {
    std::ifstream in(bundle / "summary.txt");
    if (!in) throw Error(ErrorCode::Io, "missing summary.txt in " + bundle.string());
    std::map<std::string, std::string> out;
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq != std::string::npos) out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return out;
}

void compare(const std::vector<fs::path>& bundles, std::ostream& os) {
    if (bundles.size() < 2) throw Error(ErrorCode::InvalidConfig, "compare needs at least two bundles");
    std::vector<ParsedTrace> traces;
    std::vector<std::string> labels;
    std::string experiment;
    for (const auto& b : bundles) {
        traces.push_back(read_trace(b));
        const auto summary = read_summary(b);
        const auto exp = summary.count("experiment") ? summary.at("experiment") : "";
        if (experiment.empty()) experiment = exp;
        if (exp != experiment) {
            throw Error(ErrorCode::IncompatibleMetrics, "bundles come from different experiments");
        }
        if (traces.back().header != traces.front().header) {
            throw Error(ErrorCode::IncompatibleMetrics, "bundles record different metrics");
        }
        std::string label = summary.count("method") ? summary.at("method") : b.filename().string();
        for (const auto& l : labels) {
            if (l == label) {
                label += "@" + b.filename().string();
                break;
            }
        }
        labels.push_back(label);
    }
    std::set<std::int64_t> iters;
    for (const auto& t : traces) {
        for (const auto& [iter, _] : t.rows) iters.insert(iter);
    }
    const auto& header = traces.front().header;
    os << "method,iter,metric,value\n";
    for (std::size_t b = 0; b < traces.size(); ++b) {
        for (std::int64_t iter : iters) {
            const auto row = traces[b].rows.find(iter);
            for (std::size_t c = 1; c < header.size(); ++c) {
                if (header[c] == "seconds") continue;
                os << labels[b] << ',' << iter << ',' << header[c] << ',';
                if (row != traces[b].rows.end()) os << row->second[c];
                os << '\n';
            }
        }
    }
}

StageTiming read_timing(const fs::path& bundle) {
    std::ifstream in(bundle / "timing.csv");
    if (!in) throw Error(ErrorCode::Io, "missing timing.csv in " + bundle.string());
    StageTiming t;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto fields = split_csv(line);
        if (fields.size() != 2) continue;
        const double v = std::stod(fields[1]);
        if (fields[0] == "sampling") t.sampling = v;
        else if (fields[0] == "regression") t.regression = v;
        else if (fields[0] == "training") t.training = v;
    }
    return t;
}

void timing_report(const std::vector<fs::path>& bundles, std::ostream& os) {
    os << "bundle,sampling,regression,training\n";
    for (const auto& b : bundles) {
        const StageTiming t = read_timing(b);
        os << b.filename().string() << ',' << t.sampling << ',' << t.regression << ','
           << t.training << '\n';
    }
}

}  // namespace srinit
