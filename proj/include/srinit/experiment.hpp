#pragma once

#include "srinit/data.hpp"
#include "srinit/fitting.hpp"
#include "srinit/network.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srinit {

enum class ExperimentId { Tsc, Boolean, Digits };
enum class Method { Sr, Sbp, Bp };

std::string_view to_string(ExperimentId id);
std::string_view to_string(Method method);
ExperimentId parse_experiment(std::string_view s);
Method parse_method(std::string_view s);

struct ExperimentConfig {
    ExperimentId experiment = ExperimentId::Tsc;
    Method method = Method::Sr;
    /// Sigmoid pairs J; backpropagation from uniform init uses 2J plain units.
    int units = 100;
    SamplerSettings sampler;
    double h = 1.0;
    /// Trainer budget; unset picks the experiment default (SR: 0, i.e. no training).
    std::optional<std::int64_t> iterations;
    BatchOptConfig batch;
    SgdConfig sgd;
    RegressionConfig regression;
    double logit_margin = 0.05;
    /// Radius of the uniform init interval for tsc/boolean (digits uses fan-in scaling).
    double init_radius = 1.0;
    std::uint64_t seed = 0;

    int tsc_points = 201;
    int tsc_test_points = 1001;

    std::filesystem::path data_dir;
    DigitsOptions digits;

    /// Blank the seconds column of trace.csv so repeated runs are byte-identical.
    bool omit_timing_in_trace = false;
};

/// Fills experiment-dependent defaults (sampler, a_max, budgets) that the caller
/// did not set explicitly.
ExperimentConfig default_config(ExperimentId experiment, Method method);

/// Throws InvalidConfig for inconsistent settings.
void validate(const ExperimentConfig& cfg);

struct StageTiming {
    double sampling = 0.0;
    double regression = 0.0;
    double training = 0.0;
};

struct RunResult {
    TrainTrace trace;
    StageTiming timing;
    TrainStatus status = TrainStatus::BudgetExhausted;
    std::int64_t proposals = 0;
    std::int64_t envelope_violations = 0;
    std::vector<HiddenUnitSample> samples;
    std::optional<SigmoidPairNetwork> pair_net;
    std::optional<SigmoidUnitNetwork> unit_net;

    const TracePoint& final_point() const { return trace.back(); }
    /// First traced iteration with zero training error, if any.
    std::optional<std::int64_t> first_zero_train_error() const;
};

/// Runs one experiment; writes trace.csv, model.txt, samples.tsv (sr/sbp),
/// timing.csv and summary.txt into `out_dir` when it is non-empty.
RunResult run_experiment(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir = {});

std::string summary_line(const ExperimentConfig& cfg, const RunResult& result);

void write_samples_tsv(std::ostream& os, const std::vector<HiddenUnitSample>& samples);

/// Aligns traces of several bundles in long format (method, iter, metric, value);
/// iterations missing from a bundle produce blank values.
void compare(const std::vector<std::filesystem::path>& bundles, std::ostream& os);

/// stage,seconds rows for one bundle.
StageTiming read_timing(const std::filesystem::path& bundle);
void timing_report(const std::vector<std::filesystem::path>& bundles, std::ostream& os);

/// key=value pairs of a bundle's summary.txt.
std::map<std::string, std::string> read_summary(const std::filesystem::path& bundle);

}  // namespace srinit
