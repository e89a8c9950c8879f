#pragma once

#include "srinit/dataset.hpp"
#include "srinit/network.hpp"
#include "srinit/samplers.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string_view>

namespace srinit {

struct RegressionConfig {
    /// Singular values below cutoff * sigma_max are treated as zero.
    double cutoff = 1e-10;
};

/// Minimum-norm least-squares W minimizing ||phi W - y|| via SVD.
Eigen::MatrixXd regress_output(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                               const RegressionConfig& cfg = {});

enum class TrainStatus { BudgetExhausted, Converged, LineSearchFailed, Diverged };
std::string_view to_string(TrainStatus status);

struct BatchOptConfig {
    int max_iterations = 500;
    double grad_tol = 1e-8;
    int memory = 10;
    double sufficient_decrease = 1e-4;
    double backtrack = 0.5;
    int max_line_search = 50;
};

/// f(x), writing the gradient into grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Called after the initial point (iter 0) and after every accepted iteration.
using IterationCallback = std::function<void(int iter, const Eigen::VectorXd& x, double f)>;

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    TrainStatus status = TrainStatus::BudgetExhausted;
};

/// Limited-memory BFGS with backtracking (Armijo) line search; f never increases.
MinimizeResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                              const BatchOptConfig& cfg, const IterationCallback& callback = {});

/// Fills the error columns of a trace point for the current network.
using Monitor = std::function<void(TracePoint& point, const SigmoidUnitNetwork& net)>;

struct TrainResult {
    SigmoidUnitNetwork net;
    TrainTrace trace;
    TrainStatus status = TrainStatus::BudgetExhausted;
};

TrainResult train_batch(SigmoidUnitNetwork net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, LossKind kind, const BatchOptConfig& cfg,
                        const Monitor& monitor = {});

struct SgdConfig {
    double learning_rate = 0.05;
    /// Added to the root of the accumulated squared gradient.
    double damping = 1e-8;
    int batch_size = 10;
    std::int64_t iterations = 1000;
    std::int64_t trace_stride = 100;
    /// 0 accumulates all squared gradients; a value in (0,1) instead keeps an
    /// exponential average, a running diagonal curvature estimate.
    double curvature_decay = 0.0;
    std::uint64_t seed = 0;
};

inline constexpr double kDivergenceFactor = 1e3;

/// Minibatch SGD with per-parameter adaptive step sizes. Stops with
/// TrainStatus::Diverged when the training loss exceeds 1e3 times its initial value.
TrainResult train_sgd(SigmoidUnitNetwork net, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, LossKind kind, const SgdConfig& cfg,
                      const Monitor& monitor = {});

struct InitScheme {
    enum class Kind { Interval, GaussianFanin } kind = Kind::Interval;
    double radius = 1.0;

    static InitScheme interval(double r) { return {Kind::Interval, r}; }
    /// Mean zero, standard deviation fan_in^{-1/2} (drawn uniformly).
    static InitScheme gaussian_fanin() { return {Kind::GaussianFanin, 0.0}; }
    double draw(Rng& rng, Eigen::Index fan_in) const;
};

/// Every parameter drawn from the scheme.
SigmoidUnitNetwork uniform_init(Eigen::Index m, Eigen::Index units, Eigen::Index d_out,
                                const InitScheme& scheme, OutputActivation activation, Rng& rng);

/// Redraws only the output layer (bias row included).
void reinit_output(SigmoidUnitNetwork& net, const InitScheme& scheme, Rng& rng);

enum class SamplerKind { Ar, ArTransformed, Annealed };
std::string_view to_string(SamplerKind kind);
SamplerKind parse_sampler(std::string_view s);

struct SamplerSettings {
    SamplerKind kind = SamplerKind::ArTransformed;
    /// Half-width of the proposal box for a (or alpha).
    double a_max = 40.0;
    int grid_per_axis = 400;
    double envelope_safety = 1.5;
    std::int64_t max_trials_per_sample = 10'000'000;
    int max_order = kDefaultMaxOrder;
    AnnealConfig anneal;
};

/// Draws `units` hidden parameters with the chosen sampler.
SampleBatch sample_hidden(const LabeledDataset& data, const SamplerSettings& settings, int units,
                          std::uint64_t seed);

struct SrConfig {
    SamplerSettings sampler;
    int units = 10;
    double h = 1.0;
    OutputActivation activation = OutputActivation::Linear;
    RegressionConfig regression;
    /// Sigmoid outputs regress onto logit(margin + (1 - 2 margin) t) instead of t.
    double logit_margin = 0.05;
    std::uint64_t seed = 0;
};

struct SrResult {
    SigmoidPairNetwork net;
    std::int64_t proposals = 0;
    std::int64_t envelope_violations = 0;
    double sampling_seconds = 0.0;
    double regression_seconds = 0.0;
};

/// Targets in pre-activation space for the regression stage.
Eigen::MatrixXd regression_targets(const Eigen::MatrixXd& targets, OutputActivation activation,
                                   double logit_margin);

/// Fits output weights of `net` in place against the dataset.
void fit_output_weights(SigmoidPairNetwork& net, const LabeledDataset& data,
                        const RegressionConfig& cfg, double logit_margin);

/// Sampling, then regression of the output weights.
SrResult sr_pipeline(const LabeledDataset& data, const SrConfig& cfg);

}  // namespace srinit
