#include "srinit/fitting.hpp"

#include "srinit/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

namespace srinit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TracePoint make_point(std::int64_t iter, double loss_value, double seconds) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    return {iter, loss_value, nan, nan, seconds};
}

}  // namespace

Eigen::MatrixXd regress_output(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                               const RegressionConfig& cfg) {
    if (phi.rows() != y.rows()) throw Error(ErrorCode::ShapeMismatch, "regression: row mismatch");
    if (phi.rows() < 1 || phi.cols() < 1) {
        throw Error(ErrorCode::ShapeMismatch, "regression: empty system");
    }
    if (!phi.allFinite() || !y.allFinite()) {
        throw Error(ErrorCode::NonFinite, "regression input contains non-finite values");
    }
    if (!(cfg.cutoff > 0.0 && cfg.cutoff < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "singular value cutoff must lie in (0,1)");
    }
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double threshold = s.size() > 0 ? cfg.cutoff * s[0] : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > threshold) inv[i] = 1.0 / s[i];
    }
    return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().transpose() * y));
}

std::string_view to_string(TrainStatus status) {
    switch (status) {
        case TrainStatus::BudgetExhausted: return "budget_exhausted";
        case TrainStatus::Converged: return "converged";
        case TrainStatus::LineSearchFailed: return "line_search_failed";
        case TrainStatus::Diverged: return "diverged";
    }
    return "unknown";
}

MinimizeResult lbfgs_minimize(const Objective& objective, Eigen::VectorXd x0,
                              const BatchOptConfig& cfg, const IterationCallback& callback) {
    if (cfg.max_iterations < 0 || !(cfg.grad_tol > 0.0) || cfg.memory < 1) {
        throw Error(ErrorCode::InvalidConfig, "invalid quasi-Newton configuration");
    }
    MinimizeResult res;
    res.x = std::move(x0);
    Eigen::VectorXd g(res.x.size());
    res.f = objective(res.x, g);
    if (callback) callback(0, res.x, res.f);
    if (g.norm() <= cfg.grad_tol) {
        res.status = TrainStatus::Converged;
        return res;
    }

    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    std::deque<double> rho_hist;
    Eigen::VectorXd x_new(res.x.size());
    Eigen::VectorXd g_new(res.x.size());

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        // two-loop recursion
        Eigen::VectorXd d = -g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(d);
            d -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(d);
            d += (alpha[i] - beta) * s_hist[i];
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            if (attempt == 1 || !(g.dot(d) < 0.0)) {
                // fall back to steepest descent with a fresh memory
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
                d = -g;
            }
            double step = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
            const double slope = g.dot(d);
            for (int ls = 0; ls < cfg.max_line_search; ++ls) {
                x_new = res.x + step * d;
                const double f_new = objective(x_new, g_new);
                if (std::isfinite(f_new) && f_new <= res.f + cfg.sufficient_decrease * step * slope) {
                    const Eigen::VectorXd s = x_new - res.x;
                    const Eigen::VectorXd yv = g_new - g;
                    const double sy = s.dot(yv);
                    if (sy > 1e-12 * s.norm() * yv.norm()) {
                        s_hist.push_back(s);
                        y_hist.push_back(yv);
                        rho_hist.push_back(1.0 / sy);
                        if (static_cast<int>(s_hist.size()) > cfg.memory) {
                            s_hist.pop_front();
                            y_hist.pop_front();
                            rho_hist.pop_front();
                        }
                    }
                    res.x = x_new;
                    res.f = f_new;
                    g = g_new;
                    accepted = true;
                    break;
                }
                step *= cfg.backtrack;
            }
            if (!accepted && s_hist.empty()) break;
        }
        if (!accepted) {
            res.status = TrainStatus::LineSearchFailed;
            return res;
        }
        res.iterations = iter;
        if (callback) callback(iter, res.x, res.f);
        if (g.norm() <= cfg.grad_tol) {
            res.status = TrainStatus::Converged;
            return res;
        }
    }
    res.status = TrainStatus::BudgetExhausted;
    return res;
}

TrainResult train_batch(SigmoidUnitNetwork net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, LossKind kind, const BatchOptConfig& cfg,
                        const Monitor& monitor) {
    if (!pack(net).allFinite()) throw Error(ErrorCode::NonFinite, "initial parameters not finite");
    const auto start = Clock::now();
    SigmoidUnitNetwork scratch = net;
    const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        unpack(x, scratch);
        const LossGradient lg = gradient(scratch, inputs, targets, kind);
        grad = pack(lg);
        return lg.loss;
    };
    TrainResult out{net, {}, TrainStatus::BudgetExhausted};
    const IterationCallback record = [&](int iter, const Eigen::VectorXd& x, double f) {
        TracePoint p = make_point(iter, f, seconds_since(start));
        if (monitor) {
            unpack(x, scratch);
            monitor(p, scratch);
        }
        out.trace.push_back(p);
    };
    const MinimizeResult r = lbfgs_minimize(objective, pack(net), cfg, record);
    unpack(r.x, out.net);
    out.status = r.status;
    return out;
}

TrainResult train_sgd(SigmoidUnitNetwork net, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, LossKind kind, const SgdConfig& cfg,
                      const Monitor& monitor) {
    if (!(cfg.learning_rate >= 0.0) || cfg.iterations < 0 || cfg.batch_size < 1 ||
        cfg.trace_stride < 1 || cfg.curvature_decay < 0.0 || cfg.curvature_decay >= 1.0) {
        throw Error(ErrorCode::InvalidConfig, "invalid SGD configuration");
    }
    if (inputs.rows() != targets.rows() || inputs.rows() < 1) {
        throw Error(ErrorCode::ShapeMismatch, "SGD: inputs and targets differ in row count");
    }
    if (!pack(net).allFinite()) throw Error(ErrorCode::NonFinite, "initial parameters not finite");

    const auto start = Clock::now();
    TrainResult out{std::move(net), {}, TrainStatus::BudgetExhausted};
    auto record = [&](std::int64_t iter) {
        const double l = loss(forward_batch(out.net, inputs), targets, kind);
        TracePoint p = make_point(iter, l, seconds_since(start));
        if (monitor) monitor(p, out.net);
        out.trace.push_back(p);
        return l;
    };
    const double initial = record(0);

    Rng rng(cfg.seed);
    const Eigen::Index n = inputs.rows();
    const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, n);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    Eigen::MatrixXd xb(batch, inputs.cols());
    Eigen::MatrixXd yb(batch, targets.cols());
    Eigen::VectorXd theta = pack(out.net);
    Eigen::VectorXd accum = Eigen::VectorXd::Zero(theta.size());

    for (std::int64_t it = 1; it <= cfg.iterations; ++it) {
        for (Eigen::Index i = 0; i < batch; ++i) {
            const Eigen::Index r = pick(rng);
            xb.row(i) = inputs.row(r);
            yb.row(i) = targets.row(r);
        }
        const Eigen::VectorXd g = pack(gradient(out.net, xb, yb, kind));
        if (cfg.curvature_decay > 0.0) {
            accum = cfg.curvature_decay * accum + (1.0 - cfg.curvature_decay) * g.cwiseAbs2();
        } else {
            accum += g.cwiseAbs2();
        }
        theta.array() -= cfg.learning_rate * g.array() / (accum.array().sqrt() + cfg.damping);
        unpack(theta, out.net);

        if (it % cfg.trace_stride == 0 || it == cfg.iterations) {
            const double l = record(it);
            if (!std::isfinite(l) || l > kDivergenceFactor * initial) {
                out.status = TrainStatus::Diverged;
                return out;
            }
        }
    }
    return out;
}

double InitScheme::draw(Rng& rng, Eigen::Index fan_in) const {
    if (kind == Kind::GaussianFanin) {
        // uniform with standard deviation fan_in^{-1/2}
        const double half_width = std::sqrt(3.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> unit(-half_width, half_width);
        return unit(rng);
    }
    if (radius == 0.0) return 0.0;
    std::uniform_real_distribution<double> unit(-radius, radius);
    return unit(rng);
}

SigmoidUnitNetwork uniform_init(Eigen::Index m, Eigen::Index units, Eigen::Index d_out,
                                const InitScheme& scheme, OutputActivation activation, Rng& rng) {
    if (m < 1 || units < 1 || d_out < 1) {
        throw Error(ErrorCode::InvalidConfig, "network dimensions must be positive");
    }
    if (scheme.kind == InitScheme::Kind::Interval && scheme.radius < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "init interval radius must be non-negative");
    }
    SigmoidUnitNetwork net{Eigen::MatrixXd(units, m), Eigen::VectorXd(units),
                           Eigen::MatrixXd(units + 1, d_out), activation};
    for (Eigen::Index j = 0; j < units; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) net.u(j, i) = scheme.draw(rng, m);
        net.c[j] = scheme.draw(rng, m);
    }
    reinit_output(net, scheme, rng);
    return net;
}

void reinit_output(SigmoidUnitNetwork& net, const InitScheme& scheme, Rng& rng) {
    // gaussian scheme: every layer uses the input-dimension fan-in
    for (Eigen::Index j = 0; j < net.v.rows(); ++j) {
        for (Eigen::Index d = 0; d < net.v.cols(); ++d) net.v(j, d) = scheme.draw(rng, net.input_dim());
    }
}

std::string_view to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::Ar: return "ar";
        case SamplerKind::ArTransformed: return "ar-transformed";
        case SamplerKind::Annealed: return "annealed";
    }
    return "unknown";
}

SamplerKind parse_sampler(std::string_view s) {
    if (s == "ar") return SamplerKind::Ar;
    if (s == "ar-transformed") return SamplerKind::ArTransformed;
    if (s == "annealed") return SamplerKind::Annealed;
    throw Error(ErrorCode::InvalidConfig, "unknown sampler '" + std::string(s) + "'");
}

SampleBatch sample_hidden(const LabeledDataset& data, const SamplerSettings& settings, int units,
                          std::uint64_t seed) {
    if (settings.kind == SamplerKind::Annealed) {
        AnnealConfig anneal = settings.anneal;
        anneal.seed = seed;
        return annealed_sample(data, anneal, units);
    }
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data, settings.max_order);
    const Eigen::Index m = data.input_dim();
    const bool transformed = settings.kind == SamplerKind::ArTransformed;
    ArConfig cfg;
    cfg.region = transformed ? alpha_beta_box(m, settings.a_max)
                             : raw_support_box(m, t.input_radius(), settings.a_max);
    cfg.envelope_ratio =
        estimate_envelope(transformed ? pullback_target(t) : raw_target(t), cfg.region,
                          settings.grid_per_axis, settings.envelope_safety);
    cfg.max_trials_per_sample = settings.max_trials_per_sample;
    cfg.seed = seed;
    return transformed ? ar_sample_transformed(t, cfg, units) : ar_sample(t, cfg, units);
}

Eigen::MatrixXd regression_targets(const Eigen::MatrixXd& targets, OutputActivation activation,
                                   double logit_margin) {
    if (activation == OutputActivation::Linear) return targets;
    if (!(logit_margin > 0.0 && logit_margin < 0.5)) {
        throw Error(ErrorCode::InvalidConfig, "logit margin must lie in (0, 0.5)");
    }
    return targets.unaryExpr([logit_margin](double t) {
        const double p = logit_margin + (1.0 - 2.0 * logit_margin) * std::clamp(t, 0.0, 1.0);
        return std::log(p / (1.0 - p));
    });
}

void fit_output_weights(SigmoidPairNetwork& net, const LabeledDataset& data,
                        const RegressionConfig& cfg, double logit_margin) {
    const Eigen::MatrixXd phi = design_matrix(net.a, net.b, net.pair, data.inputs());
    net.w = regress_output(phi, regression_targets(data.targets(), net.activation, logit_margin),
                           cfg);
}

SrResult sr_pipeline(const LabeledDataset& data, const SrConfig& cfg) {
    if (cfg.units < 1) throw Error(ErrorCode::InvalidConfig, "SR needs at least one unit");
    SrResult res{SigmoidPairNetwork{}, 0, 0, 0.0, 0.0};
    auto start = Clock::now();
    const SampleBatch batch = sample_hidden(data, cfg.sampler, cfg.units, cfg.seed);
    res.sampling_seconds = seconds_since(start);
    res.proposals = batch.proposals;
    res.envelope_violations = batch.envelope_violations;

    res.net = SigmoidPairNetwork::from_samples(batch.samples, SigmoidPair(cfg.h),
                                               data.output_dim(), cfg.activation);
    start = Clock::now();
    fit_output_weights(res.net, data, cfg.regression, cfg.logit_margin);
    res.regression_seconds = seconds_since(start);
    return res;
}

}  // namespace srinit
