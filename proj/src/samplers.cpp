#include "srinit/samplers.hpp"

#include "srinit/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace srinit {

namespace {

constexpr double kMaxGridPoints = 5e7;

Eigen::VectorXd uniform_point(const Box& box, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd p(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
        p[i] = box.lower[i] + unit(rng) * (box.upper[i] - box.lower[i]);
    }
    return p;
}

HiddenUnitSample split_point(const Eigen::VectorXd& p) {
    const Eigen::Index m = p.size() - 1;
    return {p.head(m), p[m]};
}

double draw_beta(Rng& rng, double alpha, double beta) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

}  // namespace

double Box::volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
    return v;
}

bool Box::contains(const Eigen::VectorXd& p) const {
    return ((p.array() >= lower.array()) && (p.array() <= upper.array())).all();
}

Box raw_support_box(Eigen::Index m, double M, double a_max) {
    Box box{Eigen::VectorXd::Constant(m + 1, -a_max), Eigen::VectorXd::Constant(m + 1, a_max)};
    const double b_max = M * a_max * std::sqrt(static_cast<double>(m)) + 1.0;
    box.lower[m] = -b_max;
    box.upper[m] = b_max;
    return box;
}

Box alpha_beta_box(Eigen::Index m, double a_max) {
    Box box{Eigen::VectorXd::Constant(m + 1, -a_max), Eigen::VectorXd::Constant(m + 1, a_max)};
    box.lower[m] = -1.0;
    box.upper[m] = 1.0;
    return box;
}

Density raw_target(const EmpiricalTransform& t) {
    return [&t](const Eigen::VectorXd& p) {
        const Eigen::Index m = p.size() - 1;
        return std::abs(t(p.head(m), p[m]));
    };
}

Density pullback_target(const EmpiricalTransform& t) {
    return [&t](const Eigen::VectorXd& p) {
        const Eigen::Index m = p.size() - 1;
        const double jac = t.input_radius() * p.head(m).norm() + 1.0;
        return std::abs(t(p.head(m), jac * p[m])) * jac;
    };
}

double estimate_envelope(const Density& target, const Box& region, int grid_per_axis,
                         double safety) {
    const Eigen::Index dim = region.dim();
    if (grid_per_axis < 2) throw Error(ErrorCode::InvalidConfig, "envelope grid needs >= 2 points");
    if (!(region.volume() > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "proposal region has zero volume");
    }
    if (std::pow(static_cast<double>(grid_per_axis), static_cast<double>(dim)) > kMaxGridPoints) {
        throw Error(ErrorCode::InvalidConfig, "envelope grid too large for this dimension");
    }
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Eigen::VectorXd p(dim);
    double best = 0.0;
    while (true) {
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double frac = static_cast<double>(idx[i]) / (grid_per_axis - 1);
            p[i] = region.lower[i] + frac * (region.upper[i] - region.lower[i]);
        }
        best = std::max(best, target(p));
        Eigen::Index d = 0;
        while (d < dim && ++idx[d] == grid_per_axis) idx[d++] = 0;
        if (d == dim) break;
    }
    if (!(best > 0.0)) throw Error(ErrorCode::DegenerateTarget, "target is zero on the whole grid");
    return safety * best * region.volume();
}

ArResult ar_sample_density(const Density& target, const ArConfig& cfg, int count) {
    if (count < 1) throw Error(ErrorCode::InvalidConfig, "sample count must be >= 1");
    if (!(cfg.envelope_ratio > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "envelope ratio must be positive");
    }
    const double q = 1.0 / cfg.region.volume();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ArResult out;
    out.points.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.points.size()) < count) {
        std::int64_t misses = 0;
        while (true) {
            Eigen::VectorXd p = uniform_point(cfg.region, rng);
            const double u = unit(rng);
            ++out.proposals;
            const double ratio = target(p) / (cfg.envelope_ratio * q);
            if (ratio > 1.0) ++out.envelope_violations;
            if (u <= ratio && ratio > 0.0) {
                out.points.push_back(std::move(p));
                break;
            }
            if (++misses >= cfg.max_trials_per_sample) {
                throw Error(ErrorCode::TrialBudgetExceeded,
                            "no acceptance after " + std::to_string(misses) + " proposals");
            }
        }
    }
    return out;
}

SampleBatch ar_sample(const EmpiricalTransform& t, const ArConfig& cfg, int units) {
    if (cfg.region.dim() != t.input_dim() + 1) {
        throw Error(ErrorCode::ShapeMismatch, "proposal region must have dimension m + 1");
    }
    const ArResult r = ar_sample_density(raw_target(t), cfg, units);
    SampleBatch batch{{}, r.proposals, r.envelope_violations};
    batch.samples.reserve(r.points.size());
    for (const auto& p : r.points) batch.samples.push_back(split_point(p));
    return batch;
}

SampleBatch ar_sample_transformed(const EmpiricalTransform& t, const ArConfig& cfg, int units) {
    if (cfg.region.dim() != t.input_dim() + 1) {
        throw Error(ErrorCode::ShapeMismatch, "proposal region must have dimension m + 1");
    }
    const ArResult r = ar_sample_density(pullback_target(t), cfg, units);
    SampleBatch batch{{}, r.proposals, r.envelope_violations};
    batch.samples.reserve(r.points.size());
    const Eigen::Index m = t.input_dim();
    for (const auto& p : r.points) {
        batch.samples.push_back(from_alpha_beta(p.head(m), p[m], t.input_radius()));
    }
    return batch;
}

double draw_pair_distance(const LabeledDataset& data, Rng& rng, double min_norm,
                          int max_attempts) {
    const Eigen::Index n = data.size();
    if (n < 2) throw Error(ErrorCode::TooFewExamples, "pair distance needs at least two examples");
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    std::uniform_int_distribution<Eigen::Index> second(0, n - 2);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const Eigen::Index i = first(rng);
        Eigen::Index j = second(rng);
        if (j >= i) ++j;
        const double d = (data.input_rows().row(i) - data.input_rows().row(j)).norm();
        if (d >= min_norm) return d;
    }
    return min_norm;
}

SampleBatch annealed_sample(const LabeledDataset& data, const AnnealConfig& cfg, int units) {
    return annealed_sample(data, cfg, units, nullptr);
}

SampleBatch annealed_sample(const LabeledDataset& data, const AnnealConfig& cfg, int units,
                            std::vector<Eigen::Index>* anchors) {
    if (units < 1) throw Error(ErrorCode::InvalidConfig, "sample count must be >= 1");
    if (!(cfg.alpha_shape > 0.0) || !(cfg.beta_shape > 0.0) || cfg.min_norm < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "invalid annealing configuration");
    }
    const Eigen::VectorXd eta = mixture_weights(data);
    std::discrete_distribution<Eigen::Index> pick(eta.data(), eta.data() + eta.size());
    std::bernoulli_distribution coin(0.5);
    Rng rng(cfg.seed);

    SampleBatch batch;
    batch.samples.reserve(static_cast<std::size_t>(units));
    if (anchors) anchors->clear();
    for (int j = 0; j < units; ++j) {
        Eigen::Index n = pick(rng);
        double xnorm = data.input_norms()[n];
        for (int attempt = 1; xnorm == 0.0; ++attempt) {
            if (attempt > cfg.max_attempts) {
                throw Error(ErrorCode::ZeroNormInput, "selected anchor inputs keep having zero norm");
            }
            n = pick(rng);
            xnorm = data.input_norms()[n];
        }
        const double zeta = draw_beta(rng, cfg.alpha_shape, cfg.beta_shape);
        const double z = coin(rng) ? -zeta : zeta;
        const double length = draw_pair_distance(data, rng, cfg.min_norm, cfg.max_attempts);
        HiddenUnitSample s;
        const auto x = data.input_rows().row(n);
        s.a = (length / xnorm) * x.transpose();
        s.b = s.a.dot(x.transpose()) - z;
        batch.samples.push_back(std::move(s));
        if (anchors) anchors->push_back(n);
    }
    batch.proposals = units;
    return batch;
}

}  // namespace srinit
