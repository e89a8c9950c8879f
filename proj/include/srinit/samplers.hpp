#pragma once

#include "srinit/dataset.hpp"
#include "srinit/transform.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace srinit {

using Rng = std::mt19937_64;

/// Axis-aligned box; proposals are drawn uniformly inside it.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return lower.size(); }
    double volume() const;
    bool contains(const Eigen::VectorXd& p) const;
};

/// Non-negative unnormalized density over the points of a box.
using Density = std::function<double(const Eigen::VectorXd&)>;

/// Raw (a,b) box: a in [-a_max, a_max]^m, |b| <= M a_max sqrt(m) + 1, so it covers
/// the whole support region restricted to that a-range.
Box raw_support_box(Eigen::Index m, double M, double a_max);
/// (alpha,beta) box: alpha in [-a_max, a_max]^m, beta in [-1, 1].
Box alpha_beta_box(Eigen::Index m, double a_max);

/// |T(a,b)| on points (a_1..a_m, b).
Density raw_target(const EmpiricalTransform& t);
/// |T(a(alpha,beta), b(alpha,beta))| (M||alpha|| + 1) on points (alpha, beta); the
/// second factor is the Jacobian of the coordinate change.
Density pullback_target(const EmpiricalTransform& t);

struct ArConfig {
    Box region;
    double envelope_ratio = 1.0;
    std::int64_t max_trials_per_sample = 1'000'000;
    std::uint64_t seed = 0;
};

struct ArResult {
    std::vector<Eigen::VectorXd> points;
    std::int64_t proposals = 0;
    /// Proposals where target/(ratio * q) exceeded 1, i.e. the envelope was too tight.
    std::int64_t envelope_violations = 0;

    double acceptance_rate() const {
        return proposals > 0 ? static_cast<double>(points.size()) / proposals : 0.0;
    }
};

struct SampleBatch {
    std::vector<HiddenUnitSample> samples;
    std::int64_t proposals = 0;
    std::int64_t envelope_violations = 0;
};

/// safety * max over a grid_per_axis^dim lattice of density / q, q = 1 / volume.
double estimate_envelope(const Density& target, const Box& region, int grid_per_axis,
                         double safety);

/// Acceptance-rejection against a uniform proposal on cfg.region.
ArResult ar_sample_density(const Density& target, const ArConfig& cfg, int count);

/// Samples (a_j, b_j) from |T| by acceptance-rejection in raw coordinates.
SampleBatch ar_sample(const EmpiricalTransform& t, const ArConfig& cfg, int units);
/// Same law as ar_sample, proposing uniformly in (alpha, beta) coordinates.
SampleBatch ar_sample_transformed(const EmpiricalTransform& t, const ArConfig& cfg, int units);

struct AnnealConfig {
    double alpha_shape = 100.0;
    double beta_shape = 3.0;
    double min_norm = 1e-6;
    int max_attempts = 16;
    std::uint64_t seed = 0;
};

/// Distance between two distinct uniformly chosen inputs; draws below min_norm
/// are retried up to max_attempts times, after which min_norm is returned.
double draw_pair_distance(const LabeledDataset& data, Rng& rng, double min_norm = 1e-6,
                          int max_attempts = 16);

/// Mixture-annealed sampler: picks an anchor example by its mixing weight, draws
/// z = +-Beta(alpha_shape, beta_shape), sets a parallel to the anchor with length
/// given by a random pair distance, and b = a.x_n - z. Never touches the kernel.
SampleBatch annealed_sample(const LabeledDataset& data, const AnnealConfig& cfg, int units);

/// Same as annealed_sample, also reporting which example anchored each unit.
SampleBatch annealed_sample(const LabeledDataset& data, const AnnealConfig& cfg, int units,
                            std::vector<Eigen::Index>* anchors);

}  // namespace srinit
