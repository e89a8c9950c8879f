#include "srinit/data.hpp"
#include "srinit/error.hpp"
#include "srinit/samplers.hpp"

#include <doctest.h>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace srinit;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace oracles;

namespace {

Box unit_square() { return {VectorXd::Zero(2), VectorXd::Ones(2)}; }

}  // namespace

TEST_CASE("box geometry") {
    const Box raw = raw_support_box(2, 1.5, 10.0);
    CHECK(raw.dim() == 3);
    CHECK(raw.upper[2] == doctest::Approx(1.5 * 10.0 * std::sqrt(2.0) + 1.0));
    const Box ab = alpha_beta_box(1, 40.0);
    CHECK(ab.volume() == doctest::Approx(160.0));
    CHECK(ab.contains(VectorXd::Zero(2)));
    CHECK_FALSE(ab.contains((VectorXd(2) << 0.0, 1.5).finished()));
}

TEST_CASE("envelope estimates") {
    const Box box = unit_square();
    SUBCASE("target equal to the proposal density") {
        const Density q = [](const VectorXd&) { return 1.0; };
        CHECK(estimate_envelope(q, box, 20, 1.3) == doctest::Approx(1.3));
    }
    SUBCASE("safety times grid maximum ratio") {
        const Density five = [](const VectorXd&) { return 5.0; };
        CHECK(estimate_envelope(five, box, 20, 1.2) == doctest::Approx(6.0));
    }
    SUBCASE("TSC target on the support box") {
        const LabeledDataset data = gen_tsc(201);
        const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
        const double r = estimate_envelope(raw_target(t), raw_support_box(1, 1.0, 40.0), 100, 1.5);
        CHECK(std::isfinite(r));
        CHECK(r > 0.0);
    }
    SUBCASE("zero target") {
        const Density zero = [](const VectorXd&) { return 0.0; };
        try {
            estimate_envelope(zero, box, 10, 1.0);
            FAIL("expected DegenerateTarget");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateTarget);
        }
    }
}

TEST_CASE("uniform target accepts at the inverse envelope ratio") {
    const Density flat = [](const VectorXd&) { return 1.0; };
    ArConfig cfg{unit_square(), 4.0, 1'000'000, 17};
    const int count = 2500;
    const ArResult r = ar_sample_density(flat, cfg, count);
    const double p = 0.25;
    // Proposals until `count` acceptances: negative binomial.
    const double mean = count / p;
    const double sd = std::sqrt(count * (1 - p)) / p;
    CHECK(std::abs(static_cast<double>(r.proposals) - mean) < 3 * sd);
    CHECK(r.envelope_violations == 0);
    CHECK(r.acceptance_rate() == doctest::Approx(p).epsilon(0.05));
}

TEST_CASE("acceptance-rejection reproduces an analytic 2D density") {
    const BetaProduct beta;
    const Density target = [&](const VectorXd& p) { return beta(p); };
    ArConfig cfg;
    cfg.region = unit_square();
    cfg.envelope_ratio = estimate_envelope(target, cfg.region, 201, 1.2);
    cfg.seed = 123;
    const int n = 10000;
    const ArResult r = ar_sample_density(target, cfg, n);
    CHECK(r.envelope_violations == 0);

    // 5 x 10 bins; masses from the regularized incomplete beta function.
    const std::vector<double> obs = BetaProduct::histogram(r.points, 5, 10);
    const std::vector<double> mass = beta.bin_masses(5, 10);
    CHECK(gof_pvalue(obs, mass, n) > 0.01);

    // The target integrates to 1 over the box, so proposals per sample approach the ratio.
    const double per_sample = static_cast<double>(r.proposals) / n;
    CHECK(per_sample == doctest::Approx(cfg.envelope_ratio).epsilon(0.10));
}

TEST_CASE("trial budget") {
    const Density spike = [](const VectorXd& p) { return p[0] > 0.999999 ? 1.0 : 0.0; };
    ArConfig cfg{unit_square(), 1.0, 1000, 1};
    try {
        ar_sample_density(spike, cfg, 1);
        FAIL("expected TrialBudgetExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TrialBudgetExceeded);
    }
}

TEST_CASE("rigorous samplers on the TSC transform") {
    const LabeledDataset data = gen_tsc(201);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    const double M = t.input_radius();

    ArConfig raw_cfg;
    raw_cfg.region = raw_support_box(1, M, 40.0);
    raw_cfg.envelope_ratio = estimate_envelope(raw_target(t), raw_cfg.region, 400, 1.5);
    raw_cfg.seed = 1;
    ArConfig ab_cfg;
    ab_cfg.region = alpha_beta_box(1, 40.0);
    ab_cfg.envelope_ratio = estimate_envelope(pullback_target(t), ab_cfg.region, 400, 1.5);
    ab_cfg.seed = 2;

    const int n = 4000;
    const SampleBatch raw = ar_sample(t, raw_cfg, n);
    const SampleBatch ab = ar_sample_transformed(t, ab_cfg, n);

    SUBCASE("samples stay in the support region") {
        for (const auto& s : raw.samples) CHECK(support_contains(M, s.a, s.b));
        for (const auto& s : ab.samples) CHECK(support_contains(M, s.a, s.b));
    }
    SUBCASE("the transformed proposal wastes fewer trials") {
        CHECK(static_cast<double>(n) / ab.proposals >= static_cast<double>(n) / raw.proposals);
    }
    SUBCASE("both coordinate systems sample the same law") {
        std::vector<double> h1(32, 0.0), h2(32, 0.0);
        for (const auto& s : raw.samples) h1[tsc_bin(s)] += 1;
        for (const auto& s : ab.samples) h2[tsc_bin(s)] += 1;
        CHECK(two_sample_pvalue(h1, h2) > 0.01);
    }
    SUBCASE("samples follow |T| on a coarse grid") {
        // Bin masses by midpoint integration of |T| in raw coordinates.
        std::vector<double> mass(32, 0.0);
        const int ga = 800, gb = 820;
        for (int i = 0; i < ga; ++i) {
            for (int j = 0; j < gb; ++j) {
                HiddenUnitSample s{VectorXd::Constant(1, -40.0 + 80.0 * (i + 0.5) / ga),
                                   -41.0 + 82.0 * (j + 0.5) / gb};
                mass[tsc_bin(s)] += std::abs(t(s.a, s.b));
            }
        }
        const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
        for (double& m : mass) m /= total;

        // J = 100 only supports four cells: sign of a times |beta| below or above 1/2.
        auto coarse = [](int bin) { return (bin / 16) * 2 + ((bin % 4 == 1 || bin % 4 == 2) ? 0 : 1); };
        std::vector<double> coarse_mass(4, 0.0), obs(4, 0.0);
        for (int b = 0; b < 32; ++b) coarse_mass[coarse(b)] += mass[b];
        const SampleBatch small = ar_sample(t, raw_cfg, 100);
        for (const auto& s : small.samples) obs[coarse(tsc_bin(s))] += 1;
        CHECK(gof_pvalue(obs, coarse_mass, 100) > 0.01);

        std::vector<double> big(32, 0.0);
        for (const auto& s : raw.samples) big[tsc_bin(s)] += 1;
        CHECK(gof_pvalue(big, mass, n) > 0.01);
    }
}

TEST_CASE("sampler determinism") {
    const LabeledDataset data = gen_tsc(101);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    ArConfig cfg;
    cfg.region = alpha_beta_box(1, 40.0);
    cfg.envelope_ratio = estimate_envelope(pullback_target(t), cfg.region, 100, 1.5);
    cfg.seed = 99;
    const SampleBatch x = ar_sample_transformed(t, cfg, 50);
    const SampleBatch y = ar_sample_transformed(t, cfg, 50);
    REQUIRE(x.samples.size() == y.samples.size());
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        CHECK(x.samples[i].a == y.samples[i].a);
        CHECK(x.samples[i].b == y.samples[i].b);
    }
    CHECK(x.proposals == y.proposals);

    AnnealConfig an;
    an.seed = 4;
    const SampleBatch p = annealed_sample(data, an, 50);
    const SampleBatch q = annealed_sample(data, an, 50);
    for (std::size_t i = 0; i < p.samples.size(); ++i) {
        CHECK(p.samples[i].a == q.samples[i].a);
        CHECK(p.samples[i].b == q.samples[i].b);
    }
}

TEST_CASE("pair distance") {
    Rng rng(5);
    MatrixXd two(2, 2);
    two << 0, 0, 3, 0;
    const LabeledDataset d2(two, VectorXd::Ones(2));
    for (int i = 0; i < 100; ++i) CHECK(draw_pair_distance(d2, rng) == 3.0);

    const LabeledDataset same(MatrixXd::Ones(5, 2), VectorXd::Ones(5));
    CHECK(draw_pair_distance(same, rng, 1e-6, 16) == 1e-6);

    MatrixXd three(3, 1);
    three << 0, 1, 4;
    const LabeledDataset d3(three, VectorXd::Ones(3));
    const double exact = (1.0 + 4.0 + 3.0) / 3.0;
    const double var = (1.0 + 16.0 + 9.0) / 3.0 - exact * exact;
    const int n = 10000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += draw_pair_distance(d3, rng);
    CHECK(std::abs(sum / n - exact) < 3 * std::sqrt(var / n));

    try {
        draw_pair_distance(LabeledDataset(MatrixXd::Ones(1, 1), VectorXd::Ones(1)), rng);
        FAIL("expected TooFewExamples");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewExamples);
    }
}

TEST_CASE("annealed samples respond to their anchors") {
    const LabeledDataset data = gen_boolean();
    AnnealConfig cfg;
    cfg.seed = 8;
    std::vector<Eigen::Index> anchors;
    const SampleBatch batch = annealed_sample(data, cfg, 2000, &anchors);
    REQUIRE(anchors.size() == 2000);
    CHECK(batch.proposals == 2000);
    const VectorXd w = data.channel_weights();
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const VectorXd x = data.inputs().row(anchors[j]).transpose();
        const auto& s = batch.samples[j];
        CHECK(w[anchors[j]] > 0.0);
        const double z = s.a.dot(x) - s.b;
        CHECK(std::abs(z) < 1.0);
        CHECK(std::abs(s.a.dot(x)) == doctest::Approx(s.a.norm() * x.norm()).epsilon(1e-12));
    }
}

TEST_CASE("annealed offsets follow the Beta law") {
    MatrixXd x(2, 1);
    x << 1.0, -2.0;
    const LabeledDataset data(x, VectorXd::Ones(2));
    AnnealConfig cfg;
    cfg.seed = 21;
    const int n = 100000;
    std::vector<Eigen::Index> anchors;
    const SampleBatch batch = annealed_sample(data, cfg, n, &anchors);
    std::vector<double> zeta(n);
    double sum = 0.0, positive = 0.0;
    for (int j = 0; j < n; ++j) {
        const double z = batch.samples[j].a[0] * x(anchors[j], 0) - batch.samples[j].b;
        zeta[j] = std::abs(z);
        sum += zeta[j];
        positive += z > 0;
    }
    const double a = 100, b = 3;
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    CHECK(std::abs(sum / n - mean) < 3 * std::sqrt(var / n));
    CHECK(std::abs(positive / n - 0.5) < 3 * std::sqrt(0.25 / n));

    // Twenty equal-mass bins of the Beta CDF.
    std::vector<double> obs(20, 0.0), mass(20, 0.05);
    for (double v : zeta) {
        const int bin = std::min(static_cast<int>(boost::math::ibeta(a, b, v) * 20), 19);
        obs[bin] += 1;
    }
    CHECK(gof_pvalue(obs, mass, n) > 0.01);
}

TEST_CASE("annealed sampler works where the kernel cannot be built") {
    CHECK_THROWS_AS(build_kernel(784), Error);
    Rng rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    const MatrixXd x = MatrixXd::NullaryExpr(50, 784, [&] { return u(rng); });
    const MatrixXd y = MatrixXd::NullaryExpr(50, 10, [&] { return u(rng) < 0.5 ? 0.0 : 1.0; });
    const LabeledDataset data(x, y);
    AnnealConfig cfg;
    const SampleBatch batch = annealed_sample(data, cfg, 300);
    CHECK(batch.samples.size() == 300);
    for (const auto& s : batch.samples) {
        CHECK(s.a.size() == 784);
        CHECK(std::isfinite(s.b));
    }
}

TEST_CASE("annealed sampler errors") {
    MatrixXd x(3, 1);
    x << 0.0, 0.0, 1.0;
    VectorXd y(3);
    y << 1.0, 1.0, 0.0;
    try {
        annealed_sample(LabeledDataset(x, y), AnnealConfig{}, 5);
        FAIL("expected ZeroNormInput");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroNormInput);
    }
    try {
        annealed_sample(LabeledDataset(x, VectorXd::Zero(3)), AnnealConfig{}, 5);
        FAIL("expected AllZeroTargets");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllZeroTargets);
    }
}
