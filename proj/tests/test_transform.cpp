#include "srinit/data.hpp"
#include "srinit/error.hpp"
#include "srinit/transform.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace srinit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Second derivative of exp(1/(z^2-1)), written out by hand.
double rho2(double z) {
    if (std::abs(z) >= 1.0) return 0.0;
    const double q = z * z - 1.0;
    return (6 * z * z * z * z - 2) / (q * q * q * q) * std::exp(1.0 / q);
}

LabeledDataset scalar_dataset(const MatrixXd& x, const VectorXd& y) { return LabeledDataset(x, y); }

}  // namespace

TEST_CASE("single example reduces to the kernel") {
    MatrixXd x(1, 2);
    x << 0.3, -0.4;
    const LabeledDataset data = scalar_dataset(x, VectorXd::Ones(1));
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    CHECK(t.kernel().order() == 2);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int i = 0; i < 200; ++i) {
        const VectorXd a = VectorXd::NullaryExpr(2, [&] { return u(rng); });
        const double b = u(rng);
        CHECK(transform_eval(t, a, b) == t.kernel()(a.dot(x.row(0)) - b));
    }
}

TEST_CASE("transform matches a direct sum") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    const MatrixXd x = MatrixXd::NullaryExpr(30, 1, [&] { return 0.5 * g(rng); });
    const VectorXd y = VectorXd::NullaryExpr(30, [&] { return g(rng); });
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(scalar_dataset(x, y));
    std::uniform_real_distribution<double> u(-4, 4);
    for (int i = 0; i < 500; ++i) {
        VectorXd a(1);
        a << u(rng);
        const double b = u(rng);
        double expect = 0.0;
        for (int n = 0; n < 30; ++n) expect += y[n] * rho2(a[0] * x(n, 0) - b);
        CHECK(transform_eval(t, a, b) == doctest::Approx(expect).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("transform is linear in the targets") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const MatrixXd x = MatrixXd::NullaryExpr(40, 1, [&] { return g(rng); });
    const VectorXd y1 = VectorXd::NullaryExpr(40, [&] { return g(rng); });
    const VectorXd y2 = VectorXd::NullaryExpr(40, [&] { return g(rng); });
    const EmpiricalTransform t1 = EmpiricalTransform::for_dataset(scalar_dataset(x, y1));
    const EmpiricalTransform t2 = EmpiricalTransform::for_dataset(scalar_dataset(x, y2));
    const EmpiricalTransform t12 = EmpiricalTransform::for_dataset(scalar_dataset(x, y1 + y2));
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 500; ++i) {
        VectorXd a(1);
        a << u(rng);
        const double b = u(rng);
        const double sum = t1(a, b) + t2(a, b);
        const double joint = t12(a, b);
        const double scale = std::abs(t1(a, b)) + std::abs(t2(a, b));
        CHECK(std::abs(joint - sum) <= 1e-12 * scale + 1e-300);
    }
}

TEST_CASE("mixture upper bound") {
    const LabeledDataset data = gen_tsc(201);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    const VectorXd w = data.channel_weights();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ua(-40, 40), ub(-41, 41);
    for (int i = 0; i < 2000; ++i) {
        VectorXd a(1);
        a << ua(rng);
        const double b = ub(rng);
        double bound = 0.0;
        for (Eigen::Index n = 0; n < data.size(); ++n) {
            bound += std::abs(w[n]) * std::abs(t.kernel()(a[0] * data.inputs()(n, 0) - b));
        }
        CHECK(std::abs(t(a, b)) <= bound * (1 + 1e-12));
    }
}

TEST_CASE("transform vanishes outside the support region") {
    const LabeledDataset data = gen_tsc(201);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    const double M = t.input_radius();
    CHECK(M == 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(-40, 40), excess(1e-9, 20), coin(0, 1);
    for (int i = 0; i < 10000; ++i) {
        VectorXd a(1);
        a << ua(rng);
        const double mag = M * a.norm() + 1 + excess(rng);
        const double b = coin(rng) < 0.5 ? -mag : mag;
        REQUIRE_FALSE(support_contains(M, a, b));
        CHECK(t(a, b) == 0.0);
    }
    VectorXd a(1);
    a << 10.0;
    CHECK(t(a, 0.3) != 0.0);
}

TEST_CASE("grid maximizer of |T| lies inside the support region") {
    const LabeledDataset data = gen_sine(201);
    const EmpiricalTransform t = EmpiricalTransform::for_dataset(data);
    const double M = data.input_radius();
    double best = -1.0, best_a = 0.0, best_b = 0.0;
    for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 410; ++j) {
            VectorXd a(1);
            a << -40.0 + 0.2 * i;
            const double b = -41.0 + 0.2 * j;
            const double v = std::abs(t(a, b));
            if (v > best) {
                best = v;
                best_a = a[0];
                best_b = b;
            }
        }
    }
    CHECK(best > 0.0);
    CHECK(std::abs(best_b) < M * std::abs(best_a) + 1);
}

TEST_CASE("support region membership") {
    VectorXd a1(1);
    a1 << 1.0;
    CHECK(support_contains(1.0, a1, 2.0));
    CHECK_FALSE(support_contains(1.0, a1, 2.5));
    CHECK(support_contains(2.0, VectorXd::Zero(2), 0.5));
    CHECK(support_contains(1.0, a1, -2.0));
}

TEST_CASE("support radius follows the stored inputs") {
    MatrixXd x(3, 2);
    x << 0.1, 0.2, -0.5, 0.3, 0.0, 0.4;
    const VectorXd y = VectorXd::Ones(3);
    const EmpiricalTransform t1 = EmpiricalTransform::for_dataset(scalar_dataset(x, y));
    const EmpiricalTransform t2 = EmpiricalTransform::for_dataset(scalar_dataset(2 * x, y));
    CHECK(t1.input_radius() == doctest::Approx(x.rowwise().norm().maxCoeff()).epsilon(1e-15));
    CHECK(t2.input_radius() == doctest::Approx(2 * t1.input_radius()).epsilon(1e-15));

    // Points just outside the doubled region are zero; just inside the old one need not be.
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) {
        const VectorXd a = VectorXd::NullaryExpr(2, [&] { return 5 * g(rng); });
        const double b = t2.input_radius() * a.norm() + 1 + 1e-9;
        CHECK(t2(a, b) == 0.0);
        CHECK(t2(a, -b) == 0.0);
    }
}

TEST_CASE("alpha-beta coordinates") {
    VectorXd alpha(2);
    alpha << 1.0, 0.0;
    const HiddenUnitSample s = from_alpha_beta(alpha, 0.5, 2.0);
    CHECK(s.a == alpha);
    CHECK(s.b == doctest::Approx(1.5).epsilon(1e-15));

    const VectorXd any = (VectorXd(3) << 3.0, -1.0, 2.0).finished();
    CHECK(from_alpha_beta(any, 0.0, 7.0).b == 0.0);

    const AlphaBeta ab = to_alpha_beta(alpha, 1.5, 2.0);
    CHECK(ab.alpha == alpha);
    CHECK(ab.beta == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(to_alpha_beta(VectorXd::Zero(2), 0.5, 3.0).beta == 0.5);

    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 1000; ++i) {
        const VectorXd al = VectorXd::NullaryExpr(3, [&] { return 3 * g(rng); });
        const double beta = u(rng);
        const double M = std::abs(g(rng));
        const HiddenUnitSample p = from_alpha_beta(al, beta, M);
        const AlphaBeta back = to_alpha_beta(p.a, p.b, M);
        CHECK((back.alpha - al).norm() == 0.0);
        CHECK(back.beta == doctest::Approx(beta).epsilon(1e-14));
        // |beta| <= 1 exactly when (a,b) lies in the support region.
        const double b = 3 * g(rng);
        CHECK((std::abs(to_alpha_beta(al, b, M).beta) <= 1.0) == support_contains(M, al, b));
    }
}

TEST_CASE("mixture weights") {
    const MatrixXd x3 = MatrixXd::Zero(3, 1);
    VectorXd y(3);
    y << 1, -2, 1;
    VectorXd eta = mixture_weights(scalar_dataset(x3, y));
    CHECK(eta[0] == doctest::Approx(0.25));
    CHECK(eta[1] == doctest::Approx(0.5));
    CHECK(eta[2] == doctest::Approx(0.25));

    eta = mixture_weights(scalar_dataset(MatrixXd::Zero(1, 1), VectorXd::Constant(1, -3.0)));
    CHECK(eta.size() == 1);
    CHECK(eta[0] == 1.0);

    y << 0, 0, 5;
    eta = mixture_weights(scalar_dataset(x3, y));
    CHECK(eta[0] == 0.0);
    CHECK(eta[1] == 0.0);
    CHECK(eta[2] == 1.0);

    try {
        mixture_weights(scalar_dataset(x3, VectorXd::Zero(3)));
        FAIL("expected AllZeroTargets");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AllZeroTargets);
    }
}

TEST_CASE("vector targets use L1 channel weights") {
    const LabeledDataset data = gen_boolean();
    const VectorXd w = data.channel_weights();
    CHECK(w[0] == 0.0);  // (0,0) -> (0,0,0)
    const VectorXd eta = mixture_weights(data);
    CHECK(eta.sum() == doctest::Approx(1.0));
    for (Eigen::Index n = 0; n < data.size(); ++n) {
        CHECK(w[n] == data.targets().row(n).cwiseAbs().sum());
    }
}

TEST_CASE("dataset validation") {
    CHECK_THROWS_AS(LabeledDataset(MatrixXd::Zero(3, 1), MatrixXd::Zero(2, 1)), Error);
    MatrixXd bad = MatrixXd::Zero(2, 1);
    bad(1, 0) = std::nan("");
    try {
        LabeledDataset(bad, MatrixXd::Zero(2, 1));
        FAIL("expected NonFinite");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFinite);
    }
}
