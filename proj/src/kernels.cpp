#include "srinit/kernels.hpp"

#include "srinit/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace srinit {

namespace {

// Constants for the 784-dimensional digits kernel, where the polynomial is
// far beyond double range and the bound was fitted numerically.
constexpr int kDigitsOrder = 784;
constexpr double kDigitsA = 2800.0;
constexpr double kDigitsB = -800.0;

bool checked_mul_add(std::int64_t& acc, std::int64_t a, std::int64_t b) {
    std::int64_t prod = 0;
    if (__builtin_mul_overflow(a, b, &prod)) return false;
    return !__builtin_add_overflow(acc, prod, &acc);
}

}  // namespace

double mollifier_eval(double z) {
    const double d = z * z - 1.0;
    if (!(d < 0.0)) return 0.0;
    return std::exp(1.0 / d);
}

MollifierKernel::MollifierKernel(int order, int max_order) : order_(order) {
    if (order < 0) throw Error(ErrorCode::InvalidConfig, "kernel order must be non-negative");
    if (order > max_order) {
        throw Error(ErrorCode::OrderTooHigh,
                    "kernel order " + std::to_string(order) + " exceeds max_order " +
                        std::to_string(max_order));
    }
    // P_{k+1} = P_k' (z^4 - 2z^2 + 1) + P_k (-4k z^3 + 2(2k-1) z)
    std::vector<std::int64_t> p{1};
    for (int k = 0; k < order; ++k) {
        std::vector<std::int64_t> next(p.size() + 3, 0);
        bool ok = true;
        for (std::size_t i = 1; i < p.size() && ok; ++i) {
            const std::int64_t d = static_cast<std::int64_t>(i) * p[i];
            const std::size_t deg = i - 1;
            ok = checked_mul_add(next[deg + 4], d, 1) && checked_mul_add(next[deg + 2], d, -2) &&
                 checked_mul_add(next[deg], d, 1);
        }
        for (std::size_t i = 0; i < p.size() && ok; ++i) {
            ok = checked_mul_add(next[i + 3], p[i], -4 * k) &&
                 checked_mul_add(next[i + 1], p[i], 2 * (2 * k - 1));
        }
        if (!ok) {
            throw Error(ErrorCode::OrderTooHigh,
                        "kernel coefficients overflow at order " + std::to_string(k + 1));
        }
        while (next.size() > 1 && next.back() == 0) next.pop_back();
        p = std::move(next);
    }
    coeffs_ = std::move(p);
}

double MollifierKernel::poly(double z) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * z + static_cast<double>(*it);
    }
    return acc;
}

double MollifierKernel::log_abs(double z) const {
    const double d = z * z - 1.0;
    if (!(d < 0.0)) return -std::numeric_limits<double>::infinity();
    const double p = poly(z);
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(std::abs(p)) - 2.0 * order_ * std::log(-d) + 1.0 / d;
}

double MollifierKernel::operator()(double z) const {
    const double d = z * z - 1.0;
    if (!(d < 0.0)) return 0.0;
    const double p = poly(z);
    if (p == 0.0) return 0.0;
    // Pole of (z^2-1)^(-2k) against the essential zero of rho: combine in log space.
    const double mag = std::log(std::abs(p)) - 2.0 * order_ * std::log(-d) + 1.0 / d;
    const double v = std::exp(mag);
    return p < 0.0 ? -v : v;
}

MollifierKernel build_kernel(int k, int max_order) { return MollifierKernel(k, max_order); }

double kernel_eval(const MollifierKernel& kernel, double z) { return kernel(z); }

int kernel_order_for_dim(int m) { return m % 2 == 0 ? m : m + 1; }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SigmoidPair::SigmoidPair(double h) : h_(h), norm_(sigmoid(h) - sigmoid(-h)) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorCode::InvalidConfig, "sigmoid pair half-width must be positive");
    }
}

double SigmoidPair::operator()(double z) const {
    // sigma(z+h) - sigma(z-h) is even in z; evaluate on |z| so both signs
    // round identically.
    const double a = std::abs(z);
    return (sigmoid(a + h_) - sigmoid(a - h_)) / norm_;
}

double sigmoid_pair_eval(const SigmoidPair& pair, double z) { return pair(z); }

LogQuadEnvelope fit_envelope(int k, int grid_size, double safety, int max_order) {
    if (safety < 1.0) throw Error(ErrorCode::InvalidConfig, "envelope safety must be >= 1");
    if (k > max_order) {
        if (k == kDigitsOrder) return {kDigitsA, kDigitsB};
        throw Error(ErrorCode::NotEvaluable,
                    "no envelope for order " + std::to_string(k) + " beyond max_order");
    }
    if (grid_size < 3) throw Error(ErrorCode::InvalidConfig, "envelope grid too small");
    const MollifierKernel kernel(k, max_order);

    std::vector<double> u;
    std::vector<double> v;
    for (int i = 0; i < grid_size; ++i) {
        // open grid on (-1,1)
        const double z = -1.0 + 2.0 * (i + 0.5) / grid_size;
        const double l = kernel.log_abs(z);
        if (!std::isfinite(l) || kernel(z) == 0.0) continue;
        u.push_back(z * z);
        v.push_back(l);
    }
    if (u.size() < 2) throw Error(ErrorCode::NotEvaluable, "kernel underflows on the whole grid");

    double mu = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        mv += v[i];
    }
    mu /= static_cast<double>(u.size());
    mv /= static_cast<double>(u.size());
    double suv = 0.0, suu = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        suv += (u[i] - mu) * (v[i] - mv);
        suu += (u[i] - mu) * (u[i] - mu);
    }
    // A must stay positive even where the least-squares slope is not.
    constexpr double kMinSlope = 1e-3;
    const double slope = suu > 0.0 ? suv / suu : 0.0;
    LogQuadEnvelope env{std::max(slope, kMinSlope), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < u.size(); ++i) env.B = std::max(env.B, v[i] - env.A * u[i]);
    env.B += std::log(safety);
    return env;
}

}  // namespace srinit
