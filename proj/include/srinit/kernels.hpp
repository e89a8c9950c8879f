#pragma once

#include <cstdint>
#include <vector>

namespace srinit {

/// Orders above this are refused by the rigorous kernel; use the annealed sampler.
inline constexpr int kDefaultMaxOrder = 12;

/// Standard mollifier exp(1/(z^2-1)) on (-1,1), zero elsewhere.
double mollifier_eval(double z);

/// k-th derivative of the standard mollifier, stored as the integer polynomial
/// P_k with rho^(k)(z) = P_k(z) / (z^2-1)^(2k) * rho(z).
class MollifierKernel {
public:
    MollifierKernel() : MollifierKernel(0) {}
    explicit MollifierKernel(int order, int max_order = kDefaultMaxOrder);

    int order() const noexcept { return order_; }
    /// Ascending-degree coefficients of P_k.
    const std::vector<std::int64_t>& coeffs() const noexcept { return coeffs_; }

    double poly(double z) const;
    double operator()(double z) const;
    /// log|rho^(k)(z)|; -infinity where the value is zero.
    double log_abs(double z) const;

private:
    int order_;
    std::vector<std::int64_t> coeffs_;
};

/// Throws OrderTooHigh when k > max_order or the coefficients overflow int64.
MollifierKernel build_kernel(int k, int max_order = kDefaultMaxOrder);
double kernel_eval(const MollifierKernel& kernel, double z);

/// Order of the decomposing derivative for input dimension m: m if even, m+1 if odd.
int kernel_order_for_dim(int m);

/// Numerically stable logistic function.
double sigmoid(double z);

/// Normalized difference of shifted sigmoids; even in z with maximum 1 at z = 0.
class SigmoidPair {
public:
    SigmoidPair() : SigmoidPair(1.0) {}
    explicit SigmoidPair(double h);

    double h() const noexcept { return h_; }
    double norm() const noexcept { return norm_; }
    double operator()(double z) const;

private:
    double h_;
    double norm_;
};

double sigmoid_pair_eval(const SigmoidPair& pair, double z);

/// Upper bound log|rho^(k)(z)| <= A z^2 + B on (-1,1).
struct LogQuadEnvelope {
    double A = 0.0;
    double B = 0.0;

    double operator()(double z) const { return A * z * z + B; }
};

LogQuadEnvelope fit_envelope(int k, int grid_size = 10000, double safety = 1.05,
                             int max_order = kDefaultMaxOrder);

}  // namespace srinit
