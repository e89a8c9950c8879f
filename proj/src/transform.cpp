#include "srinit/transform.hpp"

#include "srinit/error.hpp"

#include <cmath>

namespace srinit {

EmpiricalTransform::EmpiricalTransform(const LabeledDataset& data, MollifierKernel kernel)
    : inputs_(data.inputs()),
      weights_(data.channel_weights()),
      kernel_(std::move(kernel)),
      radius_(data.input_radius()) {}

EmpiricalTransform EmpiricalTransform::for_dataset(const LabeledDataset& data, int max_order) {
    const int k = kernel_order_for_dim(static_cast<int>(data.input_dim()));
    return EmpiricalTransform(data, build_kernel(k, max_order));
}

double EmpiricalTransform::operator()(const Eigen::Ref<const Eigen::VectorXd>& a,
                                      double b) const {
    if (a.size() != inputs_.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "transform argument has wrong dimension");
    }
    double sum = 0.0;
    for (Eigen::Index n = 0; n < inputs_.rows(); ++n) {
        if (weights_[n] == 0.0) continue;
        const double z = inputs_.row(n).dot(a) - b;
        if (std::abs(z) >= 1.0) continue;
        sum += kernel_(z) * weights_[n];
    }
    return sum;
}

double transform_eval(const EmpiricalTransform& t, const Eigen::Ref<const Eigen::VectorXd>& a,
                      double b) {
    return t(a, b);
}

bool support_contains(double M, const Eigen::Ref<const Eigen::VectorXd>& a, double b) {
    return std::abs(b) <= M * a.norm() + 1.0;
}

HiddenUnitSample from_alpha_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha, double beta,
                             double M) {
    return {alpha, (M * alpha.norm() + 1.0) * beta};
}

AlphaBeta to_alpha_beta(const Eigen::Ref<const Eigen::VectorXd>& a, double b, double M) {
    return {a, b / (M * a.norm() + 1.0)};
}

Eigen::VectorXd mixture_weights(const LabeledDataset& data) {
    Eigen::VectorXd eta = data.channel_weights().cwiseAbs();
    const double total = eta.sum();
    if (!(total > 0.0)) {
        throw Error(ErrorCode::AllZeroTargets, "every example has zero channel weight");
    }
    return eta / total;
}

}  // namespace srinit
