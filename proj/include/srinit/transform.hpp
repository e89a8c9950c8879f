#pragma once

#include "srinit/dataset.hpp"
#include "srinit/kernels.hpp"

#include <Eigen/Dense>

namespace srinit {

/// Empirical integral transform of a dataset under a mollifier derivative:
/// T(a,b) = sum_n kernel(a.x_n - b) * w_n, with normalizer fixed to 1.
class EmpiricalTransform {
public:
    EmpiricalTransform(const LabeledDataset& data, MollifierKernel kernel);

    /// Builds the kernel of order kernel_order_for_dim(m).
    static EmpiricalTransform for_dataset(const LabeledDataset& data,
                                          int max_order = kDefaultMaxOrder);

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, double b) const;

    const MollifierKernel& kernel() const noexcept { return kernel_; }
    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
    const Eigen::VectorXd& channel_weights() const noexcept { return weights_; }
    double input_radius() const noexcept { return radius_; }
    Eigen::Index input_dim() const noexcept { return inputs_.cols(); }

private:
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd weights_;
    MollifierKernel kernel_;
    double radius_;
};

double transform_eval(const EmpiricalTransform& t, const Eigen::Ref<const Eigen::VectorXd>& a,
                      double b);

/// |b| <= M ||a|| + 1
bool support_contains(double M, const Eigen::Ref<const Eigen::VectorXd>& a, double b);

/// One hidden unit (a, b); the unit responds to a.x - b.
struct HiddenUnitSample {
    Eigen::VectorXd a;
    double b = 0.0;
};

struct AlphaBeta {
    Eigen::VectorXd alpha;
    double beta = 0.0;
};

/// a = alpha, b = (M ||alpha|| + 1) beta
HiddenUnitSample from_alpha_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha, double beta,
                             double M);
AlphaBeta to_alpha_beta(const Eigen::Ref<const Eigen::VectorXd>& a, double b, double M);

/// Mixing probabilities proportional to |w_n|.
Eigen::VectorXd mixture_weights(const LabeledDataset& data);

}  // namespace srinit
