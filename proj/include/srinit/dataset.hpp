#pragma once

#include <Eigen/Dense>

namespace srinit {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-coordinate affine map applied to raw inputs: x' = (raw - offset) * scale.
struct NormalizationSpec {
    Eigen::VectorXd offset;
    Eigen::VectorXd scale;

    bool empty() const { return offset.size() == 0; }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
};

/// N examples, one per row: inputs N x m, targets N x d_out.
class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(Eigen::MatrixXd inputs, Eigen::MatrixXd targets,
                   NormalizationSpec normalization = {});

    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
    const Eigen::MatrixXd& targets() const noexcept { return targets_; }
    const NormalizationSpec& normalization() const noexcept { return normalization_; }

    Eigen::Index size() const noexcept { return inputs_.rows(); }
    Eigen::Index input_dim() const noexcept { return inputs_.cols(); }
    Eigen::Index output_dim() const noexcept { return targets_.cols(); }

    /// Largest Euclidean norm over the stored inputs.
    double input_radius() const noexcept { return radius_; }

    /// Row-major copy of the inputs, so per-example access is contiguous.
    const RowMatrixXd& input_rows() const noexcept { return rows_; }
    /// Euclidean norm of each input row.
    const Eigen::VectorXd& input_norms() const noexcept { return norms_; }

    /// Per-example weight used by the transform: the signed target for scalar
    /// outputs, the L1 norm of the target row otherwise.
    Eigen::VectorXd channel_weights() const;

private:
    Eigen::MatrixXd inputs_;
    Eigen::MatrixXd targets_;
    NormalizationSpec normalization_;
    RowMatrixXd rows_;
    Eigen::VectorXd norms_;
    double radius_ = 0.0;
};

}  // namespace srinit
