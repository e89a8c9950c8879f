#include "srinit/dataset.hpp"

#include "srinit/error.hpp"

namespace srinit {

Eigen::MatrixXd NormalizationSpec::apply(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != offset.size()) {
        throw Error(ErrorCode::ShapeMismatch, "normalization width does not match inputs");
    }
    return (raw.rowwise() - offset.transpose()).array().rowwise() * scale.transpose().array();
}

LabeledDataset::LabeledDataset(Eigen::MatrixXd inputs, Eigen::MatrixXd targets,
                               NormalizationSpec normalization)
    : inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      normalization_(std::move(normalization)) {
    if (inputs_.rows() < 1 || inputs_.cols() < 1 || targets_.cols() < 1) {
        throw Error(ErrorCode::ShapeMismatch, "dataset needs N >= 1, m >= 1, d_out >= 1");
    }
    if (inputs_.rows() != targets_.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "inputs and targets differ in row count");
    }
    if (!inputs_.allFinite() || !targets_.allFinite()) {
        throw Error(ErrorCode::NonFinite, "dataset contains non-finite values");
    }
    rows_ = inputs_;
    norms_ = rows_.rowwise().norm();
    radius_ = norms_.maxCoeff();
}

Eigen::VectorXd LabeledDataset::channel_weights() const {
    if (targets_.cols() == 1) return targets_.col(0);
    return targets_.cwiseAbs().rowwise().sum();
}

}  // namespace srinit
