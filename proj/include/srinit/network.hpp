#pragma once

#include "srinit/kernels.hpp"
#include "srinit/transform.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace srinit {

enum class OutputActivation { Linear, Sigmoid };
enum class LossKind { Rmse, CrossEntropy };

std::string_view to_string(OutputActivation act);
std::string_view to_string(LossKind kind);
OutputActivation parse_activation(std::string_view s);
LossKind parse_loss(std::string_view s);

/// g(x) = sum_j w_j phi(a_j.x - b_j) + w_0 with sigmoid-pair units.
///
/// Row j of `a` and entry j of `b` hold unit j. `w` is (J+1) x d_out; its last
/// row is the bias w_0, matching the ones column of design_matrix().
struct SigmoidPairNetwork {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    SigmoidPair pair;
    Eigen::MatrixXd w;
    OutputActivation activation = OutputActivation::Linear;

    Eigen::Index units() const { return a.rows(); }
    Eigen::Index input_dim() const { return a.cols(); }
    Eigen::Index output_dim() const { return w.cols(); }

    static SigmoidPairNetwork from_samples(const std::vector<HiddenUnitSample>& samples,
                                           SigmoidPair pair, Eigen::Index d_out,
                                           OutputActivation activation);
    std::vector<HiddenUnitSample> hidden() const;
};

/// Plain sigmoid units: hidden_k = sigma(u_k.x + c_k). `v` is (K+1) x d_out with
/// the bias in its last row.
struct SigmoidUnitNetwork {
    Eigen::MatrixXd u;
    Eigen::VectorXd c;
    Eigen::MatrixXd v;
    OutputActivation activation = OutputActivation::Linear;

    Eigen::Index units() const { return u.rows(); }
    Eigen::Index input_dim() const { return u.cols(); }
    Eigen::Index output_dim() const { return v.cols(); }
    Eigen::Index parameter_count() const { return u.size() + c.size() + v.size(); }
};

/// N x (J+1): phi(a_j.x_n - b_j) in column j, ones in the last column.
Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const SigmoidPair& pair, const Eigen::MatrixXd& inputs);

Eigen::VectorXd forward(const SigmoidPairNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd forward(const SigmoidUnitNetwork& net, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Row-per-example batch forward.
Eigen::MatrixXd forward_batch(const SigmoidPairNetwork& net, const Eigen::MatrixXd& inputs);
Eigen::MatrixXd forward_batch(const SigmoidUnitNetwork& net, const Eigen::MatrixXd& inputs);

/// Each pair becomes the two sigmoid units whose difference it is.
SigmoidUnitNetwork expand_pairs(const SigmoidPairNetwork& net);

inline constexpr double kProbClamp = 1e-12;

/// RMSE over all entries, or mean-over-examples binary cross-entropy summed over outputs.
double loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, LossKind kind);

struct LossGradient {
    double loss = 0.0;
    Eigen::MatrixXd u;
    Eigen::VectorXd c;
    Eigen::MatrixXd v;
};

LossGradient gradient(const SigmoidUnitNetwork& net, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, LossKind kind);

/// Flat parameter vector [u (row-major), c, v (row-major)] and its inverse.
Eigen::VectorXd pack(const SigmoidUnitNetwork& net);
void unpack(const Eigen::VectorXd& flat, SigmoidUnitNetwork& net);
Eigen::VectorXd pack(const LossGradient& g);

/// Nearest code (Euclidean) for every row of `rows`.
std::vector<int> decode(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& codebook);

/// Fraction of examples whose nearest-code decoding of the prediction differs
/// from the label.
double classification_error(const Eigen::MatrixXd& pred, const std::vector<int>& labels,
                            const Eigen::MatrixXd& codebook);
/// Labels taken as the nearest codes of the target rows.
double classification_error(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets,
                            const Eigen::MatrixXd& codebook);

struct TracePoint {
    std::int64_t iter = 0;
    double loss = 0.0;
    double train_error = 0.0;  ///< NaN when not a classification problem
    double test_error = 0.0;   ///< NaN when no test metric is tracked
    double seconds = 0.0;
};

using TrainTrace = std::vector<TracePoint>;

void write_trace_csv(std::ostream& os, const TrainTrace& trace);

/// Text model format: header "m units d_out h activation" (h = 0 marks plain
/// sigmoid units), one line per hidden unit with its weights then its offset,
/// then units+1 output rows, the last being the bias.
void write_model(std::ostream& os, const SigmoidPairNetwork& net);
void write_model(std::ostream& os, const SigmoidUnitNetwork& net);
std::variant<SigmoidPairNetwork, SigmoidUnitNetwork> read_model(std::istream& is);

}  // namespace srinit
