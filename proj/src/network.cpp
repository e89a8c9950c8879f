#include "srinit/network.hpp"

#include "srinit/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace srinit {

namespace {

Eigen::MatrixXd sigmoid_matrix(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

Eigen::MatrixXd apply_output(const Eigen::MatrixXd& o, OutputActivation act) {
    return act == OutputActivation::Sigmoid ? sigmoid_matrix(o) : o;
}

void require_shape(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

void write_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    for (Eigen::Index i = 0; i < row.size(); ++i) {
        if (i) os << ' ';
        os << row[i];
    }
}

}  // namespace

std::string_view to_string(OutputActivation act) {
    return act == OutputActivation::Sigmoid ? "sigmoid" : "linear";
}

std::string_view to_string(LossKind kind) {
    return kind == LossKind::CrossEntropy ? "cross_entropy" : "rmse";
}

OutputActivation parse_activation(std::string_view s) {
    if (s == "linear") return OutputActivation::Linear;
    if (s == "sigmoid") return OutputActivation::Sigmoid;
    throw Error(ErrorCode::InvalidConfig, "unknown output activation '" + std::string(s) + "'");
}

LossKind parse_loss(std::string_view s) {
    if (s == "rmse") return LossKind::Rmse;
    if (s == "cross_entropy" || s == "cross-entropy") return LossKind::CrossEntropy;
    throw Error(ErrorCode::InvalidConfig, "unknown loss '" + std::string(s) + "'");
}

SigmoidPairNetwork SigmoidPairNetwork::from_samples(const std::vector<HiddenUnitSample>& samples,
                                                    SigmoidPair pair, Eigen::Index d_out,
                                                    OutputActivation activation) {
    if (samples.empty()) throw Error(ErrorCode::ShapeMismatch, "network needs at least one unit");
    const Eigen::Index m = samples.front().a.size();
    const auto units = static_cast<Eigen::Index>(samples.size());
    SigmoidPairNetwork net{Eigen::MatrixXd(units, m), Eigen::VectorXd(units), pair,
                           Eigen::MatrixXd::Zero(units + 1, d_out), activation};
    for (Eigen::Index j = 0; j < units; ++j) {
        require_shape(samples[j].a.size() == m, "hidden samples differ in dimension");
        net.a.row(j) = samples[j].a.transpose();
        net.b[j] = samples[j].b;
    }
    return net;
}

std::vector<HiddenUnitSample> SigmoidPairNetwork::hidden() const {
    std::vector<HiddenUnitSample> out;
    out.reserve(static_cast<std::size_t>(units()));
    for (Eigen::Index j = 0; j < units(); ++j) out.push_back({a.row(j).transpose(), b[j]});
    return out;
}

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const SigmoidPair& pair, const Eigen::MatrixXd& inputs) {
    require_shape(a.cols() == inputs.cols(), "design matrix: input dimension mismatch");
    require_shape(a.rows() == b.size(), "design matrix: offsets do not match units");
    const Eigen::Index units = a.rows();
    Eigen::MatrixXd phi(inputs.rows(), units + 1);
    phi.leftCols(units) = (inputs * a.transpose()).rowwise() - b.transpose();
    phi.leftCols(units) = phi.leftCols(units).unaryExpr([&pair](double z) { return pair(z); });
    phi.col(units).setOnes();
    return phi;
}

Eigen::MatrixXd forward_batch(const SigmoidPairNetwork& net, const Eigen::MatrixXd& inputs) {
    require_shape(net.w.rows() == net.units() + 1, "output weights must have units+1 rows");
    return apply_output(design_matrix(net.a, net.b, net.pair, inputs) * net.w, net.activation);
}

Eigen::MatrixXd forward_batch(const SigmoidUnitNetwork& net, const Eigen::MatrixXd& inputs) {
    require_shape(net.u.cols() == inputs.cols(), "forward: input dimension mismatch");
    require_shape(net.v.rows() == net.units() + 1, "output weights must have units+1 rows");
    const Eigen::Index k = net.units();
    const Eigen::MatrixXd hidden =
        sigmoid_matrix((inputs * net.u.transpose()).rowwise() + net.c.transpose());
    Eigen::MatrixXd out = hidden * net.v.topRows(k);
    out.rowwise() += net.v.row(k);
    return apply_output(out, net.activation);
}

Eigen::VectorXd forward(const SigmoidPairNetwork& net,
                        const Eigen::Ref<const Eigen::VectorXd>& x) {
    return forward_batch(net, x.transpose()).row(0).transpose();
}

Eigen::VectorXd forward(const SigmoidUnitNetwork& net,
                        const Eigen::Ref<const Eigen::VectorXd>& x) {
    return forward_batch(net, x.transpose()).row(0).transpose();
}

SigmoidUnitNetwork expand_pairs(const SigmoidPairNetwork& net) {
    const Eigen::Index pairs = net.units();
    const double h = net.pair.h();
    const double norm = net.pair.norm();
    SigmoidUnitNetwork out{Eigen::MatrixXd(2 * pairs, net.input_dim()),
                           Eigen::VectorXd(2 * pairs),
                           Eigen::MatrixXd(2 * pairs + 1, net.output_dim()), net.activation};
    for (Eigen::Index j = 0; j < pairs; ++j) {
        // sigma(a.x - b + h) and sigma(a.x - b - h)
        out.u.row(2 * j) = net.a.row(j);
        out.u.row(2 * j + 1) = net.a.row(j);
        out.c[2 * j] = -(net.b[j] - h);
        out.c[2 * j + 1] = -(net.b[j] + h);
        out.v.row(2 * j) = net.w.row(j) / norm;
        out.v.row(2 * j + 1) = -net.w.row(j) / norm;
    }
    out.v.row(2 * pairs) = net.w.row(pairs);
    return out;
}

double loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target, LossKind kind) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "loss: prediction and target shapes differ");
    }
    if (kind == LossKind::Rmse) {
        return std::sqrt((pred - target).squaredNorm() / static_cast<double>(pred.size()));
    }
    double total = 0.0;
    for (Eigen::Index n = 0; n < pred.rows(); ++n) {
        for (Eigen::Index d = 0; d < pred.cols(); ++d) {
            const double p = std::clamp(pred(n, d), kProbClamp, 1.0 - kProbClamp);
            const double t = target(n, d);
            total -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
        }
    }
    return total / static_cast<double>(pred.rows());
}

LossGradient gradient(const SigmoidUnitNetwork& net, const Eigen::MatrixXd& inputs,
                      const Eigen::MatrixXd& targets, LossKind kind) {
    require_shape(inputs.rows() == targets.rows(), "gradient: batch sizes differ");
    require_shape(targets.cols() == net.output_dim(), "gradient: output dimension mismatch");
    require_shape(inputs.cols() == net.input_dim(), "gradient: input dimension mismatch");
    const Eigen::Index k = net.units();
    const auto n = static_cast<double>(inputs.rows());

    const Eigen::MatrixXd hidden =
        sigmoid_matrix((inputs * net.u.transpose()).rowwise() + net.c.transpose());
    Eigen::MatrixXd out = hidden * net.v.topRows(k);
    out.rowwise() += net.v.row(k);
    const Eigen::MatrixXd pred = apply_output(out, net.activation);

    LossGradient g;
    g.loss = loss(pred, targets, kind);

    // d loss / d pre-activation output
    Eigen::MatrixXd delta(pred.rows(), pred.cols());
    if (kind == LossKind::Rmse) {
        if (g.loss > 0.0) {
            delta = (pred - targets) / (static_cast<double>(pred.size()) * g.loss);
        } else {
            delta.setZero();
        }
        if (net.activation == OutputActivation::Sigmoid) {
            delta.array() *= pred.array() * (1.0 - pred.array());
        }
    } else {
        for (Eigen::Index i = 0; i < pred.rows(); ++i) {
            for (Eigen::Index d = 0; d < pred.cols(); ++d) {
                const double p = pred(i, d);
                const double t = targets(i, d);
                if (p <= kProbClamp || p >= 1.0 - kProbClamp) {
                    delta(i, d) = 0.0;
                } else if (net.activation == OutputActivation::Sigmoid) {
                    delta(i, d) = (p - t) / n;
                } else {
                    delta(i, d) = (-t / p + (1.0 - t) / (1.0 - p)) / n;
                }
            }
        }
    }

    g.v.resize(k + 1, net.output_dim());
    g.v.topRows(k) = hidden.transpose() * delta;
    g.v.row(k) = delta.colwise().sum();
    const Eigen::MatrixXd dz =
        ((delta * net.v.topRows(k).transpose()).array() * hidden.array() * (1.0 - hidden.array()))
            .matrix();
    g.u = dz.transpose() * inputs;
    g.c = dz.colwise().sum().transpose();
    return g;
}

Eigen::VectorXd pack(const SigmoidUnitNetwork& net) {
    Eigen::VectorXd flat(net.parameter_count());
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < net.u.rows(); ++i) {
        flat.segment(pos, net.u.cols()) = net.u.row(i).transpose();
        pos += net.u.cols();
    }
    flat.segment(pos, net.c.size()) = net.c;
    pos += net.c.size();
    for (Eigen::Index i = 0; i < net.v.rows(); ++i) {
        flat.segment(pos, net.v.cols()) = net.v.row(i).transpose();
        pos += net.v.cols();
    }
    return flat;
}

void unpack(const Eigen::VectorXd& flat, SigmoidUnitNetwork& net) {
    require_shape(flat.size() == net.parameter_count(), "unpack: parameter count mismatch");
    Eigen::Index pos = 0;
    for (Eigen::Index i = 0; i < net.u.rows(); ++i) {
        net.u.row(i) = flat.segment(pos, net.u.cols()).transpose();
        pos += net.u.cols();
    }
    net.c = flat.segment(pos, net.c.size());
    pos += net.c.size();
    for (Eigen::Index i = 0; i < net.v.rows(); ++i) {
        net.v.row(i) = flat.segment(pos, net.v.cols()).transpose();
        pos += net.v.cols();
    }
}

Eigen::VectorXd pack(const LossGradient& g) {
    SigmoidUnitNetwork shape{g.u, g.c, g.v, OutputActivation::Linear};
    return pack(shape);
}

std::vector<int> decode(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& codebook) {
    require_shape(rows.cols() == codebook.cols(), "decode: code length mismatch");
    std::vector<int> out(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index n = 0; n < rows.rows(); ++n) {
        Eigen::Index best = 0;
        (codebook.rowwise() - rows.row(n)).rowwise().squaredNorm().minCoeff(&best);
        out[static_cast<std::size_t>(n)] = static_cast<int>(best);
    }
    return out;
}

double classification_error(const Eigen::MatrixXd& pred, const std::vector<int>& labels,
                            const Eigen::MatrixXd& codebook) {
    require_shape(static_cast<std::size_t>(pred.rows()) == labels.size(),
                  "classification_error: label count mismatch");
    if (labels.empty()) return 0.0;
    const std::vector<int> guess = decode(pred, codebook);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) wrong += guess[i] != labels[i];
    return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double classification_error(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& targets,
                            const Eigen::MatrixXd& codebook) {
    return classification_error(pred, decode(targets, codebook), codebook);
}

void write_trace_csv(std::ostream& os, const TrainTrace& trace) {
    const auto old_precision = os.precision(10);
    os << "iter,loss,train_error,test_error,seconds\n";
    auto field = [&os](double v) {
        if (!std::isnan(v)) os << v;
    };
    for (const auto& p : trace) {
        os << p.iter << ',';
        field(p.loss);
        os << ',';
        field(p.train_error);
        os << ',';
        field(p.test_error);
        os << ',';
        field(p.seconds);
        os << '\n';
    }
    os.precision(old_precision);
}

void write_model(std::ostream& os, const SigmoidPairNetwork& net) {
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << net.input_dim() << ' ' << net.units() << ' ' << net.output_dim() << ' ' << net.pair.h()
       << ' ' << to_string(net.activation) << '\n';
    for (Eigen::Index j = 0; j < net.units(); ++j) {
        write_row(os, net.a.row(j));
        os << ' ' << net.b[j] << '\n';
    }
    for (Eigen::Index j = 0; j < net.w.rows(); ++j) {
        write_row(os, net.w.row(j));
        os << '\n';
    }
    os.precision(old_precision);
}

void write_model(std::ostream& os, const SigmoidUnitNetwork& net) {
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    os << net.input_dim() << ' ' << net.units() << ' ' << net.output_dim() << " 0 "
       << to_string(net.activation) << '\n';
    for (Eigen::Index j = 0; j < net.units(); ++j) {
        write_row(os, net.u.row(j));
        os << ' ' << net.c[j] << '\n';
    }
    for (Eigen::Index j = 0; j < net.v.rows(); ++j) {
        write_row(os, net.v.row(j));
        os << '\n';
    }
    os.precision(old_precision);
}

std::variant<SigmoidPairNetwork, SigmoidUnitNetwork> read_model(std::istream& is) {
    Eigen::Index m = 0, units = 0, d_out = 0;
    double h = 0.0;
    std::string act;
    if (!(is >> m >> units >> d_out >> h >> act) || m < 1 || units < 1 || d_out < 1 || h < 0.0) {
        throw Error(ErrorCode::Io, "malformed model header");
    }
    Eigen::MatrixXd weights(units, m);
    Eigen::VectorXd offsets(units);
    Eigen::MatrixXd out(units + 1, d_out);
    auto read = [&is](double& v) {
        if (!(is >> v)) throw Error(ErrorCode::TruncatedFile, "model file ended early");
    };
    for (Eigen::Index j = 0; j < units; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) read(weights(j, i));
        read(offsets[j]);
    }
    for (Eigen::Index j = 0; j <= units; ++j) {
        for (Eigen::Index d = 0; d < d_out; ++d) read(out(j, d));
    }
    const OutputActivation activation = parse_activation(act);
    if (h > 0.0) {
        return SigmoidPairNetwork{std::move(weights), std::move(offsets), SigmoidPair(h),
                                  std::move(out), activation};
    }
    return SigmoidUnitNetwork{std::move(weights), std::move(offsets), std::move(out), activation};
}

}  // namespace srinit
