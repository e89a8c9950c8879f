#include "srinit/data.hpp"

#include "srinit/error.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

namespace srinit {

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 4)) {
        throw Error(ErrorCode::TruncatedFile, std::string("IDX header truncated at ") + what);
    }
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
           std::uint32_t{b[3]};
}

void write_be32(std::ostream& os, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                                static_cast<char>(v >> 8), static_cast<char>(v)};
    os.write(b.data(), 4);
}

void check_magic(std::uint32_t got, std::uint32_t want) {
    if (got != want) {
        throw Error(ErrorCode::BadMagic, "unexpected IDX magic " + std::to_string(got) +
                                             " (want " + std::to_string(want) + ")");
    }
}

}  // namespace

double tsc_value(double x) { return x == 0.0 ? 0.0 : std::sin(2.0 * std::numbers::pi / x); }

LabeledDataset gen_tsc(int n_points) {
    if (n_points < 2) throw Error(ErrorCode::InvalidConfig, "TSC grid needs at least two points");
    Eigen::MatrixXd x(n_points, 1);
    Eigen::MatrixXd y(n_points, 1);
    for (int i = 0; i < n_points; ++i) {
        // symmetric construction keeps the grid exactly mirror-symmetric
        const int mirror = n_points - 1 - i;
        const double v = static_cast<double>(i - mirror) / (n_points - 1);
        x(i, 0) = v;
        y(i, 0) = tsc_value(v);
    }
    return {std::move(x), std::move(y)};
}

LabeledDataset gen_sine(int n_points) {
    LabeledDataset grid = gen_tsc(n_points);
    Eigen::MatrixXd y = (2.0 * std::numbers::pi * grid.inputs().array()).sin().matrix();
    return {grid.inputs(), std::move(y)};
}

LabeledDataset gen_boolean() {
    Eigen::MatrixXd x(4, 2);
    Eigen::MatrixXd y(4, 3);
    int row = 0;
    for (int p = 0; p <= 1; ++p) {
        for (int q = 0; q <= 1; ++q) {
            x.row(row) << p, q;
            y.row(row) << (p & q), (p | q), (p ^ q);
            ++row;
        }
    }
    return {std::move(x), std::move(y)};
}

Eigen::MatrixXd binary_hypercube(int d) {
    if (d < 1 || d > 20) throw Error(ErrorCode::InvalidConfig, "hypercube dimension out of range");
    const int count = 1 << d;
    Eigen::MatrixXd codes(count, d);
    for (int c = 0; c < count; ++c) {
        for (int bit = 0; bit < d; ++bit) codes(c, bit) = (c >> (d - 1 - bit)) & 1;
    }
    return codes;
}

IdxImages read_idx_images(std::istream& is) {
    check_magic(read_be32(is, "magic"), kIdxImageMagic);
    const std::uint32_t count = read_be32(is, "count");
    IdxImages out;
    out.rows = static_cast<std::int32_t>(read_be32(is, "rows"));
    out.cols = static_cast<std::int32_t>(read_be32(is, "cols"));
    const std::size_t size = static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols);
    out.pixels.resize(count);
    for (auto& img : out.pixels) {
        img.resize(size);
        if (!is.read(reinterpret_cast<char*>(img.data()), static_cast<std::streamsize>(size))) {
            throw Error(ErrorCode::TruncatedFile, "IDX image payload truncated");
        }
    }
    return out;
}

std::vector<std::uint8_t> read_idx_labels(std::istream& is) {
    check_magic(read_be32(is, "magic"), kIdxLabelMagic);
    const std::uint32_t count = read_be32(is, "count");
    std::vector<std::uint8_t> labels(count);
    if (!is.read(reinterpret_cast<char*>(labels.data()), static_cast<std::streamsize>(count))) {
        throw Error(ErrorCode::TruncatedFile, "IDX label payload truncated");
    }
    return labels;
}

void write_idx_images(std::ostream& os, const IdxImages& images) {
    write_be32(os, kIdxImageMagic);
    write_be32(os, static_cast<std::uint32_t>(images.pixels.size()));
    write_be32(os, static_cast<std::uint32_t>(images.rows));
    write_be32(os, static_cast<std::uint32_t>(images.cols));
    for (const auto& img : images.pixels) {
        os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    }
}

void write_idx_labels(std::ostream& os, const std::vector<std::uint8_t>& labels) {
    write_be32(os, kIdxLabelMagic);
    write_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

IdxData load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw Error(ErrorCode::Io, "cannot open " + images_path.string());
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw Error(ErrorCode::Io, "cannot open " + labels_path.string());
    IdxData out{read_idx_images(img), read_idx_labels(lab)};
    if (out.images.pixels.size() != out.labels.size()) {
        throw Error(ErrorCode::CountMismatch, "image and label counts differ");
    }
    return out;
}

Eigen::MatrixXd images_to_matrix(const IdxImages& images) {
    const auto n = static_cast<Eigen::Index>(images.pixels.size());
    const Eigen::Index width = static_cast<Eigen::Index>(images.rows) * images.cols;
    Eigen::MatrixXd out(n, width);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < width; ++j) out(i, j) = images.pixels[i][j];
    }
    return out;
}

NormalizationSpec fit_normalization(const Eigen::MatrixXd& raw, const NormalizationOptions& opts) {
    if (raw.rows() < 1 || raw.cols() < 1) {
        throw Error(ErrorCode::ShapeMismatch, "cannot normalize an empty input set");
    }
    NormalizationSpec fitted;
    fitted.offset = Eigen::VectorXd::Zero(raw.cols());
    if (opts.policy == NormalizationPolicy::ScaleCenter) {
        fitted.offset = raw.colwise().mean().transpose();
    }
    double scale = 1.0 / 255.0;
    if (opts.unit_radius) {
        const double radius = ((raw.rowwise() - fitted.offset.transpose()) * scale).rowwise().norm().maxCoeff();
        if (radius > 0.0) scale /= radius;
    }
    fitted.scale = Eigen::VectorXd::Constant(raw.cols(), scale);
    return fitted;
}

LabelCodebook LabelCodebook::one_hot(int classes) {
    if (classes < 1) throw Error(ErrorCode::InvalidConfig, "codebook needs at least one class");
    return {Scheme::OneHot, 0, Eigen::MatrixXd::Identity(classes, classes)};
}

LabelCodebook LabelCodebook::random_binary(int classes, int bits, std::uint64_t seed) {
    if (classes < 1 || bits < 1 || bits > 62 ||
        static_cast<double>(classes) > std::ldexp(1.0, bits) - 2.0) {
        throw Error(ErrorCode::InvalidConfig, "not enough distinct non-constant codes");
    }
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::set<std::uint64_t> seen;
    const std::uint64_t all_ones = (std::uint64_t{1} << bits) - 1;
    LabelCodebook book{Scheme::RandomBinary, seed, Eigen::MatrixXd(classes, bits)};
    for (int c = 0; c < classes; ++c) {
        while (true) {
            std::uint64_t code = 0;
            for (int b = 0; b < bits; ++b) code = (code << 1) | (coin(rng) ? 1u : 0u);
            if (code == 0 || code == all_ones || !seen.insert(code).second) continue;
            for (int b = 0; b < bits; ++b) book.codes(c, b) = (code >> (bits - 1 - b)) & 1u;
            break;
        }
    }
    return book;
}

Eigen::MatrixXd encode_labels(const std::vector<int>& labels, const LabelCodebook& codebook) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(labels.size()), codebook.codes.cols());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= codebook.codes.rows()) {
            throw Error(ErrorCode::InvalidConfig, "label outside codebook range");
        }
        out.row(static_cast<Eigen::Index>(i)) = codebook.codes.row(labels[i]);
    }
    return out;
}

std::vector<Eigen::Index> choose_subset(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
    if (count > n || count < 0) throw Error(ErrorCode::InvalidConfig, "subset larger than the pool");
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates
    for (Eigen::Index i = 0; i < count; ++i) {
        std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

DigitsSplit prepare_digits(const IdxData& train, const IdxData& test, const DigitsOptions& opts) {
    auto take = [](const IdxData& src, Eigen::Index count, std::uint64_t seed,
                   std::vector<int>& labels) {
        const auto pool = static_cast<Eigen::Index>(src.labels.size());
        const auto idx = choose_subset(pool, std::min(count, pool), seed);
        const Eigen::MatrixXd all = images_to_matrix(src.images);
        Eigen::MatrixXd raw(static_cast<Eigen::Index>(idx.size()), all.cols());
        labels.clear();
        for (std::size_t i = 0; i < idx.size(); ++i) {
            raw.row(static_cast<Eigen::Index>(i)) = all.row(idx[i]);
            labels.push_back(src.labels[static_cast<std::size_t>(idx[i])]);
        }
        return raw;
    };

    DigitsSplit split;
    const Eigen::MatrixXd train_raw = take(train, opts.train_size, opts.subset_seed, split.train_labels);
    const Eigen::MatrixXd test_raw = take(test, opts.test_size, opts.subset_seed + 1, split.test_labels);
    int classes = 10;
    for (int l : split.train_labels) classes = std::max(classes, l + 1);
    split.codebook = opts.coding == LabelCodebook::Scheme::OneHot
                         ? LabelCodebook::one_hot(classes)
                         : LabelCodebook::random_binary(classes, classes, opts.code_seed);
    const NormalizationSpec fitted = fit_normalization(train_raw, opts.normalization);
    split.train = LabeledDataset(fitted.apply(train_raw), encode_labels(split.train_labels, split.codebook), fitted);
    split.test = LabeledDataset(fitted.apply(test_raw), encode_labels(split.test_labels, split.codebook), fitted);
    return split;
}

void write_dataset_csv(std::ostream& os, const LabeledDataset& data) {
    const auto old_precision = os.precision(17);
    for (Eigen::Index i = 0; i < data.input_dim(); ++i) os << 'x' << i + 1 << ',';
    for (Eigen::Index d = 0; d < data.output_dim(); ++d) {
        os << 'y' << d + 1 << (d + 1 < data.output_dim() ? ',' : '\n');
    }
    for (Eigen::Index n = 0; n < data.size(); ++n) {
        for (Eigen::Index i = 0; i < data.input_dim(); ++i) os << data.inputs()(n, i) << ',';
        for (Eigen::Index d = 0; d < data.output_dim(); ++d) {
            os << data.targets()(n, d) << (d + 1 < data.output_dim() ? ',' : '\n');
        }
    }
    os.precision(old_precision);
}

}  // namespace srinit
