#pragma once

#include "srinit/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace srinit {

/// Topologist's sine curve sin(2 pi / x) with f(0) = 0 on n equidistant points of [-1,1].
LabeledDataset gen_tsc(int n_points);
double tsc_value(double x);

/// sin(2 pi x) on n equidistant points of [-1,1].
LabeledDataset gen_sine(int n_points);

/// Inputs {0,1}^2, outputs (AND, OR, XOR).
LabeledDataset gen_boolean();

/// All 2^d binary codes; nearest-code decoding against it thresholds each bit at 1/2.
Eigen::MatrixXd binary_hypercube(int d);

struct IdxImages {
    std::int32_t rows = 0;
    std::int32_t cols = 0;
    /// One image per entry, rows*cols bytes each.
    std::vector<std::vector<std::uint8_t>> pixels;
};

struct IdxData {
    IdxImages images;
    std::vector<std::uint8_t> labels;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

IdxImages read_idx_images(std::istream& is);
std::vector<std::uint8_t> read_idx_labels(std::istream& is);
void write_idx_images(std::ostream& os, const IdxImages& images);
void write_idx_labels(std::ostream& os, const std::vector<std::uint8_t>& labels);

/// Reads both files; throws BadMagic, TruncatedFile or CountMismatch.
IdxData load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

enum class NormalizationPolicy { ScaleOnly, ScaleCenter };

struct NormalizationOptions {
    NormalizationPolicy policy = NormalizationPolicy::ScaleCenter;
    /// After scaling/centering, shrink globally so the largest training-row norm is 1.
    bool unit_radius = true;
};

/// Raw bytes as an N x (rows*cols) matrix of doubles in [0, 255].
Eigen::MatrixXd images_to_matrix(const IdxImages& images);

/// Fits the normalization on training inputs: bytes -> [0,1], optional per-coordinate
/// centering, optional global radius scaling.
NormalizationSpec fit_normalization(const Eigen::MatrixXd& raw, const NormalizationOptions& opts);

struct LabelCodebook {
    enum class Scheme { OneHot, RandomBinary } scheme = Scheme::OneHot;
    std::uint64_t seed = 0;
    /// One row per class.
    Eigen::MatrixXd codes;

    static LabelCodebook one_hot(int classes);
    /// Fair-coin bits; duplicate and constant codes are redrawn.
    static LabelCodebook random_binary(int classes, int bits, std::uint64_t seed);
};

Eigen::MatrixXd encode_labels(const std::vector<int>& labels, const LabelCodebook& codebook);

/// Seeded uniform choice of `count` distinct indices from [0, n), in draw order.
std::vector<Eigen::Index> choose_subset(Eigen::Index n, Eigen::Index count, std::uint64_t seed);

struct DigitsSplit {
    LabeledDataset train;
    LabeledDataset test;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
    LabelCodebook codebook;
};

struct DigitsOptions {
    Eigen::Index train_size = 2000;
    Eigen::Index test_size = 1000;
    NormalizationOptions normalization;
    LabelCodebook::Scheme coding = LabelCodebook::Scheme::OneHot;
    std::uint64_t code_seed = 0;
    std::uint64_t subset_seed = 0;
};

/// Subsamples, normalizes with training statistics, and encodes labels.
DigitsSplit prepare_digits(const IdxData& train, const IdxData& test, const DigitsOptions& opts);

/// Writes "x1,...,xm,y1,...,yd" rows with a header.
void write_dataset_csv(std::ostream& os, const LabeledDataset& data);

}  // namespace srinit
