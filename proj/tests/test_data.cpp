#include "srinit/data.hpp"
#include "srinit/error.hpp"
#include "srinit/network.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

using namespace srinit;
using Eigen::MatrixXd;

namespace {

std::optional<ErrorCode> code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// Two 2x2 images written byte by byte.
std::string two_image_fixture() {
    const unsigned char bytes[] = {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2,
                                   0, 255, 10, 20, 1, 2, 3, 4};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

std::string two_label_fixture() {
    const unsigned char bytes[] = {0, 0, 8, 1, 0, 0, 0, 2, 7, 3};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof bytes);
}

IdxData random_idx(int count, int side, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> px(0, 255), lab(0, 9);
    IdxData d;
    d.images.rows = side;
    d.images.cols = side;
    for (int i = 0; i < count; ++i) {
        std::vector<std::uint8_t> img(static_cast<std::size_t>(side * side));
        for (auto& p : img) p = static_cast<std::uint8_t>(px(rng));
        d.images.pixels.push_back(std::move(img));
        d.labels.push_back(static_cast<std::uint8_t>(lab(rng)));
    }
    return d;
}

}  // namespace

TEST_CASE("topologist's sine curve") {
    const LabeledDataset d = gen_tsc(201);
    CHECK(d.size() == 201);
    CHECK(d.input_dim() == 1);
    CHECK(d.inputs()(0, 0) == -1.0);
    CHECK(d.inputs()(200, 0) == 1.0);
    CHECK(d.inputs()(100, 0) == 0.0);
    CHECK(d.targets()(100, 0) == 0.0);
    CHECK(std::abs(d.targets()(200, 0)) < 1e-15);
    CHECK(d.inputs()(180, 0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(d.targets()(180, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tsc_value(0.0) == 0.0);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        CHECK(d.inputs()(i, 0) == -d.inputs()(200 - i, 0));
        CHECK(d.targets()(i, 0) == -d.targets()(200 - i, 0));
        if (i > 0) CHECK(d.inputs()(i, 0) > d.inputs()(i - 1, 0));
    }
    CHECK(d.input_radius() == 1.0);
    CHECK(code_of([] { gen_tsc(1); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("sine grid") {
    const LabeledDataset d = gen_sine(41);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        CHECK(d.targets()(i, 0) == doctest::Approx(std::sin(2 * std::numbers::pi * d.inputs()(i, 0))).scale(1e-15));
    }
}

TEST_CASE("boolean truth table") {
    const LabeledDataset d = gen_boolean();
    MatrixXd x(4, 2), y(4, 3);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    y << 0, 0, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0;
    CHECK(d.inputs() == x);
    CHECK(d.targets() == y);

    const MatrixXd cube = binary_hypercube(3);
    CHECK(cube.rows() == 8);
    std::set<std::vector<double>> rows;
    for (Eigen::Index r = 0; r < 8; ++r) rows.insert({cube(r, 0), cube(r, 1), cube(r, 2)});
    CHECK(rows.size() == 8);
    for (Eigen::Index r = 0; r < 4; ++r) {
        CHECK(decode(y.row(r), cube)[0] == std::distance(rows.begin(), rows.find({y(r, 0), y(r, 1), y(r, 2)})));
    }
}

TEST_CASE("IDX parsing of a hand-written fixture") {
    std::istringstream img(two_image_fixture());
    const IdxImages images = read_idx_images(img);
    CHECK(images.rows == 2);
    CHECK(images.cols == 2);
    REQUIRE(images.pixels.size() == 2);
    CHECK(images.pixels[0] == std::vector<std::uint8_t>{0, 255, 10, 20});
    CHECK(images.pixels[1] == std::vector<std::uint8_t>{1, 2, 3, 4});
    std::istringstream lab(two_label_fixture());
    CHECK(read_idx_labels(lab) == std::vector<std::uint8_t>{7, 3});

    const MatrixXd m = images_to_matrix(images);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 4);
    CHECK(m(0, 1) == 255.0);
    CHECK(m(1, 3) == 4.0);

    std::ostringstream out;
    write_idx_images(out, images);
    CHECK(out.str() == two_image_fixture());
    std::ostringstream out_lab;
    write_idx_labels(out_lab, {7, 3});
    CHECK(out_lab.str() == two_label_fixture());
}

TEST_CASE("IDX errors") {
    CHECK(code_of([] {
              std::istringstream s(two_label_fixture());
              read_idx_images(s);
          }) == ErrorCode::BadMagic);
    CHECK(code_of([] {
              std::istringstream s(two_image_fixture());
              read_idx_labels(s);
          }) == ErrorCode::BadMagic);
    CHECK(code_of([] {
              std::istringstream s(two_image_fixture().substr(0, 20));
              read_idx_images(s);
          }) == ErrorCode::TruncatedFile);
    CHECK(code_of([] {
              std::istringstream s(two_image_fixture().substr(0, 10));
              read_idx_images(s);
          }) == ErrorCode::TruncatedFile);
    CHECK(code_of([] {
              std::istringstream s(two_label_fixture().substr(0, 9));
              read_idx_labels(s);
          }) == ErrorCode::TruncatedFile);

    const auto dir = std::filesystem::temp_directory_path() / "srinit_test_idx";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "img", std::ios::binary) << two_image_fixture();
        const unsigned char three[] = {0, 0, 8, 1, 0, 0, 0, 3, 1, 2, 3};
        std::ofstream(dir / "lab", std::ios::binary).write(reinterpret_cast<const char*>(three), sizeof three);
    }
    CHECK(code_of([&] { load_idx(dir / "img", dir / "lab"); }) == ErrorCode::CountMismatch);
    CHECK(code_of([&] { load_idx(dir / "missing", dir / "lab"); }) == ErrorCode::Io);

    std::ofstream(dir / "lab", std::ios::binary) << two_label_fixture();
    const IdxData d = load_idx(dir / "img", dir / "lab");
    CHECK(d.labels == std::vector<std::uint8_t>{7, 3});
    std::filesystem::remove_all(dir);
}

TEST_CASE("IDX round trip") {
    const IdxData d = random_idx(17, 5, 3);
    std::stringstream s;
    write_idx_images(s, d.images);
    const IdxImages back = read_idx_images(s);
    CHECK(back.rows == 5);
    CHECK(back.pixels == d.images.pixels);
}

TEST_CASE("normalization") {
    SUBCASE("all-zero images stay zero under scale-only") {
        const MatrixXd raw = MatrixXd::Zero(4, 9);
        const NormalizationSpec fitted = fit_normalization(raw, {NormalizationPolicy::ScaleOnly, true});
        CHECK(fitted.apply(raw).isZero(0.0));
        CHECK(fitted.apply(raw).allFinite());
    }
    SUBCASE("scale-only without radius maps bytes to [0,1]") {
        const MatrixXd raw = images_to_matrix(random_idx(10, 4, 1).images);
        const MatrixXd x = fit_normalization(raw, {NormalizationPolicy::ScaleOnly, false}).apply(raw);
        CHECK(x.isApprox(raw / 255.0, 1e-15));
    }
    SUBCASE("centering gives zero training mean and unit radius") {
        const MatrixXd raw = images_to_matrix(random_idx(50, 4, 2).images);
        const NormalizationSpec fitted = fit_normalization(raw, {});
        const MatrixXd x = fitted.apply(raw);
        CHECK(x.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(x.rowwise().norm().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
        // A single global scale: ratios between coordinates survive.
        const MatrixXd centered = raw.rowwise() - raw.colwise().mean();
        CHECK((x - centered * (x(0, 0) / centered(0, 0))).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("test data reuses the training statistics") {
        const MatrixXd train = images_to_matrix(random_idx(30, 3, 4).images);
        const MatrixXd test = images_to_matrix(random_idx(5, 3, 5).images);
        const NormalizationSpec fitted = fit_normalization(train, {});
        const MatrixXd x = fitted.apply(test);
        for (Eigen::Index j = 0; j < test.cols(); ++j) {
            CHECK(x(0, j) == doctest::Approx((test(0, j) - fitted.offset[j]) * fitted.scale[j]));
        }
        CHECK(fitted.offset.isApprox(train.colwise().mean().transpose()));

        // Shifted copy of the training set keeps its shift after normalization.
        const MatrixXd shifted = train.array() + 7.0;
        const MatrixXd xs = fitted.apply(shifted);
        const MatrixXd xt = fitted.apply(train);
        CHECK(((xs - xt).array() - 7.0 * fitted.scale[0]).abs().maxCoeff() < 1e-12);
        CHECK(xs.colwise().mean().minCoeff() > 0.0);
    }
    CHECK(code_of([] { fit_normalization(MatrixXd(0, 3), {}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("label codebooks") {
    const LabelCodebook oh = LabelCodebook::one_hot(10);
    CHECK(oh.codes == MatrixXd::Identity(10, 10));
    const MatrixXd y = encode_labels({3, 0, 9}, oh);
    CHECK(y(0, 3) == 1.0);
    CHECK(y.rowwise().sum() == Eigen::VectorXd::Ones(3));
    CHECK(decode(y, oh.codes) == std::vector<int>{3, 0, 9});
    CHECK(code_of([&] { encode_labels({10}, oh); }) == ErrorCode::InvalidConfig);

    const LabelCodebook r1 = LabelCodebook::random_binary(10, 10, 42);
    const LabelCodebook r2 = LabelCodebook::random_binary(10, 10, 42);
    CHECK(r1.codes == r2.codes);
    CHECK(r1.codes != LabelCodebook::random_binary(10, 10, 43).codes);
    std::set<std::vector<double>> seen;
    for (Eigen::Index c = 0; c < 10; ++c) {
        const auto row = r1.codes.row(c);
        CHECK(row.sum() > 0.0);
        CHECK(row.sum() < 10.0);
        CHECK(((row.array() == 0.0) || (row.array() == 1.0)).all());
        std::vector<double> v(10);
        for (int b = 0; b < 10; ++b) v[b] = row(b);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
    std::vector<int> labels(10);
    for (int c = 0; c < 10; ++c) labels[c] = c;
    CHECK(decode(encode_labels(labels, r1), r1.codes) == labels);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const LabelCodebook book = LabelCodebook::random_binary(10, 10, seed);
        CHECK(book.codes.cols() == 10);
        std::set<std::vector<double>> codes;
        for (Eigen::Index c = 0; c < 10; ++c) codes.insert(std::vector<double>(book.codes.row(c).begin(), book.codes.row(c).end()));
        CHECK(codes.size() == 10);
        CHECK(decode(encode_labels(labels, book), book.codes) == labels);
    }
    CHECK(code_of([] { LabelCodebook::random_binary(7, 3, 0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("subset selection") {
    const auto a = choose_subset(100, 20, 9);
    CHECK(a.size() == 20);
    CHECK(a == choose_subset(100, 20, 9));
    CHECK(a != choose_subset(100, 20, 10));
    std::set<Eigen::Index> distinct(a.begin(), a.end());
    CHECK(distinct.size() == 20);
    CHECK(*distinct.begin() >= 0);
    CHECK(*distinct.rbegin() < 100);
    auto all = choose_subset(10, 10, 1);
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 10; ++i) CHECK(all[i] == i);
    CHECK(code_of([] { choose_subset(5, 6, 0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("digits preparation") {
    const IdxData train = random_idx(60, 4, 11);
    const IdxData test = random_idx(20, 4, 12);
    DigitsOptions opts;
    opts.train_size = 40;
    opts.test_size = 50;
    opts.subset_seed = 3;
    const DigitsSplit s = prepare_digits(train, test, opts);
    CHECK(s.train.size() == 40);
    CHECK(s.test.size() == 20);  // capped at the pool
    CHECK(s.train.input_dim() == 16);
    CHECK(s.train.output_dim() == 10);
    // Radius is recomputed from the normalized inputs.
    CHECK(s.train.input_radius() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.train.inputs().colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(decode(s.train.targets(), s.codebook.codes) == s.train_labels);
    CHECK(decode(s.test.targets(), s.codebook.codes) == s.test_labels);
    CHECK(s.test.normalization().offset == s.train.normalization().offset);

    opts.coding = LabelCodebook::Scheme::RandomBinary;
    opts.code_seed = 5;
    const DigitsSplit r = prepare_digits(train, test, opts);
    CHECK(r.codebook.codes == LabelCodebook::random_binary(10, 10, 5).codes);
    CHECK(r.train_labels == s.train_labels);
}

TEST_CASE("dataset CSV") {
    std::ostringstream os;
    write_dataset_csv(os, gen_boolean());
    CHECK(os.str() == "x1,x2,y1,y2,y3\n0,0,0,0,0\n0,1,0,1,1\n1,0,0,1,1\n1,1,1,1,0\n");
}

TEST_CASE("row-major input copy") {
    const LabeledDataset d = gen_boolean();
    CHECK(d.input_rows() == d.inputs());
    for (Eigen::Index n = 0; n < d.size(); ++n) CHECK(d.input_norms()[n] == d.inputs().row(n).norm());
    CHECK(d.input_radius() == d.input_norms().maxCoeff());
}
