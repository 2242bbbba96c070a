#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "xpl/data.hpp"
#include "xpl/errors.hpp"

using namespace xpl;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8), std::uint8_t(v)};
}

// Two 3x3 images with labels 7 and 2, written byte by byte.
struct Fixture {
  std::vector<std::uint8_t> images, labels;
  Fixture() {
    for (auto b : be32(0x803)) images.push_back(b);
    for (auto b : be32(2)) images.push_back(b);
    for (auto b : be32(3)) images.push_back(b);
    for (auto b : be32(3)) images.push_back(b);
    for (int i = 0; i < 18; ++i) images.push_back(static_cast<std::uint8_t>(i * 15));
    for (auto b : be32(0x801)) labels.push_back(b);
    for (auto b : be32(2)) labels.push_back(b);
    labels.push_back(7);
    labels.push_back(2);
  }
};

}  // namespace

TEST_SUITE("data") {

TEST_CASE("blob shapes and zero spread") {
  const Dataset ds = synth_blobs(3, 4, 10, 0.0, 5);
  CHECK(ds.size() == 30);
  CHECK(ds.dim() == 4);
  CHECK(ds.num_classes == 3);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(ds.labels[i] == static_cast<int>(i / 10));
    CHECK(ds.input(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ds.input(i) == ds.input(i / 10 * 10));
  }
}

TEST_CASE("blobs are deterministic from the seed") {
  const Dataset a = synth_blobs(4, 3, 20, 0.3, 11), b = synth_blobs(4, 3, 20, 0.3, 11);
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  CHECK(synth_blobs(4, 3, 20, 0.3, 12).inputs != a.inputs);
}

TEST_CASE("tight two-class blobs are linearly separable") {
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = synth_blobs(2, 2, 200, 0.01, seed);
    // Random centers can land on top of each other; separability needs a gap.
    if ((synth_blobs(2, 2, 1, 0.0, seed).input(0) - synth_blobs(2, 2, 1, 0.0, seed).input(1)).norm() < 0.2) continue;
    ++tested;
    // Least squares fit of +-1 targets on [x, 1].
    Matrix X(ds.size(), 3);
    Vector y(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      X.row(i) << ds.inputs(i, 0), ds.inputs(i, 1), 1.0;
      y(i) = ds.labels[i] == 1 ? 1.0 : -1.0;
    }
    const Vector w = X.colPivHouseholderQr().solve(y);
    const Vector pred = X * w;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) correct += (pred(i) > 0) == (y(i) > 0);
    CHECK(static_cast<double>(correct) / ds.size() >= 0.99);
  }
  CHECK(tested >= 15);
}

TEST_CASE("split is a seeded partition") {
  const Dataset ds = synth_blobs(3, 2, 50, 0.2, 1);
  const auto [train, test] = train_test_split(ds, 0.2, 9);
  CHECK(test.size() == 30);
  CHECK(train.size() == 120);
  CHECK(train.inputs == train_test_split(ds, 0.2, 9).first.inputs);
  CHECK_THROWS_AS(train_test_split(ds, 0.0, 1), DomainError);
}

TEST_CASE("IDX fixture decodes exactly") {
  const Fixture f;
  const Dataset ds = decode_idx(f.images, f.labels);
  CHECK(ds.inputs.rows() == 2);
  CHECK(ds.inputs.cols() == 9);
  for (int i = 0; i < 18; ++i) CHECK(ds.inputs(i / 9, i % 9) == (i * 15) / 255.0);
  CHECK(ds.labels == std::vector<int>{7, 2});
  CHECK(ds.num_classes == 8);
  CHECK(decode_idx(f.images, f.labels, 1).size() == 1);
}

TEST_CASE("IDX errors are distinct") {
  const Fixture f;
  auto bad = f.images;
  bad[3] = 0x02;
  CHECK_THROWS_AS(decode_idx(bad, f.labels), IdxBadMagicError);
  auto short_images = f.images;
  short_images.resize(short_images.size() - 1);
  CHECK_THROWS_AS(decode_idx(short_images, f.labels), IdxTruncatedError);
  CHECK_THROWS_AS(decode_idx(std::vector<std::uint8_t>(f.images.begin(), f.images.begin() + 6), f.labels),
                  IdxTruncatedError);
  auto labels3 = f.labels;
  labels3[7] = 3;
  labels3.push_back(1);
  CHECK_THROWS_AS(decode_idx(f.images, labels3), IdxCountMismatchError);
  CHECK_THROWS_AS(load_idx("/nonexistent/images", "/nonexistent/labels"), IoError);
}

TEST_CASE("IDX round trip reproduces bytes") {
  const Fixture f;
  const Dataset ds = decode_idx(f.images, f.labels);
  CHECK(encode_idx_images(ds, 3, 3) == f.images);
  CHECK(encode_idx_labels(ds) == f.labels);

  const auto dir = std::filesystem::temp_directory_path() / "xpl_idx_test";
  std::filesystem::create_directories(dir);
  const std::string ip = (dir / "img.idx").string(), lp = (dir / "lab.idx").string();
  write_idx(ds, 3, 3, ip, lp);
  const Dataset back = load_idx(ip, lp);
  CHECK(back.inputs == ds.inputs);
  CHECK(encode_idx_images(back, 3, 3) == f.images);
  std::filesystem::remove_all(dir);
}

TEST_CASE("interpolation trajectories") {
  const Dataset ds = synth_blobs(2, 3, 5, 0.1, 2);
  const auto line = interpolation_trajectory(ds, 1, 7, TrajectoryKind::line);
  CHECK(line.at(0.0) == ds.input(1));
  CHECK(line.at(1.0) == ds.input(7));
  const auto arc = interpolation_trajectory(ds, 1, 7, TrajectoryKind::circular_arc);
  CHECK(arc.at(0.0).isApprox(ds.input(1)));
  CHECK((arc.at(1.0) - ds.input(7)).norm() < 1e-14);
  CHECK_THROWS_AS(interpolation_trajectory(ds, 3, 3, TrajectoryKind::line), DegenerateTrajectoryError);
  CHECK_THROWS_AS(interpolation_trajectory(ds, 3, 99, TrajectoryKind::line), DimensionError);
}

TEST_CASE("dataset csv") {
  const Dataset ds = synth_blobs(2, 2, 1, 0.0, 0);
  std::ostringstream os;
  write_dataset_csv(os, ds);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "label,f0,f1");
  std::getline(in, row);
  CHECK(row.rfind("0,", 0) == 0);
  CHECK(std::stod(row.substr(2)) == ds.inputs(0, 0));
}

}  // TEST_SUITE
