#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xpl/errors.hpp"
#include "xpl/netcore.hpp"
#include "xpl/trajectory.hpp"

namespace xpl {

struct Dataset {
  Matrix inputs;  // N x m, one row per example
  std::vector<int> labels;
  int num_classes = 0;
  /// Per-feature normalization applied on load: x = (raw - mean) / scale.
  Vector feature_mean;
  Vector feature_scale;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs.cols()); }
  Vector input(std::size_t i) const { return inputs.row(static_cast<Eigen::Index>(i)).transpose(); }
};

class IdxBadMagicError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IdxTruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class IdxCountMismatchError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Class centers uniform on the unit sphere in R^m, points Gaussian around
/// them with standard deviation spread. Rows are grouped by class.
Dataset synth_blobs(std::size_t num_classes, std::size_t m, std::size_t per_class, double spread,
                    std::uint64_t seed);

/// Seeded shuffle, then the first round(test_fraction N) rows become the test set.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

Dataset decode_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels,
                   std::optional<std::size_t> limit = std::nullopt);
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit = std::nullopt);

/// Pixels are written as round(255 x) clamped to [0, 255].
std::vector<std::uint8_t> encode_idx_images(const Dataset& ds, std::size_t rows, std::size_t cols);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds);
void write_idx(const Dataset& ds, std::size_t rows, std::size_t cols, const std::string& images_path,
               const std::string& labels_path);

/// s points drawn i.i.d. N(0, I_m).
std::vector<Vector> gaussian_points(std::size_t s, std::size_t m, std::uint64_t seed);

Trajectory interpolation_trajectory(const Dataset& ds, std::size_t i, std::size_t j, TrajectoryKind kind);

/// label,f0,f1,...
void write_dataset_csv(std::ostream& os, const Dataset& ds);

}  // namespace xpl
