#include "xpl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>

#include "xpl/csv.hpp"
#include "xpl/rng.hpp"

namespace xpl {

Dataset synth_blobs(std::size_t num_classes, std::size_t m, std::size_t per_class, double spread,
                    std::uint64_t seed) {
  if (num_classes == 0 || m == 0 || per_class == 0) throw DomainError("blob sizes must be positive");
  if (spread < 0.0) throw DomainError("spread must be non-negative");
  const CounterRng root(seed);
  const CounterRng centers_rng = root.derive(0);
  const CounterRng points_rng = root.derive(1);
  Matrix centers(num_classes, m);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t j = 0; j < m; ++j) centers(c, j) = centers_rng.normal(c * m + j);
    const double n = centers.row(c).norm();
    if (n > 0.0) centers.row(c) /= n;
  }
  Dataset ds;
  ds.num_classes = static_cast<int>(num_classes);
  ds.inputs.resize(num_classes * per_class, m);
  ds.labels.resize(num_classes * per_class);
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t p = 0; p < per_class; ++p) {
      const std::size_t r = c * per_class + p;
      ds.labels[r] = static_cast<int>(c);
      for (std::size_t j = 0; j < m; ++j)
        ds.inputs(r, j) = centers(c, j) + (spread > 0.0 ? spread * points_rng.normal(r * m + j) : 0.0);
    }
  ds.feature_mean = Vector::Zero(m);
  ds.feature_scale = Vector::Ones(m);
  return ds;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DomainError("test_fraction must be in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ds.size())));
  if (n_test == 0 || n_test >= ds.size()) throw DomainError("split leaves an empty side");
  auto take = [&](std::size_t from, std::size_t to) {
    Dataset d;
    d.num_classes = ds.num_classes;
    d.feature_mean = ds.feature_mean;
    d.feature_scale = ds.feature_scale;
    d.inputs.resize(static_cast<Eigen::Index>(to - from), ds.inputs.cols());
    for (std::size_t i = from; i < to; ++i) {
      d.inputs.row(static_cast<Eigen::Index>(i - from)) = ds.inputs.row(static_cast<Eigen::Index>(order[i]));
      d.labels.push_back(ds.labels[order[i]]);
    }
    return d;
  };
  return {take(n_test, ds.size()), take(0, n_test)};
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off, const char* what) {
  if (b.size() < off + 4) throw IdxTruncatedError(std::string(what) + ": header truncated");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void dump(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace

Dataset decode_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels,
                   std::optional<std::size_t> limit) {
  const std::uint32_t im = read_be32(images, 0, "images");
  if (im != kImagesMagic) throw IdxBadMagicError("images: bad magic number");
  const std::uint32_t lm = read_be32(labels, 0, "labels");
  if (lm != kLabelsMagic) throw IdxBadMagicError("labels: bad magic number");
  const std::size_t n = read_be32(images, 4, "images");
  const std::size_t rows = read_be32(images, 8, "images");
  const std::size_t cols = read_be32(images, 12, "images");
  const std::size_t nl = read_be32(labels, 4, "labels");
  if (n != nl) throw IdxCountMismatchError("images and labels disagree on the number of items");
  const std::size_t px = rows * cols;
  if (images.size() < 16 + n * px) throw IdxTruncatedError("images: pixel data truncated");
  if (labels.size() < 8 + n) throw IdxTruncatedError("labels: data truncated");
  const std::size_t keep = limit ? std::min(*limit, n) : n;
  Dataset ds;
  ds.inputs.resize(static_cast<Eigen::Index>(keep), static_cast<Eigen::Index>(px));
  ds.labels.resize(keep);
  int max_label = -1;
  for (std::size_t i = 0; i < keep; ++i) {
    for (std::size_t j = 0; j < px; ++j)
      ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = images[16 + i * px + j] / 255.0;
    ds.labels[i] = labels[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.num_classes = max_label + 1;
  ds.feature_mean = Vector::Zero(static_cast<Eigen::Index>(px));
  ds.feature_scale = Vector::Constant(static_cast<Eigen::Index>(px), 255.0);
  return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::optional<std::size_t> limit) {
  return decode_idx(slurp(images_path), slurp(labels_path), limit);
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& ds, std::size_t rows, std::size_t cols) {
  if (rows * cols != ds.dim()) throw DimensionError("rows x cols does not match the feature count");
  std::vector<std::uint8_t> b;
  put_be32(b, kImagesMagic);
  put_be32(b, static_cast<std::uint32_t>(ds.size()));
  put_be32(b, static_cast<std::uint32_t>(rows));
  put_be32(b, static_cast<std::uint32_t>(cols));
  for (Eigen::Index i = 0; i < ds.inputs.rows(); ++i)
    for (Eigen::Index j = 0; j < ds.inputs.cols(); ++j)
      b.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * ds.inputs(i, j)), 0L, 255L)));
  return b;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds) {
  std::vector<std::uint8_t> b;
  put_be32(b, kLabelsMagic);
  put_be32(b, static_cast<std::uint32_t>(ds.size()));
  for (int l : ds.labels) {
    if (l < 0 || l > 255) throw FormatError("IDX labels must fit in one byte");
    b.push_back(static_cast<std::uint8_t>(l));
  }
  return b;
}

void write_idx(const Dataset& ds, std::size_t rows, std::size_t cols, const std::string& images_path,
               const std::string& labels_path) {
  dump(images_path, encode_idx_images(ds, rows, cols));
  dump(labels_path, encode_idx_labels(ds));
}

Trajectory interpolation_trajectory(const Dataset& ds, std::size_t i, std::size_t j, TrajectoryKind kind) {
  if (i >= ds.size() || j >= ds.size()) throw DimensionError("datapoint index out of range");
  if (i == j) throw DegenerateTrajectoryError("interpolation needs two distinct datapoints");
  return make_trajectory(kind, ds.input(i), ds.input(j));
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
  os << "label";
  for (std::size_t j = 0; j < ds.dim(); ++j) os << ",f" << j;
  os << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    os << ds.labels[i];
    for (std::size_t j = 0; j < ds.dim(); ++j)
      os << ',' << fmt_double(ds.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    os << '\n';
  }
}

std::vector<Vector> gaussian_points(std::size_t s, std::size_t m, std::uint64_t seed) {
  const CounterRng rng = CounterRng(seed).derive(0x9a55ULL);
  std::vector<Vector> out(s, Vector(static_cast<Eigen::Index>(m)));
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < m; ++i) out[j](static_cast<Eigen::Index>(i)) = rng.normal(j * m + i);
  return out;
}

}  // namespace xpl
