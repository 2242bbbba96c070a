#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "xpl/netcore.hpp"

namespace xpl {

using BigInt = boost::multiprecision::cpp_int;

/// sum_{i=0}^{m} C(k, i)
BigInt region_bound(std::size_t k, std::size_t m);
/// r(k, m) = r(k-1, m) + r(k-1, m-1), r(0, m) = r(k, 0) = 1.
BigInt region_recurrence(std::size_t k, std::size_t m);

/// Per-layer product bound on activation patterns: region_bound(k, m)^n for
/// relu, region_bound(2k, m)^n for hard tanh.
BigInt activation_pattern_bound(std::size_t n, std::size_t k, std::size_t m, Activation activation);

struct UChainLink {
  std::size_t n = 0;
  std::size_t k = 0;
  BigInt value;
};

/// U(n, N/n, m) for every divisor n of N with N/n > e, ordered by n.
std::vector<UChainLink> u_chain(std::size_t total_neurons, std::size_t m,
                                Activation activation = Activation::relu);
/// True when the chain is strictly increasing.
bool u_chain_increasing(const std::vector<UChainLink>& chain);

struct Hyperplane {
  Vector a;
  double beta = 0.0;
};

struct Box {
  Vector lo;
  Vector hi;
};

/// Distinct sign vectors sign(a.x - beta) over uniform samples in the box.
std::size_t count_regions_sampling(const std::vector<Hyperplane>& planes, const Box& box,
                                   std::size_t num_samples, std::uint64_t seed);

using Point2 = Eigen::Vector2d;

struct Box2 {
  double x0 = -1.0, y0 = -1.0, x1 = 1.0, y1 = 1.0;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Which threshold produced an edge: layer -1 marks the box boundary.
struct EdgeTag {
  int layer = -1;
  int neuron = -1;
};

struct RegionCell {
  /// Counterclockwise, convex.
  std::vector<Point2> polygon;
  /// edges[i] runs from polygon[i] to polygon[i + 1].
  std::vector<EdgeTag> edges;
  ActivationPattern pattern;
  /// Network output on the cell: affine_A x + affine_b.
  Matrix affine_A;
  Vector affine_b;
  double area = 0.0;
  Point2 centroid = Point2::Zero();
};

struct DecomposeOptions {
  std::size_t max_cells = std::size_t{1} << 20;
  double sliver_area = 1e-12;
};

struct Decomposition {
  std::vector<RegionCell> cells;
  Box2 box;
  bool truncated = false;
  std::size_t slivers_dropped = 0;
};

/// Square centered at the origin with side 4 M, where M is the largest
/// coordinate of any pairwise intersection of first-layer threshold lines
/// (or of any line's closest point to the origin when there are none).
Box2 auto_box(const Network& net);

/// Exact partition of a box in R^2 into the convex cells of constant
/// activation pattern, refined layer by layer. Cells are sorted by centroid.
Decomposition decompose_input_plane(const Network& net, const Box2& box,
                                    const DecomposeOptions& options = {});
Decomposition decompose_input_plane(const Network& net, const DecomposeOptions& options = {});

double polygon_area(const std::vector<Point2>& poly);
Point2 polygon_centroid(const std::vector<Point2>& poly);

struct RegionStyle {
  double width_px = 640.0;
  bool fill_cells = true;
  double stroke_width = 1.0;
};

/// Edges colored by the layer that introduced them: layer 1 black, 2 green,
/// 3 purple, further layers from a fixed palette; box edges grey.
std::string regions_svg(const std::vector<RegionCell>& cells, const Box2& box,
                        const RegionStyle& style = {});
void render_regions_svg(const std::vector<RegionCell>& cells, const Box2& box,
                        const RegionStyle& style, const std::string& path);

/// cell_id,area,pattern,depth_introduced_edges
void write_cells_csv(std::ostream& os, const std::vector<RegionCell>& cells);

}  // namespace xpl
