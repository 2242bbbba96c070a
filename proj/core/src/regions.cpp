#include "xpl/regions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "xpl/errors.hpp"
#include "xpl/parallel.hpp"
#include "xpl/rng.hpp"

namespace xpl {

BigInt region_bound(std::size_t k, std::size_t m) {
  BigInt sum = 0, c = 1;
  for (std::size_t i = 0; i <= m && i <= k; ++i) {
    sum += c;
    c = c * (k - i) / (i + 1);
  }
  return sum;
}

BigInt region_recurrence(std::size_t k, std::size_t m) {
  // row[j] = r(i, j) for the current i
  std::vector<BigInt> row(m + 1, 1);
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = m; j >= 1; --j) row[j] += row[j - 1];
  return row[m];
}

BigInt activation_pattern_bound(std::size_t n, std::size_t k, std::size_t m, Activation activation) {
  if (n == 0 || k == 0 || m == 0) throw DomainError("pattern bound needs n, k, m >= 1");
  if (!has_patterns(activation))
    throw UnsupportedActivationError("pattern bound needs relu or hard_tanh");
  const BigInt per_layer = region_bound(activation == Activation::hard_tanh ? 2 * k : k, m);
  return boost::multiprecision::pow(per_layer, static_cast<unsigned>(n));
}

std::vector<UChainLink> u_chain(std::size_t total_neurons, std::size_t m, Activation activation) {
  std::vector<UChainLink> chain;
  for (std::size_t n = 1; n <= total_neurons; ++n) {
    if (total_neurons % n) continue;
    const std::size_t k = total_neurons / n;
    if (static_cast<double>(k) <= std::numbers::e) continue;
    chain.push_back({n, k, activation_pattern_bound(n, k, m, activation)});
  }
  return chain;
}

bool u_chain_increasing(const std::vector<UChainLink>& chain) {
  for (std::size_t i = 1; i < chain.size(); ++i)
    if (!(chain[i - 1].value < chain[i].value)) return false;
  return true;
}

std::size_t count_regions_sampling(const std::vector<Hyperplane>& planes, const Box& box,
                                   std::size_t num_samples, std::uint64_t seed) {
  const auto m = box.lo.size();
  if (box.hi.size() != m) throw DimensionError("box corners differ in dimension");
  for (const auto& p : planes) {
    if (p.a.size() != m) throw DimensionError("hyperplane dimension does not match the box");
    if (p.a.isZero(0.0)) throw DomainError("hyperplane normal is zero");
  }
  const CounterRng rng(seed);
  std::unordered_set<std::string> seen;
  std::string key(planes.size(), '0');
  Vector x(m);
  for (std::size_t s = 0; s < num_samples; ++s) {
    for (Eigen::Index j = 0; j < m; ++j)
      x(j) = box.lo(j) + (box.hi(j) - box.lo(j)) * rng.uniform(s * static_cast<std::uint64_t>(m) + j);
    for (std::size_t i = 0; i < planes.size(); ++i)
      key[i] = planes[i].a.dot(x) - planes[i].beta > 0.0 ? '+' : '-';
    seen.insert(key);
  }
  return seen.size();
}

double polygon_area(const std::vector<Point2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

Point2 polygon_centroid(const std::vector<Point2>& poly) {
  double a = 0.0;
  Point2 c = Point2::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    const double w = p.x() * q.y() - q.x() * p.y();
    a += w;
    c += w * (p + q);
  }
  if (a == 0.0) {
    for (const auto& p : poly) c += p;
    return poly.empty() ? c : Point2(c / static_cast<double>(poly.size()));
  }
  return c / (3.0 * a);
}

namespace {

struct Piece {
  std::vector<Point2> poly;
  std::vector<EdgeTag> edges;
  std::vector<std::int8_t> codes;
  // Input map of the next layer: z = A x + c.
  Matrix A;
  Vector c;
};

struct Split {
  Piece pos, neg;
};

/// Splits a convex polygon by n.x + off = 0. Vertices within eps of the line
/// belong to both sides.
void clip_side(const std::vector<Point2>& poly, const std::vector<EdgeTag>& edges,
               const std::vector<double>& f, int sign, EdgeTag tag, std::vector<Point2>& out_poly,
               std::vector<EdgeTag>& out_edges) {
  out_poly.clear();
  out_edges.clear();
  const std::size_t n = poly.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + 1) % n;
    const double fj = sign * f[j], fk = sign * f[k];
    if (fj >= 0.0) {
      out_poly.push_back(poly[j]);
      out_edges.push_back(fk < 0.0 ? (fj > 0.0 ? edges[j] : tag) : edges[j]);
    }
    if ((fj > 0.0 && fk < 0.0) || (fj < 0.0 && fk > 0.0)) {
      const double s = fj / (fj - fk);
      out_poly.push_back(poly[j] + s * (poly[k] - poly[j]));
      out_edges.push_back(fj > 0.0 ? tag : edges[j]);
    }
  }
}

class Decomposer {
 public:
  Decomposer(const Network& net, const DecomposeOptions& opt) : net_(net), opt_(opt) {}

  Decomposition run(const Box2& box) {
    Decomposition out;
    out.box = box;
    Piece root;
    root.poly = {{box.x0, box.y0}, {box.x1, box.y0}, {box.x1, box.y1}, {box.x0, box.y1}};
    root.edges.assign(4, EdgeTag{});
    root.A = Matrix::Identity(2, 2);
    root.c = Vector::Zero(2);
    scale_ = std::max({std::abs(box.x0), std::abs(box.x1), std::abs(box.y0), std::abs(box.y1), 1.0});
    std::vector<Piece> cells{std::move(root)};
    for (std::size_t d = 0; d < net_.depth() && !out.truncated; ++d) {
      std::vector<std::vector<Piece>> next(cells.size());
      std::vector<std::size_t> slivers(cells.size(), 0);
      parallel_for(cells.size(), [&](std::size_t i) { next[i] = refine(cells[i], d, slivers[i]); });
      cells.clear();
      for (std::size_t i = 0; i < next.size(); ++i) {
        out.slivers_dropped += slivers[i];
        for (auto& p : next[i]) cells.push_back(std::move(p));
      }
      if (cells.size() > opt_.max_cells) {
        cells.resize(opt_.max_cells);
        out.truncated = true;
      }
    }
    const Layer& o = net_.layers().back();
    for (auto& p : cells) {
      RegionCell c;
      c.polygon = std::move(p.poly);
      c.edges = std::move(p.edges);
      c.pattern.activation = net_.activation();
      c.pattern.codes = std::move(p.codes);
      c.affine_A = o.weights * p.A;
      c.affine_b = o.weights * p.c + o.bias;
      c.area = polygon_area(c.polygon);
      c.centroid = polygon_centroid(c.polygon);
      out.cells.push_back(std::move(c));
    }
    std::sort(out.cells.begin(), out.cells.end(), [](const RegionCell& a, const RegionCell& b) {
      if (a.centroid.x() != b.centroid.x()) return a.centroid.x() < b.centroid.x();
      return a.centroid.y() < b.centroid.y();
    });
    return out;
  }

 private:
  std::vector<Piece> refine(const Piece& cell, std::size_t d, std::size_t& slivers) const {
    const Layer& l = net_.layer(d);
    const Matrix G = l.weights * cell.A;
    const Vector g = l.weights * cell.c + l.bias;
    const bool relu = net_.activation() == Activation::relu;
    std::vector<Piece> pieces{cell};
    pieces[0].codes = cell.codes;
    std::vector<Piece> next;
    std::vector<double> f;
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
      const EdgeTag tag{static_cast<int>(d), static_cast<int>(i)};
      next.clear();
      for (auto& p : pieces) {
        std::vector<std::pair<Piece, std::int8_t>> parts;
        if (relu) {
          split(p, G.row(i), g(i), 0.0, tag, slivers, parts, 1, 0);
        } else {
          std::vector<std::pair<Piece, std::int8_t>> upper;
          split(p, G.row(i), g(i), 1.0, tag, slivers, upper, 1, 0);
          for (auto& [q, code] : upper) {
            if (code == 1) {
              parts.emplace_back(std::move(q), 1);
            } else {
              split(q, G.row(i), g(i), -1.0, tag, slivers, parts, 0, -1);
            }
          }
        }
        for (auto& [q, code] : parts) {
          q.codes.push_back(code);
          next.push_back(std::move(q));
        }
      }
      std::swap(pieces, next);
    }
    // Map to the next layer's input.
    for (auto& p : pieces) {
      const std::size_t off = p.codes.size() - static_cast<std::size_t>(G.rows());
      Matrix A = Matrix::Zero(G.rows(), 2);
      Vector c = Vector::Zero(G.rows());
      for (Eigen::Index i = 0; i < G.rows(); ++i) {
        const std::int8_t code = p.codes[off + static_cast<std::size_t>(i)];
        const bool passes = relu ? code == 1 : code == 0;
        if (passes) {
          A.row(i) = G.row(i);
          c(i) = g(i);
        } else if (!relu) {
          c(i) = code;
        }
      }
      p.A = std::move(A);
      p.c = std::move(c);
    }
    return pieces;
  }

  /// Appends the parts of p above (code_hi) and below (code_lo) the line
  /// n.x + off = thr that have positive area.
  void split(const Piece& p, const Eigen::RowVectorXd& n, double off, double thr, EdgeTag tag,
             std::size_t& slivers, std::vector<std::pair<Piece, std::int8_t>>& out, std::int8_t code_hi,
             std::int8_t code_lo) const {
    const double eps = 1e-12 * (1.0 + std::abs(off - thr) + n.norm() * scale_);
    std::vector<double> f(p.poly.size());
    bool any_pos = false, any_neg = false;
    for (std::size_t j = 0; j < p.poly.size(); ++j) {
      double v = n(0) * p.poly[j].x() + n(1) * p.poly[j].y() + off - thr;
      if (std::abs(v) <= eps) v = 0.0;
      f[j] = v;
      any_pos |= v > 0.0;
      any_neg |= v < 0.0;
    }
    if (!any_neg) {
      out.emplace_back(p, any_pos ? code_hi : code_lo);
      return;
    }
    if (!any_pos) {
      out.emplace_back(p, code_lo);
      return;
    }
    for (int sign : {1, -1}) {
      Piece q;
      clip_side(p.poly, p.edges, f, sign, tag, q.poly, q.edges);
      const double a = polygon_area(q.poly);
      if (q.poly.size() < 3 || a <= opt_.sliver_area) {
        if (q.poly.size() >= 3 && a > 0.0) ++slivers;
        continue;
      }
      q.codes = p.codes;
      q.A = p.A;
      q.c = p.c;
      out.emplace_back(std::move(q), sign > 0 ? code_hi : code_lo);
    }
  }

  const Network& net_;
  DecomposeOptions opt_;
  double scale_ = 1.0;
};

double threshold_extent(const Network& net) {
  const Layer& l = net.layer(0);
  std::vector<double> thr{0.0};
  if (net.activation() == Activation::hard_tanh) thr = {-1.0, 1.0};
  struct Line {
    double a, b, c;  // a x + b y = c
  };
  std::vector<Line> lines;
  for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
    for (double t : thr) lines.push_back({l.weights(i, 0), l.weights(i, 1), t - l.bias(i)});
  double m = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double det = lines[i].a * lines[j].b - lines[i].b * lines[j].a;
      if (std::abs(det) < 1e-300) continue;
      const double x = (lines[i].c * lines[j].b - lines[i].b * lines[j].c) / det;
      const double y = (lines[i].a * lines[j].c - lines[i].c * lines[j].a) / det;
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      m = std::max({m, std::abs(x), std::abs(y)});
      any = true;
    }
  if (!any) {
    for (const auto& ln : lines) {
      const double nn = ln.a * ln.a + ln.b * ln.b;
      if (nn > 0.0) m = std::max({m, std::abs(ln.a * ln.c / nn), std::abs(ln.b * ln.c / nn)});
    }
  }
  return m > 0.0 ? m : 1.0;
}

}  // namespace

Box2 auto_box(const Network& net) {
  if (net.spec().input_dim != 2) throw DimensionError("auto_box needs a network on R^2");
  const double half = 2.0 * threshold_extent(net);
  return {-half, -half, half, half};
}

Decomposition decompose_input_plane(const Network& net, const Box2& box, const DecomposeOptions& options) {
  if (net.spec().input_dim != 2) throw DimensionError("decompose_input_plane needs input dimension 2");
  if (!has_patterns(net.activation()))
    throw UnsupportedActivationError("decompose_input_plane needs relu or hard_tanh");
  if (!(box.x1 > box.x0 && box.y1 > box.y0)) throw DomainError("box is empty");
  return Decomposer(net, options).run(box);
}

Decomposition decompose_input_plane(const Network& net, const DecomposeOptions& options) {
  return decompose_input_plane(net, auto_box(net), options);
}

}  // namespace xpl
