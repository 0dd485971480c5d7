#include "fracrc/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fracrc/core.hpp"
#include "fracrc/simd/kernels.hpp"

namespace fracrc {

KdTree::KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size)
    : n_(dim == 0 ? 0 : points.size() / dim), dim_(dim), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (dim == 0 || points.size() % dim != 0) throw ConfigError("KdTree: points do not form an n x dim array");
  if (n_ == 0) throw ConfigError("KdTree: no points");
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(2 * (n_ / leaf_size_ + 1));
  build(0, n_, order, points);
  coords_.resize(dim_ * n_);
  original_ = order;
  for (std::size_t pos = 0; pos < n_; ++pos) {
    for (std::size_t c = 0; c < dim_; ++c) coords_[c * n_ + pos] = points[order[pos] * dim_ + c];
  }
}

std::int32_t KdTree::build(std::size_t begin, std::size_t end, std::vector<std::size_t>& order,
                           std::span<const double> points) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t c = 0; c < dim_; ++c) {
      const double v = points[order[i] * dim_ + c];
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    }
  }
  lo_.insert(lo_.end(), lo.begin(), lo.end());
  hi_.insert(hi_.end(), hi.begin(), hi.end());
  if (end - begin <= leaf_size_) {
    max_leaf_ = std::max(max_leaf_, end - begin);
    return id;
  }

  std::size_t split = 0;
  double widest = -1.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    if (hi[c] - lo[c] > widest) {
      widest = hi[c] - lo[c];
      split = c;
    }
  }
  if (widest <= 0.0) {  // all points coincide; keep as one leaf
    max_leaf_ = std::max(max_leaf_, end - begin);
    return id;
  }

  const std::size_t mid = begin + (end - begin) / 2;
  auto first = order.begin() + static_cast<std::ptrdiff_t>(begin);
  std::nth_element(first, order.begin() + static_cast<std::ptrdiff_t>(mid),
                   order.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                     const double va = points[a * dim_ + split];
                     const double vb = points[b * dim_ + split];
                     return va < vb || (va == vb && a < b);
                   });
  const std::int32_t left = build(begin, mid, order, points);
  const std::int32_t right = build(mid, end, order, points);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

// Box distances use the same subtraction direction and summation order as the
// point kernel. IEEE rounding is monotone, so every point's computed squared
// distance lies inside [min_sq_dist, max_sq_dist] of its box, which keeps the
// pruned pair counts identical to a brute-force double loop.
double KdTree::min_sq_dist(std::span<const double> q, std::int32_t node) const {
  const double* lo = lo_.data() + static_cast<std::size_t>(node) * dim_;
  const double* hi = hi_.data() + static_cast<std::size_t>(node) * dim_;
  double acc = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    double d = 0.0;
    if (q[c] < lo[c]) {
      d = q[c] - lo[c];
    } else if (q[c] > hi[c]) {
      d = q[c] - hi[c];
    }
    acc = (c == 0) ? d * d : acc + d * d;
  }
  return acc;
}

double KdTree::max_sq_dist(std::span<const double> q, std::int32_t node) const {
  const double* lo = lo_.data() + static_cast<std::size_t>(node) * dim_;
  const double* hi = hi_.data() + static_cast<std::size_t>(node) * dim_;
  double acc = 0.0;
  for (std::size_t c = 0; c < dim_; ++c) {
    const double a = q[c] - lo[c];
    const double b = q[c] - hi[c];
    const double d = std::max(std::fabs(a), std::fabs(b));
    acc = (c == 0) ? d * d : acc + d * d;
  }
  return acc;
}

void KdTree::count_from(std::span<const double> q, std::int32_t node, std::span<const double> r2,
                        std::vector<std::uint64_t>& first_bin, std::vector<double>& scratch) const {
  const double mind = min_sq_dist(q, node);
  if (mind >= r2.back()) return;
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const double maxd = max_sq_dist(q, node);
  const auto k_lo = static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), mind) - r2.begin());
  const auto k_hi = static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), maxd) - r2.begin());
  if (k_lo == k_hi) {
    first_bin[k_lo] += nd.end - nd.begin;
    return;
  }
  if (nd.left < 0) {
    const std::size_t cnt = nd.end - nd.begin;
    simd::kernels().sq_dist_soa(q.data(), coords_.data() + nd.begin, n_, dim_, cnt, scratch.data());
    for (std::size_t i = 0; i < cnt; ++i) {
      const auto k = static_cast<std::size_t>(std::upper_bound(r2.begin(), r2.end(), scratch[i]) - r2.begin());
      ++first_bin[k];
    }
    return;
  }
  count_from(q, nd.left, r2, first_bin, scratch);
  count_from(q, nd.right, r2, first_bin, scratch);
}

std::vector<std::uint64_t> KdTree::pair_counts(std::span<const double> radii) const {
  if (radii.empty()) return {};
  std::vector<double> r2(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1]))) {
      throw ConfigError("KdTree::pair_counts: radii must be positive and strictly increasing");
    }
    r2[k] = radii[k] * radii[k];
  }
  std::vector<std::uint64_t> first_bin(r2.size() + 1, 0);
  std::vector<double> scratch(max_leaf_);
  std::vector<double> q(dim_);
  for (std::size_t pos = 0; pos < n_; ++pos) {
    for (std::size_t c = 0; c < dim_; ++c) q[c] = coords_[c * n_ + pos];
    count_from(q, 0, r2, first_bin, scratch);
  }
  std::vector<std::uint64_t> counts(r2.size());
  std::uint64_t running = 0;
  for (std::size_t k = 0; k < r2.size(); ++k) {
    running += first_bin[k];
    // Every point sees itself at distance 0; drop those, then unorder.
    counts[k] = (running - n_) / 2;
  }
  return counts;
}

void KdTree::nearest_from(std::span<const double> q, std::int32_t node, std::size_t self, std::size_t window,
                          Neighbor& best, std::vector<double>& scratch) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  if (nd.left < 0) {
    const std::size_t cnt = nd.end - nd.begin;
    simd::kernels().sq_dist_soa(q.data(), coords_.data() + nd.begin, n_, dim_, cnt, scratch.data());
    for (std::size_t i = 0; i < cnt; ++i) {
      const std::size_t j = original_[nd.begin + i];
      const std::size_t gap = j > self ? j - self : self - j;
      if (gap <= window) continue;
      if (!best.found || scratch[i] < best.sq_dist || (scratch[i] == best.sq_dist && j < best.index)) {
        best = Neighbor{j, scratch[i], true};
      }
    }
    return;
  }
  const double dl = min_sq_dist(q, nd.left);
  const double dr = min_sq_dist(q, nd.right);
  const std::int32_t first = dl <= dr ? nd.left : nd.right;
  const std::int32_t second = dl <= dr ? nd.right : nd.left;
  const double dfirst = std::min(dl, dr);
  const double dsecond = std::max(dl, dr);
  if (!best.found || dfirst <= best.sq_dist) nearest_from(q, first, self, window, best, scratch);
  if (!best.found || dsecond <= best.sq_dist) nearest_from(q, second, self, window, best, scratch);
}

KdTree::Neighbor KdTree::nearest_outside_window(std::span<const double> q, std::size_t self,
                                                std::size_t window) const {
  if (q.size() != dim_) throw ConfigError("KdTree::nearest_outside_window: query dimension mismatch");
  Neighbor best;
  std::vector<double> scratch(max_leaf_);
  nearest_from(q, 0, self, window, best, scratch);
  return best;
}

}  // namespace fracrc
