#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fracrc {

/// Static k-d tree over a point set. Points are copied into tree order and
/// stored structure-of-arrays so leaf scans run through the SIMD distance
/// kernel.
class KdTree {
 public:
  /// `points` is row-major, n x dim.
  KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size = 32);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return dim_; }

  /// For each radius r_k (strictly increasing), the number of unordered
  /// pairs {i, j}, i != j, with squared distance < r_k^2.
  std::vector<std::uint64_t> pair_counts(std::span<const double> radii) const;

  struct Neighbor {
    std::size_t index = 0;  // original point index
    double sq_dist = 0.0;
    bool found = false;
  };

  /// Nearest point to `q` whose original index j satisfies |j - self| > window.
  Neighbor nearest_outside_window(std::span<const double> q, std::size_t self, std::size_t window) const;

 private:
  struct Node {
    std::size_t begin;
    std::size_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::size_t begin, std::size_t end, std::vector<std::size_t>& order,
                     std::span<const double> points);
  void count_from(std::span<const double> q, std::int32_t node, std::span<const double> r2,
                  std::vector<std::uint64_t>& first_bin, std::vector<double>& scratch) const;
  void nearest_from(std::span<const double> q, std::int32_t node, std::size_t self, std::size_t window,
                    Neighbor& best, std::vector<double>& scratch) const;
  double min_sq_dist(std::span<const double> q, std::int32_t node) const;
  double max_sq_dist(std::span<const double> q, std::int32_t node) const;

  std::size_t n_;
  std::size_t dim_;
  std::size_t leaf_size_;
  // Coincident points form one leaf of any size.
  std::size_t max_leaf_ = 0;
  std::vector<double> coords_;  // dim x n, tree order
  std::vector<std::size_t> original_;
  std::vector<Node> nodes_;
  std::vector<double> lo_;  // per node bounding box, dim entries each
  std::vector<double> hi_;
};

}  // namespace fracrc
