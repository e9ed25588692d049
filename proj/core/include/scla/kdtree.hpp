#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scla {

/// Planar point with a caller-supplied integer key used for tie-breaking.
struct KeyedPoint {
  double x = 0.0;
  double y = 0.0;
  int key = 0;
};

/// Static 2-d tree. Queries return the k nearest points ordered by
/// (squared distance, key), so equal distances resolve to the lower key.
class KdTree2 {
 public:
  KdTree2() = default;
  explicit KdTree2(std::vector<KeyedPoint> points);

  [[nodiscard]] std::size_t size() const { return points_.size(); }

  /// Positions (into the construction vector) of the k nearest points.
  [[nodiscard]] std::vector<std::size_t> nearest(double x, double y, std::size_t k) const;

 private:
  struct Node {
    std::size_t point = 0;
    int left = -1;
    int right = -1;
    bool split_x = true;
  };

  int build(std::span<std::size_t> order, int depth);

  std::vector<KeyedPoint> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace scla
