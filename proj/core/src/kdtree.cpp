#include "scla/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <utility>

namespace scla {

namespace {

struct Candidate {
  double dist2;
  int key;
  std::size_t point;
};

// max-heap on (dist2, key): the top is the worst of the current k best
struct WorseFirst {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
    return a.key < b.key;
  }
};

}  // namespace

KdTree2::KdTree2(std::vector<KeyedPoint> points) : points_(std::move(points)) {
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  nodes_.reserve(points_.size());
  root_ = build(order, 0);
}

int KdTree2::build(std::span<std::size_t> order, int depth) {
  if (order.empty()) return -1;
  const bool split_x = depth % 2 == 0;
  const std::size_t mid = order.size() / 2;
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mid), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double va = split_x ? points_[a].x : points_[a].y;
                     const double vb = split_x ? points_[b].x : points_[b].y;
                     if (va != vb) return va < vb;
                     return points_[a].key < points_[b].key;
                   });
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{order[mid], -1, -1, split_x});
  const int left = build(order.subspan(0, mid), depth + 1);
  const int right = build(order.subspan(mid + 1), depth + 1);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::size_t> KdTree2::nearest(double x, double y, std::size_t k) const {
  std::vector<std::size_t> out;
  if (k == 0 || root_ < 0) return out;
  std::priority_queue<Candidate, std::vector<Candidate>, WorseFirst> best;

  auto visit = [&](auto&& self, int node_id) -> void {
    if (node_id < 0) return;
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    const KeyedPoint& p = points_[node.point];
    const double dx = p.x - x;
    const double dy = p.y - y;
    const Candidate c{dx * dx + dy * dy, p.key, node.point};
    if (best.size() < k) {
      best.push(c);
    } else if (WorseFirst{}(c, best.top())) {
      best.pop();
      best.push(c);
    }
    const double diff = node.split_x ? x - p.x : y - p.y;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    self(self, near);
    // <= keeps equal-distance ties reachable on the far side
    if (best.size() < k || diff * diff <= best.top().dist2) self(self, far);
  };
  visit(visit, root_);

  std::vector<Candidate> sorted;
  sorted.reserve(best.size());
  while (!best.empty()) {
    sorted.push_back(best.top());
    best.pop();
  }
  std::reverse(sorted.begin(), sorted.end());
  out.reserve(sorted.size());
  for (const auto& c : sorted) out.push_back(c.point);
  return out;
}

}  // namespace scla
