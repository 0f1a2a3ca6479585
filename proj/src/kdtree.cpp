#include "pdd/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pdd {

KdTree::KdTree(const double* points, std::size_t count, int dim)
    : pts_(points), count_(count), dim_(dim) {
    index_.resize(count_);
    std::iota(index_.begin(), index_.end(), std::size_t{0});
    nodes_.reserve(count_ / kLeafSize * 2 + 2);
    if (count_ > 0) root_ = build(0, count_);
}

int KdTree::build(std::size_t begin, std::size_t end) {
    Node node{};
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
        node.axis = -1;
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }

    // Split on the axis with the widest spread.
    int axis = 0;
    double best_spread = -1.0;
    for (int d = 0; d < dim_; ++d) {
        double lo = pts_[index_[begin] * dim_ + d], hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            const double v = pts_[index_[i] * dim_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = d;
        }
    }

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         return pts_[a * dim_ + axis] < pts_[b * dim_ + axis];
                     });
    node.axis = axis;
    node.split = pts_[index_[mid] * dim_ + axis];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

namespace {

// Max-heap over squared distances.
inline void heap_push(std::vector<double>& heap, int k, double d2) {
    if (static_cast<int>(heap.size()) < k) {
        heap.push_back(d2);
        std::push_heap(heap.begin(), heap.end());
    } else if (d2 < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = d2;
        std::push_heap(heap.begin(), heap.end());
    }
}

}  // namespace

void KdTree::search(int node_id, const double* query, int k, std::vector<double>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const double* p = pts_ + index_[i] * dim_;
            double d2 = 0.0;
            for (int d = 0; d < dim_; ++d) {
                const double diff = query[d] - p[d];
                d2 += diff * diff;
            }
            heap_push(heap, k, d2);
        }
        return;
    }
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, k, heap);
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.front())
        search(far, query, k, heap);
}

void KdTree::knn(const double* query, int k, std::vector<double>& out_dist) const {
    out_dist.clear();
    if (count_ == 0 || k <= 0) return;
    if (static_cast<std::size_t>(k) > count_) k = static_cast<int>(count_);
    std::vector<double> heap;
    heap.reserve(k);
    search(root_, query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    out_dist.resize(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out_dist[i] = std::sqrt(heap[i]);
}

}  // namespace pdd
