#pragma once

#include <cstddef>
#include <vector>

namespace pdd {

/// Static kd-tree over a flat point array (stride = dim), built once and
/// queried many times for k nearest neighbors. Runtime dimension.
class KdTree {
public:
    KdTree(const double* points, std::size_t count, int dim);
    explicit KdTree(const std::vector<double>& flat_points, int dim)
        : KdTree(flat_points.data(), flat_points.size() / dim, dim) {}

    std::size_t size() const noexcept { return count_; }

    /// Fills `out_dist` with the k smallest distances from `query` to the
    /// stored points, sorted ascending. k is capped at size().
    void knn(const double* query, int k, std::vector<double>& out_dist) const;

private:
    struct Node {
        double split;
        int axis;        // -1 marks a leaf
        std::size_t begin, end;  // leaf range into index_
        int left, right;
    };

    int build(std::size_t begin, std::size_t end);
    void search(int node, const double* query, int k, std::vector<double>& heap) const;

    const double* pts_;
    std::size_t count_;
    int dim_;
    std::vector<std::size_t> index_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr std::size_t kLeafSize = 16;
};

}  // namespace pdd
