#pragma once

#include <functional>
#include <vector>

#include "rdt/mat.hpp"

namespace rdt {

// Reverse-mode autodiff tape over Mat values. A graph is built per forward
// pass and discarded; nodes are appended in topological order, so backward()
// is a reverse sweep. All composite math in fusion/prompt/tracker is built
// from these primitives, which keeps gradient correctness in one place.
class Graph {
  public:
    struct Node {
        Mat val;
        Mat grad;                    // allocated lazily
        bool requires_grad = false;
        std::function<void(Graph&)> back;  // empty for leaves / detached
    };

    int leaf(Mat v, bool requires_grad = false);
    int constant(double v) { return leaf(Mat(1, 1, v), false); }

    // elementwise, same shape
    int add(int a, int b);
    int sub(int a, int b);
    int mul(int a, int b);
    int div(int a, int b);
    int maximum(int a, int b);  // ties route gradient to a
    int minimum(int a, int b);

    // scalar-by-constant
    int scale(int a, double s);
    int add_const(int a, double s);

    int matmul(int a, int b);
    int transpose(int a);

    int exp_(int a);
    int log_(int a);   // input must be > 0
    int sqrt_(int a);  // backward guarded near 0
    int reciprocal(int a);
    int abs_(int a);
    int sigmoid(int a);
    int gelu(int a);  // exact erf form

    int rowsum(int a);  // R×C -> R×1
    int colsum(int a);  // R×C -> 1×C
    int sum_all(int a); // -> 1×1

    int bcast_across_cols(int a, int n);  // R×1 -> R×n
    int bcast_across_rows(int a, int m);  // 1×C -> m×C

    int slice_rows(int a, int r0, int len);
    int slice_cols(int a, int c0, int len);
    int concat_rows(const std::vector<int>& parts);
    int concat_cols(const std::vector<int>& parts);

    // per-row max as a detached constant (softmax stabilization)
    int row_max_detached(int a);

    const Mat& val(int id) const { return nodes_[id].val; }
    const Mat& grad(int id) const { return nodes_[id].grad; }
    bool has_grad(int id) const { return !nodes_[id].grad.empty(); }
    size_t num_nodes() const { return nodes_.size(); }

    // loss must be 1×1
    void backward(int loss_id);

  private:
    int push(Mat val, bool requires_grad, std::function<void(Graph&)> back);
    Mat& grad_buf(int id);  // allocate on demand
    void accum(int id, const Mat& g);

    std::vector<Node> nodes_;
    int cur_ = -1;  // node whose backward is running
};

}  // namespace rdt
