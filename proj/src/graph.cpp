#include "rdt/graph.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rdt/error.hpp"

namespace rdt {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

CMap emap(const Mat& m) { return CMap(m.d.data(), m.rows, m.cols); }
MMap emap(Mat& m) { return MMap(m.d.data(), m.rows, m.cols); }

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (!a.same_shape(b))
        fail(ErrorCode::shape, std::string(op) + ": shape mismatch " +
                                   std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                   " vs " + std::to_string(b.rows) + "x" +
                                   std::to_string(b.cols));
}

const double kInvSqrt2 = 0.7071067811865475244;
const double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows)
        fail(ErrorCode::shape, "matmul: inner dimensions " + std::to_string(a.cols) +
                                   " vs " + std::to_string(b.rows));
    Mat c(a.rows, b.cols);
    emap(c).noalias() = emap(a) * emap(b);
    return c;
}

double frob_norm(const Mat& a) {
    double s = 0.0;
    for (double v : a.d) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Mat& a) {
    double m = 0.0;
    for (double v : a.d) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    if (!a.same_shape(b)) return 1e30;
    double m = 0.0;
    for (size_t i = 0; i < a.d.size(); ++i) m = std::max(m, std::fabs(a.d[i] - b.d[i]));
    return m;
}

int Graph::push(Mat val, bool requires_grad, std::function<void(Graph&)> back) {
    nodes_.push_back(Node{std::move(val), Mat(), requires_grad, std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
}

Mat& Graph::grad_buf(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Mat(n.val.rows, n.val.cols);
    return n.grad;
}

void Graph::accum(int id, const Mat& g) {
    if (!nodes_[id].requires_grad) return;
    Mat& dst = grad_buf(id);
    for (size_t i = 0; i < g.d.size(); ++i) dst.d[i] += g.d[i];
}

int Graph::leaf(Mat v, bool requires_grad) {
    return push(std::move(v), requires_grad, nullptr);
}

int Graph::add(int a, int b) {
    check_same_shape(val(a), val(b), "add");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] += val(b).d[i];
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        g.accum(a, g.nodes_[self].grad);
        g.accum(b, g.nodes_[self].grad);
    });
}

int Graph::sub(int a, int b) {
    check_same_shape(val(a), val(b), "sub");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] -= val(b).d[i];
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        g.accum(a, go);
        if (g.nodes_[b].requires_grad) {
            Mat neg = go;
            for (auto& v : neg.d) v = -v;
            g.accum(b, neg);
        }
    });
}

int Graph::mul(int a, int b) {
    check_same_shape(val(a), val(b), "mul");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] *= val(b).d[i];
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        if (g.nodes_[a].requires_grad) {
            Mat da = go;
            for (size_t i = 0; i < da.d.size(); ++i) da.d[i] *= g.val(b).d[i];
            g.accum(a, da);
        }
        if (g.nodes_[b].requires_grad) {
            Mat db = go;
            for (size_t i = 0; i < db.d.size(); ++i) db.d[i] *= g.val(a).d[i];
            g.accum(b, db);
        }
    });
}

int Graph::div(int a, int b) {
    check_same_shape(val(a), val(b), "div");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] /= val(b).d[i];
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        if (g.nodes_[a].requires_grad) {
            Mat da = go;
            for (size_t i = 0; i < da.d.size(); ++i) da.d[i] /= g.val(b).d[i];
            g.accum(a, da);
        }
        if (g.nodes_[b].requires_grad) {
            Mat db = go;
            for (size_t i = 0; i < db.d.size(); ++i) {
                double bv = g.val(b).d[i];
                db.d[i] *= -g.val(a).d[i] / (bv * bv);
            }
            g.accum(b, db);
        }
    });
}

int Graph::maximum(int a, int b) {
    check_same_shape(val(a), val(b), "maximum");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] = std::max(out.d[i], val(b).d[i]);
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        Mat da(go.rows, go.cols), db(go.rows, go.cols);
        for (size_t i = 0; i < go.d.size(); ++i) {
            if (g.val(a).d[i] >= g.val(b).d[i]) da.d[i] = go.d[i];
            else db.d[i] = go.d[i];
        }
        g.accum(a, da);
        g.accum(b, db);
    });
}

int Graph::minimum(int a, int b) {
    check_same_shape(val(a), val(b), "minimum");
    Mat out = val(a);
    for (size_t i = 0; i < out.d.size(); ++i) out.d[i] = std::min(out.d[i], val(b).d[i]);
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        Mat da(go.rows, go.cols), db(go.rows, go.cols);
        for (size_t i = 0; i < go.d.size(); ++i) {
            if (g.val(a).d[i] <= g.val(b).d[i]) da.d[i] = go.d[i];
            else db.d[i] = go.d[i];
        }
        g.accum(a, da);
        g.accum(b, db);
    });
}

int Graph::scale(int a, double s) {
    Mat out = val(a);
    for (auto& v : out.d) v *= s;
    return push(std::move(out), nodes_[a].requires_grad, [a, s](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (auto& v : da.d) v *= s;
        g.accum(a, da);
    });
}

int Graph::add_const(int a, double s) {
    Mat out = val(a);
    for (auto& v : out.d) v += s;
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        g.accum(a, g.nodes_[self].grad);
    });
}

int Graph::matmul(int a, int b) {
    Mat out = rdt::matmul(val(a), val(b));
    bool rg = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(out), rg, [a, b](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        if (g.nodes_[a].requires_grad) {
            Mat da(g.val(a).rows, g.val(a).cols);
            emap(da).noalias() = emap(go) * emap(g.val(b)).transpose();
            g.accum(a, da);
        }
        if (g.nodes_[b].requires_grad) {
            Mat db(g.val(b).rows, g.val(b).cols);
            emap(db).noalias() = emap(g.val(a)).transpose() * emap(go);
            g.accum(b, db);
        }
    });
}

int Graph::transpose(int a) {
    const Mat& v = val(a);
    Mat out(v.cols, v.rows);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c) out.at(c, r) = v.at(r, c);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        Mat da(go.cols, go.rows);
        for (int r = 0; r < go.rows; ++r)
            for (int c = 0; c < go.cols; ++c) da.at(c, r) = go.at(r, c);
        g.accum(a, da);
    });
}

int Graph::exp_(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = std::exp(v);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) da.d[i] *= g.val(self).d[i];
        g.accum(a, da);
    });
}

int Graph::log_(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = std::log(v);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) da.d[i] /= g.val(a).d[i];
        g.accum(a, da);
    });
}

int Graph::sqrt_(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = std::sqrt(v);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        // floor the denominator so a zero input does not poison dead
        // branches with inf*0
        for (size_t i = 0; i < da.d.size(); ++i)
            da.d[i] *= 0.5 / std::max(g.val(self).d[i], 1e-150);
        g.accum(a, da);
    });
}

int Graph::reciprocal(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = 1.0 / v;
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) {
            double y = g.val(self).d[i];
            da.d[i] *= -y * y;
        }
        g.accum(a, da);
    });
}

int Graph::abs_(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = std::fabs(v);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) {
            double x = g.val(a).d[i];
            da.d[i] *= (x > 0.0) ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
        }
        g.accum(a, da);
    });
}

int Graph::sigmoid(int a) {
    Mat out = val(a);
    for (auto& v : out.d) {
        if (v >= 0) {
            v = 1.0 / (1.0 + std::exp(-v));
        } else {
            double e = std::exp(v);
            v = e / (1.0 + e);
        }
    }
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) {
            double s = g.val(self).d[i];
            da.d[i] *= s * (1.0 - s);
        }
        g.accum(a, da);
    });
}

int Graph::gelu(int a) {
    Mat out = val(a);
    for (auto& v : out.d) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        Mat da = g.nodes_[self].grad;
        for (size_t i = 0; i < da.d.size(); ++i) {
            double x = g.val(a).d[i];
            double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            da.d[i] *= cdf + x * pdf;
        }
        g.accum(a, da);
    });
}

int Graph::rowsum(int a) {
    const Mat& v = val(a);
    Mat out(v.rows, 1);
    for (int r = 0; r < v.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < v.cols; ++c) s += v.at(r, c);
        out.at(r, 0) = s;
    }
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        const Mat& v = g.val(a);
        Mat da(v.rows, v.cols);
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < v.cols; ++c) da.at(r, c) = go.at(r, 0);
        g.accum(a, da);
    });
}

int Graph::colsum(int a) {
    const Mat& v = val(a);
    Mat out(1, v.cols);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < v.cols; ++c) out.at(0, c) += v.at(r, c);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        const Mat& v = g.val(a);
        Mat da(v.rows, v.cols);
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < v.cols; ++c) da.at(r, c) = go.at(0, c);
        g.accum(a, da);
    });
}

int Graph::sum_all(int a) {
    const Mat& v = val(a);
    double s = 0.0;
    for (double x : v.d) s += x;
    return push(Mat(1, 1, s), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        double go = g.nodes_[self].grad.d[0];
        const Mat& v = g.val(a);
        Mat da(v.rows, v.cols, go);
        g.accum(a, da);
    });
}

int Graph::bcast_across_cols(int a, int n) {
    const Mat& v = val(a);
    if (v.cols != 1) fail(ErrorCode::shape, "bcast_across_cols: source must be R x 1");
    Mat out(v.rows, n);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < n; ++c) out.at(r, c) = v.at(r, 0);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        Mat da(go.rows, 1);
        for (int r = 0; r < go.rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < go.cols; ++c) s += go.at(r, c);
            da.at(r, 0) = s;
        }
        g.accum(a, da);
    });
}

int Graph::bcast_across_rows(int a, int m) {
    const Mat& v = val(a);
    if (v.rows != 1) fail(ErrorCode::shape, "bcast_across_rows: source must be 1 x C");
    Mat out(m, v.cols);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < v.cols; ++c) out.at(r, c) = v.at(0, c);
    return push(std::move(out), nodes_[a].requires_grad, [a](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        Mat da(1, go.cols);
        for (int r = 0; r < go.rows; ++r)
            for (int c = 0; c < go.cols; ++c) da.at(0, c) += go.at(r, c);
        g.accum(a, da);
    });
}

int Graph::slice_rows(int a, int r0, int len) {
    const Mat& v = val(a);
    if (r0 < 0 || len < 0 || r0 + len > v.rows)
        fail(ErrorCode::shape, "slice_rows: range out of bounds");
    Mat out(len, v.cols);
    for (int r = 0; r < len; ++r)
        for (int c = 0; c < v.cols; ++c) out.at(r, c) = v.at(r0 + r, c);
    return push(std::move(out), nodes_[a].requires_grad, [a, r0, len](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        const Mat& v = g.val(a);
        Mat da(v.rows, v.cols);
        for (int r = 0; r < len; ++r)
            for (int c = 0; c < v.cols; ++c) da.at(r0 + r, c) = go.at(r, c);
        g.accum(a, da);
    });
}

int Graph::slice_cols(int a, int c0, int len) {
    const Mat& v = val(a);
    if (c0 < 0 || len < 0 || c0 + len > v.cols)
        fail(ErrorCode::shape, "slice_cols: range out of bounds");
    Mat out(v.rows, len);
    for (int r = 0; r < v.rows; ++r)
        for (int c = 0; c < len; ++c) out.at(r, c) = v.at(r, c0 + c);
    return push(std::move(out), nodes_[a].requires_grad, [a, c0, len](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        const Mat& v = g.val(a);
        Mat da(v.rows, v.cols);
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < len; ++c) da.at(r, c0 + c) = go.at(r, c);
        g.accum(a, da);
    });
}

int Graph::concat_rows(const std::vector<int>& parts) {
    if (parts.empty()) fail(ErrorCode::shape, "concat_rows: empty part list");
    int cols = val(parts[0]).cols;
    int rows = 0;
    bool rg = false;
    for (int p : parts) {
        if (val(p).cols != cols) fail(ErrorCode::shape, "concat_rows: column mismatch");
        rows += val(p).rows;
        rg = rg || nodes_[p].requires_grad;
    }
    Mat out(rows, cols);
    int r0 = 0;
    for (int p : parts) {
        const Mat& v = val(p);
        for (int r = 0; r < v.rows; ++r)
            for (int c = 0; c < cols; ++c) out.at(r0 + r, c) = v.at(r, c);
        r0 += v.rows;
    }
    return push(std::move(out), rg, [parts](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        int r0 = 0;
        for (int p : parts) {
            const Mat& v = g.val(p);
            if (g.nodes_[p].requires_grad) {
                Mat dp(v.rows, v.cols);
                for (int r = 0; r < v.rows; ++r)
                    for (int c = 0; c < v.cols; ++c) dp.at(r, c) = go.at(r0 + r, c);
                g.accum(p, dp);
            }
            r0 += v.rows;
        }
    });
}

int Graph::concat_cols(const std::vector<int>& parts) {
    if (parts.empty()) fail(ErrorCode::shape, "concat_cols: empty part list");
    int rows = val(parts[0]).rows;
    int cols = 0;
    bool rg = false;
    for (int p : parts) {
        if (val(p).rows != rows) fail(ErrorCode::shape, "concat_cols: row mismatch");
        cols += val(p).cols;
        rg = rg || nodes_[p].requires_grad;
    }
    Mat out(rows, cols);
    int c0 = 0;
    for (int p : parts) {
        const Mat& v = val(p);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < v.cols; ++c) out.at(r, c0 + c) = v.at(r, c);
        c0 += v.cols;
    }
    return push(std::move(out), rg, [parts](Graph& g) {
        int self = g.cur_;
        const Mat& go = g.nodes_[self].grad;
        int c0 = 0;
        for (int p : parts) {
            const Mat& v = g.val(p);
            if (g.nodes_[p].requires_grad) {
                Mat dp(v.rows, v.cols);
                for (int r = 0; r < v.rows; ++r)
                    for (int c = 0; c < v.cols; ++c) dp.at(r, c) = go.at(r, c0 + c);
                g.accum(p, dp);
            }
            c0 += v.cols;
        }
    });
}

int Graph::row_max_detached(int a) {
    const Mat& v = val(a);
    Mat out(v.rows, 1);
    for (int r = 0; r < v.rows; ++r) {
        double m = v.at(r, 0);
        for (int c = 1; c < v.cols; ++c) m = std::max(m, v.at(r, c));
        out.at(r, 0) = m;
    }
    return push(std::move(out), false, nullptr);
}

void Graph::backward(int loss_id) {
    const Mat& l = val(loss_id);
    if (l.rows != 1 || l.cols != 1)
        fail(ErrorCode::shape, "backward: loss must be a 1x1 node");
    if (!nodes_[loss_id].requires_grad)
        fail(ErrorCode::state, "backward: loss does not depend on any variable");
    grad_buf(loss_id).d[0] = 1.0;
    for (int i = loss_id; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty() || !n.back) continue;
        cur_ = i;
        n.back(*this);
    }
}

}  // namespace rdt
