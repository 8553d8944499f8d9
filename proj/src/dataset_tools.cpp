#include "rdt/dataset_tools.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rdt/error.hpp"
#include "rdt/image.hpp"

namespace rdt {

FrameDescriptor frame_descriptor(const Image& rgb, int frame_index) {
    FrameDescriptor d;
    d.frame_index = frame_index;
    d.feature = downscale_gray(to_gray(rgb), 0, 16, 16);
    return d;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); i++) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

FrameSelection select_representative_frames(const Sequence& seq, int k, uint64_t seed) {
    const int n = seq.length();
    if (k < 1) fail(ErrorCode::args, "k must be at least 1");
    if (k > n)
        fail(ErrorCode::args,
             "k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " frames");

    std::vector<std::vector<double>> feat(n);
    for (int t = 0; t < n; t++) feat[t] = frame_descriptor(seq.frames[t].rgb, t).feature;

    // k-means++ seeding
    Rng rng(seed);
    std::vector<std::vector<double>> centers;
    std::vector<bool> chosen(n, false);
    int first = rng.uniform_int(n);
    centers.push_back(feat[first]);
    chosen[first] = true;
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k) {
        double sum = 0;
        for (int t = 0; t < n; t++) {
            double best = sq_dist(feat[t], centers[0]);
            for (size_t c = 1; c < centers.size(); c++)
                best = std::min(best, sq_dist(feat[t], centers[c]));
            d2[t] = best;
            sum += best;
        }
        int pick = -1;
        if (sum <= 0) {
            // all remaining frames coincide with a center; take the lowest unchosen
            for (int t = 0; t < n && pick < 0; t++)
                if (!chosen[t]) pick = t;
            if (pick < 0) pick = 0;
        } else {
            double r = rng.uniform() * sum;
            double acc = 0;
            pick = n - 1;
            for (int t = 0; t < n; t++) {
                acc += d2[t];
                if (acc >= r) {
                    pick = t;
                    break;
                }
            }
        }
        centers.push_back(feat[pick]);
        chosen[pick] = true;
    }

    // Lloyd iterations
    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 300; iter++) {
        for (int t = 0; t < n; t++) {
            int best = 0;
            double bd = sq_dist(feat[t], centers[0]);
            for (int c = 1; c < k; c++) {
                double d = sq_dist(feat[t], centers[c]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[t] = best;
        }
        double shift = 0;
        for (int c = 0; c < k; c++) {
            std::vector<double> mean(feat[0].size(), 0.0);
            int count = 0;
            for (int t = 0; t < n; t++)
                if (assign[t] == c) {
                    for (size_t i = 0; i < mean.size(); i++) mean[i] += feat[t][i];
                    count++;
                }
            if (count == 0) continue;  // empty cluster keeps its center
            for (double& v : mean) v /= count;
            shift = std::max(shift, std::sqrt(sq_dist(mean, centers[c])));
            centers[c] = std::move(mean);
        }
        if (shift < 1e-6) break;
    }

    // nearest frame per centroid, ties to the lowest index
    std::set<int> unique;
    for (int c = 0; c < k; c++) {
        int best = 0;
        double bd = sq_dist(feat[0], centers[c]);
        for (int t = 1; t < n; t++) {
            double d = sq_dist(feat[t], centers[c]);
            if (d < bd) {
                bd = d;
                best = t;
            }
        }
        unique.insert(best);
    }
    FrameSelection out;
    out.frames.assign(unique.begin(), unique.end());
    out.collapsed = k - static_cast<int>(out.frames.size());
    return out;
}

// ---------------------------------------------------------------------------
// alignment

namespace {

struct Normalizer {
    double cx = 0, cy = 0, scale = 1;  // p' = (p - c) * scale
};

Normalizer normalize_points(const std::vector<double>& xs, const std::vector<double>& ys) {
    Normalizer nm;
    const size_t n = xs.size();
    for (size_t i = 0; i < n; i++) {
        nm.cx += xs[i];
        nm.cy += ys[i];
    }
    nm.cx /= n;
    nm.cy /= n;
    double mean_dist = 0;
    for (size_t i = 0; i < n; i++) mean_dist += std::hypot(xs[i] - nm.cx, ys[i] - nm.cy);
    mean_dist /= n;
    nm.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
    return nm;
}

Eigen::Matrix3d normalizer_matrix(const Normalizer& nm) {
    Eigen::Matrix3d t;
    t << nm.scale, 0, -nm.scale * nm.cx, 0, nm.scale, -nm.scale * nm.cy, 0, 0, 1;
    return t;
}

double reprojection_rms(const Eigen::Matrix3d& h, const std::vector<PointPair>& pts) {
    double s = 0;
    for (const PointPair& p : pts) {
        Eigen::Vector3d v = h * Eigen::Vector3d(p.tx, p.ty, 1.0);
        double w = v(2);
        double dx = v(0) / w - p.rx, dy = v(1) / w - p.ry;
        s += dx * dx + dy * dy;
    }
    return std::sqrt(s / pts.size());
}

}  // namespace

AlignmentMap estimate_alignment(const std::vector<PointPair>& points, bool affine) {
    if (points.size() < 4)
        fail(ErrorCode::args, "alignment needs at least 4 correspondences, got " +
                                  std::to_string(points.size()));
    const int n = static_cast<int>(points.size());
    std::vector<double> tx(n), ty(n), rx(n), ry(n);
    for (int i = 0; i < n; i++) {
        tx[i] = points[i].tx;
        ty[i] = points[i].ty;
        rx[i] = points[i].rx;
        ry[i] = points[i].ry;
    }
    Normalizer nt = normalize_points(tx, ty), nr = normalize_points(rx, ry);

    Eigen::Matrix3d h_norm;
    double condition;
    if (affine) {
        Eigen::MatrixXd a(2 * n, 6);
        Eigen::VectorXd b(2 * n);
        for (int i = 0; i < n; i++) {
            double x = (tx[i] - nt.cx) * nt.scale, y = (ty[i] - nt.cy) * nt.scale;
            double u = (rx[i] - nr.cx) * nr.scale, v = (ry[i] - nr.cy) * nr.scale;
            a.row(2 * i) << x, y, 1, 0, 0, 0;
            a.row(2 * i + 1) << 0, 0, 0, x, y, 1;
            b(2 * i) = u;
            b(2 * i + 1) = v;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& s = svd.singularValues();
        if (s(5) <= 1e-10 * s(0))
            fail(ErrorCode::align, "degenerate correspondences: affine system is rank-deficient");
        condition = s(0) / s(5);
        Eigen::VectorXd sol = svd.solve(b);
        h_norm << sol(0), sol(1), sol(2), sol(3), sol(4), sol(5), 0, 0, 1;
    } else {
        Eigen::MatrixXd a(2 * n, 9);
        for (int i = 0; i < n; i++) {
            double x = (tx[i] - nt.cx) * nt.scale, y = (ty[i] - nt.cy) * nt.scale;
            double u = (rx[i] - nr.cx) * nr.scale, v = (ry[i] - nr.cy) * nr.scale;
            a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
            a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        if (s(7) <= 1e-10 * s(0))
            fail(ErrorCode::align,
                 "degenerate correspondences: homography system is rank-deficient");
        condition = s(0) / s(7);
        Eigen::VectorXd h = svd.matrixV().col(8);
        h_norm << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
    }

    Eigen::Matrix3d full =
        normalizer_matrix(nr).inverse() * h_norm * normalizer_matrix(nt);
    if (std::abs(full(2, 2)) < 1e-14)
        fail(ErrorCode::align, "homography cannot be normalized (vanishing scale entry)");
    full /= full(2, 2);

    AlignmentMap out;
    out.matrix = Mat(3, 3);
    for (int r = 0; r < 3; r++)
        for (int c = 0; c < 3; c++) out.matrix.at(r, c) = full(r, c);
    out.rms = reprojection_rms(full, points);
    out.condition = condition;
    out.affine = affine;
    return out;
}

void map_point(const AlignmentMap& map, double tx, double ty, double& rx, double& ry) {
    const Mat& h = map.matrix;
    double w = h.at(2, 0) * tx + h.at(2, 1) * ty + h.at(2, 2);
    rx = (h.at(0, 0) * tx + h.at(0, 1) * ty + h.at(0, 2)) / w;
    ry = (h.at(1, 0) * tx + h.at(1, 1) * ty + h.at(1, 2)) / w;
}

Image apply_alignment(const AlignmentMap& map, const Image& img, int out_h, int out_w) {
    if (map.matrix.rows != 3 || map.matrix.cols != 3)
        fail(ErrorCode::shape, "alignment matrix must be 3x3");
    Eigen::Matrix3d h;
    for (int r = 0; r < 3; r++)
        for (int c = 0; c < 3; c++) h(r, c) = map.matrix.at(r, c);
    if (std::abs(h.determinant()) < 1e-14)
        fail(ErrorCode::align, "alignment map is singular");
    Eigen::Matrix3d inv = h.inverse();

    Image out(img.ch, out_h, out_w);
    for (int y = 0; y < out_h; y++)
        for (int x = 0; x < out_w; x++) {
            Eigen::Vector3d src = inv * Eigen::Vector3d(x, y, 1.0);
            double sx = src(0) / src(2), sy = src(1) / src(2);
            bool inside = sx >= 0.0 && sx <= img.w - 1.0 && sy >= 0.0 && sy <= img.h - 1.0;
            for (int c = 0; c < img.ch; c++)
                out.at(c, y, x) = inside ? bilinear_sample(img, c, sx, sy, 0.0) : 0.0;
        }
    return out;
}

void save_alignment(const AlignmentMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    char buf[64];
    for (int i = 0; i < 9; i++) {
        std::snprintf(buf, sizeof(buf), "%.17g", map.matrix.d[i]);
        out << buf << (i % 3 == 2 ? "\n" : " ");
    }
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
}

AlignmentMap load_alignment(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot read '" + path + "'");
    AlignmentMap map;
    map.matrix = Mat(3, 3);
    for (int i = 0; i < 9; i++)
        if (!(in >> map.matrix.d[i]))
            fail(ErrorCode::parse, "'" + path + "' does not hold 9 numbers");
    if (map.matrix.at(2, 2) != 0.0) {
        double s = map.matrix.at(2, 2);
        for (double& v : map.matrix.d) v /= s;
    }
    return map;
}

}  // namespace rdt
