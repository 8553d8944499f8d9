#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace rdt {

// Dense row-major matrix of doubles. Token streams are stored as
// channels x tokens, images/feature grids flatten row-major.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> d;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}
    Mat(int r, int c, double fill)
        : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}

    double& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return d.size(); }
    bool empty() const { return d.empty(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(d.begin(), d.end(), v); }
};

Mat matmul(const Mat& a, const Mat& b);

double frob_norm(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

// Deterministic RNG. splitmix64 core with an explicit Box-Muller normal so
// streams do not depend on libstdc++ distribution internals.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // [0, n)
    int uniform_int(int n) {
        if (n <= 1) return 0;
        return static_cast<int>(uniform() * n);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Mat normal_mat(int r, int c, double stddev) {
        Mat m(r, c);
        for (auto& v : m.d) v = normal() * stddev;
        return m;
    }

  private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rdt
