#include "rdt/image.hpp"

#include <algorithm>
#include <cmath>

namespace rdt {

double bilinear_sample(const Image& img, int c, double x, double y, double pad) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;

    auto px = [&](int yy, int xx) -> double {
        if (xx < 0 || xx >= img.w || yy < 0 || yy >= img.h) return pad;
        return img.at(c, yy, xx);
    };

    double v00 = px(y0, x0);
    double v01 = px(y0, x0 + 1);
    double v10 = px(y0 + 1, x0);
    double v11 = px(y0 + 1, x0 + 1);
    return v00 * (1 - fx) * (1 - fy) + v01 * fx * (1 - fy) +
           v10 * (1 - fx) * fy + v11 * fx * fy;
}

Image crop_resize(const Image& img, double cx, double cy, double side, int out_size) {
    if (side <= 0.0) fail(ErrorCode::args, "crop_resize: non-positive crop side");
    Image out(img.ch, out_size, out_size);
    double step = side / out_size;
    double x_origin = cx - 0.5 * side;
    double y_origin = cy - 0.5 * side;
    for (int c = 0; c < img.ch; ++c) {
        double pad = channel_mean(img, c);
        for (int oy = 0; oy < out_size; ++oy) {
            double sy = y_origin + (oy + 0.5) * step - 0.5;
            for (int ox = 0; ox < out_size; ++ox) {
                double sx = x_origin + (ox + 0.5) * step - 0.5;
                out.at(c, oy, ox) = bilinear_sample(img, c, sx, sy, pad);
            }
        }
    }
    return out;
}

std::vector<double> downscale_gray(const Image& img, int c, int oh, int ow) {
    std::vector<double> out(static_cast<size_t>(oh) * ow, 0.0);
    for (int oy = 0; oy < oh; ++oy) {
        int y0 = oy * img.h / oh;
        int y1 = std::max(y0 + 1, (oy + 1) * img.h / oh);
        for (int ox = 0; ox < ow; ++ox) {
            int x0 = ox * img.w / ow;
            int x1 = std::max(x0 + 1, (ox + 1) * img.w / ow);
            double s = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) s += img.at(c, y, x);
            out[static_cast<size_t>(oy) * ow + ox] = s / ((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

double channel_mean(const Image& img, int c) {
    double s = 0.0;
    size_t n = img.plane_size();
    const double* p = img.d.data() + c * n;
    for (size_t i = 0; i < n; ++i) s += p[i];
    return n ? s / static_cast<double>(n) : 0.0;
}

double mean_intensity(const Image& img) {
    double s = 0.0;
    for (double v : img.d) s += v;
    return img.d.empty() ? 0.0 : s / static_cast<double>(img.d.size());
}

Image to_gray(const Image& img) {
    Image out(1, img.h, img.w);
    if (img.ch >= 3) {
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x)
                out.at(0, y, x) = 0.299 * img.at(0, y, x) + 0.587 * img.at(1, y, x) +
                                  0.114 * img.at(2, y, x);
    } else {
        for (int y = 0; y < img.h; ++y)
            for (int x = 0; x < img.w; ++x) out.at(0, y, x) = img.at(0, y, x);
    }
    return out;
}

}  // namespace rdt
