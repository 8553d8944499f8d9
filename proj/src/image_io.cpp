#include "rdt/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "rdt/error.hpp"

namespace rdt {

Image load_png(const std::string& path, int expect_ch) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty()) fail(ErrorCode::io, "cannot read image '" + path + "'");
    if (m.channels() != expect_ch)
        fail(ErrorCode::align, "image '" + path + "' has " + std::to_string(m.channels()) +
                                   " channels, expected " + std::to_string(expect_ch));
    Image img(expect_ch, m.rows, m.cols);
    if (m.type() == CV_8UC3) {
        for (int y = 0; y < m.rows; y++)
            for (int x = 0; x < m.cols; x++) {
                cv::Vec3b bgr = m.at<cv::Vec3b>(y, x);
                img.at(0, y, x) = bgr[2] / 255.0;
                img.at(1, y, x) = bgr[1] / 255.0;
                img.at(2, y, x) = bgr[0] / 255.0;
            }
    } else if (m.type() == CV_8UC1) {
        for (int y = 0; y < m.rows; y++)
            for (int x = 0; x < m.cols; x++) img.at(0, y, x) = m.at<uint8_t>(y, x) / 255.0;
    } else if (m.type() == CV_16UC1) {
        for (int y = 0; y < m.rows; y++)
            for (int x = 0; x < m.cols; x++) img.at(0, y, x) = m.at<uint16_t>(y, x) / 65535.0;
    } else {
        fail(ErrorCode::io, "unsupported pixel type in '" + path + "'");
    }
    return img;
}

static double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

void save_png8(const std::string& path, const Image& img) {
    cv::Mat m;
    if (img.ch == 3) {
        m.create(img.h, img.w, CV_8UC3);
        for (int y = 0; y < img.h; y++)
            for (int x = 0; x < img.w; x++) {
                cv::Vec3b& bgr = m.at<cv::Vec3b>(y, x);
                bgr[2] = static_cast<uint8_t>(clamp01(img.at(0, y, x)) * 255.0 + 0.5);
                bgr[1] = static_cast<uint8_t>(clamp01(img.at(1, y, x)) * 255.0 + 0.5);
                bgr[0] = static_cast<uint8_t>(clamp01(img.at(2, y, x)) * 255.0 + 0.5);
            }
    } else if (img.ch == 1) {
        m.create(img.h, img.w, CV_8UC1);
        for (int y = 0; y < img.h; y++)
            for (int x = 0; x < img.w; x++)
                m.at<uint8_t>(y, x) = static_cast<uint8_t>(clamp01(img.at(0, y, x)) * 255.0 + 0.5);
    } else {
        fail(ErrorCode::io, "save_png8 expects 1 or 3 channels, got " + std::to_string(img.ch));
    }
    if (!cv::imwrite(path, m)) fail(ErrorCode::io, "cannot write image '" + path + "'");
}

void save_png16(const std::string& path, const Image& img) {
    if (img.ch != 1)
        fail(ErrorCode::io, "save_png16 expects 1 channel, got " + std::to_string(img.ch));
    cv::Mat m(img.h, img.w, CV_16UC1);
    for (int y = 0; y < img.h; y++)
        for (int x = 0; x < img.w; x++)
            m.at<uint16_t>(y, x) = static_cast<uint16_t>(clamp01(img.at(0, y, x)) * 65535.0 + 0.5);
    if (!cv::imwrite(path, m)) fail(ErrorCode::io, "cannot write image '" + path + "'");
}

}  // namespace rdt
