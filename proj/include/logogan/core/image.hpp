#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "logogan/core/tensor.hpp"

namespace logogan {

// 8-bit RGB image, row-major, interleaved channels.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // height*width*3

    std::uint8_t& at(int y, int x, int ch) {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }
    std::uint8_t at(int y, int x, int ch) const {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
    }
};

inline ImageU8 load_image_rgb(const std::filesystem::path& path) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot decode image: " + path.string());
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    ImageU8 img;
    img.width = rgb.cols;
    img.height = rgb.rows;
    img.rgb.assign(rgb.data, rgb.data + static_cast<std::size_t>(rgb.total()) * 3);
    return img;
}

inline void save_image_png(const ImageU8& img, const std::filesystem::path& path) {
    cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.rgb.data()));
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path.string(), bgr, {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw std::runtime_error("cannot write png: " + path.string());
}

inline ImageU8 center_crop_square(const ImageU8& img) {
    const int side = std::min(img.width, img.height);
    const int x0 = (img.width - side) / 2;
    const int y0 = (img.height - side) / 2;
    ImageU8 out;
    out.width = side;
    out.height = side;
    out.rgb.resize(static_cast<std::size_t>(side) * side * 3);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return out;
}

inline ImageU8 resize_image(const ImageU8& img, int res) {
    cv::Mat src(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.rgb.data()));
    cv::Mat dst;
    const int interp = res < img.width ? cv::INTER_AREA : cv::INTER_LINEAR;
    cv::resize(src, dst, cv::Size(res, res), 0, 0, interp);
    ImageU8 out;
    out.width = res;
    out.height = res;
    out.rgb.assign(dst.data, dst.data + static_cast<std::size_t>(dst.total()) * 3);
    return out;
}

// 2x box downsample, mean-preserving per step up to rounding.
inline ImageU8 box_downsample_half(const ImageU8& img) {
    if (img.width % 2 != 0 || img.height % 2 != 0)
        throw std::invalid_argument("box_downsample_half needs even dimensions");
    ImageU8 out;
    out.width = img.width / 2;
    out.height = img.height / 2;
    out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const int s = img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) +
                              img.at(2 * y + 1, 2 * x, c) + img.at(2 * y + 1, 2 * x + 1, c);
                out.at(y, x, c) = static_cast<std::uint8_t>((s + 2) / 4);
            }
    return out;
}

// [0,255] -> [-1,1], linear
inline double u8_to_pm1(std::uint8_t v) { return static_cast<double>(v) / 127.5 - 1.0; }

inline std::uint8_t pm1_to_u8(double v) {
    const double x = (v + 1.0) * 127.5;
    const long r = std::lround(std::min(255.0, std::max(0.0, x)));
    return static_cast<std::uint8_t>(r);
}

// One 3xHxW slice of an NCHW batch -> RGB image.
inline ImageU8 tensor_slice_to_image(const Tensor& batch, int n) {
    const int h = batch.dim(2), w = batch.dim(3);
    ImageU8 img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(h) * w * 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                img.at(y, x, c) = pm1_to_u8(batch.at4(n, c, y, x));
    return img;
}

inline void image_to_tensor_slice(const ImageU8& img, Tensor& batch, int n) {
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                batch.at4(n, c, y, x) = u8_to_pm1(img.at(y, x, c));
}

// Tile images into rows x cols grid (all tiles must share one size).
inline ImageU8 make_grid(const std::vector<ImageU8>& tiles, int rows, int cols, int pad = 2) {
    if (tiles.empty() || rows * cols < static_cast<int>(tiles.size()))
        throw std::invalid_argument("make_grid: bad layout");
    const int tw = tiles[0].width, th = tiles[0].height;
    ImageU8 grid;
    grid.width = cols * tw + (cols + 1) * pad;
    grid.height = rows * th + (rows + 1) * pad;
    grid.rgb.assign(static_cast<std::size_t>(grid.width) * grid.height * 3, 255);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const int r = static_cast<int>(i) / cols;
        const int c = static_cast<int>(i) % cols;
        const int y0 = pad + r * (th + pad);
        const int x0 = pad + c * (tw + pad);
        for (int y = 0; y < th; ++y)
            for (int x = 0; x < tw; ++x)
                for (int ch = 0; ch < 3; ++ch)
                    grid.at(y0 + y, x0 + x, ch) = tiles[i].at(y, x, ch);
    }
    return grid;
}

// FNV-1a over the decoded pixel buffer; the record id.
inline std::string content_hash(const ImageU8& img) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto eat = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFF;
            h *= 0x100000001B3ull;
        }
    };
    eat(static_cast<std::uint64_t>(img.width));
    eat(static_cast<std::uint64_t>(img.height));
    for (std::uint8_t b : img.rgb) {
        h ^= b;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace logogan
