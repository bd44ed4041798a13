#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logogan/core/image.hpp"
#include "logogan/core/rng.hpp"

namespace logogan {

// Hermetic corpus generator: colored circles, squares and triangles on a
// light background. Stands in for the external logo corpora in every test.
struct ShapeSpec {
    enum class Kind { circle, square, triangle };
    Kind kind = Kind::circle;
    std::array<std::uint8_t, 3> color{255, 0, 0};
};

inline ImageU8 render_shape(const ShapeSpec& spec, int res, Rng& rng) {
    ImageU8 img;
    img.width = res;
    img.height = res;
    img.rgb.assign(static_cast<std::size_t>(res) * res * 3, 235);

    const double cx = res * (0.35 + 0.3 * rng.uniform());
    const double cy = res * (0.35 + 0.3 * rng.uniform());
    const double radius = res * (0.2 + 0.15 * rng.uniform());

    auto inside = [&](double x, double y) {
        const double dx = x - cx, dy = y - cy;
        switch (spec.kind) {
            case ShapeSpec::Kind::circle:
                return dx * dx + dy * dy <= radius * radius;
            case ShapeSpec::Kind::square:
                return std::abs(dx) <= radius && std::abs(dy) <= radius;
            case ShapeSpec::Kind::triangle:
                return dy >= -radius && dy <= radius &&
                       std::abs(dx) <= (dy + radius) * 0.5;
        }
        return false;
    };
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            if (inside(x + 0.5, y + 0.5))
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = spec.color[c];
    return img;
}

// Writes `count` images per class to `dir` as PNGs. Class k uses
// classes[k]'s kind and color; positions and sizes are jittered per image.
inline void write_synthetic_corpus(const std::filesystem::path& dir,
                                   const std::vector<ShapeSpec>& classes,
                                   int count_per_class, int res, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < classes.size(); ++k) {
        for (int i = 0; i < count_per_class; ++i) {
            Rng rng(mix_seed(seed, k, static_cast<std::uint64_t>(i)));
            const ImageU8 img = render_shape(classes[k], res, rng);
            char name[64];
            std::snprintf(name, sizeof(name), "class%zu_%04d.png", k, i);
            save_image_png(img, dir / name);
        }
    }
}

inline std::vector<ShapeSpec> red_circles_blue_squares() {
    return {
        {ShapeSpec::Kind::circle, {220, 30, 30}},
        {ShapeSpec::Kind::square, {30, 30, 220}},
    };
}

} // namespace logogan
