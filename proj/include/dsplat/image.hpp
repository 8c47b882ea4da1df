#pragma once

#include <cstddef>
#include <vector>

#include "dsplat/error.hpp"
#include "dsplat/math.hpp"

namespace dsplat {

// Row-major image, 1 channel (mask/depth) or 3 channels (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          pixels(static_cast<size_t>(w) * static_cast<size_t>(h) * static_cast<size_t>(c),
                 fill) {}

    static Image rgb(int w, int h, const Vec3& fill = {0, 0, 0}) {
        Image img(w, h, 3);
        for (size_t i = 0; i < img.pixels.size(); i += 3) {
            img.pixels[i] = fill.x;
            img.pixels[i + 1] = fill.y;
            img.pixels[i + 2] = fill.z;
        }
        return img;
    }

    size_t index(int x, int y, int c = 0) const {
        return (static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) *
                   static_cast<size_t>(channels) +
               static_cast<size_t>(c);
    }

    double at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
    double& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }

    Vec3 rgb_at(int x, int y) const {
        size_t i = index(x, y, 0);
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }
    void set_rgb(int x, int y, const Vec3& v) {
        size_t i = index(x, y, 0);
        pixels[i] = v.x;
        pixels[i + 1] = v.y;
        pixels[i + 2] = v.z;
    }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    void require_same_shape(const Image& o) const {
        if (!same_shape(o))
            throw Error(ErrorCode::DimensionMismatch, "image dimensions differ");
    }
};

} // namespace dsplat
