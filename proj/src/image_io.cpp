#include "lfs/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "lfs/common.hpp"

namespace lfs::img {

namespace {

void check_image_shape(const Tensor& image) {
    const auto& s = image.shape();
    if (s.size() != 3 || s[0] != 3 || s[1] < 1 || s[2] < 1)
        throw ShapeMismatch("expected a [3,H,W] image tensor");
}

}  // namespace

Tensor load_png(const std::string& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.c_str()))
        throw IoError("cannot read PNG '" + path + "': " + png.message);
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw IoError("cannot decode PNG '" + path + "': " + msg);
    }
    const int h = static_cast<int>(png.height);
    const int w = static_cast<int>(png.width);
    Tensor out({3, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = buf[(static_cast<size_t>(y) * w + x) * 3 + c];
                out[(static_cast<int64_t>(c) * h + y) * w + x] = v / 255.0 * 2.0 - 1.0;
            }
    return out;
}

void save_png(const Tensor& image, const std::string& path) {
    check_image_shape(image);
    const int h = image.shape()[1];
    const int w = image.shape()[2];
    std::vector<std::uint8_t> buf(static_cast<size_t>(h) * w * 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double v = image[(static_cast<int64_t>(c) * h + y) * w + x];
                const long q = std::lround((std::clamp(v, -1.0, 1.0) + 1.0) / 2.0 * 255.0);
                buf[(static_cast<size_t>(y) * w + x) * 3 + c] =
                    static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
            }
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(w);
    png.height = static_cast<png_uint_32>(h);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.c_str(), 0, buf.data(), 0, nullptr))
        throw IoError("cannot write PNG '" + path + "': " + png.message);
}

Tensor resize_bilinear(const Tensor& image, int size) {
    check_image_shape(image);
    const int h = image.shape()[1];
    const int w = image.shape()[2];
    if (h == size && w == size) return image;
    Tensor out({3, size, size});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double sy = (y + 0.5) * h / size - 0.5;
                const double sx = (x + 0.5) * w / size - 0.5;
                const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, h - 1);
                const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, w - 1);
                const int y1 = std::min(y0 + 1, h - 1);
                const int x1 = std::min(x0 + 1, w - 1);
                const double fy = std::clamp(sy - y0, 0.0, 1.0);
                const double fx = std::clamp(sx - x0, 0.0, 1.0);
                auto at = [&](int yy, int xx) {
                    return image[(static_cast<int64_t>(c) * h + yy) * w + xx];
                };
                out[(static_cast<int64_t>(c) * size + y) * size + x] =
                    (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                    fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
            }
    return out;
}

Tensor hflip(const Tensor& image) {
    check_image_shape(image);
    const int h = image.shape()[1];
    const int w = image.shape()[2];
    Tensor out({3, h, w});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out[(static_cast<int64_t>(c) * h + y) * w + x] =
                    image[(static_cast<int64_t>(c) * h + y) * w + (w - 1 - x)];
    return out;
}

Tensor hstack(const std::vector<Tensor>& images) {
    if (images.empty()) throw ShapeMismatch("hstack of zero images");
    check_image_shape(images.front());
    const int h = images.front().shape()[1];
    const int w = images.front().shape()[2];
    for (const Tensor& t : images) {
        check_image_shape(t);
        if (t.shape()[1] != h || t.shape()[2] != w)
            throw ShapeMismatch("hstack requires equally sized images");
    }
    const int n = static_cast<int>(images.size());
    Tensor out({3, h, w * n});
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    out[(static_cast<int64_t>(c) * h + y) * (w * n) + i * w + x] =
                        images[i][(static_cast<int64_t>(c) * h + y) * w + x];
    return out;
}

}  // namespace lfs::img
