#include "lpsr/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "lpsr/errors.hpp"

namespace lpsr::img {

Image read_png(const std::filesystem::path& path) {
    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.c_str()))
        throw IoError("cannot read PNG '" + path.string() + "': " + pi.message);

    const bool color = (pi.format & PNG_FORMAT_FLAG_COLOR) != 0;
    pi.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr)) {
        std::string msg = pi.message;
        png_image_free(&pi);
        throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
    }

    const int w = static_cast<int>(pi.width);
    const int h = static_cast<int>(pi.height);
    Image img(w, h, channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c)
                img.at(c, y, x) = buf[(static_cast<std::size_t>(y) * w + x) * channels + c] / 255.0;
    return img;
}

void write_png(const Image& img, const std::filesystem::path& path) {
    const int w = img.width();
    const int h = img.height();
    const int channels = img.channels();
    std::vector<png_byte> buf(static_cast<std::size_t>(w) * h * channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) {
                const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
                buf[(static_cast<std::size_t>(y) * w + x) * channels + c] =
                    static_cast<png_byte>(std::lround(v * 255.0));
            }

    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(w);
    pi.height = static_cast<png_uint_32>(h);
    pi.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (!png_image_write_to_file(&pi, path.c_str(), 0, buf.data(), 0, nullptr))
        throw IoError("cannot write PNG '" + path.string() + "': " + pi.message);
}

}  // namespace lpsr::img
