#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dora/image.hpp"

namespace dora {

GrayImage to_grayscale(const NormalMapImage& map) {
    GrayImage gray(map.width, map.height);
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            Vec3 c = map.pixel(x, y);
            double lum = 0.299 * c.x + 0.587 * c.y + 0.114 * c.z;
            gray.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(lum, 0.0, 1.0) * 255.0));
        }
    return gray;
}

namespace {

void write_be32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void write_chunk(std::ofstream& file, const char type[4], const std::string& data) {
    std::string head;
    write_be32(head, static_cast<std::uint32_t>(data.size()));
    head.append(type, 4);
    file.write(head.data(), static_cast<std::streamsize>(head.size()));
    file.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::uint32_t crc = crc32(0, nullptr, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
                static_cast<uInt>(data.size()));
    std::string tail;
    write_be32(tail, crc);
    file.write(tail.data(), 4);
}

void save_png(const std::string& path, int width, int height, int channels,
              const std::vector<std::uint8_t>& pixels) {
    // filter type 0 per scanline
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + static_cast<std::size_t>(width) * channels));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * width * channels;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(width) * channels);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    compressed.resize(bound);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    static const unsigned char signature[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    file.write(reinterpret_cast<const char*>(signature), 8);

    std::string ihdr;
    write_be32(ihdr, static_cast<std::uint32_t>(width));
    write_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);               // gray / truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(file, "IHDR", ihdr);
    write_chunk(file, "IDAT", std::string(compressed.begin(), compressed.end()));
    write_chunk(file, "IEND", "");
    if (!file) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void save_png_gray(const GrayImage& image, const std::string& path) {
    save_png(path, image.width, image.height, 1, image.pixels);
}

void save_png_rgb(const NormalMapImage& map, const std::string& path) {
    std::vector<std::uint8_t> pixels(map.rgb.size());
    for (std::size_t i = 0; i < map.rgb.size(); ++i)
        pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(map.rgb[i], 0.0, 1.0) * 255.0));
    save_png(path, map.width, map.height, 3, pixels);
}

void save_png_mask(const EdgeMask& mask, const std::string& path) {
    GrayImage image(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.pixels.size(); ++i)
        image.pixels[i] = mask.pixels[i] ? 255 : 0;
    save_png_gray(image, path);
}

}  // namespace dora
