#pragma once

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seuda/core/tensor.hpp"

namespace seuda::data {

// A decoded raster before any interpretation as image or mask.
struct Raster {
    int height = 0;
    int width = 0;
    int maxval = 255;                  // 255 or 65535
    std::vector<std::uint16_t> px;     // row-major
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void put_be32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(std::uint8_t(x >> 24));
    v.push_back(std::uint8_t(x >> 16));
    v.push_back(std::uint8_t(x >> 8));
    v.push_back(std::uint8_t(x));
}

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::uint8_t* data, std::size_t n) {
    put_be32(out, static_cast<std::uint32_t>(n));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + n);
    const auto crc = ::crc32(0, out.data() + start, static_cast<uInt>(4 + n));
    put_be32(out, static_cast<std::uint32_t>(crc));
}

inline int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    return pb <= pc ? b : c;
}

}  // namespace detail

// --- PNG, grayscale (color type 0), bit depth 8 or 16, non-interlaced ---

inline bool is_png(const std::vector<std::uint8_t>& b) {
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    return b.size() >= 8 && std::memcmp(b.data(), sig, 8) == 0;
}

inline Raster load_png(const std::string& path) {
    const auto buf = detail::read_file(path);
    if (!is_png(buf)) throw std::runtime_error(path + ": not a PNG file");

    Raster r;
    int bitdepth = 0;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    while (pos + 8 <= buf.size()) {
        const std::uint32_t len = detail::be32(&buf[pos]);
        const std::string type(reinterpret_cast<const char*>(&buf[pos + 4]), 4);
        if (pos + 12 + len > buf.size()) throw std::runtime_error(path + ": truncated PNG");
        const std::uint8_t* data = &buf[pos + 8];
        if (type == "IHDR") {
            r.width = static_cast<int>(detail::be32(data));
            r.height = static_cast<int>(detail::be32(data + 4));
            bitdepth = data[8];
            const int colortype = data[9], interlace = data[12];
            if (colortype != 0)
                throw std::runtime_error(path + ": only grayscale PNG supported");
            if (bitdepth != 8 && bitdepth != 16)
                throw std::runtime_error(path + ": only 8/16-bit PNG supported");
            if (interlace != 0) throw std::runtime_error(path + ": interlaced PNG unsupported");
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (r.width <= 0 || r.height <= 0) throw std::runtime_error(path + ": missing IHDR");

    const int bpp = bitdepth / 8;
    const std::size_t stride = std::size_t(r.width) * bpp;
    std::vector<std::uint8_t> raw(std::size_t(r.height) * (stride + 1));
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (::uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw std::runtime_error(path + ": PNG inflate failed");

    // Undo per-row filters in place.
    std::vector<std::uint8_t> prev(stride, 0);
    r.maxval = bitdepth == 8 ? 255 : 65535;
    r.px.resize(std::size_t(r.height) * r.width);
    for (int y = 0; y < r.height; ++y) {
        std::uint8_t* row = &raw[std::size_t(y) * (stride + 1)];
        const int filter = row[0];
        std::uint8_t* cur = row + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            const int a = i >= std::size_t(bpp) ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= std::size_t(bpp) ? prev[i - bpp] : 0;
            int v = cur[i];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += detail::paeth(a, b, c); break;
                default: throw std::runtime_error(path + ": bad PNG filter");
            }
            cur[i] = std::uint8_t(v);
        }
        std::memcpy(prev.data(), cur, stride);
        for (int x = 0; x < r.width; ++x)
            r.px[std::size_t(y) * r.width + x] =
                bpp == 1 ? cur[x] : std::uint16_t((cur[2 * x] << 8) | cur[2 * x + 1]);
    }
    return r;
}

inline void save_png(const std::string& path, const Raster& r) {
    if (r.maxval != 255 && r.maxval != 65535)
        throw std::runtime_error("save_png: maxval must be 255 or 65535");
    const int bpp = r.maxval == 255 ? 1 : 2;
    const std::size_t stride = std::size_t(r.width) * bpp;

    std::vector<std::uint8_t> raw(std::size_t(r.height) * (stride + 1), 0);
    for (int y = 0; y < r.height; ++y) {
        std::uint8_t* row = &raw[std::size_t(y) * (stride + 1)];
        row[0] = 0;  // filter: none
        for (int x = 0; x < r.width; ++x) {
            const std::uint16_t v = r.px[std::size_t(y) * r.width + x];
            if (bpp == 1) {
                row[1 + x] = std::uint8_t(v);
            } else {
                row[1 + 2 * x] = std::uint8_t(v >> 8);
                row[2 + 2 * x] = std::uint8_t(v);
            }
        }
    }

    std::vector<std::uint8_t> z(::compressBound(static_cast<uLong>(raw.size())));
    uLongf z_len = static_cast<uLongf>(z.size());
    if (::compress2(z.data(), &z_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("save_png: deflate failed");
    z.resize(z_len);

    std::vector<std::uint8_t> out = {137, 80, 78, 71, 13, 10, 26, 10};
    std::uint8_t ihdr[13];
    std::vector<std::uint8_t> tmp;
    detail::put_be32(tmp, std::uint32_t(r.width));
    detail::put_be32(tmp, std::uint32_t(r.height));
    std::memcpy(ihdr, tmp.data(), 8);
    ihdr[8] = std::uint8_t(bpp * 8);
    ihdr[9] = 0;   // grayscale
    ihdr[10] = 0;  // deflate
    ihdr[11] = 0;  // adaptive filtering
    ihdr[12] = 0;  // no interlace
    detail::png_chunk(out, "IHDR", ihdr, 13);
    detail::png_chunk(out, "IDAT", z.data(), z.size());
    detail::png_chunk(out, "IEND", nullptr, 0);

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

// --- PGM (P2 ascii / P5 binary), maxval up to 65535 ---

inline Raster load_pgm(const std::string& path) {
    const auto buf = detail::read_file(path);
    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '2' && buf[1] != '5'))
        throw std::runtime_error(path + ": not a PGM file");
    const bool binary = buf[1] == '5';

    std::size_t pos = 2;
    auto next_token = [&]() -> long {
        while (pos < buf.size()) {
            if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (std::isspace(buf[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        long v = 0;
        bool any = false;
        while (pos < buf.size() && std::isdigit(buf[pos])) {
            v = v * 10 + (buf[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw std::runtime_error(path + ": malformed PGM header");
        return v;
    };

    Raster r;
    r.width = static_cast<int>(next_token());
    r.height = static_cast<int>(next_token());
    r.maxval = static_cast<int>(next_token());
    if (r.width <= 0 || r.height <= 0 || r.maxval <= 0 || r.maxval > 65535)
        throw std::runtime_error(path + ": bad PGM dimensions");
    r.px.resize(std::size_t(r.height) * r.width);

    if (binary) {
        ++pos;  // single whitespace after maxval
        const int bpp = r.maxval > 255 ? 2 : 1;
        if (pos + r.px.size() * bpp > buf.size())
            throw std::runtime_error(path + ": truncated PGM");
        for (auto& v : r.px) {
            v = bpp == 1 ? buf[pos] : std::uint16_t((buf[pos] << 8) | buf[pos + 1]);
            pos += bpp;
        }
    } else {
        for (auto& v : r.px) v = static_cast<std::uint16_t>(next_token());
    }
    return r;
}

inline void save_pgm(const std::string& path, const Raster& r) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "P5\n" << r.width << " " << r.height << "\n" << r.maxval << "\n";
    const int bpp = r.maxval > 255 ? 2 : 1;
    std::vector<std::uint8_t> row(std::size_t(r.width) * bpp);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            const std::uint16_t v = r.px[std::size_t(y) * r.width + x];
            if (bpp == 1) {
                row[x] = std::uint8_t(v);
            } else {
                row[2 * x] = std::uint8_t(v >> 8);
                row[2 * x + 1] = std::uint8_t(v);
            }
        }
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

// Dispatch on extension (.png / .pgm), case-insensitive.
inline Raster load_raster(const std::string& path) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "png") return load_png(path);
    if (ext == "pgm") return load_pgm(path);
    throw std::runtime_error(path + ": unsupported raster format (want .png or .pgm)");
}

inline void save_raster(const std::string& path, const Raster& r) {
    auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "png") return save_png(path, r);
    if (ext == "pgm") return save_pgm(path, r);
    throw std::runtime_error(path + ": unsupported raster format (want .png or .pgm)");
}

}  // namespace seuda::data
