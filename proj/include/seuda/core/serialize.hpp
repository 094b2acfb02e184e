#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seuda/core/tensor.hpp"

namespace seuda {

// Little-endian binary stream helpers shared by the checkpoint formats.
// Values are written as raw bytes of fixed-width types, so a file written
// by one build reads back bit-identically on the same platform.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path);
    }

    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }

    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }

    template <typename T>
    void tensor(const Tensor<T>& t) {
        u32(static_cast<std::uint32_t>(t.channels()));
        u32(static_cast<std::uint32_t>(t.height()));
        u32(static_cast<std::uint32_t>(t.width()));
        raw(t.data(), t.size() * sizeof(T));
    }

    template <typename T>
    void vec(const std::vector<T>& v) {
        static_assert(std::is_arithmetic_v<T>);
        u64(v.size());
        raw(v.data(), v.size() * sizeof(T));
    }

    void raw(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        if (!out_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open " + path);
    }

    std::uint32_t u32() {
        std::uint32_t v;
        raw(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }

    std::string str() {
        std::string s(u64(), '\0');
        raw(s.data(), s.size());
        return s;
    }

    template <typename T>
    Tensor<T> tensor() {
        const int c = static_cast<int>(u32());
        const int h = static_cast<int>(u32());
        const int w = static_cast<int>(u32());
        Tensor<T> t(c, h, w);
        raw(t.data(), t.size() * sizeof(T));
        return t;
    }

    template <typename T>
    std::vector<T> vec() {
        static_assert(std::is_arithmetic_v<T>);
        std::vector<T> v(u64());
        raw(v.data(), v.size() * sizeof(T));
        return v;
    }

    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw std::runtime_error("read failed (truncated file?)");
    }

private:
    std::ifstream in_;
};

}  // namespace seuda
