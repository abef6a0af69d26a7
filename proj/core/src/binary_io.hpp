#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sgbh::detail {

inline std::uint64_t to_little_endian(std::uint64_t v) noexcept {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
        return out;
    }
}

class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }

    void u64(std::uint64_t v) {
        const std::uint64_t le = to_little_endian(v);
        out_.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed: " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open " + path.string());
    }

    std::uint64_t u64() {
        std::uint64_t le = 0;
        in_.read(reinterpret_cast<char*>(&le), sizeof le);
        if (!in_) throw std::runtime_error("truncated file: " + path_.string());
        return to_little_endian(le);
    }
    double f64() { return std::bit_cast<double>(u64()); }

    void expect_end() {
        in_.peek();
        if (!in_.eof()) throw std::runtime_error("trailing bytes in " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

}  // namespace sgbh::detail
