#pragma once

// Little-endian byte IO used by the checkpoint and feature-file codecs.
// Readers parse an in-memory buffer and report truncation with the byte
// position, writers append to a growable buffer.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tinysiamese/errors.hpp"

namespace tinysiamese::binio {

inline std::vector<unsigned char> read_file(const std::string& path, const char* context) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string(context) + ": cannot open '" + path + "'");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return buf;
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& buf,
                       const char* context) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(std::string(context) + ": cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError(std::string(context) + ": write to '" + path + "' failed");
}

class Reader {
  public:
    Reader(const std::vector<unsigned char>& buf, std::string context)
        : buf_(buf), context_(std::move(context)) {}

    std::size_t remaining() const { return buf_.size() - pos_; }

    void expect_end() {
        if (pos_ != buf_.size()) {
            throw DataError(context_ + ": trailing data after byte " + std::to_string(pos_));
        }
    }

    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_]) |
                          static_cast<std::uint16_t>(buf_[pos_ + 1]) << 8;
        pos_ += 2;
        return v;
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = v << 8 | buf_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        return v;
    }

    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        return std::bit_cast<float>(bits);
    }

    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = v << 8 | buf_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 8;
        return std::bit_cast<double>(v);
    }

    void raw(unsigned char* dst, std::size_t n, const char* what) {
        need(n, what);
        std::memcpy(dst, buf_.data() + pos_, n);
        pos_ += n;
    }

  private:
    void need(std::size_t n, const char* what) {
        if (pos_ + n > buf_.size()) {
            throw DataError(context_ + ": truncated file while reading " + what + " at byte " +
                            std::to_string(pos_));
        }
    }

    const std::vector<unsigned char>& buf_;
    std::string context_;
    std::size_t pos_ = 0;
};

class Writer {
  public:
    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<unsigned char>(v & 0xff));
        buf_.push_back(static_cast<unsigned char>(v >> 8 & 0xff));
    }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<unsigned char>(v >> 8 * i & 0xff));
    }

    void f32(float x) { u32(std::bit_cast<std::uint32_t>(x)); }

    void f64(double x) {
        const std::uint64_t v = std::bit_cast<std::uint64_t>(x);
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<unsigned char>(v >> 8 * i & 0xff));
    }

    void raw(const unsigned char* src, std::size_t n) { buf_.insert(buf_.end(), src, src + n); }

    const std::vector<unsigned char>& buffer() const { return buf_; }

  private:
    std::vector<unsigned char> buf_;
};

}  // namespace tinysiamese::binio
