#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include "octvf/common.hpp"

namespace octvf {

/// Little-endian byte sink backed by a growable buffer.
class ByteWriter {
public:
    void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u16(uint16_t v) { append_le(v); }
    void u32(uint32_t v) { append_le(v); }
    void u64(uint64_t v) { append_le(v); }
    void i64(int64_t v) { append_le(static_cast<uint64_t>(v)); }

    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        append_le(bits);
    }

    void raw(const void* data, size_t n) {
        buf_.append(static_cast<const char*>(data), n);
    }

    size_t size() const { return buf_.size(); }
    const std::string& bytes() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    template <typename T>
    void append_le(T v) {
        for (size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        }
    }

    std::string buf_;
};

/// Little-endian cursor over an in-memory byte range. Throws ParseError with
/// the current offset on underrun.
class ByteReader {
public:
    ByteReader(const void* data, size_t size)
        : data_(static_cast<const uint8_t*>(data)), size_(size) {}

    explicit ByteReader(const std::string& bytes) : ByteReader(bytes.data(), bytes.size()) {}

    size_t offset() const { return pos_; }
    size_t remaining() const { return size_ - pos_; }
    bool eof() const { return pos_ == size_; }

    uint8_t u8() {
        require(1, "u8");
        return data_[pos_++];
    }

    uint16_t u16() { return read_le<uint16_t>("u16"); }
    uint32_t u32() { return read_le<uint32_t>("u32"); }
    uint64_t u64() { return read_le<uint64_t>("u64"); }
    int64_t i64() { return static_cast<int64_t>(read_le<uint64_t>("i64")); }

    float f32() {
        const uint32_t bits = read_le<uint32_t>("f32");
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    void raw(void* out, size_t n, const char* what = "raw bytes") {
        require(n, what);
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
    }

    void skip(size_t n, const char* what = "payload") {
        require(n, what);
        pos_ += n;
    }

    void require(size_t n, const char* what) const {
        if (size_ - pos_ < n) {
            throw ParseError(pos_, std::string("truncated payload: need ") +
                                       std::to_string(n) + " bytes for " + what +
                                       ", have " + std::to_string(size_ - pos_));
        }
    }

private:
    template <typename T>
    T read_le(const char* what) {
        require(sizeof(T), what);
        T v = 0;
        for (size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(data_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace octvf
