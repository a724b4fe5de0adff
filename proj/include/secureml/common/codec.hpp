#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"

namespace secureml {

// Canonical binary encoding used across quotes, manifests, the sealed store
// and the wire protocols. Integers are big-endian; variable-length fields are
// length-prefixed. Encoding a given value always yields the same bytes.
class BinaryWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(BytesView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    // u32 length prefix followed by the bytes.
    void blob(BytesView data);
    // u16 length prefix; rejects strings longer than 64 KiB.
    void str(std::string_view s);

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Bounds-checked reader over a byte view. Every overrun throws DecodeError
// before any value is used, which is also the Iago-boundary discipline of the
// file shield.
class BinaryReader {
public:
    explicit BinaryReader(BytesView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    Bytes raw(std::size_t n);
    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        auto b = raw(N);
        std::array<std::uint8_t, N> out{};
        std::copy(b.begin(), b.end(), out.begin());
        return out;
    }
    Bytes blob(std::size_t max_len = 1u << 30);
    std::string str();

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    void expect_done() const {
        if (!done()) throw DecodeError("trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw DecodeError("truncated input");
    }
    BytesView data_;
    std::size_t pos_ = 0;
};

} // namespace secureml
