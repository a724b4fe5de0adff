#include "secureml/common/codec.hpp"

namespace secureml {

void BinaryWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
}

void BinaryWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void BinaryWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void BinaryWriter::blob(BytesView data) {
    if (data.size() > 0xffffffffu) throw Error("blob too large");
    u32(static_cast<std::uint32_t>(data.size()));
    raw(data);
}

void BinaryWriter::str(std::string_view s) {
    if (s.size() > 0xffffu) throw Error("string too long");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s);
}

std::uint8_t BinaryReader::u8() {
    need(1);
    return data_[pos_++];
}

std::uint16_t BinaryReader::u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

std::uint32_t BinaryReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 4;
    return v;
}

std::uint64_t BinaryReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
    pos_ += 8;
    return v;
}

Bytes BinaryReader::raw(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

Bytes BinaryReader::blob(std::size_t max_len) {
    std::uint32_t n = u32();
    if (n > max_len) throw DecodeError("blob length exceeds bound");
    return raw(n);
}

std::string BinaryReader::str() {
    std::uint16_t n = u16();
    auto b = raw(n);
    return std::string(b.begin(), b.end());
}

} // namespace secureml
