#include "lwm2m/cbor.hpp"

#include "lwm2m/errors.hpp"

namespace lwm2m::cbor {
namespace {

void put_head(std::vector<std::uint8_t>& out, std::uint8_t major, std::uint64_t arg) {
    std::uint8_t mt = static_cast<std::uint8_t>(major << 5);
    if (arg < 24) {
        out.push_back(static_cast<std::uint8_t>(mt | arg));
        return;
    }
    int extra;
    if (arg <= 0xFF) { out.push_back(mt | 24); extra = 1; }
    else if (arg <= 0xFFFF) { out.push_back(mt | 25); extra = 2; }
    else if (arg <= 0xFFFFFFFF) { out.push_back(mt | 26); extra = 4; }
    else { out.push_back(mt | 27); extra = 8; }
    for (int i = extra - 1; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>((arg >> (8 * i)) & 0xFF));
}

}  // namespace

void put_uint(std::vector<std::uint8_t>& out, std::uint64_t value) { put_head(out, 0, value); }
void put_array_header(std::vector<std::uint8_t>& out, std::size_t count) { put_head(out, 4, count); }
void put_map_header(std::vector<std::uint8_t>& out, std::size_t count) { put_head(out, 5, count); }

void put_text(std::vector<std::uint8_t>& out, const std::string& text) {
    put_head(out, 3, text.size());
    out.insert(out.end(), text.begin(), text.end());
}

std::uint8_t Reader::next_byte() {
    if (pos_ >= data_.size()) raise(Errc::malformed, "truncated CBOR");
    return data_[pos_++];
}

std::uint64_t Reader::read_argument(std::uint8_t initial) {
    std::uint8_t info = initial & 0x1F;
    if (info < 24) return info;
    int extra;
    switch (info) {
        case 24: extra = 1; break;
        case 25: extra = 2; break;
        case 26: extra = 4; break;
        case 27: extra = 8; break;
        default: raise(Errc::malformed, "unsupported CBOR additional info");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < extra; ++i) v = (v << 8) | next_byte();
    return v;
}

std::uint64_t Reader::expect_major(std::uint8_t major) {
    std::uint8_t b = next_byte();
    if ((b >> 5) != major) raise(Errc::malformed, "unexpected CBOR major type");
    return read_argument(b);
}

std::uint64_t Reader::read_uint() { return expect_major(0); }

std::size_t Reader::read_array_header() {
    std::uint64_t n = expect_major(4);
    if (n > data_.size() - pos_) raise(Errc::malformed, "CBOR array count exceeds input");
    return static_cast<std::size_t>(n);
}

std::size_t Reader::read_map_header() {
    std::uint64_t n = expect_major(5);
    if (n > (data_.size() - pos_) / 2) raise(Errc::malformed, "CBOR map count exceeds input");
    return static_cast<std::size_t>(n);
}

std::string Reader::read_text() {
    std::uint64_t len = expect_major(3);
    if (pos_ + len > data_.size()) raise(Errc::malformed, "truncated CBOR text");
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), static_cast<std::size_t>(len));
    pos_ += static_cast<std::size_t>(len);
    return out;
}

void Reader::expect_end() const {
    if (pos_ != data_.size()) raise(Errc::malformed, "trailing bytes after CBOR item");
}

}  // namespace lwm2m::cbor
