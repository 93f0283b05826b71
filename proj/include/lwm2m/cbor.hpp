#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lwm2m::cbor {

// Just the subset the wire objects need: unsigned integers, definite-length
// arrays, maps and text strings.

void put_uint(std::vector<std::uint8_t>& out, std::uint64_t value);
void put_array_header(std::vector<std::uint8_t>& out, std::size_t count);
void put_map_header(std::vector<std::uint8_t>& out, std::size_t count);
void put_text(std::vector<std::uint8_t>& out, const std::string& text);

// Strict reader; any deviation from the expected item raises Malformed.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint64_t read_uint();
    std::size_t read_array_header();
    std::size_t read_map_header();
    std::string read_text();

    bool done() const { return pos_ >= data_.size(); }
    // Raises Malformed when bytes remain.
    void expect_end() const;

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;

    std::uint8_t next_byte();
    std::uint64_t read_argument(std::uint8_t initial);
    std::uint64_t expect_major(std::uint8_t major);
};

}  // namespace lwm2m::cbor
