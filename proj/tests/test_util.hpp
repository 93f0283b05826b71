#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lwm2m/errors.hpp"

namespace testutil {

inline std::vector<std::uint8_t> from_hex(const std::string& hex) {
    std::vector<std::uint8_t> out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    return out;
}

inline std::string to_hex(const std::vector<std::uint8_t>& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 0xF];
    }
    return out;
}

inline std::vector<std::uint8_t> read_golden(const std::string& name) {
    std::ifstream in(std::string(GOLDEN_DIR) + "/" + name, std::ios::binary);
    if (!in) throw std::runtime_error("missing golden file: " + name);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline lwm2m::Errc errc_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const lwm2m::Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected lwm2m::Error");
}

}  // namespace testutil
