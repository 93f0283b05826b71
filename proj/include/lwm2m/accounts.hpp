#pragma once

#include <string>

#include "lwm2m/crypto.hpp"
#include "lwm2m/types.hpp"

namespace lwm2m {

struct Psk {
    std::string identity;
    crypto::Key key{};

    bool operator==(const Psk&) const = default;
};

enum class SecurityMode : std::uint8_t {
    handshake = 0,  // DTLS-style multi-flight establishment
    context = 1,    // OSCORE-style derived context, zero flights
};

const char* security_mode_name(SecurityMode m);

struct ServerAccount {
    ShortServerId short_id = 0;  // >= 1
    std::string uri;
    Psk credentials;
    bool registered = false;
};

// Per-peer client account: the client object + client security object pair.
struct ClientAccount {
    ClientId client_id = 0;
    std::string endpoint_name;
    std::string uri;
    std::uint32_t lifetime_s = 0;  // 0 = never expires
    std::uint32_t observe_period_s = 1;
    SecurityMode security_mode = SecurityMode::handshake;
    Psk credentials;
    SimTime created_at = 0;
    bool expired = false;

    bool expires_at(SimTime now) const {
        return lifetime_s > 0 && now >= created_at + static_cast<SimTime>(lifetime_s) * kSecond;
    }
};

}  // namespace lwm2m
