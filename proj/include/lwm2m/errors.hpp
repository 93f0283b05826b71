#pragma once

#include <stdexcept>
#include <string>

namespace lwm2m {

enum class Errc {
    not_found,
    type_mismatch,
    malformed,
    value_too_large,
    forbidden,
    owner_unknown,
    no_credentials,
    cookie_rejected,
    peer_expired,
    replay_detected,
    auth_failed,
    channel_closed,
    duplicate_endpoint,
    missing_ep,
    policy_refused,
    no_trusted_server,
    observation_evicted,
    unknown_node,
    config_invalid,
    give_up,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace lwm2m
