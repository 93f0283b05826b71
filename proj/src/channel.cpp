#include "lwm2m/channel.hpp"

#include <cstring>

namespace lwm2m {

const char* security_mode_name(SecurityMode m) {
    return m == SecurityMode::handshake ? "handshake" : "context";
}

bool ReplayWindow::check_and_update(std::uint64_t seq) {
    if (!any_seen) {
        any_seen = true;
        highest = seq;
        mask = 1;
        return true;
    }
    if (seq > highest) {
        std::uint64_t shift = seq - highest;
        mask = shift >= 64 ? 0 : mask << shift;
        mask |= 1;
        highest = seq;
        return true;
    }
    std::uint64_t age = highest - seq;
    if (age >= 64) return false;  // too old to track
    std::uint64_t bit = std::uint64_t{1} << age;
    if (mask & bit) return false;
    mask |= bit;
    return true;
}

std::vector<std::uint8_t> WireRecord::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(8 + token.size() + body.size());
    out.push_back(flags);
    for (int i = 5; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((seq >> (8 * i)) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(token.size()));
    out.insert(out.end(), token.begin(), token.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

WireRecord WireRecord::parse(std::span<const std::uint8_t> data) {
    if (data.size() < 8) raise(Errc::malformed, "record too short");
    WireRecord rec;
    rec.flags = data[0];
    for (int i = 1; i <= 6; ++i) rec.seq = (rec.seq << 8) | data[static_cast<std::size_t>(i)];
    std::size_t token_len = data[7];
    if (token_len > 8 || data.size() < 8 + token_len) raise(Errc::malformed, "bad record token");
    rec.token.assign(data.begin() + 8, data.begin() + 8 + static_cast<std::ptrdiff_t>(token_len));
    rec.body.assign(data.begin() + 8 + static_cast<std::ptrdiff_t>(token_len), data.end());
    return rec;
}

namespace {

std::array<std::uint8_t, crypto::kNonceBytes> record_nonce(std::uint8_t direction, std::uint64_t seq) {
    std::array<std::uint8_t, crypto::kNonceBytes> nonce{};
    nonce[0] = direction;
    for (int i = 0; i < 6; ++i)
        nonce[12 - i] = static_cast<std::uint8_t>((seq >> (8 * i)) & 0xFF);
    return nonce;
}

std::vector<std::uint8_t> record_aad(const WireRecord& rec) {
    std::vector<std::uint8_t> aad;
    aad.push_back(rec.flags);
    for (int i = 5; i >= 0; --i) aad.push_back(static_cast<std::uint8_t>((rec.seq >> (8 * i)) & 0xFF));
    aad.push_back(static_cast<std::uint8_t>(rec.token.size()));
    aad.insert(aad.end(), rec.token.begin(), rec.token.end());
    return aad;
}

}  // namespace

WireRecord seal(SecureChannel& channel, std::span<const std::uint8_t> plaintext,
                std::span<const std::uint8_t> token, bool is_request) {
    if (!channel.established) raise(Errc::channel_closed, "seal on unestablished channel");
    WireRecord rec;
    rec.flags = static_cast<std::uint8_t>((channel.initiator ? 0x01 : 0x00) | (is_request ? 0x02 : 0x00));
    rec.seq = ++channel.send_seq;
    rec.token.assign(token.begin(), token.end());
    auto nonce = record_nonce(rec.flags & 0x01, rec.seq);
    rec.body = crypto::ccm_seal(channel.key, nonce, record_aad(rec), plaintext);
    return rec;
}

std::vector<std::uint8_t> open(SecureChannel& channel, const WireRecord& record) {
    if (!channel.established) raise(Errc::channel_closed, "open on unestablished channel");
    auto nonce = record_nonce(record.flags & 0x01, record.seq);
    auto plain = crypto::ccm_open(channel.key, nonce, record_aad(record), record.body);
    if (!plain) raise(Errc::auth_failed, "record authentication failed");
    if (!channel.replay.check_and_update(record.seq)) raise(Errc::replay_detected, "sequence already seen");
    return std::move(*plain);
}

std::size_t secure_overhead(SecurityMode mode, bool is_request) {
    if (mode == SecurityMode::handshake) return kHandshakeRecordOverhead;
    return is_request ? kContextRequestOverhead : kContextResponseOverhead;
}

std::size_t flight_wire_size(FlightKind kind) {
    switch (kind) {
        case FlightKind::hello: return 45;
        case FlightKind::hello_verify: return 60;
        case FlightKind::hello_with_cookie: return 61;
        case FlightKind::finished: return 53;
    }
    return 0;
}

CookieJar::CookieJar(std::uint64_t seed) {
    for (int i = 0; i < 8; ++i) {
        secret_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(seed >> (8 * i));
        secret_[static_cast<std::size_t>(8 + i)] = static_cast<std::uint8_t>((seed * 0x9E3779B97F4A7C15ULL) >> (8 * i));
    }
    previous_ = secret_;
}

void CookieJar::maybe_rotate(SimTime now) {
    while (now - rotated_at_ >= kRotationPeriod) {
        previous_ = secret_;
        ++counter_;
        for (int i = 0; i < 8; ++i)
            secret_[static_cast<std::size_t>(i)] ^= static_cast<std::uint8_t>((counter_ * 0xD1B54A32D192ED03ULL) >> (8 * i));
        rotated_at_ += kRotationPeriod;
    }
}

std::array<std::uint8_t, 16> CookieJar::mint(SimTime now, const std::string& source_address) {
    maybe_rotate(now);
    return crypto::mac16(secret_, source_address);
}

bool CookieJar::verify(SimTime now, const std::string& source_address, std::span<const std::uint8_t> cookie) {
    maybe_rotate(now);
    if (cookie.size() != 16) return false;
    auto expected = crypto::mac16(secret_, source_address);
    if (std::memcmp(expected.data(), cookie.data(), 16) == 0) return true;
    auto prev = crypto::mac16(previous_, source_address);
    return std::memcmp(prev.data(), cookie.data(), 16) == 0;
}

}  // namespace lwm2m
