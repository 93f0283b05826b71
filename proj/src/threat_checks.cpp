#include "lwm2m/threat_checks.hpp"

#include "lwm2m/demo_world.hpp"
#include "lwm2m/netsim/scenario.hpp"

namespace lwm2m {
namespace {

using netsim::Datagram;
using netsim::ScenarioConfig;
using netsim::ScenarioKind;
using netsim::ScenarioWorld;

std::vector<std::uint8_t> normalized(Message msg) {
    msg.message_id = 0;
    msg.token.clear();
    return msg.encode();
}

// T0: responses for denied-existing and nonexistent targets are
// byte-identical apart from message id and token, and both carry hints.
ThreatResult check_information_disclosure() {
    ThreatResult result{"T0", "information disclosure via unauthorized request", false};
    DemoWorld demo;

    Message existing;
    existing.kind = MsgKind::confirmable;
    existing.code = Code::get;
    existing.message_id = 0x2001;
    existing.token = {0xAA};
    existing.set_uri_path(Path(kLightControlObjectId, 0, 5850));

    Message absent;
    absent.kind = MsgKind::confirmable;
    absent.code = Code::get;
    absent.message_id = 0x2002;
    absent.token = {0xBB};
    absent.set_uri_path(Path(kLightControlObjectId, 7, 5850));

    Message r1 = demo.c1.handle_request(std::nullopt, "stranger", existing, 0);
    Message r2 = demo.c1.handle_request(std::nullopt, "stranger", absent, 0);

    bool identical = normalized(r1) == normalized(r2);
    bool unauthorized = r1.code == Code::unauthorized_401 && r2.code == Code::unauthorized_401;
    bool hinted = false;
    try {
        hinted = !decode_hints(r1.payload).server_uris.empty();
    } catch (const Error&) {
    }
    result.pass = identical && unauthorized && hinted;
    return result;
}

// T1: a flood of cookie-less hellos allocates zero per-peer state.
ThreatResult check_amplification(const ThreatOptions& options) {
    ThreatResult result{"T1", "DoS amplification via open handshake port", false};
    ScenarioConfig cfg;
    cfg.count = 1;
    ScenarioWorld sw(cfg);
    sw.host().node().cookie_required = options.cookie_required;

    std::size_t before = sw.host().node().secure_state_count();
    for (int i = 0; i < 1000; ++i) {
        Datagram hello;
        hello.from = "spoofed" + std::to_string(i);
        hello.to = "host";
        hello.kind = Datagram::Kind::control;
        hello.control = FlightKind::hello;
        hello.wire_size = flight_wire_size(FlightKind::hello);
        sw.host().on_datagram(hello);
    }
    sw.world.sim().run();
    result.pass = sw.host().node().secure_state_count() == before;
    return result;
}

// T2: account lifetime bounds access; lifetime 0 never expires.
ThreatResult check_privilege_lifetime(const ThreatOptions& options) {
    ThreatResult result{"T2", "elevation of privilege when revocation is jammed", false};

    auto read_after = [&](std::uint32_t lifetime_s, SimTime delay) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::c2c;
        cfg.count = 1;
        cfg.lifetime_s = lifetime_s;
        ScenarioWorld sw(cfg);
        sw.host().node().lifetime_enforcement = options.lifetime_enforcement;

        struct Outcome {
            bool flow_ok = false;
            bool read_done = false;
            Code code = Code::bad_request_400;
            bool hinted = false;
        };
        auto outcome = std::make_shared<Outcome>();
        auto* swp = &sw;
        sw.bring_up([swp, outcome, delay](bool up) {
            if (!up) return;
            swp->run_authorization_flow(
                [swp, outcome, delay](bool ok) {
                    outcome->flow_ok = ok;
                    if (!ok) return;
                    swp->world.sim().after(delay, [swp, outcome] {
                        Message read;
                        read.code = Code::get;
                        read.set_uri_path(swp->sensor_path());
                        swp->requester().send_request("host", read, [outcome](const Message& rsp) {
                            outcome->read_done = true;
                            outcome->code = rsp.code;
                            try {
                                outcome->hinted = !decode_hints(rsp.payload).server_uris.empty();
                            } catch (const Error&) {
                            }
                        });
                    });
                },
                nullptr);
        });
        sw.world.sim().run();
        return *outcome;
    };

    auto expired = read_after(30, 31 * kSecond);
    auto eternal = read_after(0, 1000000 * kSecond);

    bool expiry_enforced = expired.flow_ok && expired.read_done &&
                           expired.code == Code::unauthorized_401 && expired.hinted;
    bool zero_means_forever = eternal.flow_ok && eternal.read_done && eternal.code == Code::content_205;
    result.pass = expiry_enforced && zero_means_forever;
    return result;
}

// T3: hinted URIs not matching a registered server are never contacted.
ThreatResult check_rogue_hints() {
    ThreatResult result{"T3", "tampered server hints pointing to a rogue server", false};

    auto run_with_hints = [](std::vector<std::string> uris) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::c2c;
        cfg.count = 1;
        ScenarioWorld sw(cfg);
        sw.host().node().set_default_owner_uris(std::move(uris));
        auto done = std::make_shared<bool>(false);
        auto ok = std::make_shared<bool>(false);
        auto* swp = &sw;
        sw.bring_up([swp, done, ok](bool up) {
            if (!up) return;
            swp->run_authorization_flow(
                [done, ok](bool flow_ok) {
                    *done = true;
                    *ok = flow_ok;
                },
                nullptr);
        });
        sw.world.sim().run();
        return std::tuple<bool, bool, std::uint64_t>{*done, *ok, sw.world.sends_to("rogue")};
    };

    auto [skip_done, skip_ok, skip_rogue_sends] = run_with_hints({"coap://rogue", "coap://server"});
    auto [only_done, only_ok, only_rogue_sends] = run_with_hints({"coap://rogue"});

    bool skips_unknown = skip_done && skip_ok && skip_rogue_sends == 0;
    bool aborts_on_rogue_only = only_done && !only_ok && only_rogue_sends == 0;
    result.pass = skips_unknown && aborts_on_rogue_only;
    return result;
}

}  // namespace

std::vector<ThreatResult> run_threat_checks(const ThreatOptions& options) {
    return {
        check_information_disclosure(),
        check_amplification(options),
        check_privilege_lifetime(options),
        check_rogue_hints(),
    };
}

}  // namespace lwm2m
