#include "lwm2m/netsim/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lwm2m::netsim {

using nlohmann::json;

namespace {

AccessFlags flags_from_json(const json& arr) {
    std::set<std::string> names;
    for (const auto& f : arr) names.insert(f.get<std::string>());
    return AccessFlags::from_names(names);
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(Errc::config_invalid, std::string("bad JSON: ") + e.what());
    }
    ScenarioConfig cfg;
    try {
        std::string kind = doc.at("scenario").get<std::string>();
        if (kind == "c2c") cfg.kind = ScenarioKind::c2c;
        else if (kind == "server-centric") cfg.kind = ScenarioKind::server_centric;
        else raise(Errc::config_invalid, "scenario must be c2c or server-centric");

        if (doc.contains("mode")) {
            std::string mode = doc.at("mode").get<std::string>();
            if (mode == "handshake") cfg.mode = SecurityMode::handshake;
            else if (mode == "context") cfg.mode = SecurityMode::context;
            else raise(Errc::config_invalid, "mode must be handshake or context");
        }
        if (doc.contains("topology")) {
            const auto& topo = doc.at("topology");
            std::string tkind = topo.value("kind", "chain");
            if (tkind == "chain") {
                cfg.forwarders = topo.value("forwarders", 0);
                if (cfg.forwarders < 0) raise(Errc::config_invalid, "forwarders must be >= 0");
            } else if (tkind == "random") {
                cfg.random_topology = true;
                cfg.random_nodes = topo.value("nodes", std::size_t{20});
            } else {
                raise(Errc::config_invalid, "topology.kind must be chain or random");
            }
        }
        if (doc.contains("links")) {
            const auto& links = doc.at("links");
            cfg.links.lowpan_latency_ms = links.value("lowpan_latency_ms", kDefaultHopLatencyMs);
            cfg.links.uplink_latency_ms = links.value("uplink_latency_ms", kDefaultUplinkLatencyMs);
            cfg.links.uplink_jitter_ms = links.value("uplink_jitter_ms", 0.0);
            cfg.links.loss_prob = links.value("loss_prob", 0.0);
            if (cfg.links.loss_prob < 0.0 || cfg.links.loss_prob > 1.0)
                raise(Errc::config_invalid, "loss_prob must be within [0,1]");
            if (cfg.links.lowpan_latency_ms < 0.0 || cfg.links.uplink_latency_ms < 0.0)
                raise(Errc::config_invalid, "latencies must be >= 0");
        }
        cfg.interval_ms = doc.value("interval_ms", 1000u);
        cfg.count = doc.value("count", 500u);
        cfg.seed = doc.value("seed", std::uint64_t{1});
        cfg.payload_bytes = doc.value("payload_bytes", 5u);
        cfg.lifetime_s = doc.value("lifetime_s", 0u);
        if (cfg.interval_ms == 0) raise(Errc::config_invalid, "interval_ms must be > 0");
        if (cfg.count == 0) raise(Errc::config_invalid, "count must be > 0");
        if (cfg.payload_bytes < 4 || cfg.payload_bytes > 1024)
            raise(Errc::config_invalid, "payload_bytes must be within [4,1024]");

        if (doc.contains("policy")) {
            for (const auto& rule : doc.at("policy")) {
                cfg.policy.allow(rule.at("requester").get<std::string>(),
                                 rule.at("host").get<std::string>(),
                                 static_cast<ObjectId>(rule.at("object_id").get<unsigned>()),
                                 flags_from_json(rule.at("flags")));
                cfg.policy_given = true;
            }
        }
    } catch (const json::exception& e) {
        raise(Errc::config_invalid, std::string("bad scenario config: ") + e.what());
    }
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::config_invalid, "cannot open scenario file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

std::uint64_t Metrics::total_frames() const {
    std::uint64_t total = 0;
    for (const auto& [_, c] : node_frames) total += c.originated + c.forwarded;
    return total;
}

std::string Metrics::to_csv() const {
    std::string out = "seq,t_emit_us,t_deliver_us,delivered\n";
    char line[96];
    for (const auto& u : updates) {
        std::snprintf(line, sizeof line, "%llu,%lld,%lld,%d\n",
                      static_cast<unsigned long long>(u.seq), static_cast<long long>(u.t_emit),
                      static_cast<long long>(u.delivered ? u.t_deliver : -1), u.delivered ? 1 : 0);
        out += line;
    }
    return out;
}

std::string Metrics::summary_json(const ScenarioConfig& config) const {
    json j;
    j["scenario"] = config.kind == ScenarioKind::c2c ? "c2c" : "server-centric";
    j["mode"] = security_mode_name(config.mode);
    j["seed"] = config.seed;
    j["interval_ms"] = config.interval_ms;
    j["count"] = config.count;
    j["sent"] = sent;
    j["delivered"] = delivered;
    j["delivery_rate"] = delivery_rate();
    j["goodput_Bps"] = goodput_Bps;
    j["median_delivery_ms"] = median_delivery_ms;
    j["provisioning_ops"] = provisioning_ops;
    j["flow_completed"] = flow_completed;
    j["channel_setup_ms"] = channel_setup_us < 0 ? -1.0 : static_cast<double>(channel_setup_us) / 1000.0;
    j["initial_read_ms"] = initial_read_us < 0 ? -1.0 : static_cast<double>(initial_read_us) / 1000.0;
    json frames = json::object();
    for (const auto& [name, c] : node_frames)
        frames[name] = {{"originated", c.originated}, {"forwarded", c.forwarded}};
    j["node_frames"] = frames;
    return j.dump(2);
}

AuthorizationServerApp::AuthorizationServerApp(World& world, Endpoint& server, PolicyTable policy,
                                               SecurityMode mode, std::uint32_t lifetime_s)
    : world_(world), server_(server), policy_(std::move(policy)), mode_(mode), lifetime_s_(lifetime_s) {
    server_.app_request_hook = [this](const std::string& from, const Message& msg) {
        if (msg.uri_path_segments() != std::vector<std::string>{"ac"}) return false;
        return handle_access_request(from, msg);
    };
}

bool AuthorizationServerApp::handle_access_request(const std::string& requester, const Message& msg) {
    AccessRequest request;
    try {
        request = decode_access_request(msg);
    } catch (const Error&) {
        server_.send_response(requester, msg.make_response(Code::bad_request_400));
        return true;
    }

    ++provisioning_ops_;  // the access request itself is operation (i)
    op_wire_sizes_.push_back(msg.encode().size() +
                             secure_overhead(SecurityMode::handshake, true));

    try {
        policy_.check(requester, request);
    } catch (const Error&) {
        ++refusals_;
        server_.send_response(requester, msg.make_response(Code::unauthorized_401));
        return true;
    }

    ProvisioningMaterial material;
    material.requester_endpoint = requester;
    material.requester_uri = "coap://" + requester;
    material.host_endpoint = request.target_endpoint;
    material.host_uri = "coap://" + request.target_endpoint;
    auto id_key = std::pair{request.target_endpoint, requester};
    auto assigned = assigned_ids_.find(id_key);
    if (assigned == assigned_ids_.end()) assigned = assigned_ids_.emplace(id_key, next_client_id_++).first;
    material.requester_id_on_host = assigned->second;
    material.lifetime_s = lifetime_s_;
    material.mode = mode_;
    material.granting_server = 1;
    if (request.need_credentials) {
        material.credentials = world_.make_psk("psk-" + requester + "-" + request.target_endpoint);
        std::string key_hex;
        for (auto b : material.credentials.key) {
            key_hex += "0123456789abcdef"[b >> 4];
            key_hex += "0123456789abcdef"[b & 0xF];
        }
        issued_keys_.insert(key_hex);
    }

    run_plan(requester, msg, build_provisioning_plan(request, material), 0, {});
    return true;
}

void AuthorizationServerApp::run_plan(const std::string& requester, const Message& original,
                                      std::vector<ProvisioningOp> plan, std::size_t index,
                                      std::vector<std::pair<std::string, Path>> created) {
    if (index >= plan.size()) {
        ++grants_;
        server_.send_response(requester, original.make_response(Code::created_201));
        return;
    }
    ProvisioningOp op = plan[index];
    op.request.token = server_.node().next_token();
    ++provisioning_ops_;
    op_wire_sizes_.push_back(op.request.encode().size() +
                             secure_overhead(SecurityMode::handshake, true));
    server_.send_request(
        op.dest_endpoint, op.request,
        [this, requester, original, plan, index, created, op](const Message& rsp) mutable {
            if (rsp.code != Code::created_201 && rsp.code != Code::changed_204) {
                rollback(std::move(created));
                server_.send_response(requester, original.make_response(Code::unauthorized_401));
                return;
            }
            if (auto path = rsp.uri_path()) created.emplace_back(op.dest_endpoint, *path);
            run_plan(requester, original, std::move(plan), index + 1, std::move(created));
        },
        [this, requester, original, created] {
            rollback(created);
            server_.send_response(requester, original.make_response(Code::unauthorized_401));
        });
}

void AuthorizationServerApp::rollback(std::vector<std::pair<std::string, Path>> created) {
    // Compensating deletes, best effort, newest first.
    for (auto it = created.rbegin(); it != created.rend(); ++it) {
        Message del;
        del.code = Code::del;
        del.set_uri_path(it->second);
        server_.send_request(it->first, del, [](const Message&) {});
    }
}

namespace {

ObjectSchema sensor_schema() { return {{5700, ValueKind::opaque}}; }

std::vector<std::uint8_t> payload_for(std::uint64_t seq, std::uint32_t size) {
    std::vector<std::uint8_t> out(size, 0);
    out[0] = static_cast<std::uint8_t>(seq >> 24);
    out[1] = static_cast<std::uint8_t>(seq >> 16);
    out[2] = static_cast<std::uint8_t>(seq >> 8);
    out[3] = static_cast<std::uint8_t>(seq);
    return out;
}

std::uint64_t seq_from_payload(const std::vector<std::uint8_t>& payload) {
    if (payload.size() < 4) return ~0ULL;
    return (static_cast<std::uint64_t>(payload[0]) << 24) | (static_cast<std::uint64_t>(payload[1]) << 16) |
           (static_cast<std::uint64_t>(payload[2]) << 8) | payload[3];
}

Topology topology_for(const ScenarioConfig& cfg) {
    return cfg.random_topology ? Topology::random(cfg.random_nodes, cfg.seed * 31 + 7)
                               : Topology::chain(cfg.forwarders);
}

}  // namespace

ScenarioWorld::ScenarioWorld(const ScenarioConfig& cfg)
    : config(cfg), world(topology_for(cfg), cfg.links, cfg.seed) {
    if (!config.policy_given) {
        config.policy.allow("requester", "host", kGenericSensorObjectId,
                            AccessFlags::of(Access::read).with(Access::write));
        config.policy_given = true;
    }
    Endpoint& host = world.add_endpoint("host");
    Endpoint& requester = world.add_endpoint("requester");
    Endpoint& server = world.add_endpoint("server");

    Psk host_psk = world.make_psk("host@server");
    Psk requester_psk = world.make_psk("requester@server");

    for (Endpoint* client : {&host, &requester}) {
        ServerAccount account;
        account.short_id = 1;
        account.uri = "coap://server";
        account.credentials = client == &host ? host_psk : requester_psk;
        client->node().add_server_account(account);
        client->node().set_default_owner_uris({"coap://server"});
        client->node().tree().declare_object(kGenericSensorObjectId, sensor_schema());
        client->node().tree().create_instance(kGenericSensorObjectId, 0,
                                              {{5700, ResourceValue::opaque(payload_for(0, cfg.payload_bytes))}});
    }

    server.node().set_default_owner_uris({"coap://server"});
    ClientAccount host_acct;
    host_acct.client_id = 1;
    host_acct.endpoint_name = "host";
    host_acct.uri = "coap://host";
    host_acct.credentials = host_psk;
    server.node().put_client_account(host_acct, 0);
    ClientAccount requester_acct;
    requester_acct.client_id = 2;
    requester_acct.endpoint_name = "requester";
    requester_acct.uri = "coap://requester";
    requester_acct.credentials = requester_psk;
    server.node().put_client_account(requester_acct, 0);

    auth_app_storage_ = std::make_unique<AuthorizationServerApp>(world, server, config.policy, config.mode,
                                                                 config.lifetime_s);
    auth_app = auth_app_storage_.get();
}

void ScenarioWorld::bring_up(std::function<void(bool)> done) {
    auto shared_done = std::make_shared<std::function<void(bool)>>(std::move(done));
    auto register_client = [this](const std::string& name, std::function<void(bool)> next) {
        Endpoint* client = &world.endpoint(name);
        client->open_channel_to("server", [name, next, client](bool ok) {
            if (!ok) {
                next(false);
                return;
            }
            Message reg;
            reg.code = Code::post;
            reg.add_option_string(kOptUriPath, "rd");
            reg.add_option_string(kOptUriQuery, "ep=" + name);
            client->send_request(
                "server", reg,
                [next, client](const Message& rsp) {
                    if (rsp.code == Code::created_201) client->node().servers().at(1).registered = true;
                    next(rsp.code == Code::created_201);
                },
                [next] { next(false); });
        });
    };
    register_client("host", [this, register_client, shared_done](bool ok) {
        if (!ok) {
            (*shared_done)(false);
            return;
        }
        register_client("requester", [shared_done](bool ok2) { (*shared_done)(ok2); });
    });
}

void ScenarioWorld::run_authorization_flow(std::function<void(bool)> done, Metrics* metrics) {
    Endpoint* req = &requester();
    auto shared_done = std::make_shared<std::function<void(bool)>>(std::move(done));
    auto fail = [shared_done] { (*shared_done)(false); };

    // Step 1: unauthorized resource request on plaintext transport.
    Message probe;
    probe.code = Code::get;
    probe.set_uri_path(sensor_path());
    req->send_request(
        "host", probe,
        [this, req, shared_done, fail, metrics](const Message& rsp) {
            if (rsp.code != Code::unauthorized_401) {
                fail();
                return;
            }
            OwnerServerHints hints;
            try {
                hints = decode_hints(rsp.payload);
            } catch (const Error&) {
                fail();
                return;
            }
            // Step 2: only already-registered servers are trusted.
            try {
                validate_hints(req->node().servers(), hints);
            } catch (const Error&) {
                fail();
                return;
            }

            // Step 3: the access request.
            AccessRequest request;
            request.target_endpoint = "host";
            request.need_credentials = true;
            request.items.push_back({kGenericSensorObjectId, 0, AccessFlags::of(Access::read)});
            Message ac = encode_access_request(request);
            req->send_request(
                "server", ac,
                [this, req, shared_done, fail, metrics](const Message& rsp) {
                    if (rsp.code != Code::created_201) {
                        fail();
                        return;
                    }
                    // Steps 4-5 done: credentials installed on both sides.
                    SimTime hs_start = world.sim().now();
                    req->open_channel_to("host", [this, req, shared_done, fail, metrics, hs_start](bool ok) {
                        if (!ok) {
                            fail();
                            return;
                        }
                        if (metrics) metrics->channel_setup_us = world.sim().now() - hs_start;
                        // Steps 7-8: the initial authorized C2C read.
                        Message read;
                        read.code = Code::get;
                        read.set_uri_path(sensor_path());
                        read.token = req->node().next_token();
                        SimTime read_start = world.sim().now();
                        if (metrics)
                            metrics->initial_read_wire =
                                read.encode().size() + secure_overhead(config.mode, true);
                        req->send_request(
                            "host", read,
                            [this, shared_done, metrics, read_start](const Message& rsp) {
                                bool ok2 = rsp.code == Code::content_205;
                                if (metrics && ok2) {
                                    metrics->initial_read_us = world.sim().now() - read_start;
                                    metrics->initial_content_wire =
                                        rsp.encode().size() + secure_overhead(config.mode, false);
                                }
                                (*shared_done)(ok2);
                            },
                            [fail] { fail(); });
                    });
                },
                [fail] { fail(); });
        },
        [fail] { fail(); }, /*plaintext=*/true);
}

Metrics run_scenario(const ScenarioConfig& config) {
    ScenarioWorld sw(config);
    Metrics metrics;
    metrics.updates.resize(config.count);
    for (std::uint32_t i = 0; i < config.count; ++i) metrics.updates[i].seq = i;

    Endpoint& host = sw.host();
    Endpoint& requester = sw.requester();
    Endpoint& server = sw.server();
    const Path sensor = sw.sensor_path();

    auto record_delivery = [&metrics](std::uint64_t seq, SimTime now) {
        if (seq >= metrics.updates.size()) return;
        UpdateRecord& u = metrics.updates[seq];
        if (!u.delivered) {
            u.delivered = true;
            u.t_deliver = now;
        }
    };

    bool c2c = config.kind == ScenarioKind::c2c;

    if (c2c) {
        requester.on_notification = [&](const std::string& from, const Message& msg) {
            if (from == "host") record_delivery(seq_from_payload(msg.payload), sw.world.sim().now());
        };
    } else {
        // Relay: the server observes the host and writes each update to the
        // requester.
        server.on_notification = [&](const std::string& from, const Message& msg) {
            if (from != "host") return;
            Message write;
            write.code = Code::put;
            write.set_uri_path(sensor);
            write.payload = msg.payload;
            server.send_request("requester", write, [](const Message&) {});
        };
        requester.on_request_delivered = [&](const std::string& from, const Message& msg) {
            if (from == "server" && msg.code == Code::put)
                record_delivery(seq_from_payload(msg.payload), sw.world.sim().now());
        };
    }

    auto start_updates = [&] {
        sw.world.reset_counters();  // frame counters cover the data phase
        SimTime t0 = sw.world.sim().now() + 500 * kMillisecond;
        for (std::uint32_t i = 0; i < config.count; ++i) {
            sw.world.sim().at(t0 + static_cast<SimTime>(i) * config.interval_ms * kMillisecond, [&, i] {
                metrics.updates[i].t_emit = sw.world.sim().now();
                ++metrics.sent;
                host.node().set_value(sensor, ResourceValue::opaque(payload_for(i, config.payload_bytes)));
                host.pump_outgoing();
            });
        }
    };

    sw.bring_up([&](bool up) {
        if (!up) return;
        if (c2c) {
            sw.run_authorization_flow(
                [&](bool ok) {
                    metrics.flow_completed = ok;
                    if (!ok) return;
                    // Observe the sensor, then start the update stream.
                    Message observe;
                    observe.code = Code::get;
                    observe.set_uri_path(sensor);
                    observe.set_observe(0);
                    requester.send_request("host", observe, [&](const Message& rsp) {
                        if (rsp.code == Code::content_205) start_updates();
                    });
                },
                &metrics);
        } else {
            // Server-centric: the server observes the host directly.
            Message observe;
            observe.code = Code::get;
            observe.set_uri_path(sensor);
            observe.set_observe(0);
            server.send_request("host", observe, [&](const Message& rsp) {
                metrics.flow_completed = rsp.code == Code::content_205;
                if (metrics.flow_completed) start_updates();
            });
        }
    });

    sw.world.sim().run();

    metrics.provisioning_ops = sw.auth_app->provisioning_ops();
    metrics.provisioning_wire_sizes = sw.auth_app->op_wire_sizes();
    for (const auto& u : metrics.updates)
        if (u.delivered) ++metrics.delivered;

    double span_s = static_cast<double>(config.count) * config.interval_ms / 1000.0;
    metrics.goodput_Bps =
        span_s > 0 ? static_cast<double>(metrics.delivered) * config.payload_bytes / span_s : 0.0;

    std::vector<SimTime> times;
    for (const auto& u : metrics.updates)
        if (u.delivered) times.push_back(u.t_deliver - u.t_emit);
    if (!times.empty()) {
        std::sort(times.begin(), times.end());
        metrics.median_delivery_ms = static_cast<double>(times[times.size() / 2]) / 1000.0;
    }
    metrics.node_frames = sw.world.counters();
    return metrics;
}

}  // namespace lwm2m::netsim
