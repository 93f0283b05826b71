#include "lwm2m/node.hpp"

#include <algorithm>

#include "lwm2m/tlv.hpp"

namespace lwm2m {

Node::Node(std::string name, std::uint64_t seed)
    : name_(std::move(name)),
      tree_(internal_schemas()),
      cookies_(seed ^ 0xC00C1E5),
      mid_seq_(static_cast<std::uint16_t>(seed * 2654435761u)),
      token_seq_(seed) {
    tree_.on_change = [this](const Path& path) { emit_notifications(path); };
}

void Node::add_server_account(ServerAccount account) {
    if (account.short_id < 1) raise(Errc::config_invalid, "server short id must be >= 1");
    servers_[account.short_id] = std::move(account);
}

ClientAccount& Node::put_client_account(ClientAccount account, SimTime now) {
    if (account.endpoint_name.empty()) raise(Errc::config_invalid, "client account needs an endpoint name");
    account.created_at = now;
    account.expired = false;
    client_ids_[account.endpoint_name] = account.client_id;
    auto [it, _] = clients_.insert_or_assign(account.client_id, std::move(account));
    return it->second;
}

ClientAccount* Node::client_by_endpoint(const std::string& endpoint) {
    auto id = client_ids_.find(endpoint);
    if (id == client_ids_.end()) return nullptr;
    auto it = clients_.find(id->second);
    return it == clients_.end() ? nullptr : &it->second;
}

std::vector<ClientId> Node::expire_accounts(SimTime now) {
    std::vector<ClientId> expired;
    if (!lifetime_enforcement) return expired;
    for (auto& [id, account] : clients_) {
        if (!account.expired && account.expires_at(now)) {
            account.expired = true;
            close_channel(account.endpoint_name);
            expired.push_back(id);
        }
    }
    return expired;
}

OwnerServerHints Node::current_hints() const {
    return hints_for(acls_, servers_, default_owner_uris_);
}

SecureChannel& Node::ensure_channel(const std::string& peer, SecurityMode mode, const crypto::Key& key,
                                    bool initiator, bool established) {
    SecureChannel& ch = channels_[peer];
    if (!ch.established) {
        ch.peer = peer;
        ch.mode = mode;
        ch.key = key;
        ch.initiator = initiator;
        ch.established = established;
    }
    return ch;
}

SecureChannel* Node::channel(const std::string& peer) {
    auto it = channels_.find(peer);
    return it == channels_.end() ? nullptr : &it->second;
}

void Node::close_channel(const std::string& peer) { channels_.erase(peer); }

std::optional<Principal> Node::principal_for(const std::string& peer_endpoint) const {
    for (const auto& [sid, account] : servers_)
        if (account.uri == "coap://" + peer_endpoint || account.uri == peer_endpoint)
            return Principal::server(sid);
    auto id = client_ids_.find(peer_endpoint);
    if (id != client_ids_.end()) {
        auto it = clients_.find(id->second);
        if (it != clients_.end() && !it->second.expired) return Principal::client(id->second);
    }
    return std::nullopt;
}

std::vector<std::uint8_t> Node::next_token() {
    std::uint64_t v = ++token_seq_ * 0x9E3779B97F4A7C15ULL;
    return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

Message Node::unauthorized_with_hints(const Message& request) {
    Message rsp = request.make_response(Code::unauthorized_401);
    rsp.payload = encode_hints(current_hints());
    ++hint_responses;
    return rsp;
}

Message Node::handle_request(const std::optional<Principal>& principal, const std::string& peer_endpoint,
                             const Message& request, SimTime now) {
    if (!principal) return unauthorized_with_hints(request);
    try {
        return dispatch(*principal, peer_endpoint, request, now);
    } catch (const Error& e) {
        // Handlers report protocol failures via response codes; anything that
        // escapes maps to a generic bad request.
        Message rsp = request.make_response(Code::bad_request_400);
        std::string what = e.what();
        rsp.payload.assign(what.begin(), what.end());
        return rsp;
    }
}

Message Node::dispatch(const Principal& principal, const std::string& peer_endpoint, const Message& request,
                       SimTime now) {
    auto segments = request.uri_path_segments();
    if (segments == std::vector<std::string>{"rd"} && request.code == Code::post)
        return handle_register(peer_endpoint, request);

    auto path = request.uri_path();
    if (!path) return generic_denied(request);

    switch (request.code) {
        case Code::get: {
            auto queries = request.uri_queries();
            if (std::find(queries.begin(), queries.end(), "disc") != queries.end())
                return handle_discover(principal, *path, request);
            if (request.observe().has_value())
                return handle_observe(principal, peer_endpoint, *path, request);
            return handle_read(principal, *path, request);
        }
        case Code::put:
            if (path->is_instance() && is_internal_object(path->object_id) && principal.is_server())
                return materialize_internal(principal, path->object_id, *path->instance_id, request, now);
            return handle_write(principal, *path, request);
        case Code::post:
            if (path->is_resource()) return handle_execute(principal, *path, request);
            if (path->is_object() && is_internal_object(path->object_id) && principal.is_server())
                return materialize_internal(principal, path->object_id, std::nullopt, request, now);
            if (path->is_object()) return handle_create(principal, *path, request);
            return generic_denied(request);
        case Code::del:
            return handle_delete(principal, *path, request);
        default:
            return generic_denied(request);
    }
}

Message Node::handle_read(const Principal& principal, const Path& path, const Message& request) {
    if (!check_access(principal, Access::read, path, acls_, servers_.size())) return generic_denied(request);
    try {
        Message rsp = request.make_response(Code::content_205);
        if (path.is_resource()) {
            rsp.payload = tree_.get_resource(path).leaf_bytes();
        } else if (path.is_instance()) {
            rsp.payload = tlv::encode_instance(tree_.snapshot(path));
        } else {
            return generic_denied(request);
        }
        return rsp;
    } catch (const Error& e) {
        if (e.code() == Errc::not_found) return generic_denied(request);
        throw;
    }
}

Message Node::handle_observe(const Principal& principal, const std::string& peer, const Path& path,
                             const Message& request) {
    if (!check_access(principal, Access::read, path, acls_, servers_.size())) return generic_denied(request);
    std::uint32_t mode = *request.observe();
    if (mode == 1) {  // deregister
        std::erase_if(observations_, [&](const Observation& o) {
            return o.observer_endpoint == peer && o.path == path && o.token == request.token;
        });
        return handle_read(principal, path, request);
    }

    bool exists = std::any_of(observations_.begin(), observations_.end(), [&](const Observation& o) {
        return o.observer_endpoint == peer && o.path == path && o.token == request.token;
    });
    if (!exists) {
        if (observations_.size() >= kMaxObservations) {
            Message rsp = request.make_response(Code::bad_request_400);
            static const std::string what = "ObservationEvicted";
            rsp.payload.assign(what.begin(), what.end());
            return rsp;
        }
        Observation obs;
        obs.observer = principal;
        obs.observer_endpoint = peer;
        obs.path = path;
        obs.token = request.token;
        auto queries = request.uri_queries();
        obs.confirmable = std::find(queries.begin(), queries.end(), "con") != queries.end();
        observations_.push_back(std::move(obs));
    }
    Message rsp = handle_read(principal, path, request);
    if (rsp.code == Code::content_205) rsp.set_observe(0);
    return rsp;
}

Message Node::handle_discover(const Principal& principal, const Path& path, const Message& request) {
    // Servers may always discover; clients need the explicit discover bit.
    if (!principal.is_server() &&
        !check_access(principal, Access::discover, path, acls_, servers_.size()))
        return generic_denied(request);
    if (!tree_.knows_object(path.object_id)) return generic_denied(request);

    std::string links;
    for (InstanceId inst : tree_.instances(path.object_id)) {
        if (path.instance_id && *path.instance_id != inst) continue;
        links += "</" + std::to_string(path.object_id) + "/" + std::to_string(inst) + ">,";
        for (const auto& [rid, _] : tree_.snapshot(Path(path.object_id, inst)).resources)
            links += "</" + std::to_string(path.object_id) + "/" + std::to_string(inst) + "/" +
                     std::to_string(rid) + ">,";
    }
    if (!links.empty()) links.pop_back();
    Message rsp = request.make_response(Code::content_205);
    rsp.payload.assign(links.begin(), links.end());
    return rsp;
}

Message Node::handle_write(const Principal& principal, const Path& path, const Message& request) {
    if (!check_access(principal, Access::write, path, acls_, servers_.size())) return generic_denied(request);
    try {
        if (path.is_resource()) {
            const auto& schema = tree_.schema(path.object_id);
            auto kind = schema.find(*path.resource_id);
            if (kind == schema.end()) return generic_denied(request);
            tree_.set_resource(path, ResourceValue::from_leaf_bytes(kind->second, request.payload.data(),
                                                                    request.payload.size()));
        } else if (path.is_instance()) {
            auto values = tlv::decode_instance(request.payload, tree_.schema(path.object_id));
            for (const auto& [rid, value] : values)
                tree_.set_resource(Path(path.object_id, *path.instance_id, rid), value);
        } else {
            return generic_denied(request);
        }
        return request.make_response(Code::changed_204);
    } catch (const Error& e) {
        if (e.code() == Errc::not_found) return generic_denied(request);
        if (e.code() == Errc::type_mismatch || e.code() == Errc::malformed) {
            Message rsp = request.make_response(Code::bad_request_400);
            std::string what = e.what();
            rsp.payload.assign(what.begin(), what.end());
            return rsp;
        }
        throw;
    }
}

Message Node::handle_create(const Principal& principal, const Path& path, const Message& request) {
    if (!check_access(principal, Access::create, path, acls_, servers_.size())) return generic_denied(request);
    if (!tree_.knows_object(path.object_id)) return generic_denied(request);

    std::map<ResourceId, ResourceValue> resources;
    try {
        resources = tlv::decode_instance(request.payload, tree_.schema(path.object_id));
    } catch (const Error&) {
        return request.make_response(Code::bad_request_400);
    }
    InstanceId inst = tree_.create_instance(path.object_id, std::nullopt, std::move(resources));

    if (principal.is_server()) {
        // The creating server owns the new instance's ACL.
        AclInstance acl;
        acl.object_ref = path.object_id;
        acl.instance_ref = inst;
        acl.owner = principal.id;
        acl.acl[principal.id] = AccessFlags{0x1F};
        acls_.add_server_acl(acl);
    } else {
        const ClientAclInstance* authorizing = acls_.find_client_acl(path.object_id, std::nullopt);
        std::set<ShortServerId> known;
        for (const auto& [sid, _] : servers_) known.insert(sid);
        auto [server_acl, client_acl] =
            apply_create_side_effects(static_cast<ClientId>(principal.id), *authorizing, path.object_id,
                                      inst, kDefaultCreateGrants, known);
        acls_.add_server_acl(server_acl);
        acls_.add_client_acl(client_acl);
    }

    Message rsp = request.make_response(Code::created_201);
    rsp.add_option_string(kOptUriPath, std::to_string(path.object_id));
    rsp.add_option_string(kOptUriPath, std::to_string(inst));
    return rsp;
}

Message Node::handle_execute(const Principal& principal, const Path& path, const Message& request) {
    if (!check_access(principal, Access::execute, path, acls_, servers_.size())) return generic_denied(request);
    if (!tree_.has_instance(path.object_id, *path.instance_id)) return generic_denied(request);
    // No executable side effects in the evaluation objects; success, no body.
    return request.make_response(Code::changed_204);
}

Message Node::handle_delete(const Principal& principal, const Path& path, const Message& request) {
    if (!path.is_instance()) return generic_denied(request);
    if (!check_access(principal, Access::del, path, acls_, servers_.size())) return generic_denied(request);
    try {
        tree_.remove_instance(path.object_id, *path.instance_id);
    } catch (const Error& e) {
        if (e.code() == Errc::not_found) return generic_denied(request);
        throw;
    }
    acls_.remove_instances_for(path.object_id, *path.instance_id);
    std::erase_if(observations_, [&](const Observation& o) {
        return o.path.object_id == path.object_id && o.path.instance_id == path.instance_id;
    });
    return request.make_response(Code::changed_204);
}

Message Node::handle_register(const std::string& peer_endpoint, const Message& request) {
    std::string ep;
    for (const auto& q : request.uri_queries())
        if (q.rfind("ep=", 0) == 0) ep = q.substr(3);
    if (ep.empty()) {
        Message rsp = request.make_response(Code::bad_request_400);
        static const std::string what = "MissingEp";
        rsp.payload.assign(what.begin(), what.end());
        return rsp;
    }
    auto it = registered_.find(ep);
    if (it != registered_.end() && it->second != peer_endpoint) {
        Message rsp = request.make_response(Code::bad_request_400);
        static const std::string what = "DuplicateEndpoint";
        rsp.payload.assign(what.begin(), what.end());
        return rsp;
    }
    registered_[ep] = peer_endpoint;
    return request.make_response(Code::created_201);
}

Message Node::materialize_internal(const Principal& principal, ObjectId object_id,
                                   std::optional<InstanceId> instance_id, const Message& request,
                                   SimTime now) {
    std::map<ResourceId, ResourceValue> values;
    try {
        values = tlv::decode_instance(request.payload, tree_.schema(object_id));
    } catch (const Error&) {
        return request.make_response(Code::bad_request_400);
    }

    InstanceId inst;
    bool created;
    if (instance_id && tree_.has_instance(object_id, *instance_id)) {
        inst = *instance_id;
        created = false;
        for (const auto& [rid, value] : values)
            tree_.set_resource(Path(object_id, inst, rid), value);
    } else {
        inst = tree_.create_instance(object_id, instance_id, values);
        created = true;
    }

    if (!apply_internal_values(principal, object_id, inst, values, now))
        return request.make_response(Code::bad_request_400);

    Message rsp = request.make_response(created ? Code::created_201 : Code::changed_204);
    rsp.add_option_string(kOptUriPath, std::to_string(object_id));
    rsp.add_option_string(kOptUriPath, std::to_string(inst));
    return rsp;
}

bool Node::apply_internal_values(const Principal& principal, ObjectId object_id, InstanceId inst,
                                 const std::map<ResourceId, ResourceValue>& values, SimTime now) {
    auto get_int = [&](ResourceId rid, std::int64_t fallback) {
        auto it = values.find(rid);
        return it == values.end() ? fallback : it->second.as_integer();
    };
    auto get_str = [&](ResourceId rid) {
        auto it = values.find(rid);
        return it == values.end() ? std::string() : it->second.as_string();
    };
    auto get_opaque = [&](ResourceId rid) {
        auto it = values.find(rid);
        return it == values.end() ? std::vector<std::uint8_t>() : it->second.as_opaque();
    };

    if (object_id == kClientObjectId) {
        ClientAccount account;
        account.client_id = static_cast<ClientId>(get_int(objres::kClientId, 0));
        account.endpoint_name = get_str(objres::kEndpoint);
        account.lifetime_s = static_cast<std::uint32_t>(get_int(objres::kLifetime, 0));
        account.observe_period_s = static_cast<std::uint32_t>(get_int(objres::kObservePeriod, 1));
        if (account.endpoint_name.empty()) return false;
        if (auto* existing = client_by_endpoint(account.endpoint_name)) {
            // Refresh: reset the lifetime clock, keep credentials.
            existing->lifetime_s = account.lifetime_s;
            existing->created_at = now;
            existing->expired = false;
        } else {
            put_client_account(account, now);
        }
    } else if (object_id == kOscoreObjectId) {
        auto secret = get_opaque(objres::kMasterSecret);
        if (secret.size() != crypto::kKeyBytes) return false;
        crypto::Key key{};
        std::copy(secret.begin(), secret.end(), key.begin());
        oscore_[inst] = key;
    } else if (object_id == kClientSecurityObjectId) {
        std::string endpoint = get_str(objres::kPeerEndpoint);
        if (endpoint.empty()) return false;
        ClientAccount* account = client_by_endpoint(endpoint);
        if (!account) {
            // Peer account installed security-object first (the requester
            // side of provisioning): allocate the next free client id.
            ClientAccount fresh;
            ClientId id = 1;
            while (clients_.count(id)) ++id;
            fresh.client_id = id;
            fresh.endpoint_name = endpoint;
            fresh.lifetime_s = static_cast<std::uint32_t>(get_int(objres::kPeerLifetime, 0));
            account = &put_client_account(fresh, now);
        } else if (values.count(objres::kPeerLifetime)) {
            account->lifetime_s = static_cast<std::uint32_t>(get_int(objres::kPeerLifetime, 0));
        }
        account->uri = get_str(objres::kUri);
        account->security_mode = static_cast<SecurityMode>(get_int(objres::kMode, 0));
        if (values.count(objres::kPskKey)) {
            auto identity = get_opaque(objres::kPskIdentity);
            auto key = get_opaque(objres::kPskKey);
            if (key.size() != crypto::kKeyBytes) return false;
            account->credentials.identity.assign(identity.begin(), identity.end());
            std::copy(key.begin(), key.end(), account->credentials.key.begin());
        } else if (values.count(objres::kOscoreLink)) {
            auto link = values.at(objres::kOscoreLink).as_objlink();
            auto material = oscore_.find(link.instance_id);
            if (link.object_id != kOscoreObjectId || material == oscore_.end()) return false;
            account->credentials.key = material->second;
        } else {
            return false;
        }
        account->created_at = now;
        account->expired = false;
    } else if (object_id == kClientAclObjectId) {
        ClientAclInstance acl;
        acl.instance_id = inst;
        acl.object_ref = static_cast<ObjectId>(get_int(objres::kObjectRef, 0));
        if (values.count(objres::kInstanceRef))
            acl.instance_ref = static_cast<InstanceId>(get_int(objres::kInstanceRef, 0));
        acl.owner = static_cast<ShortServerId>(get_int(objres::kAclOwner, principal.id));
        acl.acl = decode_acl_entries(get_opaque(objres::kAclEntries));
        acls_.upsert_client_acl(acl);
    }
    return true;
}

void Node::set_value(const Path& path, ResourceValue value) { tree_.set_resource(path, std::move(value)); }

void Node::emit_notifications(const Path& path) {
    for (auto& obs : observations_) {
        bool match = obs.path == path ||
                     (obs.path.is_instance() && obs.path.object_id == path.object_id &&
                      obs.path.instance_id == path.instance_id);
        if (!match) continue;
        Message msg;
        msg.kind = obs.confirmable ? MsgKind::confirmable : MsgKind::non_confirmable;
        msg.code = Code::content_205;
        msg.message_id = next_mid();
        msg.token = obs.token;
        msg.set_observe(++obs.notify_seq);
        if (obs.path.is_resource())
            msg.payload = tree_.get_resource(obs.path).leaf_bytes();
        else
            msg.payload = tlv::encode_instance(tree_.snapshot(obs.path));
        outgoing_.push_back({obs.observer_endpoint, std::move(msg)});
    }
}

}  // namespace lwm2m
