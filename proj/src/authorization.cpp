#include "lwm2m/authorization.hpp"

#include <algorithm>

#include "lwm2m/cbor.hpp"
#include "lwm2m/tlv.hpp"

namespace lwm2m {

std::map<ObjectId, ObjectSchema> internal_schemas() {
    return {
        {kClientObjectId,
         {{objres::kClientId, ValueKind::integer},
          {objres::kEndpoint, ValueKind::string},
          {objres::kLifetime, ValueKind::integer},
          {objres::kBinding, ValueKind::string},
          {objres::kObservePeriod, ValueKind::integer}}},
        {kClientSecurityObjectId,
         {{objres::kUri, ValueKind::string},
          {objres::kMode, ValueKind::integer},
          {objres::kPskIdentity, ValueKind::opaque},
          {objres::kPskKey, ValueKind::opaque},
          {objres::kOscoreLink, ValueKind::objlink},
          {objres::kPeerEndpoint, ValueKind::string},
          {objres::kPeerLifetime, ValueKind::integer}}},
        {kOscoreObjectId,
         {{objres::kMasterSecret, ValueKind::opaque},
          {objres::kSenderId, ValueKind::opaque},
          {objres::kRecipientId, ValueKind::opaque}}},
        {kClientAclObjectId,
         {{objres::kObjectRef, ValueKind::integer},
          {objres::kInstanceRef, ValueKind::integer},
          {objres::kAclEntries, ValueKind::opaque},
          {objres::kAclOwner, ValueKind::integer}}},
    };
}

std::vector<std::uint8_t> encode_hints(const OwnerServerHints& hints) {
    std::vector<std::uint8_t> out;
    cbor::put_array_header(out, hints.server_uris.size());
    for (const auto& uri : hints.server_uris) cbor::put_text(out, uri);
    return out;
}

OwnerServerHints decode_hints(std::span<const std::uint8_t> payload) {
    cbor::Reader r(payload);
    OwnerServerHints hints;
    std::size_t n = r.read_array_header();
    for (std::size_t i = 0; i < n; ++i) hints.server_uris.push_back(r.read_text());
    r.expect_end();
    if (hints.server_uris.empty()) raise(Errc::malformed, "hints must list at least one server");
    return hints;
}

OwnerServerHints hints_for(const AclStore& acls, const std::map<ShortServerId, ServerAccount>& servers,
                           const std::vector<std::string>& default_owner_uris) {
    if (default_owner_uris.empty())
        raise(Errc::config_invalid, "at least one default owner server must be configured");
    OwnerServerHints hints;
    auto push = [&hints](const std::string& uri) {
        if (std::find(hints.server_uris.begin(), hints.server_uris.end(), uri) == hints.server_uris.end())
            hints.server_uris.push_back(uri);
    };
    for (const auto& uri : default_owner_uris) push(uri);
    for (ShortServerId owner : acls.owners()) {
        auto it = servers.find(owner);
        if (it != servers.end()) push(it->second.uri);
    }
    return hints;
}

ShortServerId validate_hints(const std::map<ShortServerId, ServerAccount>& accounts,
                             const OwnerServerHints& hints) {
    for (const auto& uri : hints.server_uris)
        for (const auto& [sid, account] : accounts)
            if (account.registered && account.uri == uri) return sid;
    raise(Errc::no_trusted_server, "no hinted URI matches a registered server");
}

Message encode_access_request(const AccessRequest& request) {
    if (request.items.empty()) raise(Errc::malformed, "access request needs at least one item");
    Message msg;
    msg.kind = MsgKind::confirmable;
    msg.code = Code::post;
    msg.add_option_string(kOptUriPath, "ac");
    msg.set_content_format(kContentFormatCbor);
    msg.add_option_string(kOptUriQuery, "ep=" + request.target_endpoint);
    if (request.need_credentials) msg.add_option_string(kOptUriQuery, "c");

    cbor::put_array_header(msg.payload, request.items.size());
    for (const auto& item : request.items) {
        if (item.flags.empty()) raise(Errc::malformed, "access request item needs non-empty flags");
        cbor::put_map_header(msg.payload, item.instance_id ? 3 : 2);
        cbor::put_uint(msg.payload, 1);
        cbor::put_uint(msg.payload, item.object_id);
        if (item.instance_id) {
            cbor::put_uint(msg.payload, 2);
            cbor::put_uint(msg.payload, *item.instance_id);
        }
        cbor::put_uint(msg.payload, 3);
        cbor::put_uint(msg.payload, item.flags.bits());
    }
    return msg;
}

AccessRequest decode_access_request(const Message& message) {
    if (message.code != Code::post || message.uri_path_segments() != std::vector<std::string>{"ac"})
        raise(Errc::malformed, "not an access request");

    AccessRequest request;
    bool have_ep = false;
    for (const auto& q : message.uri_queries()) {
        if (q.rfind("ep=", 0) == 0) {
            request.target_endpoint = q.substr(3);
            have_ep = !request.target_endpoint.empty();
        } else if (q == "c") {
            request.need_credentials = true;
        }
    }
    if (!have_ep) raise(Errc::missing_ep, "access request without ep query");

    cbor::Reader r(message.payload);
    std::size_t n = r.read_array_header();
    if (n == 0) raise(Errc::malformed, "access request with empty item array");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t fields = r.read_map_header();
        AccessRequestItem item;
        bool have_object = false, have_flags = false;
        for (std::size_t f = 0; f < fields; ++f) {
            std::uint64_t key = r.read_uint();
            std::uint64_t value = r.read_uint();
            switch (key) {
                case 1:
                    if (value > 0xFFFF) raise(Errc::malformed, "object id out of range");
                    item.object_id = static_cast<ObjectId>(value);
                    have_object = true;
                    break;
                case 2:
                    if (value > 0xFFFF) raise(Errc::malformed, "instance id out of range");
                    item.instance_id = static_cast<InstanceId>(value);
                    break;
                case 3:
                    if (value == 0 || value > 0x3F) raise(Errc::malformed, "bad flags bitmask");
                    item.flags = AccessFlags(static_cast<std::uint8_t>(value));
                    have_flags = true;
                    break;
                default:
                    raise(Errc::malformed, "unknown access request key");
            }
        }
        if (!have_object || !have_flags) raise(Errc::malformed, "access request item missing fields");
        request.items.push_back(item);
    }
    r.expect_end();
    return request;
}

void PolicyTable::allow(const std::string& requester, const std::string& host, ObjectId object_id,
                        AccessFlags max) {
    rules_[{requester, host, object_id}] = max;
}

std::optional<AccessFlags> PolicyTable::lookup(const std::string& requester, const std::string& host,
                                               ObjectId object_id) const {
    auto it = rules_.find({requester, host, object_id});
    if (it == rules_.end()) return std::nullopt;
    return it->second;
}

void PolicyTable::check(const std::string& requester, const AccessRequest& request) const {
    for (const auto& item : request.items) {
        auto max = lookup(requester, request.target_endpoint, item.object_id);
        if (!max || !max->covers(item.flags))
            raise(Errc::policy_refused,
                  "requested flags exceed policy for object " + std::to_string(item.object_id));
    }
}

std::vector<std::uint8_t> encode_acl_entries(const std::map<ClientId, AccessFlags>& entries) {
    std::vector<std::uint8_t> out;
    for (const auto& [id, flags] : entries) {
        out.push_back(static_cast<std::uint8_t>(id >> 8));
        out.push_back(static_cast<std::uint8_t>(id & 0xFF));
        out.push_back(flags.bits());
    }
    return out;
}

std::map<ClientId, AccessFlags> decode_acl_entries(std::span<const std::uint8_t> blob) {
    if (blob.size() % 3 != 0) raise(Errc::malformed, "ACL entry blob must be 3 bytes per entry");
    std::map<ClientId, AccessFlags> out;
    for (std::size_t i = 0; i < blob.size(); i += 3) {
        ClientId id = static_cast<ClientId>((blob[i] << 8) | blob[i + 1]);
        out[id] = AccessFlags(blob[i + 2]);
    }
    return out;
}

namespace {

Message create_request(ObjectId object_id, const ObjectInstance& content) {
    Message msg;
    msg.kind = MsgKind::confirmable;
    msg.code = Code::post;
    msg.add_option_string(kOptUriPath, std::to_string(object_id));
    msg.set_content_format(kContentFormatTlv);
    msg.payload = tlv::encode_instance(content);
    return msg;
}

std::vector<std::uint8_t> str_bytes(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace

std::vector<ProvisioningOp> build_provisioning_plan(const AccessRequest& request,
                                                    const ProvisioningMaterial& m) {
    std::vector<ProvisioningOp> plan;

    // Client object instance on the host, describing the requester.
    ObjectInstance client_obj;
    client_obj.object_id = kClientObjectId;
    client_obj.resources.emplace(objres::kClientId, ResourceValue::integer(m.requester_id_on_host));
    client_obj.resources.emplace(objres::kEndpoint, ResourceValue::str(m.requester_endpoint));
    client_obj.resources.emplace(objres::kLifetime, ResourceValue::integer(m.lifetime_s));
    client_obj.resources.emplace(objres::kBinding, ResourceValue::str("U"));
    client_obj.resources.emplace(objres::kObservePeriod, ResourceValue::integer(1));
    plan.push_back({m.host_endpoint, create_request(kClientObjectId, client_obj), "client-object"});

    // Context mode distributes security material in its own object.
    if (m.mode == SecurityMode::context) {
        ObjectInstance oscore;
        oscore.object_id = kOscoreObjectId;
        oscore.resources.emplace(objres::kMasterSecret,
                                 ResourceValue::opaque({m.credentials.key.begin(), m.credentials.key.end()}));
        oscore.resources.emplace(objres::kSenderId, ResourceValue::opaque(str_bytes(m.host_endpoint)));
        oscore.resources.emplace(objres::kRecipientId, ResourceValue::opaque(str_bytes(m.requester_endpoint)));
        plan.push_back({m.host_endpoint, create_request(kOscoreObjectId, oscore), "oscore-object"});
    }

    // Client security object instance on the host.
    ObjectInstance client_sec;
    client_sec.object_id = kClientSecurityObjectId;
    client_sec.resources.emplace(objres::kUri, ResourceValue::str(m.requester_uri));
    client_sec.resources.emplace(objres::kMode, ResourceValue::integer(static_cast<int>(m.mode)));
    client_sec.resources.emplace(objres::kPeerEndpoint, ResourceValue::str(m.requester_endpoint));
    if (m.mode == SecurityMode::handshake) {
        client_sec.resources.emplace(objres::kPskIdentity,
                                     ResourceValue::opaque(str_bytes(m.credentials.identity)));
        client_sec.resources.emplace(
            objres::kPskKey, ResourceValue::opaque({m.credentials.key.begin(), m.credentials.key.end()}));
    } else {
        client_sec.resources.emplace(objres::kOscoreLink, ResourceValue::objlink({kOscoreObjectId, 0}));
    }
    plan.push_back({m.host_endpoint, create_request(kClientSecurityObjectId, client_sec), "client-security"});

    // One client access control instance per requested item.
    for (const auto& item : request.items) {
        ObjectInstance acl;
        acl.object_id = kClientAclObjectId;
        acl.resources.emplace(objres::kObjectRef, ResourceValue::integer(item.object_id));
        if (item.instance_id)
            acl.resources.emplace(objres::kInstanceRef, ResourceValue::integer(*item.instance_id));
        acl.resources.emplace(
            objres::kAclEntries,
            ResourceValue::opaque(encode_acl_entries({{m.requester_id_on_host, item.flags}})));
        acl.resources.emplace(objres::kAclOwner, ResourceValue::integer(m.granting_server));
        plan.push_back({m.host_endpoint, create_request(kClientAclObjectId, acl), "client-acl"});
    }

    // Client security update on the requester, carrying the host account.
    ObjectInstance requester_sec;
    requester_sec.object_id = kClientSecurityObjectId;
    requester_sec.resources.emplace(objres::kUri, ResourceValue::str(m.host_uri));
    requester_sec.resources.emplace(objres::kMode, ResourceValue::integer(static_cast<int>(m.mode)));
    requester_sec.resources.emplace(objres::kPeerEndpoint, ResourceValue::str(m.host_endpoint));
    requester_sec.resources.emplace(objres::kPeerLifetime, ResourceValue::integer(m.lifetime_s));
    requester_sec.resources.emplace(objres::kPskIdentity,
                                    ResourceValue::opaque(str_bytes(m.credentials.identity)));
    requester_sec.resources.emplace(
        objres::kPskKey, ResourceValue::opaque({m.credentials.key.begin(), m.credentials.key.end()}));
    Message update;
    update.kind = MsgKind::confirmable;
    update.code = Code::put;
    update.set_uri_path(Path(kClientSecurityObjectId, 0));
    update.set_content_format(kContentFormatTlv);
    update.payload = tlv::encode_instance(requester_sec);
    plan.push_back({m.requester_endpoint, update, "requester-security"});

    return plan;
}

}  // namespace lwm2m
