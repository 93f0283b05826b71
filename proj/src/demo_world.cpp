#include "lwm2m/demo_world.hpp"

#include <sstream>

#include "lwm2m/tlv.hpp"

namespace lwm2m {

DemoWorld::DemoWorld() {
    ServerAccount s1;
    s1.short_id = 1;
    s1.uri = "coap://s1";
    s1.registered = true;
    ServerAccount s2;
    s2.short_id = 2;
    s2.uri = "coap://s2";
    s2.registered = true;
    c1.add_server_account(s1);
    c1.add_server_account(s2);
    c1.set_default_owner_uris({"coap://s1"});

    ClientAccount c3;
    c3.client_id = 3;
    c3.endpoint_name = "c3";
    c3.uri = "coap://c3";
    c1.put_client_account(c3, 0);

    c1.tree().declare_object(kLightControlObjectId, {{5850, ValueKind::boolean}});
    c1.tree().create_instance(kLightControlObjectId, 0, {{5850, ResourceValue::boolean(true)}});

    // Object-level rights: both servers may create; the bootstrap principal
    // owns the server-facing instance, s1 owns the client-facing one.
    AclInstance acl0;
    acl0.instance_id = 0;
    acl0.object_ref = kLightControlObjectId;
    acl0.acl[1] = AccessFlags::of(Access::create);
    acl0.acl[2] = AccessFlags::of(Access::create);
    acl0.owner = kBootstrapShortId;
    c1.acls().add_server_acl(acl0);

    ClientAclInstance cacl0;
    cacl0.instance_id = 0;
    cacl0.object_ref = kLightControlObjectId;
    cacl0.acl[3] = AccessFlags::of(Access::create);
    cacl0.owner = 1;
    c1.acls().add_client_acl(cacl0);
}

void DemoWorld::replay_create() {
    Message create;
    create.kind = MsgKind::confirmable;
    create.code = Code::post;
    create.message_id = 0x100;
    create.token = {0x01};
    create.set_uri_path(Path(kLightControlObjectId));
    ObjectInstance content;
    content.object_id = kLightControlObjectId;
    content.resources.emplace(5850, ResourceValue::boolean(true));
    create.payload = tlv::encode_instance(content);

    Message rsp = c1.handle_request(Principal::client(3), "c3", create, 0);
    if (rsp.code != Code::created_201) raise(Errc::forbidden, "demo create was rejected");

    // The access control owner grants read access to s2 on the new instance.
    const AclInstance* acl = c1.acls().find_server_acl(kLightControlObjectId, 1);
    if (!acl) raise(Errc::not_found, "server ACL for new instance missing");
    c1.acls().set_server_entry(Principal::server(1), acl->instance_id, 2, AccessFlags::of(Access::read));
}

namespace {

std::string owner_name(ShortServerId id) {
    if (id == kBootstrapShortId) return "bootstrap";
    return "s" + std::to_string(id);
}

}  // namespace

std::string dump_node(const Node& node) {
    std::ostringstream out;
    out << "node: " << node.name() << "\n";

    out << "server-accounts:\n";
    for (const auto& [sid, account] : node.servers())
        out << "  s" << sid << " uri=" << account.uri << (account.registered ? " registered" : "") << "\n";

    out << "client-accounts:\n";
    for (const auto& [cid, account] : node.clients()) {
        out << "  c" << cid << " endpoint=" << account.endpoint_name << " lifetime=" << account.lifetime_s
            << (account.expired ? " expired" : "") << "\n";
    }

    out << "acl:\n";
    for (const auto& [id, acl] : node.acls().server_acls()) {
        out << "  [" << id << "] obj=" << acl.object_ref << " inst=";
        if (acl.instance_ref) out << *acl.instance_ref;
        else out << "-";
        out << " owner=" << owner_name(acl.owner) << " acl={";
        bool first = true;
        for (const auto& [sid, flags] : acl.acl) {
            if (!first) out << ", ";
            out << "s" << sid << ":" << flags.letters();
            first = false;
        }
        out << "}\n";
    }

    out << "client-acl:\n";
    for (const auto& [id, acl] : node.acls().client_acls()) {
        out << "  [" << id << "] obj=" << acl.object_ref << " inst=";
        if (acl.instance_ref) out << *acl.instance_ref;
        else out << "-";
        out << " owner=" << owner_name(acl.owner) << " acl={";
        bool first = true;
        for (const auto& [cid, flags] : acl.acl) {
            if (!first) out << ", ";
            out << "c" << cid << ":" << flags.letters();
            first = false;
        }
        out << "}\n";
    }

    out << "observations:";
    if (node.observations().empty()) {
        out << " (none)\n";
    } else {
        out << "\n";
        for (const auto& obs : node.observations())
            out << "  " << obs.observer_endpoint << " -> " << obs.path.to_string()
                << (obs.confirmable ? " con" : " non") << "\n";
    }
    return out.str();
}

}  // namespace lwm2m
