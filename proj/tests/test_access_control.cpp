#include "lwm2m/access_control.hpp"

#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace lwm2m;
using testutil::errc_of;

namespace {

// Hosting-client ACL state before the create: object-level entries for the
// light control object, plus accounts for servers 1 and 2 and client 3.
struct Fixture {
    AclStore acls;
    std::set<ShortServerId> servers{1, 2};

    Fixture() {
        AclInstance obj_acl;
        obj_acl.instance_id = 0;
        obj_acl.object_ref = kLightControlObjectId;
        obj_acl.acl[1] = AccessFlags::of(Access::create);
        obj_acl.acl[2] = AccessFlags::of(Access::create);
        obj_acl.owner = kBootstrapShortId;
        acls.add_server_acl(obj_acl);

        ClientAclInstance client_acl;
        client_acl.instance_id = 0;
        client_acl.object_ref = kLightControlObjectId;
        client_acl.acl[3] = AccessFlags::of(Access::create);
        client_acl.owner = 1;
        acls.add_client_acl(client_acl);
    }

    // Replays the create of instance 1 plus the owner's follow-up grant.
    void create_instance_one() {
        const auto* authorizing = acls.find_client_acl(kLightControlObjectId, std::nullopt);
        auto [server_acl, client_acl] =
            apply_create_side_effects(3, *authorizing, kLightControlObjectId, 1, kDefaultCreateGrants, servers);
        InstanceId sid = acls.add_server_acl(server_acl);
        acls.add_client_acl(client_acl);
        acls.set_server_entry(Principal::server(1), sid, 2, AccessFlags::of(Access::read));
    }
};

}  // namespace

TEST_CASE("post-create state grants C3 read+write but not delete") {
    Fixture f;
    f.create_instance_one();
    Path inst(kLightControlObjectId, 1);
    CHECK(check_access(Principal::client(3), Access::read, inst, f.acls, 2));
    CHECK(check_access(Principal::client(3), Access::write, inst, f.acls, 2));
    CHECK_FALSE(check_access(Principal::client(3), Access::del, inst, f.acls, 2));
}

TEST_CASE("post-create state grants S2 read but not write") {
    Fixture f;
    f.create_instance_one();
    Path inst(kLightControlObjectId, 1);
    CHECK(check_access(Principal::server(2), Access::read, inst, f.acls, 2));
    CHECK_FALSE(check_access(Principal::server(2), Access::write, inst, f.acls, 2));
}

TEST_CASE("create side effects assign the authorizing owner, never the creator") {
    Fixture f;
    const auto* authorizing = f.acls.find_client_acl(kLightControlObjectId, std::nullopt);
    auto [server_acl, client_acl] =
        apply_create_side_effects(3, *authorizing, kLightControlObjectId, 1, kDefaultCreateGrants, f.servers);
    CHECK(server_acl.owner == 1);
    CHECK(server_acl.instance_ref == 1);
    CHECK(client_acl.owner == 1);
    CHECK(client_acl.instance_ref == 1);
    CHECK(client_acl.acl.at(3) == kDefaultCreateGrants);
    CHECK(client_acl.acl.count(1) == 0);  // owner id is a server, not an acl entry
}

TEST_CASE("create with empty grants leaves an empty entry for the creator") {
    Fixture f;
    const auto* authorizing = f.acls.find_client_acl(kLightControlObjectId, std::nullopt);
    auto [_, client_acl] =
        apply_create_side_effects(3, *authorizing, kLightControlObjectId, 1, AccessFlags{}, f.servers);
    REQUIRE(client_acl.acl.count(3) == 1);
    CHECK(client_acl.acl.at(3).empty());
}

TEST_CASE("create via unknown owner raises OwnerUnknown") {
    Fixture f;
    ClientAclInstance rogue;
    rogue.object_ref = kLightControlObjectId;
    rogue.owner = 9;
    CHECK(errc_of([&] {
        apply_create_side_effects(3, rogue, kLightControlObjectId, 1, kDefaultCreateGrants, f.servers);
    }) == Errc::owner_unknown);
}

TEST_CASE("two successive creates yield disjoint ACL pairs") {
    Fixture f;
    f.create_instance_one();
    const auto* authorizing = f.acls.find_client_acl(kLightControlObjectId, std::nullopt);
    auto [server_acl, client_acl] =
        apply_create_side_effects(3, *authorizing, kLightControlObjectId, 2, kDefaultCreateGrants, f.servers);
    f.acls.add_server_acl(server_acl);
    f.acls.add_client_acl(client_acl);

    CHECK(f.acls.find_server_acl(kLightControlObjectId, 1) != nullptr);
    CHECK(f.acls.find_server_acl(kLightControlObjectId, 2) != nullptr);
    CHECK(f.acls.find_client_acl(kLightControlObjectId, 1) != nullptr);
    CHECK(f.acls.find_client_acl(kLightControlObjectId, 2) != nullptr);
    CHECK(f.acls.find_server_acl(kLightControlObjectId, 1)->instance_id !=
          f.acls.find_server_acl(kLightControlObjectId, 2)->instance_id);
}

TEST_CASE("owner may widen entries; non-owners and clients may not") {
    Fixture f;
    f.create_instance_one();
    const auto* acl = f.acls.find_client_acl(kLightControlObjectId, 1);
    REQUIRE(acl);
    InstanceId id = acl->instance_id;

    f.acls.set_client_entry(Principal::server(1), id, 3, kDefaultCreateGrants.with(Access::discover));
    CHECK(f.acls.client_acls().at(id).acl.at(3).has(Access::discover));

    CHECK(errc_of([&] { f.acls.set_client_entry(Principal::server(2), id, 3, AccessFlags{0x3F}); }) ==
          Errc::forbidden);
    CHECK(errc_of([&] { f.acls.set_client_entry(Principal::client(3), id, 3, AccessFlags{0x3F}); }) ==
          Errc::forbidden);
}

TEST_CASE("single-server deployments grant servers full access by default") {
    AclStore empty;
    CHECK(check_access(Principal::server(1), Access::read, Path(3311, 0, 5850), empty, 1));
    CHECK(check_access(Principal::server(1), Access::create, Path(3311), empty, 1));
    // But clients stay deny-all.
    CHECK_FALSE(check_access(Principal::client(3), Access::read, Path(3311, 0, 5850), empty, 1));
}

TEST_CASE("multi-server deployments require explicit entries") {
    Fixture f;
    CHECK_FALSE(check_access(Principal::server(1), Access::read, Path(3311, 0, 5850), f.acls, 2));
    CHECK(check_access(Principal::server(1), Access::create, Path(3311), f.acls, 2));
}

TEST_CASE("internal objects are reachable only by servers") {
    Fixture f;
    for (ObjectId obj : {kClientObjectId, kClientSecurityObjectId, kClientAclObjectId, kOscoreObjectId}) {
        CHECK(check_access(Principal::server(1), Access::write, Path(obj, 0, 0), f.acls, 2));
        CHECK_FALSE(check_access(Principal::client(3), Access::read, Path(obj, 0, 0), f.acls, 2));
    }
}

TEST_CASE("instance-level ACL shadows object-level entirely") {
    Fixture f;
    f.create_instance_one();
    // Widen the object-level entry: read+delete besides create.
    f.acls.set_client_entry(Principal::server(1), 0, 3,
                            AccessFlags::of(Access::create).with(Access::read).with(Access::del));

    // Instance 1 carries its own ACL (read|write): the object-level delete
    // does not leak through, no bit-union.
    CHECK_FALSE(check_access(Principal::client(3), Access::del, Path(3311, 1), f.acls, 2));
    CHECK(check_access(Principal::client(3), Access::read, Path(3311, 1), f.acls, 2));
    // Instance 0 has no instance-level ACL: object-level applies.
    CHECK(check_access(Principal::client(3), Access::del, Path(3311, 0), f.acls, 2));
    CHECK(check_access(Principal::client(3), Access::read, Path(3311, 0, 5850), f.acls, 2));
    CHECK_FALSE(check_access(Principal::client(3), Access::write, Path(3311, 0), f.acls, 2));
}

TEST_CASE("check_access is monotone in flags") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        Fixture f;
        f.create_instance_one();
        const auto* acl = f.acls.find_client_acl(kLightControlObjectId, 1);
        AccessFlags base{static_cast<std::uint8_t>(rng() % 64)};
        f.acls.set_client_entry(Principal::server(1), acl->instance_id, 3, base);

        Access op = static_cast<Access>(1 << (rng() % 6));
        Path p(kLightControlObjectId, 1);
        bool before = check_access(Principal::client(3), op, p, f.acls, 2);
        Access extra = static_cast<Access>(1 << (rng() % 6));
        f.acls.set_client_entry(Principal::server(1), acl->instance_id, 3, base.with(extra));
        bool after = check_access(Principal::client(3), op, p, f.acls, 2);
        if (before) CHECK(after);  // adding a bit never flips allow to deny
    }
}

TEST_CASE("randomized client-only scripts never change ACL state") {
    std::mt19937_64 rng(37);
    Fixture f;
    f.create_instance_one();
    auto before = f.acls.fingerprint();
    for (int i = 0; i < 500; ++i) {
        Principal c = Principal::client(static_cast<ClientId>(rng() % 5));
        Access op = static_cast<Access>(1 << (rng() % 6));
        Path p(kLightControlObjectId, static_cast<InstanceId>(rng() % 3));
        (void)check_access(c, op, p, f.acls, 2);
        InstanceId target = static_cast<InstanceId>(rng() % 2);
        try {
            f.acls.set_client_entry(c, target, 3, AccessFlags{0x3F});
        } catch (const Error& e) {
            CHECK(e.code() == Errc::forbidden);
        }
        try {
            f.acls.set_client_owner(c, target, static_cast<ShortServerId>(rng() % 3));
        } catch (const Error& e) {
            CHECK(e.code() == Errc::forbidden);
        }
    }
    CHECK(f.acls.fingerprint() == before);
}
