#pragma once

#include <memory>
#include <string>

#include "lwm2m/node.hpp"

namespace lwm2m {

// The canonical two-server demo: hosting client c1 with accounts for servers
// s1/s2 and client c3, object-level create rights on the light control
// object. replay_create() performs c3's create of instance 1 plus the owner's
// follow-up grant of read access to s2.
struct DemoWorld {
    Node c1{"c1", 0xD0};

    DemoWorld();
    void replay_create();
};

// Structured state dump: accounts, both ACL tables, observations.
std::string dump_node(const Node& node);

}  // namespace lwm2m
