#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "lwm2m/demo_world.hpp"
#include "lwm2m/netsim/scenario.hpp"
#include "lwm2m/threat_checks.hpp"

namespace {

using namespace lwm2m;

std::optional<std::uint64_t> env_seed() {
    const char* value = std::getenv("C2C_SEED");
    if (!value || !*value) return std::nullopt;
    char* end = nullptr;
    std::uint64_t seed = std::strtoull(value, &end, 10);
    if (end == value || *end != '\0') return std::nullopt;
    return seed;
}

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed_flag, const std::string& out_dir,
            bool quiet) {
    netsim::ScenarioConfig config;
    try {
        config = netsim::ScenarioConfig::from_file(file);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    // Seed precedence: --seed, then C2C_SEED, then the file.
    if (seed_flag) config.seed = *seed_flag;
    else if (auto env = env_seed()) config.seed = *env;

    netsim::Metrics metrics;
    try {
        metrics = netsim::run_scenario(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == Errc::config_invalid ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create output directory " << out_dir << "\n";
        return 2;
    }
    {
        std::ofstream csv(out_dir + "/metrics.csv", std::ios::binary);
        csv << metrics.to_csv();
    }
    std::string summary = metrics.summary_json(config);
    {
        std::ofstream js(out_dir + "/summary.json", std::ios::binary);
        js << summary << "\n";
    }
    if (!quiet) std::cout << summary << "\n";
    return 0;
}

int cmd_threats(bool no_lifetime, bool no_cookie) {
    ThreatOptions options;
    options.lifetime_enforcement = !no_lifetime;
    options.cookie_required = !no_cookie;
    bool all_pass = true;
    for (const auto& result : run_threat_checks(options)) {
        std::cout << result.id << " " << (result.pass ? "PASS" : "FAIL") << "  " << result.description
                  << "\n";
        all_pass = all_pass && result.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_dump(const std::string& node_id) {
    DemoWorld demo;
    demo.replay_create();
    if (node_id != demo.c1.name()) {
        std::cerr << "error: UnknownNode: " << node_id << "\n";
        return 2;
    }
    std::cout << dump_node(demo.c1);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LwM2M client-to-client protocol simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario file and write metrics");
    std::string scenario_file;
    std::string out_dir = ".";
    std::uint64_t seed_value = 0;
    bool quiet = false;
    run->add_option("file", scenario_file, "Scenario config (JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed_value, "Seed override (wins over file and C2C_SEED)");
    run->add_option("--out", out_dir, "Output directory for metrics.csv and summary.json");
    run->add_flag("--quiet", quiet, "Suppress the summary on stdout");

    auto* threats = app.add_subcommand("threats", "Run the scripted threat-model checks");
    bool no_lifetime = false, no_cookie = false;
    threats->add_flag("--no-lifetime-enforcement", no_lifetime, "Disable lifetime expiry (negative control)");
    threats->add_flag("--no-cookie", no_cookie, "Disable the stateless cookie (negative control)");

    auto* dump = app.add_subcommand("dump", "Dump accounts and ACL state of a demo node");
    std::string node_id;
    dump->add_option("node", node_id, "Node identifier (e.g. c1)")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(scenario_file, seed_opt->count() ? std::optional(seed_value) : std::nullopt, out_dir,
                       quiet);
    if (threats->parsed()) return cmd_threats(no_lifetime, no_cookie);
    if (dump->parsed()) return cmd_dump(node_id);
    return 1;
}
