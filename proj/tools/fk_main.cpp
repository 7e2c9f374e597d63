#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fk/errors.hpp"
#include "fk/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"batch driver for damped driven chain experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::string out_dir;

    const std::pair<const char*, const char*> commands[] = {
        {"simulate", "integrate one chain and classify its long-run motion"},
        {"zero-audit", "pair two states, track the zeros of their difference, audit the balance"},
        {"measure", "evolve an ensemble and tabulate the intersection functionals"},
        {"am", "construct an ordered invariant ensemble at a given rotation number"},
        {"depin", "sweep the constant drive and bracket the depinning threshold"},
        {"residence", "fraction of an ensemble near the detected rest states over time"},
        {"report", "merge run manifests into one report"},
    };
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "JSON run configuration file")->required();
        sub->add_option("--set", sets, "dotted.key=value override (repeatable)");
        sub->add_option("--seed", seed, "master seed override");
        sub->add_option("--out", out_dir, "output directory override");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    auto* sub = app.get_subcommands().front();
    try {
        auto doc = fk::load_document(config_path);
        for (const auto& s : sets) fk::apply_override(doc, s);
        if (sub->count("--seed") > 0) doc["seed"] = seed;
        if (sub->count("--out") > 0) doc["out"] = out_dir;
        const auto cfg = fk::parse_config(std::move(doc));
        fk::execute(sub->get_name(), cfg);
        return 0;
    } catch (const fk::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const fk::numeric_error& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const fk::audit_error& e) {
        std::fprintf(stderr, "audit error: %s\n", e.what());
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
