// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Every subcommand accepts --config <json> and
// explicit flags; flags override values from the config file.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vbrelax/cli.hpp"

namespace {

using vbrelax::cli::Json;

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    std::map<std::string, std::optional<double>> numbers;
    std::map<std::string, std::optional<std::string>> strings;
    std::map<std::string, bool> switches;
};

Json load_config(const std::string& path)
{
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw vbrelax::IoError("cannot open config " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw vbrelax::ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
}

/// Sets config[key] (or config[parent][key] for "parent.key").
void put(Json& config, const std::string& dotted, Json value)
{
    const auto dot = dotted.find('.');
    if (dot == std::string::npos) {
        config[dotted] = std::move(value);
        return;
    }
    Json& parent = config[dotted.substr(0, dot)];
    if (parent.is_null()) parent = Json::object();
    parent[dotted.substr(dot + 1)] = std::move(value);
}

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config_path, "JSON run configuration");
    sub->add_option("--seed", f.seed, "64-bit random seed");
    sub->add_option("--out-dir", f.out_dir, "output directory");
    sub->add_option("--format", f.format, "table output format")->check(CLI::IsMember({"csv", "json"}));
}

void add_number(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help)
{
    sub->add_option(flag, f.numbers[key], help);
}

void add_string(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help)
{
    sub->add_option(flag, f.strings[key], help);
}

void add_switch(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help)
{
    sub->add_flag(flag, f.switches[key], help);
}

Json merged_config(const Flags& f)
{
    Json config = load_config(f.config_path);
    if (!config.is_object()) throw vbrelax::ConfigError("config must be a JSON object");
    if (f.seed) config["seed"] = *f.seed;
    if (f.out_dir) config["out_dir"] = *f.out_dir;
    if (f.format) config["format"] = *f.format;
    for (const auto& [key, v] : f.numbers)
        if (v) {
            // Integral values (shots, counts) stay integers in the JSON.
            if (key == "readout.shots" || key == "tau_grid.count" || key == "mode_count") {
                if (*v < 0 || *v != static_cast<double>(static_cast<std::uint64_t>(*v)))
                    throw vbrelax::ConfigError(key + " must be a nonnegative integer");
                put(config, key, static_cast<std::uint64_t>(*v));
            } else {
                put(config, key, *v);
            }
        }
    for (const auto& [key, v] : f.strings)
        if (v) put(config, key, *v);
    for (const auto& [key, v] : f.switches)
        if (v) put(config, key, key == "noise" ? false : true);
    return config;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spin-lattice relaxometry toolkit for boron-vacancy spin ensembles"};
    app.require_subcommand(1);
    std::map<std::string, Flags> flags;

    auto* sim = app.add_subcommand("simulate", "synthesize F1/F2 decay datasets");
    auto& fs = flags["simulate"];
    add_common(sim, fs);
    add_number(sim, fs, "--omega", "omega_kHz", "single-quantum rate (kHz)");
    add_number(sim, fs, "--gamma", "gamma_kHz", "double-quantum rate (kHz)");
    add_number(sim, fs, "--tau-start", "tau_grid.start", "first delay (us)");
    add_number(sim, fs, "--tau-stop", "tau_grid.stop", "last delay (us)");
    add_number(sim, fs, "--tau-count", "tau_grid.count", "number of delays");
    add_number(sim, fs, "--shots", "readout.shots", "repetitions per sequence");
    add_number(sim, fs, "--rate-bright", "readout.rate_bright", "counts per shot from |0>");
    add_number(sim, fs, "--rate-dark", "readout.rate_dark", "counts per shot from |+-1>");
    add_number(sim, fs, "--pi-fidelity", "pi_fidelity", "population swap fraction of each pi pulse");
    add_number(sim, fs, "--temperature", "temperature_K", "sample temperature (K), recorded only");
    add_switch(sim, fs, "--noise-free", "noise", "write expected values instead of Poisson draws");

    auto* fd = app.add_subcommand("fit-decay", "fit F1/F2 curves and extract omega, gamma");
    auto& ffd = flags["fit-decay"];
    add_common(fd, ffd);
    add_string(fd, ffd, "--f1", "f1", "F1 decay CSV");
    add_string(fd, ffd, "--f2", "f2", "F2 decay CSV");
    add_switch(fd, ffd, "--joint", "joint", "fit both curves with shared omega and gamma");

    auto* fo = app.add_subcommand("fit-odmr", "two-Lorentzian fit of a zero-field ODMR spectrum");
    auto& ffo = flags["fit-odmr"];
    add_common(fo, ffo);
    add_string(fo, ffo, "--spectrum", "spectrum", "ODMR CSV");

    auto* ft = app.add_subcommand("fit-temp", "fit the two-phonon temperature models");
    auto& fft = flags["fit-temp"];
    add_common(ft, fft);
    add_string(ft, fft, "--series", "series", "temperature-series CSV");
    add_string(ft, fft, "--pdos", "pdos", "phonon density of states CSV");
    add_number(ft, fft, "--modes", "mode_count", "number of PDOS peaks to use");

    auto* pt = app.add_subcommand("predict-t1", "predict omega, gamma and T1 versus temperature");
    auto& fpt = flags["predict-t1"];
    add_common(pt, fpt);
    add_string(pt, fpt, "--coupling", "coupling_file", "coupling JSON or fit-temp record");
    add_string(pt, fpt, "--spot", "spot", "spot label inside a fit-temp record");
    add_number(pt, fpt, "--t-start", "grid.start", "first temperature (K)");
    add_number(pt, fpt, "--t-stop", "grid.stop", "last temperature (K)");
    add_number(pt, fpt, "--t-step", "grid.step", "temperature step (K)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(vbrelax::cli::ExitCode::config);
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const Json config = merged_config(flags[name]);
        const auto out = vbrelax::cli::run_command(name, config);
        out.files.commit();
        for (const auto& [path, contents] : out.files.files()) std::cout << path.string() << '\n';
        return 0;
    } catch (const std::exception& e) {
        const auto code = vbrelax::cli::exit_code_for(e);
        const Json diag{{"command", name}, {"exit_code", static_cast<int>(code)}, {"error", e.what()}};
        std::cerr << diag.dump() << '\n';
        return static_cast<int>(code);
    }
}
