// Command-line front end: one subcommand per protocol, plus config inspection.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omdce/config.hpp"
#include "omdce/protocols.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw omdce::io_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    if (!f && !f.eof()) throw omdce::io_error("read of " + path + " failed");
    return ss.str();
}

omdce::ExperimentConfig load_config(const CliOptions& opt, const std::string& protocol) {
    omdce::KvMap kv = omdce::parse_kv(read_file(opt.config_path));
    if (!protocol.empty()) kv[""]["protocol"] = protocol;
    for (const auto& s : opt.sets) omdce::apply_override(kv, s);
    if (!opt.out_dir.empty()) kv["output"]["dir"] = opt.out_dir;
    auto cfg = omdce::build_config(kv);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("-c,--config", opt.config_path, "config file (key = value sections)")
        ->required();
    cmd->add_option("-o,--out", opt.out_dir, "output root directory");
    cmd->add_option("--set", opt.sets, "override a config entry, section.key=value")
        ->take_all();
}

const std::vector<std::pair<std::string, std::string>> kProtocols = {
    {"spectrum_sweep", "track the lowest dressed levels across an omega_2 sweep"},
    {"min_splitting", "locate an avoided crossing and refine its minimum gap"},
    {"splitting_vs_g", "anticrossing gap for a list of couplings vs second order"},
    {"perturbation_tables", "resonant splittings and dispersive shifts, numerics vs theory"},
    {"cw_dynamics", "open dynamics under a continuous mechanical drive"},
    {"pulsed_dynamics", "pulse one mirror at the anticrossing, record the exchange and FFT"},
    {"pdc_dynamics", "drive the phonon pair-production resonance, track correlations"},
    {"nonadiabatic_transfer", "ramp omega_2 onto the anticrossing and transfer phonons"},
    {"platform_estimate", "effective coupling for a circuit realization"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cavity-mediated mechanical oscillator exchange toolkit"};
    app.require_subcommand(1);

    std::vector<CliOptions> opts(kProtocols.size());
    std::string run_protocol_name;
    const CliOptions* run_opt = nullptr;
    for (size_t i = 0; i < kProtocols.size(); ++i) {
        auto* cmd = app.add_subcommand(kProtocols[i].first, kProtocols[i].second);
        add_common(cmd, opts[i]);
        cmd->callback([&, i] {
            run_protocol_name = kProtocols[i].first;
            run_opt = &opts[i];
        });
    }

    CliOptions validate_opt;
    bool validate_requested = false;
    auto* vcmd = app.add_subcommand("validate", "parse a config and echo the effective values");
    add_common(vcmd, validate_opt);
    vcmd->callback([&] { validate_requested = true; });

    bool list_requested = false;
    auto* lcmd = app.add_subcommand("list", "list the available protocols");
    lcmd->callback([&] { list_requested = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (list_requested) {
            for (const auto& [name, desc] : kProtocols)
                std::printf("%-22s %s\n", name.c_str(), desc.c_str());
            return 0;
        }
        if (validate_requested) {
            const auto cfg = load_config(validate_opt, "");
            std::cout << omdce::serialize_config(cfg);
            std::cout << "# config ok, hash " << omdce::config_hash(omdce::serialize_config(cfg))
                      << "\n";
            return 0;
        }
        const auto cfg = load_config(*run_opt, run_protocol_name);
        const auto res = omdce::run_protocol(cfg);
        std::cout << "protocol: " << cfg.protocol << "\n";
        std::cout << "output:   " << res.dir.string() << "\n";
        for (const auto& [k, v] : res.highlights)
            std::printf("%-22s %.10g\n", k.c_str(), v);
        return 0;
    } catch (const omdce::Error& e) {
        std::cerr << "error[" << e.category() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
}
