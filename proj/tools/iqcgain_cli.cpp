// Command-line front end: certify induced-l2 gain bounds for a configured
// plant over one or more multiplier classes and filter horizons, dump the
// witnesses, and replay previously dumped witnesses.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iqcgain/analysis.hpp"
#include "iqcgain/oracle.hpp"
#include "iqcgain/serialize.hpp"

namespace fs = std::filesystem;
using namespace iqcgain;

namespace {

std::vector<int> parse_horizons(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("horizon range is descending: " + text);
        for (int n = lo; n <= hi; ++n) out.push_back(n);
        return out;
    }
    size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos);
        if (!tok.empty()) out.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty horizon list: '" + text + "'");
    return out;
}

std::vector<MultiplierKind> parse_classes(const std::string& text) {
    std::vector<MultiplierKind> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                            : comma - pos);
        if (!tok.empty()) out.push_back(kind_from_name(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty class list: '" + text + "'");
    return out;
}

const char* status_text(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "numerical-failure";
}

std::string hex_checksum(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void print_table(const std::vector<std::pair<MultiplierKind, AnalysisReport>>& reports,
                 const std::vector<int>& horizons) {
    std::printf("%-8s", "class");
    for (int n : horizons) std::printf("  %10s", ("N=" + std::to_string(n)).c_str());
    std::printf("\n");
    for (const auto& [kind, rep] : reports) {
        std::printf("%-8s", kind_name(kind).c_str());
        for (const auto& r : rep.results) {
            if (r.certificate.status == SolveStatus::Optimal) {
                std::printf("  %10.4g", r.certificate.gamma);
            } else {
                std::printf("  %10s", status_text(r.certificate.status));
            }
        }
        std::printf("\n");
    }
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::string& classes_arg, const std::string& horizons_arg,
                bool validate_only, bool keep_going, std::uint64_t seed_arg, bool seed_set,
                bool dump_certs) {
    RunConfig cfg = load_run_config(config_path);
    if (!classes_arg.empty()) cfg.classes = parse_classes(classes_arg);
    if (!horizons_arg.empty()) cfg.horizons = parse_horizons(horizons_arg);
    if (seed_set) cfg.seed = seed_arg;

    // Dimension checks up front so --validate-only is meaningful.
    const PlantBlocks pb = plant_blocks(cfg.plant);
    for (size_t i = 0; i < cfg.horizons.size(); ++i) {
        if (cfg.horizons[i] < 0) throw std::invalid_argument("negative horizon");
        if (i > 0 && cfg.horizons[i] < cfg.horizons[i - 1]) {
            throw std::invalid_argument("horizons must be ascending");
        }
    }
    if (validate_only) {
        std::printf("config ok: m=%d nd=%d ne=%d nx=%d, %zu class(es), %zu horizon(s)\n",
                    pb.m, pb.nd, pb.ne, pb.nx, cfg.classes.size(), cfg.horizons.size());
        return 0;
    }
    if (out_dir.empty()) throw std::invalid_argument("run requires --out");
    fs::create_directories(out_dir);

    json results;
    results["schema_version"] = RunConfig::kSchemaVersion;
    results["seed"] = cfg.seed;
    results["runs"] = json::array();

    bool all_ok = true;
    std::vector<std::pair<MultiplierKind, AnalysisReport>> reports;
    for (MultiplierKind kind : cfg.classes) {
        AnalysisRequest req;
        req.plant = cfg.plant;
        req.kind = kind;
        req.horizons = cfg.horizons;
        req.options.solver = cfg.solver;
        AnalysisReport rep = certify(req);

        for (const auto& r : rep.results) {
            json entry;
            entry["class"] = kind_name(kind);
            entry["N"] = r.N;
            entry["status"] = status_text(r.certificate.status);
            entry["solve_seconds"] = r.solve_seconds;
            if (!r.error.empty()) entry["error"] = r.error;
            if (r.certificate.status == SolveStatus::Optimal) {
                entry["gamma"] = r.certificate.gamma;
                entry["lmi_max_eig"] = r.certificate.lmi_max_eig;
                entry["p_min_eig"] = r.certificate.p_min_eig;
                entry["checksum"] = hex_checksum(certificate_checksum(r.certificate));
                if (dump_certs) {
                    const std::string name =
                        "cert_" + kind_name(kind) + "_N" + std::to_string(r.N) + ".json";
                    std::ofstream certf(fs::path(out_dir) / name);
                    certf << to_json(r.certificate).dump(2) << "\n";
                    entry["certificate_file"] = name;
                }
            } else {
                all_ok = false;
            }
            results["runs"].push_back(std::move(entry));
        }
        reports.emplace_back(kind, std::move(rep));
    }

    std::ofstream resf(fs::path(out_dir) / "results.json");
    resf << results.dump(2) << "\n";
    print_table(reports, cfg.horizons);

    if (!all_ok && !keep_going) {
        std::fprintf(stderr, "error: not every requested bound was certified\n");
        return 1;
    }
    return 0;
}

int replay_command(const std::string& config_path, const std::vector<std::string>& cert_paths,
                   bool keep_going) {
    const RunConfig cfg = load_run_config(config_path);
    const PlantBlocks pb = plant_blocks(cfg.plant);

    bool all_ok = true;
    for (const std::string& path : cert_paths) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot read certificate file: " + path);
        json j;
        in >> j;
        const Certificate cert = certificate_from_json(j);

        bool pass = true;
        std::vector<std::string> why;
        int N = 0;
        try {
            if (std::holds_alternative<SlopeMultiplier>(cert.multiplier)) {
                const auto& q = std::get<SlopeMultiplier>(cert.multiplier);
                N = q.N;
                if (q.m != pb.m) throw std::invalid_argument("multiplier width mismatch");
                why = validate(q, 1e-9);
            } else {
                const auto& q = std::get<ReluMultiplier>(cert.multiplier);
                N = q.N;
                if (q.m != pb.m) throw std::invalid_argument("multiplier width mismatch");
                why = validate(q, 1e-9);
            }
            if (!why.empty()) {
                pass = false;
            } else {
                const AugmentedPlant aug = augment(cfg.plant, build_psi(N, pb.m));
                const ReplayReport rep =
                    replay_certificate(aug, cert.P, cert.middle(1e-9), cert.gamma, 1e-6, 1e-7);
                pass = rep.pass;
                why = rep.violations;
            }
        } catch (const std::exception& ex) {
            pass = false;
            why = {ex.what()};
        }

        std::printf("%s: %s (gamma %.6g)\n", path.c_str(), pass ? "PASS" : "FAIL", cert.gamma);
        for (const auto& v : why) std::printf("  %s\n", v.c_str());
        all_ok = all_ok && pass;
    }
    return (all_ok || keep_going) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified induced-l2 gain bounds for repeated-nonlinearity feedback loops"};
    app.require_subcommand(1);

    std::string config_path, out_dir, classes_arg, horizons_arg;
    bool validate_only = false, keep_going = false, dump_certs = false;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "solve for gain bounds");
    run->add_option("--config", config_path, "run configuration (json)")->required();
    run->add_option("--out", out_dir, "output directory for results.json");
    run->add_option("--classes", classes_arg, "comma list: relu,slope (overrides config)");
    run->add_option("--horizons", horizons_arg, "comma list or lo..hi range (overrides config)");
    run->add_flag("--validate-only", validate_only, "parse and check the config, then exit");
    run->add_flag("--keep-going", keep_going, "exit 0 even if some solves fail");
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    run->add_flag("--dump-certificates", dump_certs, "write one witness file per solved bound");

    std::vector<std::string> cert_paths;
    auto* replay = app.add_subcommand("replay", "re-validate dumped witnesses");
    replay->add_option("--config", config_path, "run configuration (json)")->required();
    replay->add_option("certificates", cert_paths, "witness files to check")->required();
    replay->add_flag("--keep-going", keep_going, "exit 0 even if some checks fail");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(run)) {
            return run_command(config_path, out_dir, classes_arg, horizons_arg, validate_only,
                               keep_going, seed, seed_opt->count() > 0, dump_certs);
        }
        return replay_command(config_path, cert_paths, keep_going);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
