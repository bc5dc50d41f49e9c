#include "iqcgain/serialize.hpp"

#include <cstdio>
#include <fstream>

namespace iqcgain {

json to_json(const MatrixXd& m) {
    std::vector<double> data;
    data.reserve(m.size());
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const json& j) {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != rows * cols) {
        throw std::invalid_argument("matrix_from_json: data length mismatch");
    }
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
    }
    return m;
}

json to_json(const StateSpace& sys) {
    return json{{"A", to_json(sys.A)},
                {"B", to_json(sys.B)},
                {"C", to_json(sys.C)},
                {"D", to_json(sys.D)},
                {"input_partition", sys.input_partition},
                {"output_partition", sys.output_partition}};
}

StateSpace state_space_from_json(const json& j) {
    return StateSpace(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                      matrix_from_json(j.at("C")), matrix_from_json(j.at("D")),
                      j.at("input_partition").get<std::vector<int>>(),
                      j.at("output_partition").get<std::vector<int>>());
}

StateSpace plant_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "state_space") return state_space_from_json(j);
    if (type != "first_order_grid") {
        throw std::invalid_argument("plant_from_json: unknown plant type '" + type + "'");
    }
    FirstOrderGrid grid;
    grid.rows = j.at("rows").get<int>();
    grid.cols = j.at("cols").get<int>();
    for (const auto& e : j.at("entries")) {
        if (e.contains("pole")) {
            grid.entries.push_back(
                FirstOrderTerm::first_order(e.at("gain").get<double>(), e.at("pole").get<double>()));
        } else {
            grid.entries.push_back(FirstOrderTerm::constant(e.at("gain").get<double>()));
        }
    }
    grid.input_partition = j.at("input_partition").get<std::vector<int>>();
    grid.output_partition = j.at("output_partition").get<std::vector<int>>();
    return realize_first_order_bank(grid);
}

std::string kind_name(MultiplierKind k) {
    return k == MultiplierKind::Relu ? "relu" : "slope";
}

MultiplierKind kind_from_name(const std::string& name) {
    if (name == "relu") return MultiplierKind::Relu;
    if (name == "slope") return MultiplierKind::Slope;
    throw std::invalid_argument("unknown multiplier class '" + name + "' (expected relu or slope)");
}

namespace {
json family_to_json(const std::vector<MatrixXd>& q) {
    json arr = json::array();
    for (const auto& Qi : q) arr.push_back(to_json(Qi));
    return arr;
}

std::vector<MatrixXd> family_from_json(const json& j) {
    std::vector<MatrixXd> q;
    for (const auto& e : j) q.push_back(matrix_from_json(e));
    return q;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "numerical-failure";
}

SolveStatus status_from_name(const std::string& s) {
    if (s == "optimal") return SolveStatus::Optimal;
    if (s == "infeasible") return SolveStatus::Infeasible;
    return SolveStatus::NumericalFailure;
}
}  // namespace

json to_json(const Certificate& cert) {
    json j{{"status", status_name(cert.status)},
           {"gamma", cert.gamma},
           {"P", to_json(cert.P)},
           {"lmi_max_eig", cert.lmi_max_eig},
           {"p_min_eig", cert.p_min_eig},
           {"iterations", cert.diagnostics.iterations}};
    if (std::holds_alternative<SlopeMultiplier>(cert.multiplier)) {
        const auto& q = std::get<SlopeMultiplier>(cert.multiplier);
        j["class"] = "slope";
        j["N"] = q.N;
        j["m"] = q.m;
        j["Q"] = family_to_json(q.Q);
    } else {
        const auto& q = std::get<ReluMultiplier>(cert.multiplier);
        j["class"] = "relu";
        j["N"] = q.N;
        j["m"] = q.m;
        j["M1"] = to_json(q.M1);
        j["M2"] = to_json(q.M2);
        j["M3"] = to_json(q.M3);
    }
    return j;
}

Certificate certificate_from_json(const json& j) {
    Certificate cert;
    cert.status = status_from_name(j.at("status").get<std::string>());
    cert.gamma = j.at("gamma").get<double>();
    cert.P = matrix_from_json(j.at("P"));
    cert.lmi_max_eig = j.value("lmi_max_eig", 0.0);
    cert.p_min_eig = j.value("p_min_eig", 0.0);
    const std::string cls = j.at("class").get<std::string>();
    if (cls == "slope") {
        SlopeMultiplier q;
        q.N = j.at("N").get<int>();
        q.m = j.at("m").get<int>();
        q.Q = family_from_json(j.at("Q"));
        cert.multiplier = std::move(q);
    } else {
        ReluMultiplier q;
        q.N = j.at("N").get<int>();
        q.m = j.at("m").get<int>();
        q.M1 = matrix_from_json(j.at("M1"));
        q.M2 = matrix_from_json(j.at("M2"));
        q.M3 = matrix_from_json(j.at("M3"));
        cert.multiplier = std::move(q);
    }
    return cert;
}

std::uint64_t certificate_checksum(const Certificate& cert) {
    // FNV-1a over a canonical fixed-precision rendering.
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const char* s) {
        for (; *s; ++s) {
            h ^= static_cast<unsigned char>(*s);
            h *= 1099511628211ull;
        }
    };
    char buf[64];
    auto mix_double = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12e;", v);
        mix(buf);
    };
    auto mix_matrix = [&](const MatrixXd& m) {
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) mix_double(m(r, c));
        }
    };
    mix_double(cert.gamma);
    mix_matrix(cert.P);
    if (std::holds_alternative<SlopeMultiplier>(cert.multiplier)) {
        mix("slope;");
        for (const auto& Qi : std::get<SlopeMultiplier>(cert.multiplier).Q) mix_matrix(Qi);
    } else {
        mix("relu;");
        const auto& q = std::get<ReluMultiplier>(cert.multiplier);
        mix_matrix(q.M1);
        mix_matrix(q.M2);
        mix_matrix(q.M3);
    }
    return h;
}

RunConfig run_config_from_json(const json& j) {
    const int version = j.value("schema_version", 1);
    if (version != RunConfig::kSchemaVersion) {
        throw std::invalid_argument("unsupported config schema version " + std::to_string(version));
    }
    RunConfig cfg;
    cfg.plant = plant_from_json(j.at("plant"));
    for (const auto& c : j.at("classes")) cfg.classes.push_back(kind_from_name(c.get<std::string>()));
    cfg.horizons = j.at("horizons").get<std::vector<int>>();
    if (cfg.horizons.empty()) throw std::invalid_argument("config: empty horizon list");
    if (cfg.classes.empty()) throw std::invalid_argument("config: empty class list");
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.solver.tol_gap = s.value("tol_gap", cfg.solver.tol_gap);
        cfg.solver.tol_feas = s.value("tol_feas", cfg.solver.tol_feas);
        cfg.solver.max_iterations = s.value("max_iterations", cfg.solver.max_iterations);
    }
    cfg.seed = j.value("seed", 0ull);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    json j;
    in >> j;
    return run_config_from_json(j);
}

}  // namespace iqcgain
