#pragma once

#include <nlohmann/json.hpp>

#include "iqcgain/analysis.hpp"

namespace iqcgain {

using nlohmann::json;

json to_json(const MatrixXd& m);           // {"rows": r, "cols": c, "data": row-major}
MatrixXd matrix_from_json(const json& j);

json to_json(const StateSpace& sys);
StateSpace state_space_from_json(const json& j);

/// Plant description in a run configuration: either explicit state-space
/// matrices or a first-order transfer-function grid.
StateSpace plant_from_json(const json& j);

json to_json(const Certificate& cert);
Certificate certificate_from_json(const json& j);

/// Stable content checksum over a certificate's numeric payload (FNV-1a
/// over a canonical text rendering).
std::uint64_t certificate_checksum(const Certificate& cert);

struct RunConfig {
    static constexpr int kSchemaVersion = 1;
    StateSpace plant;
    std::vector<MultiplierKind> classes;
    std::vector<int> horizons;
    SolverOptions solver;
    std::uint64_t seed = 0;
};

RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);

std::string kind_name(MultiplierKind k);
MultiplierKind kind_from_name(const std::string& name);

}  // namespace iqcgain
