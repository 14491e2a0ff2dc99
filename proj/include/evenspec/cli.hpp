#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evenspec/basis.hpp"
#include "evenspec/asymptotics.hpp"

namespace evenspec {

struct RunConfig {
    std::string command;
    BoundaryCondition bc;
    int k = 2;
    double omega = 1.0;
    int N = 64;
    std::string potential_path;
    Order order = Order::Second;
    int series_cut = 0;
    double tol = 1e-12;
    int max_iter = 200;
    std::string out_dir = ".";
    unsigned long long seed = 1;
    bool dry_run = false;

    int n_lo = 0; ///< compare/rates: first index (0 = automatic)
    int n_hi = 0; ///< compare/rates: last index (0 = N/2)
    int d_lo = 8; ///< projections: first tail index
    int d_hi = 0; ///< projections: last tail index (0 = N/2 - 8)
    int d_step = 1;
    std::vector<double> times{1e-4, 1e-3, 1e-2};

    bool assert_mode = false;
    double assert_order = 0.0;
    double assert_r2 = 0.95;

    SpectralModel model() const;
    void validate() const;
    nlohmann::json to_json() const;
};

/// Merge a JSON config into `cfg`.  Relative paths are resolved against
/// `base_dir`.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j, const std::string& base_dir);

int cmd_spectrum(const RunConfig& cfg);
int cmd_compare(const RunConfig& cfg);
int cmd_similar(const RunConfig& cfg);
int cmd_projections(const RunConfig& cfg);
int cmd_semigroup(const RunConfig& cfg);
int cmd_rates(const RunConfig& cfg);

/// Parses arguments, dispatches, and maps failures to exit codes
/// (0 ok, 2 configuration, 3 numerical, 4 assertion).
int run_cli(int argc, char** argv);

} // namespace evenspec
