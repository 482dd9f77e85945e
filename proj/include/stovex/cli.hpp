#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stovex/params.hpp"
#include "stovex/sim.hpp"
#include "stovex/solver.hpp"

namespace stovex {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Mode { verify, simulate, solve, compare, exact_examples };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct RunConfig {
    Mode mode = Mode::verify;

    std::optional<BaxterPoint> baxter;
    std::optional<std::pair<double, double>> probabilities;  // (b1, b2)
    VConvention v_convention = VConvention::magnitude;

    double L = 1.0;
    double T_len = 1.0;
    int M = 64;
    std::optional<int> N;

    std::string initial_kind = "periodic-step";  // step | periodic-step | custom-csv
    double x1 = 0.5;
    double rho_left = 1.0;
    double rho_right = -1.0;
    std::string initial_path;

    int runs = 1;
    std::uint64_t seed = 1;

    int n_x = 512;
    double cfl = 0.9;
    double y_max = 1.0;
    int output_rows = 4;

    int compare_rows = 8;

    int verify_max_M = 8;
    std::vector<std::pair<double, double>> verify_points{{0.8, 0.2}, {0.5, 0.2}, {0.2, 0.6}};
    double verify_corrupt_c1 = 0.0;

    std::string output_dir = "out";

    // Canonical `key = value` text; parsing it again yields the same configuration.
    std::string emit() const;
    std::uint64_t hash() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

StochasticWeights model_weights(const RunConfig& cfg);
ModelScale model_scale(const RunConfig& cfg);
PiecewiseDensity initial_density(const RunConfig& cfg);

// Lattice sites are mirrored against the continuum axis: continuum cell k is lattice site M-1-k.
int continuum_cell_of_site(int M, int site);
RingState discretize(const PiecewiseDensity& rho0, int M);

struct CheckRecord {
    std::string name;
    int M = 0;
    int m = -1;
    std::string params;
    double measured = 0;
    std::string matched;
    double residual = 0;
    double tolerance = 0;
    bool pass = true;
    bool informational = false;  // recorded, not part of the verdict
};

struct VerificationReport {
    std::vector<CheckRecord> records;

    bool all_pass() const;
    void write_json(std::ostream& os) const;
    void write_csv(std::ostream& os) const;
};

VerificationReport run_verify(const RunConfig& cfg);

struct CompareRow {
    int row = 0;
    double y = 0;
    double l1_density = 0;
    double sup_height = 0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    double max_l1 = 0;
    double max_sup_height = 0;
    double bcg_l1 = -1;  // early-time fan profile distance, -1 when no row qualifies
    long long height_violations = 0;
    double v = 0;
};

// Ensemble mean density against the front-tracking solution of the same initial data.
CompareResult compare_density(const PiecewiseDensity& rho0, const StochasticWeights& w, int M, int N, int K,
                              std::uint64_t seed, int n_rows, int threads);

int thread_count();

// Runs cfg.mode, writes artifacts and the manifest into cfg.output_dir. Returns the exit code.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace stovex
