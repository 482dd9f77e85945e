#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "stovex/params.hpp"

namespace stovex {

struct VertexWeights;

using Rng = std::mt19937_64;

// Independent stream for run `run` of an ensemble seeded by `master`.
Rng make_stream(std::uint64_t master, std::uint64_t run);
double uniform01(Rng& rng);

struct RingState {
    int M = 0;
    std::vector<int> positions;  // strictly increasing, in [0, M)

    static RingState from_positions(int M, std::vector<int> positions);
    static RingState from_occupancy(const std::vector<std::uint8_t>& occ);
    int m() const { return static_cast<int>(positions.size()); }
    std::vector<std::uint8_t> occupancy() const;
    std::uint32_t bits() const;  // requires M <= 32
};

struct RowStep {
    RingState next;
    std::vector<int> jumps;   // d_i for particle i of the previous row
    bool empty_loop = false;  // m = 0 only: the horizontal line wraps the whole ring

    // Occupancy of the horizontal edge entering each site during this step.
    std::vector<std::uint8_t> horizontal_edges(const RingState& from) const;
};

double path_weight(int gap, int d, const StochasticWeights& w);
double path_weight(int gap, int d, const VertexWeights& w);

// Exact sampler of one row of the stochastic dynamics. Holds scratch space, so one instance
// per thread.
class RowSampler {
public:
    RowSampler(int M, const StochasticWeights& w);
    RowStep step(const RingState& s, Rng& rng);
    int M() const { return M_; }

private:
    int truncated_geometric(int n, Rng& rng) const;

    int M_;
    StochasticWeights w_;
    double log_b1_;
    std::vector<double> b1_pow_;  // b1^k
    std::vector<double> geo_sum_;  // sum_{k<n} b1^k
    std::vector<std::array<double, 9>> suffix_;
    std::vector<std::array<double, 3>> weight_;
    std::vector<int> gap_;
    std::vector<int> state_;
};

RowStep sample_row(const RingState& s, const StochasticWeights& w, Rng& rng);

struct Trajectory {
    std::vector<RingState> rows;  // N + 1 rows
    std::vector<RowStep> steps;   // N steps
};

Trajectory evolve(const RingState& s0, int N, const StochasticWeights& w, Rng& rng);

// Heights on faces in the continuum orientation: face k sits between lattice sites M-k and
// M-1-k, so increasing k walks the ring in the direction the continuum x axis points.
struct HeightField {
    int M = 0;
    int N = 0;
    int monodromy = 0;
    std::vector<int> grid;  // (N + 1) x (M + 1), row major

    int at(int k, int n) const { return grid[static_cast<std::size_t>(n) * (M + 1) + k]; }
};

HeightField height_from_trajectory(const Trajectory& traj);
// Throws invariant_violation unless the crossing rules and monodromy hold.
void check_height_field(const HeightField& hf, const Trajectory& traj);

struct NormalizedHeight {
    HeightField field;
    ModelScale scale;
    double operator()(double x, double y) const;
};

NormalizedHeight normalized_height(const HeightField& hf, const ModelScale& scale);

struct RunStats {
    int M = 0, N = 0, K = 0;
    std::vector<double> mean_density;  // (N + 1) x M, lattice site order
    std::vector<double> mean_height;   // (N + 1) x (M + 1), continuum face order
    long long height_violations = 0;   // trajectories whose height field failed its checks

    double density(int n, int site) const { return mean_density[static_cast<std::size_t>(n) * M + site]; }
    double height(int n, int face) const { return mean_height[static_cast<std::size_t>(n) * (M + 1) + face]; }
};

// Run r uses make_stream(master_seed, r); accumulation is in integers so the result does not
// depend on the thread count.
RunStats ensemble_density(const RingState& s0, int N, int K, const StochasticWeights& w,
                          std::uint64_t master_seed, int threads = 1);

}  // namespace stovex
