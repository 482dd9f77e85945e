#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stovex/params.hpp"

namespace stovex {

// Occupancy of one row boundary; bit i set <=> site i occupied.
struct BoundaryConfig {
    int M = 0;
    std::uint32_t bits = 0;

    static BoundaryConfig from_sites(int M, const std::vector<int>& sites);
    int count() const;
    std::vector<int> occupied() const;
    bool operator==(const BoundaryConfig& o) const { return M == o.M && bits == o.bits; }
};

// Row-major 4x4 in the basis (e0 x e0, e0 x e1, e1 x e0, e1 x e1); first factor is the
// vertical (quantum) edge, second the horizontal (auxiliary) edge.
struct FourByFour {
    std::array<double, 16> e{};
    double operator()(int r, int c) const { return e[4 * r + c]; }
    double& operator()(int r, int c) { return e[4 * r + c]; }
};

// General six-vertex weights. c1 turns a horizontal path up, c2 turns a vertical path right.
struct VertexWeights {
    double a1 = 1, a2 = 1, b1 = 0, b2 = 0, c1 = 1, c2 = 1;
    static VertexWeights from(const StochasticWeights& w);
};

struct TransferBlock {
    int M = 0;
    int m = 0;
    std::vector<BoundaryConfig> basis;
    Eigen::MatrixXd matrix;  // [beta][alpha]

    int index_of(std::uint32_t bits) const;
};

enum class LambdaMode { fixed, varying };

std::string to_string(LambdaMode m);

// Stochastic-point R matrix normalised by sinh(u + eta).
FourByFour r_matrix(const BaxterPoint& p);
// Unnormalised entries sinh(u+eta), sinh(u) e^{+-eta}, sinh(eta) lambda^{-+1}.
FourByFour r_matrix_unnormalized(const BaxterPoint& p, double lambda);
// u-derivative of r_matrix_unnormalized at fixed lambda.
FourByFour r_matrix_du(const BaxterPoint& p);

// Ascending integer order of the occupancy bits.
std::vector<BoundaryConfig> sector_basis(int M, int m);

TransferBlock transfer_block(int M, int m, const VertexWeights& w);
TransferBlock transfer_block(int M, int m, const StochasticWeights& w);

// Dense operator on all 2^M row states, indexed by occupancy bits.
Eigen::MatrixXd transfer_full(int M, const VertexWeights& w);

// Same, together with the derivative obtained from per-weight derivatives dw.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> transfer_full_with_derivative(int M, const VertexWeights& w,
                                                                          const VertexWeights& dw);

// Path-weight enumeration of every destination reachable from alpha.
std::map<std::uint32_t, double> brute_force_transition(const BoundaryConfig& alpha, const VertexWeights& w);
std::map<std::uint32_t, double> brute_force_transition(const BoundaryConfig& alpha, const StochasticWeights& w);

struct ColumnSum {
    double constant = 0;
    double spread = 0;          // (max - min) / max over columns
    double holes_form = 0;      // 1 + b1^(M-m) b2^m, b1 raised to the hole count
    double particles_form = 0;  // 1 + b1^m b2^(M-m)
    std::string matched;        // "holes", "particles", "both" or "none"
};

ColumnSum column_sums(int M, int m, const VertexWeights& w);
double column_sum_constant(int M, int m, const StochasticWeights& w);

TransferBlock markov_block(int M, int m, const StochasticWeights& w);
TransferBlock markov_block(int M, int m, const VertexWeights& w);

struct Commutator {
    double norm = 0;       // max |T(u1)T(u2) - T(u2)T(u1)|
    double max_entry = 0;  // max |entry| of the two products
};

// lambda fixed: both matrices share lambda(u1). varying: each uses lambda(u_k).
Commutator commutator(int M, double u1, double u2, double eta, int branch, LambdaMode mode);
double commutator_norm(int M, double u1, double u2, double eta, int branch,
                       LambdaMode mode = LambdaMode::varying);

Eigen::MatrixXd asep_generator(int M, double eta);

struct AsepRelation {
    double literal_residual = 0;    // |T'T^-1 - coth(eta) I - W|
    double corrected_residual = 0;  // |T'T^-1 - M coth(eta) I + W|
};

// Uses the unnormalised weights at u = 0; p.u is ignored.
AsepRelation asep_relation(int M, const BaxterPoint& p);
double verify_asep_relation(int M, const BaxterPoint& p);

// Stationary distribution of a column-stochastic block.
Eigen::VectorXd stationary_vector(const TransferBlock& markov);

void write_matrix_dump(std::ostream& os, const TransferBlock& t);

}  // namespace stovex
