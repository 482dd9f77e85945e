#include "stovex/xfer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>

#include "stovex/sim.hpp"

namespace stovex {

namespace {

struct Dual {
    double v = 0, d = 0;
};
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

template <class S>
struct SixWeights {
    S a1, a2, b1, b2, c1, c2;
};

// Walks one row left to right. The auxiliary (horizontal) edge enters site 0 with value h0
// and must leave site M-1 with the same value.
template <class S, class F>
void enumerate_row(int M, std::uint32_t alpha, const SixWeights<S>& w, S one, F&& emit) {
    for (int h0 = 0; h0 <= 1; ++h0) {
        auto rec = [&](auto&& self, int j, int h, std::uint32_t beta, S acc) -> void {
            if (j == M) {
                if (h == h0) emit(beta, acc);
                return;
            }
            const int a = (alpha >> j) & 1u;
            const std::uint32_t bit = 1u << j;
            if (a == 0 && h == 0) {
                self(self, j + 1, 0, beta, acc * w.a1);
            } else if (a == 1 && h == 1) {
                self(self, j + 1, 1, beta | bit, acc * w.a2);
            } else if (a == 0) {
                self(self, j + 1, 1, beta, acc * w.b1);
                self(self, j + 1, 0, beta | bit, acc * w.c1);
            } else {
                self(self, j + 1, 0, beta | bit, acc * w.b2);
                self(self, j + 1, 1, beta, acc * w.c2);
            }
        };
        rec(rec, 0, h0, 0u, one);
    }
}

SixWeights<double> six(const VertexWeights& w) { return {w.a1, w.a2, w.b1, w.b2, w.c1, w.c2}; }

void check_size(int M, int max_m, const char* what) {
    if (M < 1 || M > max_m) throw std::invalid_argument(std::string(what) + ": M out of range");
}

double max_abs(const Eigen::MatrixXd& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

VertexWeights baxter_weights(double u, double eta, int branch, double lambda) {
    const double s = std::sinh(u + eta);
    const double c = std::sinh(eta) / s;
    VertexWeights w;
    w.b1 = std::sinh(u) * std::exp(branch * eta) / s;
    w.b2 = std::sinh(u) * std::exp(-branch * eta) / s;
    w.c1 = c * lambda;
    w.c2 = c / lambda;
    return w;
}

}  // namespace

BoundaryConfig BoundaryConfig::from_sites(int M, const std::vector<int>& sites) {
    if (M < 1 || M > 31) throw std::invalid_argument("BoundaryConfig: M out of range");
    BoundaryConfig b;
    b.M = M;
    for (int s : sites) {
        if (s < 0 || s >= M) throw std::invalid_argument("BoundaryConfig: site out of range");
        if (b.bits & (1u << s)) throw std::invalid_argument("BoundaryConfig: duplicate site");
        b.bits |= 1u << s;
    }
    return b;
}

int BoundaryConfig::count() const { return std::popcount(bits); }

std::vector<int> BoundaryConfig::occupied() const {
    std::vector<int> out;
    for (int i = 0; i < M; ++i)
        if (bits & (1u << i)) out.push_back(i);
    return out;
}

VertexWeights VertexWeights::from(const StochasticWeights& w) {
    return {w.a1, w.a2, w.b1, w.b2, w.c1, w.c2};
}

int TransferBlock::index_of(std::uint32_t bits) const {
    auto it = std::lower_bound(basis.begin(), basis.end(), bits,
                               [](const BoundaryConfig& b, std::uint32_t x) { return b.bits < x; });
    if (it == basis.end() || it->bits != bits) return -1;
    return static_cast<int>(it - basis.begin());
}

std::string to_string(LambdaMode m) { return m == LambdaMode::fixed ? "fixed" : "varying"; }

FourByFour r_matrix_unnormalized(const BaxterPoint& p, double lambda) {
    p.validate();
    const double a = std::sinh(p.u + p.eta);
    const double b = std::sinh(p.u);
    const double c = std::sinh(p.eta);
    FourByFour r;
    r(0, 0) = a;
    r(1, 1) = b * std::exp(p.branch * p.eta);
    r(2, 2) = b * std::exp(-p.branch * p.eta);
    r(1, 2) = c / lambda;
    r(2, 1) = c * lambda;
    r(3, 3) = a;
    return r;
}

FourByFour r_matrix(const BaxterPoint& p) {
    FourByFour r = r_matrix_unnormalized(p, std::exp(-p.branch * p.u));
    const double s = std::sinh(p.u + p.eta);
    for (double& x : r.e) x /= s;
    return r;
}

FourByFour r_matrix_du(const BaxterPoint& p) {
    p.validate();
    FourByFour r;
    r(0, 0) = std::cosh(p.u + p.eta);
    r(1, 1) = std::cosh(p.u) * std::exp(p.branch * p.eta);
    r(2, 2) = std::cosh(p.u) * std::exp(-p.branch * p.eta);
    r(3, 3) = r(0, 0);
    return r;
}

std::vector<BoundaryConfig> sector_basis(int M, int m) {
    check_size(M, 30, "sector_basis");
    if (m < 0 || m > M) throw std::invalid_argument("sector_basis: m out of range");
    std::vector<BoundaryConfig> out;
    for (std::uint32_t b = 0; b < (1u << M); ++b)
        if (std::popcount(b) == m) out.push_back({M, b});
    return out;
}

TransferBlock transfer_block(int M, int m, const VertexWeights& w) {
    check_size(M, 14, "transfer_block");
    TransferBlock t;
    t.M = M;
    t.m = m;
    t.basis = sector_basis(M, m);
    const int n = static_cast<int>(t.basis.size());
    t.matrix = Eigen::MatrixXd::Zero(n, n);
    const auto sw = six(w);
    for (int col = 0; col < n; ++col) {
        enumerate_row<double>(M, t.basis[col].bits, sw, 1.0, [&](std::uint32_t beta, double x) {
            const int row = t.index_of(beta);
            if (row < 0) throw invariant_violation("transfer_block: particle number not conserved");
            t.matrix(row, col) += x;
        });
    }
    return t;
}

TransferBlock transfer_block(int M, int m, const StochasticWeights& w) {
    return transfer_block(M, m, VertexWeights::from(w));
}

Eigen::MatrixXd transfer_full(int M, const VertexWeights& w) {
    check_size(M, 12, "transfer_full");
    const std::uint32_t n = 1u << M;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    const auto sw = six(w);
    for (std::uint32_t a = 0; a < n; ++a)
        enumerate_row<double>(M, a, sw, 1.0, [&](std::uint32_t b, double x) { T(b, a) += x; });
    return T;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> transfer_full_with_derivative(int M, const VertexWeights& w,
                                                                          const VertexWeights& dw) {
    check_size(M, 12, "transfer_full_with_derivative");
    const std::uint32_t n = 1u << M;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n), D = Eigen::MatrixXd::Zero(n, n);
    const SixWeights<Dual> sw{{w.a1, dw.a1}, {w.a2, dw.a2}, {w.b1, dw.b1},
                              {w.b2, dw.b2}, {w.c1, dw.c1}, {w.c2, dw.c2}};
    for (std::uint32_t a = 0; a < n; ++a)
        enumerate_row<Dual>(M, a, sw, Dual{1.0, 0.0}, [&](std::uint32_t b, Dual x) {
            T(b, a) += x.v;
            D(b, a) += x.d;
        });
    return {T, D};
}

std::map<std::uint32_t, double> brute_force_transition(const BoundaryConfig& alpha, const VertexWeights& w) {
    const int M = alpha.M;
    check_size(M, 20, "brute_force_transition");
    std::map<std::uint32_t, double> out;
    const std::vector<int> pos = alpha.occupied();
    const int m = static_cast<int>(pos.size());
    if (m == 0) {
        // Only the two closed auxiliary loops: all empty, or a single horizontal line.
        out[0] = std::pow(w.a1, M) + std::pow(w.b1, M);
        return out;
    }
    std::vector<int> gap(m);
    double combos = 1;
    for (int i = 0; i < m; ++i) {
        gap[i] = (i + 1 < m ? pos[i + 1] : pos[0] + M) - pos[i];
        combos *= gap[i] + 1;
    }
    if (combos > 1e7) throw std::invalid_argument("brute_force_transition: enumeration guard exceeded");
    std::vector<int> d(m, 0);
    while (true) {
        bool valid = true;
        if (m >= 2)
            for (int i = 0; i < m && valid; ++i)
                if (d[i] == gap[i] && d[(i + 1) % m] == 0) valid = false;
        if (valid) {
            double weight = 1;
            std::uint32_t beta = 0;
            for (int i = 0; i < m; ++i) {
                weight *= path_weight(gap[i], d[i], w);
                beta |= 1u << ((pos[i] + d[i]) % M);
            }
            out[beta] += weight;
        }
        int k = 0;
        while (k < m && d[k] == gap[k]) d[k++] = 0;
        if (k == m) break;
        ++d[k];
    }
    return out;
}

std::map<std::uint32_t, double> brute_force_transition(const BoundaryConfig& alpha, const StochasticWeights& w) {
    return brute_force_transition(alpha, VertexWeights::from(w));
}

ColumnSum column_sums(int M, int m, const VertexWeights& w) {
    const TransferBlock t = transfer_block(M, m, w);
    const Eigen::RowVectorXd sums = t.matrix.colwise().sum();
    ColumnSum r;
    const double hi = sums.maxCoeff(), lo = sums.minCoeff();
    r.constant = sums.mean();
    r.spread = hi > 0 ? (hi - lo) / hi : 0.0;
    r.holes_form = 1.0 + std::pow(w.b1, M - m) * std::pow(w.b2, m);
    r.particles_form = 1.0 + std::pow(w.b1, m) * std::pow(w.b2, M - m);
    const auto close = [&](double x) { return std::abs(x - r.constant) <= 1e-12 * r.constant; };
    const bool h = close(r.holes_form), p = close(r.particles_form);
    r.matched = h && p ? "both" : h ? "holes" : p ? "particles" : "none";
    return r;
}

double column_sum_constant(int M, int m, const StochasticWeights& w) {
    const ColumnSum r = column_sums(M, m, VertexWeights::from(w));
    if (r.spread > 1e-12)
        throw invariant_violation("column sums are not uniform (relative spread " + std::to_string(r.spread) + ")");
    return r.constant;
}

TransferBlock markov_block(int M, int m, const VertexWeights& w) {
    TransferBlock t = transfer_block(M, m, w);
    const Eigen::RowVectorXd sums = t.matrix.colwise().sum();
    const double hi = sums.maxCoeff(), lo = sums.minCoeff();
    if (hi <= 0 || (hi - lo) / hi > 1e-12)
        throw invariant_violation("markov_block: column sums are not uniform");
    t.matrix /= sums.mean();
    return t;
}

TransferBlock markov_block(int M, int m, const StochasticWeights& w) {
    return markov_block(M, m, VertexWeights::from(w));
}

Commutator commutator(int M, double u1, double u2, double eta, int branch, LambdaMode mode) {
    check_size(M, 10, "commutator");
    BaxterPoint{u1, eta, branch}.validate();
    BaxterPoint{u2, eta, branch}.validate();
    const double l1 = std::exp(-branch * u1);
    const double l2 = mode == LambdaMode::fixed ? l1 : std::exp(-branch * u2);
    const Eigen::MatrixXd A = transfer_full(M, baxter_weights(u1, eta, branch, l1));
    const Eigen::MatrixXd B = transfer_full(M, baxter_weights(u2, eta, branch, l2));
    const Eigen::MatrixXd AB = A * B, BA = B * A;
    return {max_abs(AB - BA), std::max(max_abs(AB), max_abs(BA))};
}

double commutator_norm(int M, double u1, double u2, double eta, int branch, LambdaMode mode) {
    return commutator(M, u1, u2, eta, branch, mode).norm;
}

Eigen::MatrixXd asep_generator(int M, double eta) {
    check_size(M, 12, "asep_generator");
    if (!(eta > 0)) throw std::invalid_argument("asep_generator: eta must be > 0");
    const double p = std::exp(eta) / std::sinh(eta);
    const double q = std::exp(-eta) / std::sinh(eta);
    const std::uint32_t n = 1u << M;
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < M; ++i) {
        const int j = (i + 1) % M;
        if (j == i) continue;
        const std::uint32_t bi = 1u << i, bj = 1u << j;
        for (std::uint32_t s = 0; s < n; ++s) {
            const bool oi = s & bi, oj = s & bj;
            if (oi && !oj) {  // local e1 x e0: hop i -> i+1 at rate p
                W(s, s) += p;
                W(s ^ bi ^ bj, s) -= p;
            } else if (!oi && oj) {  // local e0 x e1: hop i+1 -> i at rate q
                W(s, s) += q;
                W(s ^ bi ^ bj, s) -= q;
            }
        }
    }
    return W;
}

AsepRelation asep_relation(int M, const BaxterPoint& p) {
    check_size(M, 10, "asep_relation");
    if (!(p.eta > 0)) throw std::invalid_argument("asep_relation: eta must be > 0");
    const double se = std::sinh(p.eta);
    VertexWeights w{se, se, 0.0, 0.0, se, se};
    VertexWeights dw{std::cosh(p.eta), std::cosh(p.eta), std::exp(p.branch * p.eta),
                     std::exp(-p.branch * p.eta), 0.0, 0.0};
    const auto [T, Tp] = transfer_full_with_derivative(M, w, dw);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(T);
    if (!lu.isInvertible()) throw std::runtime_error("asep_relation: T(0) is singular");
    const Eigen::MatrixXd G = Tp * lu.inverse();
    const Eigen::MatrixXd W = asep_generator(M, p.eta);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(G.rows(), G.cols());
    const double coth = 1.0 / std::tanh(p.eta);
    AsepRelation r;
    r.literal_residual = max_abs(G - coth * I - W);
    r.corrected_residual = max_abs(G - M * coth * I + W);
    return r;
}

double verify_asep_relation(int M, const BaxterPoint& p) { return asep_relation(M, p).literal_residual; }

Eigen::VectorXd stationary_vector(const TransferBlock& markov) {
    const Eigen::Index n = markov.matrix.rows();
    Eigen::MatrixXd A = markov.matrix - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    return A.fullPivLu().solve(rhs);
}

void write_matrix_dump(std::ostream& os, const TransferBlock& t) {
    os << "# " << t.M << ' ' << t.m << ' ' << t.matrix.rows() << ' ' << t.matrix.cols() << '\n';
    os << std::setprecision(17);
    for (Eigen::Index r = 0; r < t.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < t.matrix.cols(); ++c) {
            if (c) os << ' ';
            os << t.matrix(r, c);
        }
        os << '\n';
    }
}

}  // namespace stovex
