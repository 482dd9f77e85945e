#include <bit>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "stovex/xfer.hpp"

using namespace stovex;
using doctest::Approx;

namespace {

// (D^V x D^{H+alpha}) R(u) (D^V x D^{H-alpha}) by explicit multiplication, D^b = diag(e^{b/2}, e^{-b/2}).
FourByFour d_product(const BaxterPoint& p, double V, double H, double alpha) {
    const double a = std::sinh(p.u + p.eta), b = std::sinh(p.u), c = std::sinh(p.eta);
    double R[4][4] = {{a, 0, 0, 0}, {0, b, c, 0}, {0, c, b, 0}, {0, 0, 0, a}};
    auto D = [](double beta, int bit) { return std::exp((bit ? -0.5 : 0.5) * beta); };
    FourByFour out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double left = D(V, i >> 1) * D(H + alpha, i & 1);
            const double right = D(V, j >> 1) * D(H - alpha, j & 1);
            out(i, j) = left * R[i][j] * right / a;
        }
    return out;
}

double max_diff(const FourByFour& x, const FourByFour& y) {
    double d = 0;
    for (int i = 0; i < 16; ++i) d = std::max(d, std::abs(x.e[i] - y.e[i]));
    return d;
}

}  // namespace

TEST_CASE("R matrix equals the field-conjugated product with V = -H = branch*eta/2") {
    for (int br : {1, -1}) {
        const BaxterPoint p{0.5, 0.3, br};
        const FourByFour r = r_matrix(p);
        CHECK(max_diff(r, d_product(p, br * p.eta / 2, -br * p.eta / 2, -br * p.u)) < 1e-15);
        // H = +branch*eta/2 would swap the two b entries.
        CHECK(max_diff(r, d_product(p, -br * p.eta / 2, br * p.eta / 2, -br * p.u)) > 1e-2);
        const StochasticWeights w = weights_from_baxter(p);
        CHECK(r(0, 0) == Approx(1.0));
        CHECK(r(3, 3) == Approx(1.0));
        CHECK(r(1, 1) == Approx(w.b1));
        CHECK(r(2, 2) == Approx(w.b2));
        CHECK(r(1, 2) == Approx(w.c2));
        CHECK(r(2, 1) == Approx(w.c1));
    }
}

TEST_CASE("R matrix zero pattern and the small-u permutation limit") {
    const FourByFour r = r_matrix({1e-10, 0.4, 1});
    CHECK(r(1, 2) == Approx(1.0));
    CHECK(r(2, 1) == Approx(1.0));
    CHECK(r(1, 1) < 1e-9);
    CHECK(r(2, 2) < 1e-9);
    const FourByFour d = r_matrix_du({0.7, 0.4, 1});
    const FourByFour q = r_matrix({0.7, 0.4, 1});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const bool allowed = i == j || (i == 1 && j == 2) || (i == 2 && j == 1);
            if (!allowed) {
                CHECK(q(i, j) == 0.0);
                CHECK(d(i, j) == 0.0);
            }
        }
}

TEST_CASE("analytic u derivative agrees with central differences") {
    for (int br : {1, -1}) {
        const BaxterPoint p{0.7, 0.4, br};
        const double lam = std::exp(-br * p.u), h = 1e-6;
        const FourByFour plus = r_matrix_unnormalized({p.u + h, p.eta, br}, lam);
        const FourByFour minus = r_matrix_unnormalized({p.u - h, p.eta, br}, lam);
        const FourByFour d = r_matrix_du(p);
        for (int i = 0; i < 16; ++i) CHECK(std::abs((plus.e[i] - minus.e[i]) / (2 * h) - d.e[i]) < 1e-7);
        CHECK(d(0, 0) == Approx(std::cosh(1.1)));
        CHECK(d(1, 2) == 0.0);
    }
}

TEST_CASE("sector basis is ordered by the occupancy bit string") {
    const auto b = sector_basis(4, 2);
    REQUIRE(b.size() == 6);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i - 1].bits < b[i].bits);
    CHECK(b.front().bits == 0b0011u);
    CHECK(BoundaryConfig::from_sites(4, {1, 3}).bits == 0b1010u);
    CHECK(BoundaryConfig::from_sites(4, {1, 3}).occupied() == std::vector<int>{1, 3});
}

TEST_CASE("single-site blocks from the two auxiliary loops") {
    const StochasticWeights w = weights_from_probabilities(0.6, 0.2);
    const TransferBlock t0 = transfer_block(1, 0, w), t1 = transfer_block(1, 1, w);
    CHECK(t0.matrix(0, 0) == Approx(1.0 + 0.6));
    CHECK(t1.matrix(0, 0) == Approx(1.0 + 0.2));
}

TEST_CASE("two-site single-particle block") {
    const StochasticWeights w = weights_from_probabilities(0.7, 0.3);
    const TransferBlock t = transfer_block(2, 1, w);
    REQUIRE(t.matrix.rows() == 2);
    for (int c = 0; c < 2; ++c) CHECK(t.matrix.col(c).sum() == Approx(1.0 + 0.21));
    const auto bf = brute_force_transition(BoundaryConfig::from_sites(2, {0}), w);
    double total = 0;
    for (const auto& [bits, x] : bf) total += x;
    CHECK(total == Approx(1.21));
}

TEST_CASE("column sums follow 1 + b1^(M-m) b2^m") {
    for (double b1 : {0.2, 0.5, 0.8})
        for (double b2 : {0.2, 0.5, 0.8}) {
            const VertexWeights w = VertexWeights::from(weights_from_probabilities(b1, b2, VConvention::magnitude, true));
            for (int M = 1; M <= 7; ++M)
                for (int m = 0; m <= M; ++m) {
                    const ColumnSum cs = column_sums(M, m, w);
                    CHECK(cs.spread <= 1e-12);
                    CHECK(cs.constant == Approx(1.0 + std::pow(b1, M - m) * std::pow(b2, m)).epsilon(1e-13));
                    if (b1 == b2 || 2 * m == M) CHECK(cs.matched == "both");
                    else CHECK(cs.matched == "holes");
                }
        }
}

TEST_CASE("empty sector") {
    const StochasticWeights w = weights_from_probabilities(0.6, 0.3);
    for (int M = 1; M <= 6; ++M) {
        CHECK(column_sum_constant(M, 0, w) == Approx(1.0 + std::pow(0.6, M)));
        const auto bf = brute_force_transition(BoundaryConfig{M, 0}, w);
        REQUIRE(bf.size() == 1);
        CHECK(bf.begin()->second == Approx(1.0 + std::pow(0.6, M)));
    }
}

TEST_CASE("transfer block columns equal brute-force path enumeration") {
    const StochasticWeights w = weights_from_baxter({0.4, 0.6, -1});
    for (int M = 1; M <= 8; ++M)
        for (int m = 0; m <= M; ++m) {
            const TransferBlock t = transfer_block(M, m, w);
            for (std::size_t a = 0; a < t.basis.size(); ++a) {
                const auto bf = brute_force_transition(t.basis[a], w);
                double d = 0;
                for (std::size_t b = 0; b < t.basis.size(); ++b) {
                    const auto it = bf.find(t.basis[b].bits);
                    d = std::max(d, std::abs((it == bf.end() ? 0.0 : it->second) - t.matrix(b, a)));
                }
                CHECK(d <= 1e-12);
            }
        }
}

TEST_CASE("full transfer matrix is block diagonal in particle number") {
    const VertexWeights w = VertexWeights::from(weights_from_probabilities(0.5, 0.25));
    const Eigen::MatrixXd T = transfer_full(5, w);
    for (int b = 0; b < 32; ++b)
        for (int a = 0; a < 32; ++a)
            if (std::popcount(unsigned(a)) != std::popcount(unsigned(b))) CHECK(T(b, a) == 0.0);
}

TEST_CASE("markov blocks are column stochastic and nonnegative") {
    for (double b1 : {0.1, 0.5, 0.9})
        for (double b2 : {0.1, 0.4, 0.9}) {
            const StochasticWeights w = weights_from_probabilities(b1, b2, VConvention::magnitude, true);
            for (int M = 2; M <= 8; ++M)
                for (int m = 0; m <= M; ++m) {
                    const TransferBlock p = markov_block(M, m, w);
                    for (Eigen::Index c = 0; c < p.matrix.cols(); ++c) CHECK(std::abs(p.matrix.col(c).sum() - 1) <= 1e-12);
                    CHECK(p.matrix.minCoeff() >= -1e-15);
                }
        }
}

TEST_CASE("b1 = b2 = 0 gives the cyclic shift") {
    const StochasticWeights w = weights_from_probabilities(0.0, 0.0, VConvention::magnitude, true);
    const TransferBlock p = markov_block(5, 2, w);
    for (std::size_t a = 0; a < p.basis.size(); ++a) {
        const std::uint32_t s = p.basis[a].bits;
        const std::uint32_t shifted = ((s << 1) | (s >> 4)) & 0x1Fu;
        CHECK(p.matrix(p.index_of(shifted), a) == Approx(1.0));
    }
}

TEST_CASE("uniform distribution is stationary within a sector") {
    const StochasticWeights w = weights_from_probabilities(0.8, 0.3);
    for (int M = 3; M <= 7; ++M)
        for (int m = 1; m < M; ++m) {
            const Eigen::VectorXd pi = stationary_vector(markov_block(M, m, w));
            CHECK((pi.array() - 1.0 / pi.size()).abs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("spectral radius one") {
    const TransferBlock p = markov_block(6, 3, weights_from_probabilities(0.7, 0.2));
    const Eigen::VectorXcd ev = p.matrix.eigenvalues();
    CHECK(ev.cwiseAbs().maxCoeff() == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("commuting family under both lambda conventions") {
    for (LambdaMode mode : {LambdaMode::fixed, LambdaMode::varying}) {
        CHECK(commutator(4, 0.6, 0.6, 0.5, 1, mode).norm == 0.0);
        const Commutator c = commutator(4, 0.3, 0.8, 0.5, 1, mode);
        CHECK(c.norm <= 1e-10 * c.max_entry);
        const Commutator d = commutator(6, 0.2, 1.1, 0.9, -1, mode);
        CHECK(d.norm <= 1e-10 * d.max_entry);
    }
    CHECK(commutator_norm(5, 0.3, 0.9, 0.4, 1) < 1e-10);
}

TEST_CASE("ASEP generator structure") {
    const double eta = 0.7, p = std::exp(eta) / std::sinh(eta), q = std::exp(-eta) / std::sinh(eta);
    const Eigen::MatrixXd W = asep_generator(4, eta);
    for (Eigen::Index c = 0; c < W.cols(); ++c) CHECK(std::abs(W.col(c).sum()) < 1e-12);
    // Particle at site 0, site 1 empty: hop right at rate p.
    CHECK(W(0b0010, 0b0001) == Approx(-p));
    CHECK(W(0b0001, 0b0010) == Approx(-q));
    const Eigen::MatrixXd W2 = asep_generator(2, eta);
    CHECK(W2(0b01, 0b01) == Approx(p + q));
}

TEST_CASE("T'(0) T(0)^-1 against the ASEP generator") {
    for (int M : {2, 3, 4})
        for (double eta : {0.3, 0.7, 1.2}) {
            const AsepRelation r = asep_relation(M, {0.1, eta, 1});
            CHECK(r.corrected_residual <= 1e-9);
            // The shift by coth(eta) and the sign of W as written do not hold.
            CHECK(r.literal_residual > 1.0);
        }
}

TEST_CASE("size guards") {
    const StochasticWeights w = weights_from_probabilities(0.5, 0.2);
    CHECK_THROWS(transfer_block(15, 3, w));
    CHECK_THROWS(transfer_block(4, 5, w));
    CHECK_THROWS(brute_force_transition(BoundaryConfig::from_sites(21, {0, 7, 14}), w));
}

TEST_CASE("matrix dump format") {
    std::ostringstream os;
    write_matrix_dump(os, transfer_block(3, 1, weights_from_probabilities(0.5, 0.2)));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "# 3 1 3 3");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3);
}
