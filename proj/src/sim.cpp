#include "stovex/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "stovex/xfer.hpp"

namespace stovex {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum : int { X = 0, Y = 1, Z = 2 };  // stay, interior jump, jump onto the next particle's site

constexpr bool allowed(int a, int b) { return !(a == Z && b == X); }

template <class W>
double path_weight_impl(int gap, int d, const W& w) {
    if (gap < 1 || d < 0 || d > gap) throw std::invalid_argument("path_weight: d out of range");
    if (d == 0) return w.b2;
    if (d == gap) return std::pow(w.b1, gap - 1);
    return w.c1 * w.c2 * std::pow(w.b1, d - 1);
}

}  // namespace

Rng make_stream(std::uint64_t master, std::uint64_t run) {
    std::uint64_t s = master;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = a ^ (run * 0xD1B54A32D192ED03ULL);
    return Rng(splitmix64(t));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

RingState RingState::from_positions(int M, std::vector<int> positions) {
    if (M < 1) throw std::invalid_argument("RingState: M must be >= 1");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (positions[i] < 0 || positions[i] >= M) throw std::invalid_argument("RingState: position out of range");
        if (i && positions[i] <= positions[i - 1]) throw std::invalid_argument("RingState: positions must increase");
    }
    return RingState{M, std::move(positions)};
}

RingState RingState::from_occupancy(const std::vector<std::uint8_t>& occ) {
    RingState s;
    s.M = static_cast<int>(occ.size());
    if (s.M < 1) throw std::invalid_argument("RingState: empty ring");
    for (int i = 0; i < s.M; ++i)
        if (occ[i]) s.positions.push_back(i);
    return s;
}

std::vector<std::uint8_t> RingState::occupancy() const {
    std::vector<std::uint8_t> occ(M, 0);
    for (int p : positions) occ[p] = 1;
    return occ;
}

std::uint32_t RingState::bits() const {
    if (M > 32) throw std::invalid_argument("RingState::bits: M > 32");
    std::uint32_t b = 0;
    for (int p : positions) b |= 1u << p;
    return b;
}

std::vector<std::uint8_t> RowStep::horizontal_edges(const RingState& from) const {
    std::vector<std::uint8_t> e(from.M, empty_loop ? 1 : 0);
    for (int i = 0; i < from.m(); ++i)
        for (int k = 1; k <= jumps[i]; ++k) e[(from.positions[i] + k) % from.M] = 1;
    return e;
}

double path_weight(int gap, int d, const StochasticWeights& w) { return path_weight_impl(gap, d, w); }
double path_weight(int gap, int d, const VertexWeights& w) { return path_weight_impl(gap, d, w); }

RowSampler::RowSampler(int M, const StochasticWeights& w) : M_(M), w_(w) {
    if (M < 1) throw std::invalid_argument("RowSampler: M must be >= 1");
    if (!(w.b1 >= 0 && w.b1 <= 1 && w.b2 >= 0 && w.b2 <= 1))
        throw std::invalid_argument("RowSampler: b1, b2 must lie in [0,1]");
    log_b1_ = w.b1 > 0 ? std::log(w.b1) : 0.0;
    b1_pow_.resize(M + 1);
    geo_sum_.resize(M + 1);
    b1_pow_[0] = 1.0;
    geo_sum_[0] = 0.0;
    for (int k = 1; k <= M; ++k) {
        b1_pow_[k] = b1_pow_[k - 1] * w.b1;
        geo_sum_[k] = geo_sum_[k - 1] + b1_pow_[k - 1];
    }
}

int RowSampler::truncated_geometric(int n, Rng& rng) const {
    // k in [0, n) with P(k) proportional to b1^k
    if (n <= 1 || w_.b1 == 0.0) return 0;
    const double u = uniform01(rng);
    if (w_.b1 >= 1.0 - 1e-12) return std::min(n - 1, static_cast<int>(u * n));
    const double tail = 1.0 - b1_pow_[n];
    const int k = static_cast<int>(std::floor(std::log1p(-u * tail) / log_b1_));
    return std::clamp(k, 0, n - 1);
}

RowStep RowSampler::step(const RingState& s, Rng& rng) {
    if (s.M != M_) throw std::invalid_argument("RowSampler: ring size mismatch");
    const int m = s.m();
    RowStep out;
    out.next.M = M_;
    if (m == 0) {
        const double loop = b1_pow_[M_];
        out.empty_loop = uniform01(rng) * (1.0 + loop) < loop;
        return out;
    }
    gap_.resize(m);
    weight_.resize(m);
    suffix_.resize(m);
    state_.resize(m);
    const double cc = w_.c1 * w_.c2;
    for (int i = 0; i < m; ++i) {
        const int g = (i + 1 < m ? s.positions[i + 1] : s.positions[0] + M_) - s.positions[i];
        gap_[i] = g;
        weight_[i] = {w_.b2, cc * geo_sum_[g - 1], b1_pow_[g - 1]};
    }
    // suffix_[i] = A_i A_{i+1} ... A_{m-1}, rescaled; A_i[a][b] = weight_i(a) allowed(a,b).
    for (int i = m - 1; i >= 0; --i) {
        std::array<double, 9> r{};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (i == m - 1) {
                    r[3 * a + b] = allowed(a, b) ? weight_[i][a] : 0.0;
                } else {
                    double acc = 0;
                    for (int c = 0; c < 3; ++c)
                        if (allowed(a, c)) acc += suffix_[i + 1][3 * c + b];
                    r[3 * a + b] = weight_[i][a] * acc;
                }
            }
        const double mx = *std::max_element(r.begin(), r.end());
        if (mx > 0)
            for (double& x : r) x /= mx;
        suffix_[i] = r;
    }
    auto pick = [&](const std::array<double, 3>& p) {
        const double tot = p[0] + p[1] + p[2];
        if (!(tot > 0)) throw invariant_violation("RowSampler: zero total weight");
        const double u = uniform01(rng) * tot;
        if (u < p[0]) return 0;
        if (u < p[0] + p[1]) return 1;
        return p[2] > 0 ? 2 : (p[1] > 0 ? 1 : 0);
    };
    const auto& r0 = suffix_[0];
    state_[0] = pick({r0[0], r0[4], r0[8]});
    const int first = state_[0];
    for (int i = 1; i < m; ++i) {
        const int prev = state_[i - 1];
        std::array<double, 3> p{};
        for (int b = 0; b < 3; ++b) p[b] = allowed(prev, b) ? suffix_[i][3 * b + first] : 0.0;
        state_[i] = pick(p);
    }
    out.jumps.resize(m);
    for (int i = 0; i < m; ++i) {
        const int g = gap_[i];
        switch (state_[i]) {
            case X: out.jumps[i] = 0; break;
            case Z: out.jumps[i] = g; break;
            default: out.jumps[i] = 1 + truncated_geometric(g - 1, rng); break;
        }
    }
    // Destinations are increasing when unwrapped; the ones past M rotate to the front.
    std::vector<int>& nb = out.next.positions;
    nb.resize(m);
    int wrap = m;
    for (int i = 0; i < m; ++i) {
        nb[i] = s.positions[i] + out.jumps[i];
        if (nb[i] >= M_ && wrap == m) wrap = i;
    }
    for (int i = wrap; i < m; ++i) nb[i] -= M_;
    std::rotate(nb.begin(), nb.begin() + wrap, nb.end());
    return out;
}

RowStep sample_row(const RingState& s, const StochasticWeights& w, Rng& rng) {
    RowSampler sampler(s.M, w);
    return sampler.step(s, rng);
}

Trajectory evolve(const RingState& s0, int N, const StochasticWeights& w, Rng& rng) {
    if (N < 0) throw std::invalid_argument("evolve: N must be >= 0");
    RowSampler sampler(s0.M, w);
    Trajectory t;
    t.rows.reserve(N + 1);
    t.steps.reserve(N);
    t.rows.push_back(s0);
    for (int n = 0; n < N; ++n) {
        t.steps.push_back(sampler.step(t.rows.back(), rng));
        t.rows.push_back(t.steps.back().next);
        if (t.rows.back().m() != s0.m()) throw invariant_violation("evolve: particle number changed");
    }
    return t;
}

namespace {

// Fills one height row from its left value using the horizontal rule.
void fill_row(int M, const std::vector<std::uint8_t>& occ, int h0, int* row) {
    row[0] = h0;
    for (int k = 0; k < M; ++k) row[k + 1] = row[k] + (occ[M - 1 - k] ? 1 : -1);
}

}  // namespace

HeightField height_from_trajectory(const Trajectory& traj) {
    if (traj.rows.empty()) throw std::invalid_argument("height_from_trajectory: empty trajectory");
    if (traj.steps.size() + 1 != traj.rows.size()) throw invariant_violation("height_from_trajectory: missing jump records");
    HeightField hf;
    hf.M = traj.rows[0].M;
    hf.N = static_cast<int>(traj.steps.size());
    hf.monodromy = 2 * traj.rows[0].m() - hf.M;
    const int W = hf.M + 1;
    hf.grid.assign(static_cast<std::size_t>(hf.N + 1) * W, 0);
    fill_row(hf.M, traj.rows[0].occupancy(), 0, hf.grid.data());
    for (int n = 0; n < hf.N; ++n) {
        const auto e = traj.steps[n].horizontal_edges(traj.rows[n]);
        const int h0 = hf.grid[static_cast<std::size_t>(n) * W] + (e[0] ? 1 : -1);
        fill_row(hf.M, traj.rows[n + 1].occupancy(), h0, hf.grid.data() + static_cast<std::size_t>(n + 1) * W);
    }
    check_height_field(hf, traj);
    return hf;
}

void check_height_field(const HeightField& hf, const Trajectory& traj) {
    const int M = hf.M;
    if (hf.at(0, 0) != 0) throw invariant_violation("height field: h(0,0) != 0");
    for (int n = 0; n <= hf.N; ++n) {
        if (hf.at(M, n) - hf.at(0, n) != hf.monodromy) throw invariant_violation("height field: monodromy changed");
        for (int k = 0; k < M; ++k)
            if (std::abs(hf.at(k + 1, n) - hf.at(k, n)) != 1) throw invariant_violation("height field: horizontal step");
    }
    for (int n = 0; n < hf.N; ++n) {
        const auto e = traj.steps[n].horizontal_edges(traj.rows[n]);
        for (int k = 0; k <= M; ++k) {
            const int d = hf.at(k, n + 1) - hf.at(k, n);
            if (d != (e[(M - k) % M] ? 1 : -1)) throw invariant_violation("height field: vertical crossing rule");
        }
    }
}

double NormalizedHeight::operator()(double x, double y) const {
    const int k = std::clamp(static_cast<int>(std::floor(x / scale.eps)), 0, field.M);
    const int n = std::clamp(static_cast<int>(std::floor(y / scale.eps)), 0, field.N);
    return scale.eps * field.at(k, n);
}

NormalizedHeight normalized_height(const HeightField& hf, const ModelScale& scale) {
    if (scale.M != hf.M) throw std::invalid_argument("normalized_height: scale does not match the field");
    return NormalizedHeight{hf, scale};
}

RunStats ensemble_density(const RingState& s0, int N, int K, const StochasticWeights& w,
                          std::uint64_t master_seed, int threads) {
    if (K < 1) throw std::invalid_argument("ensemble_density: K must be >= 1");
    if (N < 0) throw std::invalid_argument("ensemble_density: N must be >= 0");
    const int M = s0.M;
    const int W = M + 1;
    threads = std::max(1, std::min(threads, K));
    struct Acc {
        std::vector<long long> occ, height;
        long long violations = 0;
    };
    std::vector<Acc> acc(threads);
    auto worker = [&](int t) {
        Acc& a = acc[t];
        a.occ.assign(static_cast<std::size_t>(N + 1) * M, 0);
        a.height.assign(static_cast<std::size_t>(N + 1) * W, 0);
        RowSampler sampler(M, w);
        std::vector<int> prev(W), cur(W);
        for (int r = t; r < K; r += threads) {
            Rng rng = make_stream(master_seed, static_cast<std::uint64_t>(r));
            RingState s = s0;
            bool ok = true;
            auto occ = s.occupancy();
            fill_row(M, occ, 0, prev.data());
            for (int n = 0;; ++n) {
                long long* orow = a.occ.data() + static_cast<std::size_t>(n) * M;
                for (int p : s.positions) ++orow[p];
                long long* hrow = a.height.data() + static_cast<std::size_t>(n) * W;
                for (int k = 0; k < W; ++k) hrow[k] += prev[k];
                if (prev[M] - prev[0] != 2 * s0.m() - M) ok = false;
                if (n == N) break;
                RowStep st = sampler.step(s, rng);
                const auto e = st.horizontal_edges(s);
                if (st.next.m() != s0.m()) ok = false;
                occ = st.next.occupancy();
                fill_row(M, occ, prev[0] + (e[0] ? 1 : -1), cur.data());
                for (int k = 0; k <= M; ++k)
                    if (cur[k] - prev[k] != (e[(M - k) % M] ? 1 : -1)) ok = false;
                std::swap(prev, cur);
                s = std::move(st.next);
            }
            if (!ok) ++a.violations;
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    RunStats rs;
    rs.M = M;
    rs.N = N;
    rs.K = K;
    rs.mean_density.assign(static_cast<std::size_t>(N + 1) * M, 0.0);
    rs.mean_height.assign(static_cast<std::size_t>(N + 1) * W, 0.0);
    std::vector<long long> occ(rs.mean_density.size(), 0), hs(rs.mean_height.size(), 0);
    for (const Acc& a : acc) {
        for (std::size_t i = 0; i < occ.size(); ++i) occ[i] += a.occ[i];
        for (std::size_t i = 0; i < hs.size(); ++i) hs[i] += a.height[i];
        rs.height_violations += a.violations;
    }
    for (std::size_t i = 0; i < occ.size(); ++i) rs.mean_density[i] = static_cast<double>(occ[i]) / K;
    for (std::size_t i = 0; i < hs.size(); ++i) rs.mean_height[i] = static_cast<double>(hs[i]) / K;
    return rs;
}

}  // namespace stovex
