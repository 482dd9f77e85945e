#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "stovex/cli.hpp"
#include "stovex/xfer.hpp"

namespace stovex {

namespace {

std::string num(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Artifacts {
public:
    explicit Artifacts(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.output_dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    std::ofstream open(const std::string& name) {
        const auto path = dir_ / name;
        std::ofstream os(path);
        if (!os) throw IoError("cannot write " + path.string());
        os << std::setprecision(17);
        names_.push_back(name);
        return os;
    }

    void manifest() {
        const auto path = dir_ / "manifest";
        std::ofstream os(path);
        if (!os) throw IoError("cannot write " + path.string());
        os << cfg_.emit();
        const std::string h = hex(cfg_.hash());
        for (const auto& n : names_) os << "# artifact " << n << " config_hash=" << h << "\n";
        if (!os) throw IoError("write failed: " + path.string());
    }

private:
    const RunConfig& cfg_;
    std::filesystem::path dir_;
    std::vector<std::string> names_;
};

std::string point_label(double b1, double b2) { return "b1=" + num(b1) + ";b2=" + num(b2); }

void add(VerificationReport& r, CheckRecord c) { r.records.push_back(std::move(c)); }

// Continuum solution in the orientation of the lattice model. Hole dynamics (b1 < b2) is the
// same model with b1 and b2 swapped, so rho = -rho_hole; v = 0 is exact transport at speed -1.
class Continuum {
public:
    Continuum(const PiecewiseDensity& rho0, double b1, double b2) : rho0_(rho0) {
        const double d = 2.0 - b1 - b2;
        vs_ = (b1 - b2) / d;
        sigma_ = vs_ < 0 ? -1.0 : 1.0;
        if (std::abs(vs_) > 0) {
            PiecewiseDensity r = rho0;
            for (auto& x : r.values) x *= sigma_;
            tracker_.emplace(r, FluxParams(std::abs(vs_)));
        }
    }

    void advance_to(double y) {
        y_ = y;
        if (tracker_) tracker_->advance_to(y);
    }
    double value(double x) const { return tracker_ ? sigma_ * tracker_->value(x) : rho0_(x + y_); }
    double integral(double a, double b) const {
        return tracker_ ? sigma_ * tracker_->integral(a, b) : rho0_.integral(a + y_, b + y_);
    }
    double phi_y(double rho) const { return (rho + vs_) / (1.0 + vs_ * rho); }
    double v_signed() const { return vs_; }
    bool hole() const { return sigma_ < 0; }

private:
    PiecewiseDensity rho0_;
    std::optional<FrontSolution> tracker_;
    double vs_ = 0, sigma_ = 1, y_ = 0;
};

bool is_domain_wall(const PiecewiseDensity& r) {
    return !r.line_mode && r.breakpoints.size() == 2 && r.breakpoints[0] == 0.0 && r.values[0] == 1.0 &&
           r.values[1] == -1.0;
}

}  // namespace

bool VerificationReport::all_pass() const {
    return std::all_of(records.begin(), records.end(), [](const CheckRecord& c) { return c.informational || c.pass; });
}

void VerificationReport::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["all_pass"] = all_pass();
    j["records"] = nlohmann::ordered_json::array();
    for (const auto& c : records) {
        nlohmann::ordered_json r;
        r["name"] = c.name;
        r["M"] = c.M;
        r["m"] = c.m;
        r["params"] = c.params;
        r["measured"] = c.measured;
        r["matched"] = c.matched;
        r["residual"] = c.residual;
        r["tolerance"] = c.tolerance;
        r["pass"] = c.pass;
        r["informational"] = c.informational;
        j["records"].push_back(std::move(r));
    }
    os << j.dump(2) << "\n";
}

void VerificationReport::write_csv(std::ostream& os) const {
    os << "name,M,m,params,measured,matched,residual,tolerance,pass,informational\n";
    for (const auto& c : records)
        os << c.name << ',' << c.M << ',' << c.m << ',' << c.params << ',' << num(c.measured) << ',' << c.matched
           << ',' << num(c.residual) << ',' << num(c.tolerance) << ',' << (c.pass ? 1 : 0) << ','
           << (c.informational ? 1 : 0) << '\n';
}

VerificationReport run_verify(const RunConfig& cfg) {
    VerificationReport rep;
    const std::vector<double> u_grid{0.1, 0.3, 0.5, 0.8, 1.2};
    for (const auto& [b1, b2] : cfg.verify_points) {
        const std::string label = point_label(b1, b2);
        const StochasticWeights sw = weights_from_probabilities(b1, b2, cfg.v_convention, true);
        VertexWeights vw = VertexWeights::from(sw);
        vw.c1 += cfg.verify_corrupt_c1;

        for (int M = 1; M <= cfg.verify_max_M; ++M) {
            for (int m = 0; m <= M; ++m) {
                const ColumnSum cs = column_sums(M, m, vw);
                add(rep, {"column_sum_uniform", M, m, label, cs.constant, cs.matched, cs.spread, 1e-12,
                          cs.spread <= 1e-12, false});

                // Column sums of the normalised block, using the reference constant.
                const TransferBlock t = transfer_block(M, m, vw);
                const double ref = 1.0 + std::pow(b1, M - m) * std::pow(b2, m);
                double worst = 0, min_entry = 0;
                for (Eigen::Index c = 0; c < t.matrix.cols(); ++c)
                    worst = std::max(worst, std::abs(t.matrix.col(c).sum() / ref - 1.0));
                if (t.matrix.size()) min_entry = t.matrix.minCoeff() / ref;
                add(rep, {"markov_columns", M, m, label, 1.0 + worst, "", worst, 1e-12, worst <= 1e-12, false});
                add(rep, {"markov_nonnegative", M, m, label, min_entry, "", std::max(0.0, -min_entry), 1e-15,
                          min_entry >= -1e-15, false});

                if (M <= 6) {
                    double diff = 0;
                    for (std::size_t a = 0; a < t.basis.size(); ++a) {
                        const auto bf = brute_force_transition(t.basis[a], vw);
                        for (std::size_t b = 0; b < t.basis.size(); ++b) {
                            const auto it = bf.find(t.basis[b].bits);
                            const double x = it == bf.end() ? 0.0 : it->second;
                            diff = std::max(diff, std::abs(x - t.matrix(static_cast<Eigen::Index>(b),
                                                                        static_cast<Eigen::Index>(a))));
                        }
                    }
                    add(rep, {"brute_force_equivalence", M, m, label, diff, "", diff, 1e-12, diff <= 1e-12, false});

                    if (m > 0 && m < M && cfg.verify_corrupt_c1 == 0.0) {
                        const Eigen::VectorXd pi = stationary_vector(markov_block(M, m, sw));
                        const double uni = 1.0 / static_cast<double>(pi.size());
                        const double dev = (pi.array() - uni).abs().maxCoeff();
                        add(rep, {"stationary_uniform", M, m, label, pi.maxCoeff(), "uniform", dev, 1e-12,
                                  dev <= 1e-12, true});
                    }
                }
            }
        }

        if (b1 != b2 && b1 > 0 && b2 > 0) {
            const BaxterPoint bp = baxter_from_probabilities(b1, b2);
            for (int M = 2; M <= cfg.verify_max_M; ++M)
                for (LambdaMode mode : {LambdaMode::fixed, LambdaMode::varying}) {
                    double worst = 0, worst_norm = 0;
                    for (std::size_t i = 0; i < u_grid.size(); ++i)
                        for (std::size_t j = i + 1; j < u_grid.size(); ++j) {
                            const Commutator c = commutator(M, u_grid[i], u_grid[j], bp.eta, bp.branch, mode);
                            const double rel = c.norm / c.max_entry;
                            if (rel >= worst) {
                                worst = rel;
                                worst_norm = c.norm;
                            }
                        }
                    add(rep, {"commutation", M, -1, label + ";lambda=" + to_string(mode), worst_norm, "", worst,
                              1e-10, worst <= 1e-10, false});
                }

            const BaxterPoint asep{0.0, bp.eta, 1};
            for (int M = 2; M <= std::min(4, cfg.verify_max_M); ++M) {
                const AsepRelation ar = asep_relation(M, asep);
                const std::string p = "eta=" + num(bp.eta);
                add(rep, {"asep_relation_literal", M, -1, p, ar.literal_residual, "", ar.literal_residual, 1e-9,
                          ar.literal_residual <= 1e-9, true});
                add(rep, {"asep_relation_corrected", M, -1, p, ar.corrected_residual, "", ar.corrected_residual,
                          1e-9, ar.corrected_residual <= 1e-9, false});
            }

            const double v = std::abs(drift_param(b1, b2, VConvention::magnitude));
            const double r_u = std::abs(v - std::tanh(bp.u)), r_ue = std::abs(v - std::tanh(bp.u + bp.eta));
            add(rep, {"drift_vs_tanh_u", -1, -1, label, v, r_u <= 1e-12 ? "tanh(u)" : "", r_u, 1e-12, r_u <= 1e-12, true});
            add(rep, {"drift_vs_tanh_u_plus_eta", -1, -1, label, v, r_ue <= 1e-12 ? "tanh(u+eta)" : "", r_ue, 1e-12,
                      r_ue <= 1e-12, true});
        }
    }
    return rep;
}

int thread_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("STOVEX_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = n > 0 ? std::min(n, cap) : cap;
    }
    return std::max(1, n);
}

CompareResult compare_density(const PiecewiseDensity& rho0, const StochasticWeights& w, int M, int N, int K,
                              std::uint64_t seed, int n_rows, int threads) {
    if (rho0.line_mode) throw std::invalid_argument("compare_density: circle data required");
    const double L = rho0.L, eps = L / M;
    const RingState s0 = discretize(rho0, M);
    const RunStats st = ensemble_density(s0, N, K, w, seed, threads);

    Continuum sol(rho0, w.b1, w.b2);
    CompareResult res;
    res.v = sol.v_signed();
    res.height_violations = st.height_violations;

    std::optional<double> bcg_until;
    std::optional<FluxParams> fp;
    if (is_domain_wall(rho0) && res.v > 0) {
        fp.emplace(res.v);
        bcg_until = example3_y1(L, rho0.breakpoints[1], *fp);
    }

    std::vector<int> rows;
    for (int j = 1; j <= n_rows; ++j) {
        const int n = static_cast<int>(std::lround(static_cast<double>(j) * N / n_rows));
        if (n > 0 && (rows.empty() || n > rows.back())) rows.push_back(n);
    }

    // phi(0, y) accumulated by the trapezoid rule in sub-steps of the lattice row spacing.
    constexpr int sub = 16;
    double phi_axis = 0, y_prev = 0;
    sol.advance_to(0);
    double g_prev = sol.phi_y(sol.value(0.0));
    int done = 0;
    for (int n : rows) {
        for (; done < n; ++done)
            for (int s = 1; s <= sub; ++s) {
                const double y = (done + static_cast<double>(s) / sub) * eps;
                sol.advance_to(y);
                const double g = sol.phi_y(sol.value(0.0));
                phi_axis += 0.5 * (g + g_prev) * (y - y_prev);
                g_prev = g;
                y_prev = y;
            }
        const double y = n * eps;
        CompareRow row{n, y, 0, 0};
        double cum = 0;
        for (int k = 0; k < M; ++k) {
            const double exact = sol.integral(k * eps, (k + 1) * eps) / eps;
            const double lattice = 2.0 * st.density(n, continuum_cell_of_site(M, k)) - 1.0;
            row.l1_density += std::abs(lattice - exact) * eps / L;
        }
        for (int k = 0; k <= M; ++k) {
            if (k > 0) cum += sol.integral((k - 1) * eps, k * eps);
            row.sup_height = std::max(row.sup_height, std::abs(eps * st.height(n, k) - (phi_axis + cum)));
        }
        if (bcg_until && y <= *bcg_until) {
            const double lo = L + speed(-1.0, *fp) * y, hi = L + speed(1.0, *fp) * y;
            double d = 0;
            for (int k = 0; k < M; ++k) {
                const double xc = (k + 0.5) * eps;
                if (xc < lo || xc > hi) continue;
                const double lattice = 2.0 * st.density(n, continuum_cell_of_site(M, k)) - 1.0;
                d += std::abs(lattice - example2(-1.0, 1.0, xc - L, y, *fp)) * eps / L;
            }
            res.bcg_l1 = std::max(res.bcg_l1, d);
        }
        res.max_l1 = std::max(res.max_l1, row.l1_density);
        res.max_sup_height = std::max(res.max_sup_height, row.sup_height);
        res.rows.push_back(row);
    }
    return res;
}

namespace {

int do_verify(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
    const VerificationReport rep = run_verify(cfg);
    {
        auto os = out.open("report.json");
        rep.write_json(os);
    }
    {
        auto os = out.open("residuals.csv");
        rep.write_csv(os);
    }
    std::size_t failed = 0;
    for (const auto& c : rep.records)
        if (!c.informational && !c.pass) ++failed;
    log << "verify: " << rep.records.size() << " records, " << failed << " failed\n";
    return rep.all_pass() ? 0 : 1;
}

int do_simulate(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
    const StochasticWeights w = model_weights(cfg);
    const ModelScale sc = model_scale(cfg);
    const RingState s0 = discretize(initial_density(cfg), sc.M);
    if (cfg.runs == 1) {
        Rng rng = make_stream(cfg.seed, 0);
        const Trajectory tr = evolve(s0, sc.N, w, rng);
        const HeightField hf = height_from_trajectory(tr);
        auto ts = out.open("trajectory.csv");
        ts << "row,site,occupied\n";
        for (int n = 0; n <= sc.N; ++n) {
            const auto occ = tr.rows[n].occupancy();
            for (int i = 0; i < sc.M; ++i) ts << n << ',' << i << ',' << int(occ[i]) << '\n';
        }
        auto hs = out.open("heights.csv");
        hs << "row,face,height\n";
        for (int n = 0; n <= sc.N; ++n)
            for (int k = 0; k <= sc.M; ++k) hs << n << ',' << k << ',' << hf.at(k, n) << '\n';
        log << "simulate: one trajectory, M=" << sc.M << " N=" << sc.N << " monodromy=" << hf.monodromy << "\n";
        return 0;
    }
    const RunStats st = ensemble_density(s0, sc.N, cfg.runs, w, cfg.seed, thread_count());
    auto ss = out.open("stats.csv");
    ss << "row,site,mean_density\n";
    for (int n = 0; n <= sc.N; ++n)
        for (int i = 0; i < sc.M; ++i) ss << n << ',' << i << ',' << num(st.density(n, i)) << '\n';
    auto hs = out.open("mean_heights.csv");
    hs << "row,face,mean_height\n";
    for (int n = 0; n <= sc.N; ++n)
        for (int k = 0; k <= sc.M; ++k) hs << n << ',' << k << ',' << num(st.height(n, k)) << '\n';
    log << "simulate: K=" << cfg.runs << " M=" << sc.M << " N=" << sc.N
        << " height_violations=" << st.height_violations << "\n";
    return st.height_violations == 0 ? 0 : 1;
}

// Solver orientation: b1 < b2 is tracked as hole density.
struct Oriented {
    PiecewiseDensity rho;
    double sigma;
    FluxParams fp;
};

Oriented orient(const RunConfig& cfg) {
    const StochasticWeights w = model_weights(cfg);
    const double vs = (w.b1 - w.b2) / (2.0 - w.b1 - w.b2);
    if (vs == 0.0) throw ConfigError("the solver needs b1 != b2 (0 < |v| < 1)");
    PiecewiseDensity r = initial_density(cfg);
    const double sigma = vs < 0 ? -1.0 : 1.0;
    for (auto& x : r.values) x *= sigma;
    return {r, sigma, FluxParams(std::abs(vs))};
}

int do_solve(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
    const Oriented o = orient(cfg);
    double x_lo = 0, x_hi = o.rho.L;
    std::optional<std::pair<double, double>> window;
    if (o.rho.line_mode) {
        const double reach = -speed(-1.0, o.fp) * cfg.y_max;
        x_lo = o.rho.breakpoints.front() - reach - 0.25;
        x_hi = o.rho.breakpoints.back() + 0.25;
        window = std::make_pair(x_lo, x_hi);
    }
    FrontSolution tr(o.rho, o.fp);
    auto pf = out.open("profile_front.csv");
    auto pg = out.open("profile_godunov.csv");
    auto fr = out.open("fronts.csv");
    pf << "y,x,rho\n";
    pg << "y,x,rho\n";
    fr << "y,kind,position,left_state,right_state\n";
    double worst = 0;
    for (int j = 0; j <= cfg.output_rows; ++j) {
        const double y = cfg.y_max * j / cfg.output_rows;
        tr.advance_to(y);
        const double dx = (x_hi - x_lo) / cfg.n_x;
        for (int i = 0; i < cfg.n_x; ++i) {
            const double x = x_lo + (i + 0.5) * dx;
            pf << num(y) << ',' << num(x) << ',' << num(o.sigma * tr.value(x)) << '\n';
        }
        for (const Front& f : tr.fronts())
            fr << num(y) << ',' << to_string(f.kind) << ',' << num(f.position) << ','
               << num(o.sigma * f.left_state) << ',' << num(o.sigma * f.right_state) << '\n';
        if (j == 0) continue;
        const GridSolution g = godunov(o.rho, cfg.n_x, y, o.fp, cfg.cfl, window);
        for (int i = 0; i < g.n_x; ++i)
            pg << num(y) << ',' << num(g.cell_center(i)) << ',' << num(o.sigma * g.averages[i]) << '\n';
        if (j == cfg.output_rows) worst = l1_distance(g, tr);
    }
    auto ev = out.open("events.csv");
    ev << "y,kind,position\n";
    for (const auto& e : tr.events()) ev << num(e.y) << ',' << e.kind << ',' << num(e.position) << '\n';
    log << "solve: v=" << o.fp.v << " events=" << tr.events().size() << " L1(godunov, front)=" << worst
        << " mass_drift=" << tr.max_mass_drift() << "\n";
    return 0;
}

int do_examples(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
    const StochasticWeights w = model_weights(cfg);
    const double v = std::abs(drift_param(w.b1, w.b2, VConvention::magnitude));
    if (!(v > 0)) throw ConfigError("exact examples need 0 < v < 1");
    const FluxParams fp(v);
    const double reach = -speed(-1.0, fp) * cfg.y_max;
    const int rows = cfg.output_rows;
    auto line = [&](const std::string& name, double rl, double rr, auto&& eval) {
        auto os = out.open(name);
        os << "y,x,rho\n";
        for (int j = 1; j <= rows; ++j) {
            const double y = cfg.y_max * j / rows;
            for (int i = 0; i < cfg.n_x; ++i) {
                const double x = -reach - 0.25 + (reach + 0.5) * (i + 0.5) / cfg.n_x;
                os << num(y) << ',' << num(x) << ',' << num(eval(rl, rr, x, y)) << '\n';
            }
        }
    };
    line("example1.csv", 1.0, -1.0, [&](double a, double b, double x, double y) { return example1(a, b, x, y, fp); });
    line("example2.csv", -1.0, 1.0, [&](double a, double b, double x, double y) { return example2(a, b, x, y, fp); });
    auto os = out.open("example3.csv");
    os << "y,x,rho\n";
    for (int j = 1; j <= rows; ++j) {
        const double y = cfg.y_max * j / rows;
        for (int i = 0; i < cfg.n_x; ++i) {
            const double x = cfg.L * (i + 0.5) / cfg.n_x;
            os << num(y) << ',' << num(x) << ',' << num(example3(cfg.L, cfg.x1, x, y, fp)) << '\n';
        }
    }
    log << "exact-examples: v=" << v << " y1=" << example3_y1(cfg.L, cfg.x1, fp) << "\n";
    return 0;
}

int do_compare(const RunConfig& cfg, Artifacts& out, std::ostream& log) {
    const StochasticWeights w = model_weights(cfg);
    const ModelScale sc = model_scale(cfg);
    const PiecewiseDensity rho0 = initial_density(cfg);
    if (std::abs(rho0.L - sc.L) > 1e-12) throw ConfigError("initial data period differs from scale.L");
    const CompareResult r = compare_density(rho0, w, sc.M, sc.N, cfg.runs, cfg.seed, cfg.compare_rows, thread_count());
    auto os = out.open("compare.csv");
    os << "row,y,l1_density,sup_height\n";
    for (const auto& row : r.rows)
        os << row.row << ',' << num(row.y) << ',' << num(row.l1_density) << ',' << num(row.sup_height) << '\n';
    auto sm = out.open("summary.txt");
    sm << "M = " << sc.M << "\nN = " << sc.N << "\nK = " << cfg.runs << "\nv = " << num(r.v)
       << "\nmax_l1_density = " << num(r.max_l1) << "\nmax_sup_height = " << num(r.max_sup_height)
       << "\nfan_profile_l1 = " << num(r.bcg_l1) << "\nheight_violations = " << r.height_violations << '\n';
    log << "compare: M=" << sc.M << " K=" << cfg.runs << " max L1=" << r.max_l1
        << " max height sup=" << r.max_sup_height << "\n";
    return r.height_violations == 0 ? 0 : 1;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
    try {
        Artifacts out(cfg);
        int code = 0;
        switch (cfg.mode) {
            case Mode::verify: code = do_verify(cfg, out, log); break;
            case Mode::simulate: code = do_simulate(cfg, out, log); break;
            case Mode::solve: code = do_solve(cfg, out, log); break;
            case Mode::compare: code = do_compare(cfg, out, log); break;
            case Mode::exact_examples: code = do_examples(cfg, out, log); break;
        }
        out.manifest();
        return code;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        log << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        log << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "check failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace stovex
