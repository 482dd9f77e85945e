#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "stovex/cli.hpp"

namespace stovex {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double x) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    long long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + v + "'");
    return x;
}

std::vector<std::pair<double, double>> to_points(const std::string& key, const std::string& v) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto c = item.find(':');
        if (c == std::string::npos) throw ConfigError("config key '" + key + "': expected b1:b2 pairs");
        out.emplace_back(to_double(key, trim(item.substr(0, c))), to_double(key, trim(item.substr(c + 1))));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::verify: return "verify";
        case Mode::simulate: return "simulate";
        case Mode::solve: return "solve";
        case Mode::compare: return "compare";
        case Mode::exact_examples: return "exact-examples";
    }
    return "verify";
}

Mode mode_from_string(const std::string& s) {
    for (Mode m : {Mode::verify, Mode::simulate, Mode::solve, Mode::compare, Mode::exact_examples})
        if (to_string(m) == s) return m;
    throw ConfigError("unknown mode: " + s);
}

RunConfig parse_config(std::istream& in) {
    RunConfig c;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (kv.count(key)) throw ConfigError("config key '" + key + "' given twice");
        kv[key] = val;
    }
    bool has_u = false, has_eta = false, has_branch = false, has_b1 = false, has_b2 = false;
    BaxterPoint bp;
    std::pair<double, double> pr{0, 0};
    for (const auto& [k, v] : kv) {
        if (k == "mode") c.mode = mode_from_string(v);
        else if (k == "model.u") { bp.u = to_double(k, v); has_u = true; }
        else if (k == "model.eta") { bp.eta = to_double(k, v); has_eta = true; }
        else if (k == "model.branch") { bp.branch = static_cast<int>(to_int(k, v)); has_branch = true; }
        else if (k == "model.b1") { pr.first = to_double(k, v); has_b1 = true; }
        else if (k == "model.b2") { pr.second = to_double(k, v); has_b2 = true; }
        else if (k == "model.v_convention") {
            try { c.v_convention = v_convention_from_string(v); } catch (const std::exception& e) { throw ConfigError(e.what()); }
        }
        else if (k == "scale.L") c.L = to_double(k, v);
        else if (k == "scale.T_len") c.T_len = to_double(k, v);
        else if (k == "scale.M") c.M = static_cast<int>(to_int(k, v));
        else if (k == "scale.N") c.N = static_cast<int>(to_int(k, v));
        else if (k == "initial.kind") c.initial_kind = v;
        else if (k == "initial.x1") c.x1 = to_double(k, v);
        else if (k == "initial.rho_left") c.rho_left = to_double(k, v);
        else if (k == "initial.rho_right") c.rho_right = to_double(k, v);
        else if (k == "initial.path") c.initial_path = v;
        else if (k == "mc.runs") c.runs = static_cast<int>(to_int(k, v));
        else if (k == "mc.seed") c.seed = to_u64(k, v);
        else if (k == "solver.n_x") c.n_x = static_cast<int>(to_int(k, v));
        else if (k == "solver.cfl") c.cfl = to_double(k, v);
        else if (k == "solver.y_max") c.y_max = to_double(k, v);
        else if (k == "solver.rows") c.output_rows = static_cast<int>(to_int(k, v));
        else if (k == "compare.rows") c.compare_rows = static_cast<int>(to_int(k, v));
        else if (k == "verify.max_M") c.verify_max_M = static_cast<int>(to_int(k, v));
        else if (k == "verify.points") c.verify_points = to_points(k, v);
        else if (k == "verify.corrupt_c1") c.verify_corrupt_c1 = to_double(k, v);
        else if (k == "output_dir") c.output_dir = v;
        else throw ConfigError("unknown config key: " + k);
    }
    const bool baxter = has_u || has_eta || has_branch;
    const bool probs = has_b1 || has_b2;
    if (baxter && probs) throw ConfigError("give either model.u/model.eta or model.b1/model.b2, not both");
    if (baxter) {
        if (!has_u || !has_eta) throw ConfigError("model.u and model.eta are both required");
        try { bp.validate(); } catch (const std::exception& e) { throw ConfigError(e.what()); }
        c.baxter = bp;
    }
    if (probs) {
        if (!has_b1 || !has_b2) throw ConfigError("model.b1 and model.b2 are both required");
        if (!(pr.first >= 0 && pr.first < 1 && pr.second >= 0 && pr.second < 1))
            throw ConfigError("model.b1 and model.b2 must lie in [0,1)");
        c.probabilities = pr;
    }
    if (c.mode != Mode::verify && !c.baxter && !c.probabilities)
        throw ConfigError("a model parametrization (model.u/eta or model.b1/b2) is required");
    if (!(c.L > 0) || !(c.T_len > 0)) throw ConfigError("scale.L and scale.T_len must be positive");
    if (c.M < 1) throw ConfigError("scale.M must be >= 1");
    if (c.N && *c.N < 0) throw ConfigError("scale.N must be >= 0");
    static const std::set<std::string> kinds{"step", "periodic-step", "custom-csv"};
    if (!kinds.count(c.initial_kind)) throw ConfigError("initial.kind must be step, periodic-step or custom-csv");
    if (c.initial_kind == "custom-csv" && c.initial_path.empty()) throw ConfigError("initial.path is required for custom-csv");
    if (std::abs(c.rho_left) > 1 || std::abs(c.rho_right) > 1) throw ConfigError("initial densities must lie in [-1,1]");
    if (c.initial_kind == "periodic-step" && !(c.x1 > 0 && c.x1 < c.L)) throw ConfigError("initial.x1 must lie in (0, L)");
    if ((c.mode == Mode::simulate || c.mode == Mode::compare) && c.initial_kind == "step")
        throw ConfigError("simulate and compare need circle data (periodic-step or custom-csv)");
    if (c.runs < 1) throw ConfigError("mc.runs must be >= 1");
    if (c.n_x < 8) throw ConfigError("solver.n_x must be >= 8");
    if (!(c.cfl > 0 && c.cfl <= 1)) throw ConfigError("solver.cfl must lie in (0,1]");
    if (!(c.y_max > 0)) throw ConfigError("solver.y_max must be positive");
    if (c.output_rows < 1 || c.compare_rows < 1) throw ConfigError("row counts must be >= 1");
    if (c.verify_max_M < 1 || c.verify_max_M > 10) throw ConfigError("verify.max_M must lie in [1, 10]");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

std::string RunConfig::emit() const {
    std::map<std::string, std::string> kv;
    kv["mode"] = to_string(mode);
    if (baxter) {
        kv["model.u"] = fmt(baxter->u);
        kv["model.eta"] = fmt(baxter->eta);
        kv["model.branch"] = std::to_string(baxter->branch);
    }
    if (probabilities) {
        kv["model.b1"] = fmt(probabilities->first);
        kv["model.b2"] = fmt(probabilities->second);
    }
    kv["model.v_convention"] = to_string(v_convention);
    kv["scale.L"] = fmt(L);
    kv["scale.T_len"] = fmt(T_len);
    kv["scale.M"] = std::to_string(M);
    if (N) kv["scale.N"] = std::to_string(*N);
    kv["initial.kind"] = initial_kind;
    kv["initial.x1"] = fmt(x1);
    kv["initial.rho_left"] = fmt(rho_left);
    kv["initial.rho_right"] = fmt(rho_right);
    if (!initial_path.empty()) kv["initial.path"] = initial_path;
    kv["mc.runs"] = std::to_string(runs);
    kv["mc.seed"] = std::to_string(seed);
    kv["solver.n_x"] = std::to_string(n_x);
    kv["solver.cfl"] = fmt(cfl);
    kv["solver.y_max"] = fmt(y_max);
    kv["solver.rows"] = std::to_string(output_rows);
    kv["compare.rows"] = std::to_string(compare_rows);
    kv["verify.max_M"] = std::to_string(verify_max_M);
    std::string pts;
    for (const auto& [a, b] : verify_points) pts += (pts.empty() ? "" : ",") + fmt(a) + ":" + fmt(b);
    kv["verify.points"] = pts;
    kv["verify.corrupt_c1"] = fmt(verify_corrupt_c1);
    kv["output_dir"] = output_dir;
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

std::uint64_t RunConfig::hash() const {
    // FNV-1a over the canonical text.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : emit()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

StochasticWeights model_weights(const RunConfig& cfg) {
    if (cfg.baxter) return weights_from_baxter(*cfg.baxter, cfg.v_convention);
    if (cfg.probabilities)
        return weights_from_probabilities(cfg.probabilities->first, cfg.probabilities->second, cfg.v_convention, true);
    throw ConfigError("no model parametrization configured");
}

ModelScale model_scale(const RunConfig& cfg) {
    ModelScale s = ModelScale::make(cfg.L, cfg.T_len, cfg.M);
    if (cfg.N) {
        s.N = *cfg.N;
        s.T_len = s.N * s.eps;
    }
    return s;
}

PiecewiseDensity initial_density(const RunConfig& cfg) {
    if (cfg.initial_kind == "custom-csv") return PiecewiseDensity::from_csv(cfg.initial_path, cfg.L);
    if (cfg.initial_kind == "step") return PiecewiseDensity::line({0.0}, {cfg.rho_left, cfg.rho_right});
    return PiecewiseDensity::periodic(cfg.L, {0.0, cfg.x1}, {cfg.rho_left, cfg.rho_right});
}

int continuum_cell_of_site(int M, int site) { return M - 1 - site; }

RingState discretize(const PiecewiseDensity& rho0, int M) {
    if (rho0.line_mode) throw std::invalid_argument("discretize: circle data required");
    const double eps = rho0.L / M;
    auto count = [&](int k) {
        const double x = k * eps;
        return std::llround((x + rho0.integral(0.0, x)) / (2.0 * eps));
    };
    std::vector<std::uint8_t> occ(M, 0);
    long long prev = count(0);
    for (int k = 0; k < M; ++k) {
        const long long next = count(k + 1);
        if (next - prev == 1) occ[M - 1 - k] = 1;
        prev = next;
    }
    return RingState::from_occupancy(occ);
}

}  // namespace stovex
