#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stovex/cli.hpp"
#include "stovex/xfer.hpp"

namespace py = pybind11;
using namespace stovex;

namespace {

py::dict block_dict(const TransferBlock& t) {
    std::vector<std::uint32_t> basis;
    for (const auto& b : t.basis) basis.push_back(b.bits);
    py::dict d;
    d["M"] = t.M;
    d["m"] = t.m;
    d["basis"] = basis;
    d["matrix"] = t.matrix;
    return d;
}

PiecewiseDensity circle(double L, std::vector<double> bp, std::vector<double> vals) {
    return PiecewiseDensity::periodic(L, std::move(bp), std::move(vals));
}

}  // namespace

PYBIND11_MODULE(_stovex, m) {
    m.doc() = "stochastic six-vertex model lab";

    py::register_exception<invariant_violation>(m, "InvariantViolation");
    py::register_exception<ConfigError>(m, "ConfigError");

    py::class_<BaxterPoint>(m, "BaxterPoint")
        .def(py::init([](double u, double eta, int branch) { return BaxterPoint{u, eta, branch}; }),
             py::arg("u"), py::arg("eta"), py::arg("branch") = 1)
        .def_readwrite("u", &BaxterPoint::u)
        .def_readwrite("eta", &BaxterPoint::eta)
        .def_readwrite("branch", &BaxterPoint::branch);

    py::class_<StochasticWeights>(m, "StochasticWeights")
        .def_readonly("a1", &StochasticWeights::a1)
        .def_readonly("a2", &StochasticWeights::a2)
        .def_readonly("b1", &StochasticWeights::b1)
        .def_readonly("b2", &StochasticWeights::b2)
        .def_readonly("c1", &StochasticWeights::c1)
        .def_readonly("c2", &StochasticWeights::c2)
        .def_readonly("H", &StochasticWeights::H)
        .def_readonly("V", &StochasticWeights::V)
        .def_readonly("lam", &StochasticWeights::lambda)
        .def_readonly("delta", &StochasticWeights::delta)
        .def_readonly("v", &StochasticWeights::v);

    m.def("weights_from_baxter", [](const BaxterPoint& p) { return weights_from_baxter(p); });
    m.def("weights_from_probabilities",
          [](double b1, double b2) { return weights_from_probabilities(b1, b2, VConvention::magnitude, true); },
          py::arg("b1"), py::arg("b2"));

    m.def("transfer_block", [](int M, int mm, const StochasticWeights& w) { return block_dict(transfer_block(M, mm, w)); });
    m.def("markov_block", [](int M, int mm, const StochasticWeights& w) { return block_dict(markov_block(M, mm, w)); });
    m.def("column_sums", [](int M, int mm, const StochasticWeights& w) {
        const ColumnSum c = column_sums(M, mm, VertexWeights::from(w));
        py::dict d;
        d["constant"] = c.constant;
        d["spread"] = c.spread;
        d["matched"] = c.matched;
        return d;
    });
    m.def("commutator_norm",
          [](int M, double u1, double u2, double eta, int branch) { return commutator_norm(M, u1, u2, eta, branch); });
    m.def("asep_relation", [](int M, double eta) {
        const AsepRelation r = asep_relation(M, BaxterPoint{0.0, eta, 1});
        return py::make_tuple(r.literal_residual, r.corrected_residual);
    });

    m.def(
        "evolve",
        [](std::vector<std::uint8_t> occupancy, int N, const StochasticWeights& w, std::uint64_t seed) {
            Rng rng = make_stream(seed, 0);
            const Trajectory t = evolve(RingState::from_occupancy(occupancy), N, w, rng);
            std::vector<std::vector<std::uint8_t>> rows;
            for (const auto& r : t.rows) rows.push_back(r.occupancy());
            return rows;
        },
        py::arg("occupancy"), py::arg("N"), py::arg("weights"), py::arg("seed") = 1);
    m.def(
        "ensemble_density",
        [](std::vector<std::uint8_t> occupancy, int N, int K, const StochasticWeights& w, std::uint64_t seed) {
            const RunStats s = ensemble_density(RingState::from_occupancy(occupancy), N, K, w, seed, thread_count());
            Eigen::MatrixXd d(s.N + 1, s.M);
            for (int n = 0; n <= s.N; ++n)
                for (int i = 0; i < s.M; ++i) d(n, i) = s.density(n, i);
            return d;
        },
        py::arg("occupancy"), py::arg("N"), py::arg("K"), py::arg("weights"), py::arg("seed") = 1);

    py::class_<FluxParams>(m, "FluxParams").def(py::init<double>()).def_readonly("v", &FluxParams::v);
    m.def("flux", &flux);
    m.def("speed", &speed);
    m.def("speed_inverse", &speed_inverse);
    m.def("rh_speed", &rh_speed);
    m.def("example1", &example1);
    m.def("example2", &example2);
    m.def("example3", &example3);
    m.def("example3_y1", &example3_y1);
    m.def("domain_wall", [](double L, double x1) {
        const PiecewiseDensity d = domain_wall(L, x1);
        return py::make_tuple(d.breakpoints, d.values);
    });

    m.def(
        "front_track_profile",
        [](double L, std::vector<double> bp, std::vector<double> vals, double v, double y, std::vector<double> xs) {
            FrontSolution s(circle(L, std::move(bp), std::move(vals)), FluxParams(v));
            s.advance_to(y);
            std::vector<double> out;
            for (double x : xs) out.push_back(s.value(x));
            return py::make_tuple(out, s.max_mass_drift());
        },
        py::arg("L"), py::arg("breakpoints"), py::arg("values"), py::arg("v"), py::arg("y"), py::arg("x"));
    m.def(
        "godunov",
        [](double L, std::vector<double> bp, std::vector<double> vals, double v, double y, int n_x, double cfl) {
            const GridSolution g = godunov(circle(L, std::move(bp), std::move(vals)), n_x, y, FluxParams(v), cfl);
            return g.averages;
        },
        py::arg("L"), py::arg("breakpoints"), py::arg("values"), py::arg("v"), py::arg("y"), py::arg("n_x"),
        py::arg("cfl") = 0.9);
    m.def(
        "compare_density",
        [](double b1, double b2, double L, double x1, int M, int K, std::uint64_t seed, int rows) {
            const CompareResult r = compare_density(domain_wall(L, x1), weights_from_probabilities(b1, b2), M, M, K,
                                                    seed, rows, thread_count());
            py::dict d;
            d["max_l1"] = r.max_l1;
            d["max_sup_height"] = r.max_sup_height;
            d["fan_profile_l1"] = r.bcg_l1;
            d["height_violations"] = r.height_violations;
            return d;
        },
        py::arg("b1"), py::arg("b2"), py::arg("L"), py::arg("x1"), py::arg("M"), py::arg("K"), py::arg("seed") = 1,
        py::arg("rows") = 8);

    m.def(
        "run_config",
        [](const std::string& text, const std::string& mode, const std::string& out) {
            std::istringstream in(text);
            RunConfig cfg = parse_config(in);
            cfg.mode = mode_from_string(mode);
            cfg.output_dir = out;
            std::ostringstream log;
            const int code = run(cfg, log);
            return py::make_tuple(code, log.str());
        },
        py::arg("text"), py::arg("mode"), py::arg("out"));
}
