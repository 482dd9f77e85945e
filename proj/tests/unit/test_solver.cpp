#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "stovex/solver.hpp"

using namespace stovex;
using doctest::Approx;

TEST_CASE("flux values, monotonicity and convexity") {
    const FluxParams fp(0.4);
    CHECK(flux(1.0, fp) == Approx(1.0 / 0.4 - 1.0));
    CHECK(flux(-1.0, fp) == Approx(1.0 / 0.4 + 1.0));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double a = U(rng), b = U(rng);
        CHECK(flux(0.5 * (a + b), fp) <= 0.5 * (flux(a, fp) + flux(b, fp)) + 1e-15);
        if (a < b) CHECK(flux(a, fp) > flux(b, fp));
    }
    CHECK_THROWS(FluxParams(0.0));
    CHECK_THROWS(FluxParams(1.0));
}

TEST_CASE("characteristic speed") {
    for (double v : {0.1, 0.4, 0.9}) {
        const FluxParams fp(v);
        CHECK(speed(-1.0, fp) == Approx(-(1 + v) / (1 - v)));
        CHECK(speed(1.0, fp) == Approx((v - 1) / (v + 1)));
        CHECK(speed(0.0, fp) == Approx(-(1 - v * v)));
        for (double r = -0.99; r < 1.0; r += 0.01) {
            CHECK(speed(r, fp) < 0.0);
            CHECK(speed(r + 0.005, fp) > speed(r, fp));
            const double h = 1e-6;
            CHECK((flux(r + h, fp) - flux(r - h, fp)) / (2 * h) == Approx(speed(r, fp)).epsilon(1e-7));
        }
    }
}

TEST_CASE("inverse speed and the flux along characteristics") {
    const FluxParams fp(0.35);
    for (double r = -1.0 + 1e-6; r <= 1.0 - 1e-6; r += 0.001) {
        CHECK(std::abs(speed_inverse(speed(r, fp), fp) - r) < 1e-12);
        const double x = speed(r, fp);
        CHECK(std::abs(flux_of_speed(x, fp) - flux(r, fp)) < 1e-12);
        CHECK(flux_of_speed(x, fp) == Approx(std::sqrt((1 / (0.35 * 0.35) - 1) * std::abs(x))));
    }
    CHECK(speed_inverse(speed(0.0, fp), fp) == Approx(0.0));
    CHECK_THROWS(speed_inverse(0.1, fp));
    CHECK_THROWS(speed_inverse(speed(-1.0, fp) - 0.1, fp));
}

TEST_CASE("fan primitive differentiates to the inverse speed") {
    const FluxParams fp(0.5);
    for (double xi = speed(-1.0, fp) + 0.01; xi < speed(1.0, fp) - 0.01; xi += 0.05) {
        const double h = 1e-6;
        CHECK((fan_primitive(xi + h, fp) - fan_primitive(xi - h, fp)) / (2 * h) ==
              Approx(speed_inverse(xi, fp)).epsilon(1e-6));
    }
}

TEST_CASE("Rankine-Hugoniot speed") {
    const FluxParams fp(0.3);
    CHECK(rh_speed(1.0, -1.0, fp) == Approx(-1.0).epsilon(1e-15));
    CHECK(rh_speed(0.2, -0.5, fp) == Approx(rh_speed(-0.5, 0.2, fp)));
    // Secant slope: first order in the gap against either end, second order against the midpoint.
    CHECK(std::abs(rh_speed(0.3, 0.3 + 1e-4, fp) - speed(0.3, fp)) < 1e-4);
    CHECK(std::abs(rh_speed(0.3, 0.3 + 1e-4, fp) - speed(0.3 + 5e-5, fp)) < 1e-8);
    CHECK_THROWS(rh_speed(0.4, 0.4, fp));
}

TEST_CASE("Riemann classification") {
    const FluxParams fp(0.6);
    const RiemannSolution s = riemann(1.0, -1.0, fp);
    CHECK(s.kind == RiemannSolution::Kind::shock);
    CHECK(s.speed == Approx(-1.0));
    const RiemannSolution f = riemann(-1.0, 1.0, fp);
    CHECK(f.kind == RiemannSolution::Kind::fan);
    CHECK(f.lo == Approx((0.6 + 1) / (0.6 - 1)));
    CHECK(f.hi == Approx((0.6 - 1) / (0.6 + 1)));
    CHECK(riemann(0.3, 0.3, fp).kind == RiemannSolution::Kind::constant);
}

TEST_CASE("fan values") {
    const FluxParams fp(0.45);
    CHECK(fan_value(speed(-1.0, fp) * 2.0 + 1.0, 3.0, 1.0, 1.0, fp) == Approx(-1.0));
    CHECK(std::abs(fan_value(speed(0.0, fp), 1.0, 0.0, 0.0, fp)) < 1e-14);
    const double x = 0.8 * speed(0.0, fp);
    CHECK(fan_value(x, 1.0, 0.0, 0.0, fp) == Approx((-1 + std::sqrt((1 - 0.45 * 0.45) / std::abs(x))) / 0.45));
    CHECK_THROWS(fan_value(0.0, 1.0, 0.0, 1.0, fp));
}

TEST_CASE("Riemann closed forms") {
    const FluxParams fp(0.3);
    for (double y : {0.5, 1.0, 4.0}) {
        CHECK(example1(1.0, -1.0, -1.0 * y + 1e-9, y, fp) == -1.0);
        CHECK(example1(1.0, -1.0, -1.0 * y - 1e-9, y, fp) == 1.0);
        for (double t = 0.01; t < 1.0; t += 0.01) {
            const double x = (speed(-1.0, fp) + t * (speed(1.0, fp) - speed(-1.0, fp))) * y;
            CHECK(std::abs(example2(-1.0, 1.0, x, y, fp) - speed_inverse(x / y, fp)) < 1e-12);
        }
        CHECK(example2(-1.0, 1.0, 2.0 * speed(-1.0, fp) * y, y, fp) == -1.0);
        CHECK(example2(-1.0, 1.0, 0.5 * speed(1.0, fp) * y, y, fp) == 1.0);
    }
    CHECK_THROWS(example1(-1.0, 1.0, 0.0, 1.0, fp));
    CHECK_THROWS(example2(1.0, -1.0, 0.0, 1.0, fp));
}

TEST_CASE("self-similarity on the line") {
    const FluxParams fp(0.55);
    for (double lam : {0.5, 2.0, 7.0})
        for (double x = -3.0; x < 0.5; x += 0.1) {
            CHECK(example2(-0.4, 0.8, lam * x, lam, fp) == Approx(example2(-0.4, 0.8, x, 1.0, fp)));
            CHECK(example1(0.9, -0.2, lam * x, lam, fp) == example1(0.9, -0.2, x, 1.0, fp));
        }
}

TEST_CASE("piecewise density") {
    const PiecewiseDensity d = PiecewiseDensity::periodic(2.0, {0.0, 0.5}, {1.0, -0.5});
    CHECK(d(0.25) == 1.0);
    CHECK(d(1.0) == -0.5);
    CHECK(d(2.25) == 1.0);
    CHECK(d.integral(0.0, 2.0) == Approx(0.5 - 0.75));
    CHECK(d.integral(-2.0, 0.0) == Approx(0.5 - 0.75));
    CHECK(d.integral(0.25, 4.25) == Approx(2 * (0.5 - 0.75)));
    CHECK(d.average() == Approx(-0.125));
    CHECK_THROWS(PiecewiseDensity::periodic(1.0, {0.5, 0.2}, {0.0, 0.0}));
    CHECK_THROWS(PiecewiseDensity::periodic(1.0, {0.0}, {1.5}));
    const PiecewiseDensity l = PiecewiseDensity::line({0.0, 1.0}, {0.3, -0.2, 0.7});
    CHECK(l(-5.0) == 0.3);
    CHECK(l(0.5) == -0.2);
    CHECK(l(9.0) == 0.7);
    CHECK(l.integral(-1.0, 2.0) == Approx(0.3 - 0.2 + 0.7));
}

TEST_CASE("piecewise density from csv") {
    const std::string path = "stovex_test_density.csv";
    {
        std::ofstream os(path);
        os << "x,rho\n0,0.5\n0.25,-1\n0.75,0.2\n";
    }
    const PiecewiseDensity d = PiecewiseDensity::from_csv(path, 1.0);
    CHECK(d.values.size() == 3);
    CHECK(d(0.5) == -1.0);
    CHECK(d(0.9) == 0.2);
    std::remove(path.c_str());
    CHECK_THROWS(PiecewiseDensity::from_csv("does-not-exist.csv", 1.0));
}

TEST_CASE("front tracking reproduces single Riemann problems on the line") {
    const FluxParams fp(0.3);
    FrontSolution s(PiecewiseDensity::line({0.0}, {0.8, -0.6}), fp);
    s.advance_to(2.0);
    REQUIRE(s.fronts().size() == 1);
    CHECK(s.fronts()[0].position == Approx(rh_speed(0.8, -0.6, fp) * 2.0));
    FrontSolution f(PiecewiseDensity::line({0.0}, {-1.0, 1.0}), fp);
    f.advance_to(1.5);
    for (double x = -4.0; x < 1.0; x += 0.05) CHECK(f.value(x) == Approx(example2(-1.0, 1.0, x, 1.5, fp)));
}

TEST_CASE("domain wall on the circle: events, entropy and mass") {
    const FluxParams fp(0.4);
    const double L = 1.0, x1 = 0.6;
    FrontSolution s = front_track(domain_wall(L, x1), 3.0, fp);
    REQUIRE(s.events().size() >= 2);
    CHECK(s.events()[0].y == Approx(example3_y1(L, x1, fp)).epsilon(1e-10));
    CHECK(s.events()[0].y == Approx(0.3).epsilon(1e-10));
    CHECK(s.events()[1].y == Approx(1.51875).epsilon(1e-9));
    CHECK(s.max_mass_drift() < 1e-10);
    for (const Front& f : s.fronts())
        if (f.kind == Front::Kind::shock) CHECK(f.left_state > f.right_state);
    for (double x = 0.0; x < 1.0; x += 0.01) {
        CHECK(s.value(x) >= -1.0);
        CHECK(s.value(x) <= 1.0);
    }
    // Replay from a checkpoint agrees with direct evolution.
    const FrontSolution early = s.at(0.2);
    for (double x = 0.0; x < 1.0; x += 0.05) CHECK(early.value(x) == Approx(example3(L, x1, x, 0.2, fp)));
}

TEST_CASE("domain wall closed form before the first event") {
    const FluxParams fp(0.4);
    FrontSolution s(domain_wall(1.0, 0.6), fp);
    for (double y : {0.05, 0.15, 0.29}) {
        s.advance_to(y);
        for (double x = 0.005; x < 1.0; x += 0.01) CHECK(s.value(x) == Approx(example3(1.0, 0.6, x, y, fp)));
    }
    CHECK_THROWS(example3(1.0, 0.2, 0.5, 0.5, fp));
}

TEST_CASE("colliding shocks merge") {
    const FluxParams fp(0.5);
    FrontSolution s(PiecewiseDensity::periodic(1.0, {0.0, 0.3, 0.5}, {1.0, 0.0, -1.0}), fp);
    s.advance_to(2.0);
    CHECK(s.max_mass_drift() < 1e-10);
    bool merged = false;
    for (const auto& e : s.events()) merged = merged || e.kind == "shock_shock_collision";
    CHECK(merged);
    for (const Front& f : s.fronts())
        if (f.kind == Front::Kind::shock) CHECK(f.left_state > f.right_state);
}

TEST_CASE("Godunov scheme") {
    const FluxParams fp(0.4);
    const GridSolution c = godunov(PiecewiseDensity::periodic(1.0, {0.0}, {0.3}), 64, 1.0, fp, 0.9);
    for (double a : c.averages) CHECK(a == Approx(0.3));
    const PiecewiseDensity dw = domain_wall(1.0, 0.6);
    const GridSolution g = godunov(dw, 128, 2.0, fp, 0.9);
    CHECK(std::abs(g.mass() - dw.integral(0.0, 1.0)) < 1e-12);
    for (double a : g.averages) {
        CHECK(a >= -1.0 - 1e-12);
        CHECK(a <= 1.0 + 1e-12);
    }
    CHECK(godunov_flux(0.5, -0.2, fp) == Approx(flux(-0.2, fp)));
    CHECK(godunov_flux(-0.2, 0.5, fp) == Approx(flux(0.5, fp)));
    CHECK_THROWS(godunov(dw, 64, 1.0, fp, 1.5));
}

TEST_CASE("Godunov converges at first order to the fan") {
    const FluxParams fp(0.3);
    const PiecewiseDensity rho0 = PiecewiseDensity::line({0.0}, {-1.0, 1.0});
    const FrontSolution exact = front_track(rho0, 1.0, fp);
    double prev = 0;
    for (int n : {200, 400, 800}) {
        const GridSolution g = godunov(rho0, n, 1.0, fp, 0.9, std::make_pair(-3.0, 0.5));
        const double e = l1_distance(g, exact);
        if (prev > 0) {
            CHECK(prev / e > 1.3);
            CHECK(prev / e < 3.0);
        }
        prev = e;
    }
}

TEST_CASE("asymptotic shock slope") {
    const FluxParams fp(0.4);
    CHECK(asymptotic_shock_slope(0.0, fp) == Approx(-(1 - 0.16)));
    CHECK(asymptotic_shock_slope(0.999999, fp) == Approx(speed(1.0, fp)).epsilon(1e-5));
    CHECK_THROWS(asymptotic_shock_slope(1.0, fp));
}

TEST_CASE("Burgers variable") {
    const FluxParams fp(0.5);
    CHECK(burgers_transform(0.2, fp) == speed(0.2, fp));
    // u_x = f'(rho) rho_x along a smooth profile.
    auto rho = [](double x) { return 0.5 * std::sin(x); };
    for (double x = 0.0; x < 6.0; x += 0.5) {
        const double h = 1e-5;
        const double ux = (burgers_transform(rho(x + h), fp) - burgers_transform(rho(x - h), fp)) / (2 * h);
        const double fprime = (speed(rho(x) + h, fp) - speed(rho(x) - h, fp)) / (2 * h);
        CHECK(ux == Approx(fprime * 0.5 * std::cos(x)).epsilon(1e-6));
    }
}

TEST_CASE("transport limit of the exact right-hand side") {
    const AsepLimit sym = asep_limit_residual(2.0, 2.0, {0.04, 0.02});
    for (double r : sym.residual) CHECK(r < 1e-14);
    const AsepLimit taylor = asep_limit_residual(3.0, 1.0, {0.04, 0.02, 0.01}, 1.0);
    for (double r : taylor.ratio) {
        CHECK(r > 3.5);
        CHECK(r < 4.5);
    }
    const AsepLimit half = asep_limit_residual(3.0, 1.0, {0.04, 0.02, 0.01}, 0.5);
    for (double r : half.ratio) CHECK(r < 2.5);
    CHECK_THROWS(asep_limit_residual(3.0, 1.0, {0.5}));
    CHECK(transport_coefficient(0.4, 0.0) == 1.0);
}

TEST_CASE("height from density") {
    const FluxParams fp(0.3);
    const HeightFromDensity c([](double, double) { return 0.4; }, 0.1, fp);
    CHECK(c(2.0, 3.0) == Approx(0.1 + 0.4 * 2.0 + 3.0 * (0.4 + 0.3) / (1 + 0.12)));
    const HeightFromDensity h([&](double x, double y) { return y > 0 ? example2(-1.0, 1.0, x, y, fp) : (x < 0 ? -1.0 : 1.0); },
                              0.0, fp);
    CHECK(std::abs(h.loop_integral(-2.0, 0.3, 0.5, 1.5)) < 1e-8);
    CHECK(std::abs(h.loop_integral(-1.2, -0.6, 0.4, 2.0)) < 1e-8);
    // Monodromy on the circle is L times the mean density.
    const double L = 1.0, x1 = 0.6;
    FrontSolution s = front_track(domain_wall(L, x1), 1.0, fp);
    CHECK(s.integral(0.0, L) == Approx((2 * x1 - L)));
}
