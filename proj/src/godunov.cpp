#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stovex/solver.hpp"

namespace stovex {

double godunov_flux(double rhoL, double rhoR, const FluxParams& fp) {
    // Convex flux: minimum over [rhoL, rhoR] or maximum over [rhoR, rhoL]. F' < 0 on [-1,1],
    // so there is no interior sonic point and the extremes sit at the ends.
    const double fl = flux(rhoL, fp), fr = flux(rhoR, fp);
    return rhoL <= rhoR ? std::min(fl, fr) : std::max(fl, fr);
}

double GridSolution::mass() const {
    double acc = 0;
    for (double r : averages) acc += r;
    return acc * dx;
}

GridSolution godunov(const PiecewiseDensity& rho0, int n_x, double y_max, const FluxParams& fp, double cfl,
                     std::optional<std::pair<double, double>> window) {
    if (!(cfl > 0 && cfl <= 1)) throw std::invalid_argument("godunov: cfl must lie in (0,1]");
    if (n_x < 8) throw std::invalid_argument("godunov: n_x must be >= 8");
    if (!(y_max >= 0)) throw std::invalid_argument("godunov: y_max must be >= 0");
    GridSolution g;
    g.periodic = !rho0.line_mode;
    if (rho0.line_mode) {
        if (!window || !(window->second > window->first))
            throw std::invalid_argument("godunov: line data needs a window [x_lo, x_hi]");
        g.x_lo = window->first;
        g.length = window->second - window->first;
    } else {
        g.x_lo = 0;
        g.length = rho0.L;
    }
    g.n_x = n_x;
    g.dx = g.length / n_x;
    g.averages.resize(n_x);
    for (int j = 0; j < n_x; ++j) {
        const double a = g.x_lo + j * g.dx;
        g.averages[j] = rho0.integral(a, a + g.dx) / g.dx;
    }
    const double max_speed = std::abs(speed(-1.0, fp));
    const double dy = cfl * g.dx / max_speed;
    std::vector<double> F(n_x + 1);
    std::vector<double>& u = g.averages;
    while (g.y < y_max) {
        double h = std::min(dy, y_max - g.y);
        if (h * max_speed > g.dx * (1 + 1e-12)) throw std::logic_error("godunov: CFL violated");
        for (int j = 0; j <= n_x; ++j) {
            double l, r;
            if (g.periodic) {
                l = u[(j - 1 + n_x) % n_x];
                r = u[j % n_x];
            } else {
                l = u[std::max(j - 1, 0)];
                r = u[std::min(j, n_x - 1)];
            }
            F[j] = godunov_flux(l, r, fp);
        }
        const double lam = h / g.dx;
        for (int j = 0; j < n_x; ++j) u[j] -= lam * (F[j + 1] - F[j]);
        g.y = (h == y_max - g.y) ? y_max : g.y + h;
        ++g.steps;
    }
    return g;
}

double l1_distance(const GridSolution& g, const FrontSolution& exact) {
    double acc = 0;
    for (int j = 0; j < g.n_x; ++j) {
        const double a = g.x_lo + j * g.dx;
        const double avg = exact.integral(a, a + g.dx) / g.dx;
        acc += std::abs(g.averages[j] - avg) * g.dx;
    }
    return acc / g.length;
}

}  // namespace stovex
