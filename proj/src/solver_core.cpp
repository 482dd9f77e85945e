#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stovex/solver.hpp"

namespace stovex {

FluxParams::FluxParams(double v_) : v(v_) {
    if (!(v_ > 0.0 && v_ < 1.0)) throw std::invalid_argument("FluxParams: v must lie in (0,1)");
}

double flux(double rho, const FluxParams& fp) { return (1.0 - fp.v * fp.v) / (fp.v * (1.0 + fp.v * rho)); }

double speed(double rho, const FluxParams& fp) {
    const double d = 1.0 + fp.v * rho;
    return -(1.0 - fp.v * fp.v) / (d * d);
}

double speed_inverse(double x, const FluxParams& fp) {
    const double lo = speed(-1.0, fp), hi = speed(1.0, fp);
    const double tol = 1e-12 * std::abs(lo);
    if (x < lo - tol || x > hi + tol) throw std::domain_error("speed_inverse: x outside the speed range");
    x = std::clamp(x, lo, hi);
    const double rho = (-1.0 + std::sqrt((1.0 - fp.v * fp.v) / std::abs(x))) / fp.v;
    return std::clamp(rho, -1.0, 1.0);
}

double flux_of_speed(double x, const FluxParams& fp) {
    return std::sqrt((1.0 / (fp.v * fp.v) - 1.0) * std::abs(x));
}

double rh_speed(double rhoL, double rhoR, const FluxParams& fp) {
    if (rhoL == rhoR) throw std::invalid_argument("rh_speed: equal states");
    // (F(a) - F(b)) / (a - b) in closed form, free of cancellation.
    const double v = fp.v;
    return -(1.0 - v) * (1.0 + v) / ((1.0 + v * rhoL) * (1.0 + v * rhoR));
}

double fan_primitive(double xi, const FluxParams& fp) {
    const double v = fp.v;
    const double s = std::sqrt(std::max(0.0, -xi));
    return (-xi - 2.0 * std::sqrt(1.0 - v * v) * s) / v;
}

RiemannSolution riemann(double rhoL, double rhoR, const FluxParams& fp) {
    if (std::abs(rhoL) > 1.0 || std::abs(rhoR) > 1.0) throw std::invalid_argument("riemann: states must lie in [-1,1]");
    RiemannSolution r;
    if (rhoL > rhoR) {
        r.kind = RiemannSolution::Kind::shock;
        r.speed = rh_speed(rhoL, rhoR, fp);
    } else if (rhoL < rhoR) {
        r.kind = RiemannSolution::Kind::fan;
        r.lo = speed(rhoL, fp);
        r.hi = speed(rhoR, fp);
    }
    return r;
}

double fan_value(double x, double y, double xc, double yc, const FluxParams& fp) {
    if (!(y > yc)) throw std::domain_error("fan_value: y must exceed the fan centre time");
    return speed_inverse((x - xc) / (y - yc), fp);
}

// ---------------------------------------------------------------------------------------------

PiecewiseDensity PiecewiseDensity::periodic(double L, std::vector<double> bps, std::vector<double> vals) {
    PiecewiseDensity d;
    d.L = L;
    d.breakpoints = std::move(bps);
    d.values = std::move(vals);
    d.validate();
    return d;
}

PiecewiseDensity PiecewiseDensity::line(std::vector<double> bps, std::vector<double> vals) {
    PiecewiseDensity d;
    d.L = std::numeric_limits<double>::infinity();
    d.line_mode = true;
    d.breakpoints = std::move(bps);
    d.values = std::move(vals);
    d.validate();
    return d;
}

PiecewiseDensity PiecewiseDensity::from_csv(const std::string& path, double L) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open initial data file: " + path);
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, r;
        if (!(ss >> x >> r)) continue;  // header or blank
        xs.push_back(x);
        vs.push_back(r);
    }
    if (xs.empty()) throw std::runtime_error("no data rows in " + path);
    return periodic(L, xs, vs);
}

void PiecewiseDensity::validate() const {
    for (double r : values)
        if (!(r >= -1.0 && r <= 1.0)) throw std::invalid_argument("PiecewiseDensity: values must lie in [-1,1]");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument("PiecewiseDensity: breakpoints must increase strictly");
    if (line_mode) {
        if (values.size() != breakpoints.size() + 1) throw std::invalid_argument("PiecewiseDensity: need k+1 values on the line");
    } else {
        if (!(L > 0) || !std::isfinite(L)) throw std::invalid_argument("PiecewiseDensity: L must be positive");
        if (breakpoints.empty() || values.size() != breakpoints.size())
            throw std::invalid_argument("PiecewiseDensity: need k >= 1 breakpoints and k values on the circle");
        if (breakpoints.front() < 0 || breakpoints.back() >= L)
            throw std::invalid_argument("PiecewiseDensity: breakpoints must lie in [0, L)");
    }
}

double PiecewiseDensity::operator()(double x) const {
    if (line_mode) {
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
        return values[it - breakpoints.begin()];
    }
    x -= L * std::floor(x / L);
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    if (it == breakpoints.begin()) return values.back();
    return values[it - breakpoints.begin() - 1];
}

double PiecewiseDensity::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    if (line_mode) {
        double acc = 0, x = a;
        for (std::size_t j = 0; j <= breakpoints.size() && x < b; ++j) {
            const double end = j < breakpoints.size() ? std::min(b, breakpoints[j]) : b;
            if (end > x) {
                acc += values[j] * (end - x);
                x = end;
            }
        }
        return acc;
    }
    // Cumulative integral from 0 with periodic extension.
    auto cum = [&](double x) {
        const double n = std::floor(x / L);
        const double r = x - n * L;
        double acc = n * average() * L;
        const std::size_t k = breakpoints.size();
        acc += values.back() * std::min(r, breakpoints[0]);
        for (std::size_t j = 0; j < k; ++j) {
            const double s = breakpoints[j];
            const double e = j + 1 < k ? breakpoints[j + 1] : L;
            if (r > s) acc += values[j] * (std::min(r, e) - s);
        }
        return acc;
    };
    return cum(b) - cum(a);
}

double PiecewiseDensity::average() const {
    if (line_mode) throw std::logic_error("PiecewiseDensity::average: circle only");
    const std::size_t k = breakpoints.size();
    double acc = values.back() * breakpoints[0];
    for (std::size_t j = 0; j < k; ++j) acc += values[j] * ((j + 1 < k ? breakpoints[j + 1] : L) - breakpoints[j]);
    return acc / L;
}

// ---------------------------------------------------------------------------------------------

double example1(double rhoL, double rhoR, double x, double y, const FluxParams& fp) {
    if (!(rhoL > rhoR)) throw std::invalid_argument("example1: requires rhoL > rhoR");
    if (y < 0) throw std::invalid_argument("example1: y must be >= 0");
    if (y == 0) return x < 0 ? rhoL : rhoR;
    return x / y >= rh_speed(rhoL, rhoR, fp) ? rhoR : rhoL;
}

double example2(double rhoL, double rhoR, double x, double y, const FluxParams& fp) {
    if (!(rhoL < rhoR)) throw std::invalid_argument("example2: requires rhoL < rhoR");
    if (y < 0) throw std::invalid_argument("example2: y must be >= 0");
    if (y == 0) return x < 0 ? rhoL : rhoR;
    const double xi = x / y;
    if (xi <= speed(rhoL, fp)) return rhoL;
    if (xi >= speed(rhoR, fp)) return rhoR;
    return speed_inverse(xi, fp);
}

PiecewiseDensity domain_wall(double L, double x1) {
    if (!(x1 > 0 && x1 < L)) throw std::invalid_argument("domain_wall: need 0 < x1 < L");
    return PiecewiseDensity::periodic(L, {0.0, x1}, {1.0, -1.0});
}

double example3_y1(double L, double x1, const FluxParams& fp) {
    // The -1 region [x1 - y, L + f(-1) y] closes.
    return (L - x1) / (-speed(-1.0, fp) - 1.0);
}

double example3(double L, double x1, double x, double y, const FluxParams& fp) {
    if (!(x1 > 0.5 * L * (1.0 - fp.v) && x1 < L)) throw std::invalid_argument("example3: requires L(1-v)/2 < x1 < L");
    if (y < 0) throw std::invalid_argument("example3: y must be >= 0");
    auto mod = [L](double z) { return z - L * std::floor(z / L); };
    if (y == 0) return mod(x) < x1 ? 1.0 : -1.0;
    if (y <= example3_y1(L, x1, fp)) {
        const double shock = x1 - y;
        const double fan_lo = L + speed(-1.0, fp) * y;
        const double fan_w = (speed(1.0, fp) - speed(-1.0, fp)) * y;
        if (mod(x - shock) < fan_lo - shock) return -1.0;
        const double t = mod(x - fan_lo);
        if (t <= fan_w) return speed_inverse(std::min(speed(1.0, fp), speed(-1.0, fp) + t / y), fp);
        return 1.0;
    }
    return front_track(domain_wall(L, x1), y, fp).value(x);
}

double asymptotic_shock_slope(double rho_ave, const FluxParams& fp) {
    if (!(std::abs(rho_ave) < 1.0)) throw std::invalid_argument("asymptotic_shock_slope: |rho_ave| must be < 1");
    return speed(rho_ave, fp);
}

double burgers_transform(double rho, const FluxParams& fp) { return speed(rho, fp); }

double transport_coefficient(double rho, double v) {
    const double d = 1.0 + v * rho;
    return (1.0 - v * v) / (d * d);
}

AsepLimit asep_limit_residual(double p, double q, const std::vector<double>& eps_seq, double kappa) {
    AsepLimit out;
    constexpr int n = 2001;
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < eps_seq.size(); ++i) {
        const double e = eps_seq[i];
        if (!(e > 0) || e * p >= 1.0 || e * q >= 1.0) throw std::invalid_argument("asep_limit_residual: eps too large");
        if (i && !(e < eps_seq[i - 1])) throw std::invalid_argument("asep_limit_residual: eps must decrease");
        const double b1 = e * p, b2 = e * q;
        const double v = (b1 - b2) / (2.0 - b1 - b2);
        double worst = 0;
        for (int k = 0; k < n; ++k) {
            const double x = static_cast<double>(k) / (n - 1);
            const double rho = 0.8 * std::sin(2 * pi * x);
            const double rho_x = 1.6 * pi * std::cos(2 * pi * x);
            const double exact = transport_coefficient(rho, v) * rho_x;
            const double expansion = rho_x - kappa * e * (p - q) * rho * rho_x;
            worst = std::max(worst, std::abs(exact - expansion));
        }
        out.eps.push_back(e);
        out.v.push_back(v);
        out.residual.push_back(worst);
    }
    for (std::size_t i = 0; i + 1 < out.residual.size(); ++i)
        out.ratio.push_back(out.residual[i + 1] > 0 ? out.residual[i] / out.residual[i + 1]
                                                    : std::numeric_limits<double>::infinity());
    return out;
}

// ---------------------------------------------------------------------------------------------

namespace {

template <class F>
double quad(F&& f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 25, 1e-13);
}

}  // namespace

HeightFromDensity::HeightFromDensity(Density rho, double phi00, const FluxParams& fp, XIntegral x_integral)
    : rho_(std::move(rho)), xint_(std::move(x_integral)), phi00_(phi00), fp_(fp) {
    if (!rho_) throw std::invalid_argument("HeightFromDensity: density evaluator required");
}

double HeightFromDensity::phi_y(double rho) const { return (rho + fp_.v) / (1.0 + fp_.v * rho); }

double HeightFromDensity::x_integral(double a, double b, double y) const {
    if (xint_) return xint_(a, b, y);
    return quad([&](double x) { return rho_(x, y); }, a, b);
}

double HeightFromDensity::y_integral(double x, double ya, double yb) const {
    return quad([&](double y) { return phi_y(rho_(x, y)); }, ya, yb);
}

double HeightFromDensity::operator()(double x, double y) const {
    return phi00_ + y_integral(0.0, 0.0, y) + x_integral(0.0, x, y);
}

double HeightFromDensity::loop_integral(double xa, double xb, double ya, double yb) const {
    return x_integral(xa, xb, ya) + y_integral(xb, ya, yb) - x_integral(xa, xb, yb) - y_integral(xa, ya, yb);
}

}  // namespace stovex
