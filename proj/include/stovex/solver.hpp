#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stovex {

// Limit-shape conservation law rho_y + d/dx F(rho) = 0 with
// F(rho) = (1 - v^2) / (v (1 + v rho)), 0 < v < 1.
struct FluxParams {
    double v;
    explicit FluxParams(double v);
};

double flux(double rho, const FluxParams& fp);
double speed(double rho, const FluxParams& fp);          // f = F', negative and increasing
double speed_inverse(double x, const FluxParams& fp);    // f(rho) = x
double flux_of_speed(double x, const FluxParams& fp);    // F(f^{-1}(x)) = sqrt((1/v^2 - 1)|x|)
double rh_speed(double rhoL, double rhoR, const FluxParams& fp);

// Primitive of f^{-1}: d/dxi fan_primitive(xi) = speed_inverse(xi).
double fan_primitive(double xi, const FluxParams& fp);

struct RiemannSolution {
    enum class Kind { shock, fan, constant };
    Kind kind = Kind::constant;
    double speed = 0;  // shock speed
    double lo = 0;     // fan edge speeds f(rhoL), f(rhoR)
    double hi = 0;
};

RiemannSolution riemann(double rhoL, double rhoR, const FluxParams& fp);

double fan_value(double x, double y, double xc, double yc, const FluxParams& fp);

struct PiecewiseDensity {
    double L = 1.0;
    bool line_mode = false;
    std::vector<double> breakpoints;
    // Circle: values[j] on [x_j, x_{j+1}), the last one wrapping through L.
    // Line: values[0] left of x_0, values[j] on [x_{j-1}, x_j), values[k] right of x_{k-1}.
    std::vector<double> values;

    static PiecewiseDensity periodic(double L, std::vector<double> breakpoints, std::vector<double> values);
    static PiecewiseDensity line(std::vector<double> breakpoints, std::vector<double> values);
    // Two-column CSV `x,rho` (header optional); each row starts a new arc.
    static PiecewiseDensity from_csv(const std::string& path, double L);

    void validate() const;
    double operator()(double x) const;
    double integral(double a, double b) const;
    double average() const;  // circle only
};

struct Front {
    enum class Kind { shock, fan_left_edge, fan_right_edge };
    Kind kind = Kind::shock;
    double position = 0;  // reduced to [0, L) on the circle
    long winding = 0;     // unwrapped = position + winding * L
    double left_state = 0;
    double right_state = 0;
    double fan_x = 0, fan_y = 0;  // edges only
};

std::string to_string(Front::Kind k);

struct FrontEvent {
    double y = 0;
    std::string kind;
    double position = 0;
};

// Exact front-tracking evolution of piecewise constant data: fans are kept in closed form and
// only shock trajectories are integrated.
class FrontSolution {
public:
    FrontSolution(const PiecewiseDensity& rho0, const FluxParams& fp);

    void advance_to(double y);
    double y_now() const { return st_.y; }

    // Evaluation at y_now.
    double value(double x) const;
    double integral(double a, double b) const;
    double mass() const;  // circle only
    std::vector<Front> fronts() const;
    // ds/dy of the shock fronts()[i] at y_now.
    double front_speed(std::size_t i) const;

    // Evaluation at an earlier or later time, replayed from the nearest checkpoint.
    FrontSolution at(double y) const;
    double operator()(double x, double y) const { return at(y).value(x); }

    const std::vector<FrontEvent>& events() const { return events_; }
    double max_mass_drift() const { return max_mass_drift_; }
    const FluxParams& flux_params() const { return fp_; }
    bool line_mode() const { return line_; }
    double period() const { return L_; }

    static constexpr long max_events = 1000000;

private:
    struct Piece {
        bool fan = false;
        double value = 0;         // constant pieces
        double cx = 0, cy = 0;    // fan centre in the global unwrapped frame
        double lo = 0, hi = 0;    // fan state range
    };
    struct Bound {
        Front::Kind kind = Front::Kind::shock;
        double pos = 0;  // shocks only; edges are computed from their fan
        bool dirty = false;
    };
    struct State {
        double y = 0;
        std::vector<Bound> b;
        std::vector<Piece> p;
        double h = 0;
    };

    std::size_t right_piece(std::size_t i) const;
    double right_shift(std::size_t i) const;
    double piece_value(const State& s, std::size_t j, double x, double y) const;
    double bound_pos(const State& s, std::size_t i, double y) const;
    std::vector<double> shock_positions(const State& s) const;
    std::vector<double> shock_rhs(const State& s, double y, const std::vector<double>& x) const;
    std::vector<double> rk4(const State& s, double y, const std::vector<double>& x, double h) const;
    std::vector<double> widths(const State& s, double y, const std::vector<double>& x) const;
    void set_shocks(State& s, const std::vector<double>& x) const;
    void handle_event(double y);
    void classify(std::size_t i);
    void check_entropy() const;
    double piece_integral(const State& s, std::size_t j, double a, double b) const;
    double cumulative(double x) const;
    double step_tolerance() const;

    FluxParams fp_;
    bool line_;
    double L_;
    State st_;
    double mass0_ = 0;
    double max_mass_drift_ = 0;
    std::vector<FrontEvent> events_;
    std::vector<State> checkpoints_;
};

FrontSolution front_track(const PiecewiseDensity& rho0, double y_max, const FluxParams& fp);

struct GridSolution {
    double x_lo = 0, length = 1;
    int n_x = 0;
    double dx = 0;
    double y = 0;
    bool periodic = true;
    std::vector<double> averages;
    long steps = 0;

    double mass() const;
    double cell_center(int j) const { return x_lo + (j + 0.5) * dx; }
};

// Periodic on [0, L) for circle data; on the line the window [x_lo, x_hi] has transmissive ends.
GridSolution godunov(const PiecewiseDensity& rho0, int n_x, double y_max, const FluxParams& fp, double cfl,
                     std::optional<std::pair<double, double>> window = std::nullopt);

double godunov_flux(double rhoL, double rhoR, const FluxParams& fp);

// (1/len) * integral |average_j - exact cell average| over the grid.
double l1_distance(const GridSolution& g, const FrontSolution& exact);

double example1(double rhoL, double rhoR, double x, double y, const FluxParams& fp);
double example2(double rhoL, double rhoR, double x, double y, const FluxParams& fp);
double example3(double L, double x1, double x, double y, const FluxParams& fp);
// Time at which the empty (rho = -1) region of the domain-wall data is used up.
double example3_y1(double L, double x1, const FluxParams& fp);
PiecewiseDensity domain_wall(double L, double x1);

double asymptotic_shock_slope(double rho_ave, const FluxParams& fp);

double burgers_transform(double rho, const FluxParams& fp);

// Coefficient of the exact limit-shape right-hand side, -f(rho) = (1 - v^2) / (1 + v rho)^2,
// valid for 0 <= v < 1.
double transport_coefficient(double rho, double v);

struct AsepLimit {
    std::vector<double> eps;
    std::vector<double> v;
    std::vector<double> residual;
    std::vector<double> ratio;  // residual[i] / residual[i + 1]
};

// Compares the exact right-hand side against rho_x - kappa eps (p - q) rho rho_x on a smooth
// profile; kappa = 1/2 is the printed expansion, kappa = 1 the Taylor coefficient.
AsepLimit asep_limit_residual(double p, double q, const std::vector<double>& eps_seq, double kappa = 0.5);

// Height function built from a density field and the critical-line relation
// phi_y = (phi_x + v) / (1 + v phi_x).
class HeightFromDensity {
public:
    using Density = std::function<double(double, double)>;
    using XIntegral = std::function<double(double, double, double)>;  // (a, b, y)

    HeightFromDensity(Density rho, double phi00, const FluxParams& fp, XIntegral x_integral = nullptr);

    double operator()(double x, double y) const;
    double phi_y(double rho) const;
    double x_integral(double a, double b, double y) const;
    double y_integral(double x, double ya, double yb) const;
    // Circulation of (rho, phi_y(rho)) around [xa, xb] x [ya, yb].
    double loop_integral(double xa, double xb, double ya, double yb) const;

private:
    Density rho_;
    XIntegral xint_;
    double phi00_;
    FluxParams fp_;
};

}  // namespace stovex
