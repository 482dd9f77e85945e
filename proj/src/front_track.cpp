#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stovex/params.hpp"
#include "stovex/solver.hpp"

namespace stovex {

std::string to_string(Front::Kind k) {
    switch (k) {
        case Front::Kind::shock: return "shock";
        case Front::Kind::fan_left_edge: return "fan_left_edge";
        case Front::Kind::fan_right_edge: return "fan_right_edge";
    }
    return "shock";
}

FrontSolution::FrontSolution(const PiecewiseDensity& rho0, const FluxParams& fp)
    : fp_(fp), line_(rho0.line_mode), L_(rho0.line_mode ? 0.0 : rho0.L) {
    rho0.validate();
    const std::size_t k = rho0.breakpoints.size();
    // Piece j sits left of breakpoint j; on the circle piece 0 is the arc that wraps through 0.
    auto left_value = [&](std::size_t j) { return line_ ? rho0.values[j] : rho0.values[(j + k - 1) % k]; };
    auto right_value = [&](std::size_t j) { return line_ ? rho0.values[j + 1] : rho0.values[j]; };
    for (std::size_t j = 0; j < k; ++j) {
        const double a = left_value(j), b = right_value(j), x = rho0.breakpoints[j];
        Piece left;
        left.value = a;
        st_.p.push_back(left);
        if (a > b) {
            st_.b.push_back({Front::Kind::shock, x, false});
        } else if (a < b) {
            Piece fan;
            fan.fan = true;
            fan.cx = x;
            fan.cy = 0.0;
            fan.lo = a;
            fan.hi = b;
            st_.b.push_back({Front::Kind::fan_left_edge, x, false});
            st_.p.push_back(fan);
            st_.b.push_back({Front::Kind::fan_right_edge, x, false});
        } else {
            st_.b.push_back({Front::Kind::shock, x, true});  // removed by classification
        }
    }
    if (line_) {
        Piece last;
        last.value = rho0.values.back();
        st_.p.push_back(last);
    }
    // Equal neighbouring values leave removable boundaries.
    for (std::size_t i = 0; i < st_.b.size();) {
        if (st_.b[i].dirty) {
            st_.b[i].dirty = false;
            st_.p.erase(st_.p.begin() + i);
            st_.b.erase(st_.b.begin() + i);
        } else {
            ++i;
        }
    }
    if (!line_ && st_.b.empty()) st_.p.resize(1);
    st_.h = 1e-3 * (line_ ? 1.0 : L_);
    mass0_ = line_ ? 0.0 : mass();
    checkpoints_.push_back(st_);
}

double FrontSolution::step_tolerance() const { return 1e-12 * (line_ ? 1.0 : L_); }

std::size_t FrontSolution::right_piece(std::size_t i) const {
    return line_ ? i + 1 : (i + 1) % st_.b.size();
}

double FrontSolution::right_shift(std::size_t i) const {
    return (!line_ && i + 1 == st_.b.size()) ? L_ : 0.0;
}

double FrontSolution::piece_value(const State& s, std::size_t j, double x, double y) const {
    const Piece& q = s.p[j];
    if (!q.fan) return q.value;
    if (y <= q.cy) return x < q.cx ? q.lo : q.hi;
    const double xi = (x - q.cx) / (y - q.cy);
    if (xi <= speed(q.lo, fp_)) return q.lo;
    if (xi >= speed(q.hi, fp_)) return q.hi;
    return speed_inverse(xi, fp_);
}

double FrontSolution::bound_pos(const State& s, std::size_t i, double y) const {
    const Bound& b = s.b[i];
    if (b.kind == Front::Kind::fan_right_edge) {
        const Piece& f = s.p[i];
        return f.cx + speed(f.hi, fp_) * (y - f.cy);
    }
    if (b.kind == Front::Kind::fan_left_edge) {
        const Piece& f = s.p[right_piece(i)];
        return f.cx + speed(f.lo, fp_) * (y - f.cy) + right_shift(i);
    }
    return b.pos;
}

std::vector<double> FrontSolution::shock_positions(const State& s) const {
    std::vector<double> x;
    for (const Bound& b : s.b)
        if (b.kind == Front::Kind::shock) x.push_back(b.pos);
    return x;
}

void FrontSolution::set_shocks(State& s, const std::vector<double>& x) const {
    std::size_t c = 0;
    for (Bound& b : s.b)
        if (b.kind == Front::Kind::shock) b.pos = x[c++];
}

namespace {

std::vector<double> axpy(const std::vector<double>& x, double a, const std::vector<double>& k) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * k[i];
    return r;
}

}  // namespace

std::vector<double> FrontSolution::shock_rhs(const State& s, double y, const std::vector<double>& x) const {
    std::vector<double> r(x.size());
    std::size_t c = 0;
    for (std::size_t i = 0; i < s.b.size(); ++i) {
        if (s.b[i].kind != Front::Kind::shock) continue;
        const double X = x[c];
        const double a = piece_value(s, i, X, y);
        const double b = piece_value(s, right_piece(i), X - right_shift(i), y);
        r[c++] = std::abs(a - b) < 1e-14 ? speed(a, fp_) : rh_speed(a, b, fp_);
    }
    return r;
}

std::vector<double> FrontSolution::rk4(const State& s, double y, const std::vector<double>& x, double h) const {
    const auto k1 = shock_rhs(s, y, x);
    const auto k2 = shock_rhs(s, y + h / 2, axpy(x, h / 2, k1));
    const auto k3 = shock_rhs(s, y + h / 2, axpy(x, h / 2, k2));
    const auto k4 = shock_rhs(s, y + h, axpy(x, h, k3));
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
}

std::vector<double> FrontSolution::widths(const State& s, double y, const std::vector<double>& x) const {
    State tmp = s;
    set_shocks(tmp, x);
    const std::size_t k = s.b.size();
    std::vector<double> pos(k);
    for (std::size_t i = 0; i < k; ++i) pos[i] = bound_pos(tmp, i, y);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> w(s.p.size(), inf);
    if (line_) {
        for (std::size_t j = 1; j < k; ++j) w[j] = pos[j] - pos[j - 1];
    } else if (k > 0) {
        w[0] = pos[0] - (pos[k - 1] - L_);
        for (std::size_t j = 1; j < k; ++j) w[j] = pos[j] - pos[j - 1];
    }
    return w;
}

void FrontSolution::advance_to(double y_target) {
    if (y_target < st_.y) throw std::invalid_argument("FrontSolution::advance_to: cannot move backwards; use at()");
    const double scale = line_ ? 1.0 : L_;
    const double h_max = 0.05 * scale;
    const double tol = step_tolerance();
    while (st_.y < y_target) {
        const double y = st_.y;
        double h = std::min({st_.h, h_max, y_target - y});
        const bool last = h == y_target - y;
        const std::vector<double> x0 = shock_positions(st_);
        std::vector<double> x1;
        if (x0.empty()) {
            x1 = x0;
        } else {
            while (true) {
                const auto full = rk4(st_, y, x0, h);
                const auto half = rk4(st_, y + h / 2, rk4(st_, y, x0, h / 2), h / 2);
                double err = 0;
                for (std::size_t i = 0; i < full.size(); ++i) err = std::max(err, std::abs(half[i] - full[i]) / 15.0);
                if (err <= tol * h || h < 1e-14 * scale) {
                    x1.resize(full.size());
                    for (std::size_t i = 0; i < full.size(); ++i) x1[i] = half[i] + (half[i] - full[i]) / 15.0;
                    const double grow = err > 0 ? 0.9 * std::pow(tol * h / err, 0.25) : 4.0;
                    if (!last || h < st_.h) st_.h = h * std::clamp(grow, 0.2, 4.0);
                    break;
                }
                h *= std::clamp(0.9 * std::pow(tol * h / err, 0.25), 0.1, 0.5);
            }
        }
        const auto w0 = widths(st_, y, x0);
        const auto w1 = widths(st_, y + h, x1);
        std::vector<std::size_t> cand;
        for (std::size_t j = 0; j < w0.size(); ++j)
            if (w0[j] > 0 && w1[j] <= 0) cand.push_back(j);
        if (cand.empty()) {
            set_shocks(st_, x1);
            st_.y = (h == y_target - y) ? y_target : y + h;
            if (!line_) max_mass_drift_ = std::max(max_mass_drift_, std::abs(mass() - mass0_));
            continue;
        }
        double lo = 0, hi = h;
        std::vector<double> xe = x1;
        while (hi - lo > 1e-12 * std::max(1.0, y)) {
            const double mid = 0.5 * (lo + hi);
            const auto xm = rk4(st_, y, x0, mid);
            const auto wm = widths(st_, y + mid, xm);
            double g = std::numeric_limits<double>::infinity();
            for (std::size_t j : cand) g = std::min(g, wm[j]);
            if (g <= 0) {
                hi = mid;
                xe = xm;
            } else {
                lo = mid;
            }
        }
        if (hi < h) xe = rk4(st_, y, x0, hi);
        set_shocks(st_, xe);
        st_.y = y + hi;
        std::vector<double> wprev = w0;
        // Widths at the event time, compared with the step start to tell shrinking pieces.
        const auto we = widths(st_, st_.y, xe);
        const double wtol = 1e-9 * scale;
        std::vector<std::size_t> vanish;
        for (std::size_t j = 0; j < we.size(); ++j)
            if (we[j] <= wtol && wprev[j] > we[j]) vanish.push_back(j);
        if (events_.size() >= static_cast<std::size_t>(max_events))
            throw std::runtime_error("front tracking: more than 1e6 events, aborting");
        std::vector<double> pos(st_.b.size());
        for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = bound_pos(st_, i, st_.y);
        std::sort(vanish.rbegin(), vanish.rend());
        for (std::size_t j : vanish) {
            const std::size_t k = st_.b.size();
            if (!line_ && k <= 1) throw invariant_violation("front tracking: the whole circle collapsed");
            const std::size_t il = line_ ? j - 1 : (j + k - 1) % k;  // boundary left of piece j
            const std::size_t ir = j;                                 // boundary right of piece j
            FrontEvent ev;
            ev.y = st_.y;
            const bool lshock = st_.b[il].kind == Front::Kind::shock, rshock = st_.b[ir].kind == Front::Kind::shock;
            if (st_.p[j].fan)
                ev.kind = "shock_exits_fan";
            else if (lshock && rshock)
                ev.kind = "shock_shock_collision";
            else
                ev.kind = "shock_meets_fan_edge";
            if (line_ || j >= 1) {
                const double np = 0.5 * (pos[il] + pos[ir]);
                st_.p.erase(st_.p.begin() + j);
                st_.b.erase(st_.b.begin() + ir);
                pos.erase(pos.begin() + ir);
                pos[il] = np;
                st_.b[il].pos = np;
                st_.b[il].kind = Front::Kind::shock;
                st_.b[il].dirty = true;
                ev.position = np;
            } else {
                const double np = 0.5 * (pos[0] + pos[k - 1] - L_);
                Piece moved = st_.p[k - 1];
                moved.cx -= L_;
                st_.p[0] = moved;
                st_.p.pop_back();
                st_.b.pop_back();
                pos.pop_back();
                pos[0] = np;
                st_.b[0].pos = np;
                st_.b[0].kind = Front::Kind::shock;
                st_.b[0].dirty = true;
                ev.position = np;
            }
            events_.push_back(ev);
        }
        handle_event(st_.y);
        check_entropy();
        if (!line_) max_mass_drift_ = std::max(max_mass_drift_, std::abs(mass() - mass0_));
        checkpoints_.push_back(st_);
    }
}

void FrontSolution::handle_event(double) {
    bool again = true;
    while (again) {
        again = false;
        for (std::size_t i = 0; i < st_.b.size(); ++i)
            if (st_.b[i].dirty) {
                classify(i);
                again = true;
                break;
            }
    }
}

void FrontSolution::classify(std::size_t i) {
    const double y = st_.y;
    Bound& b = st_.b[i];
    b.dirty = false;
    const std::size_t r = right_piece(i);
    const double X = b.pos;
    const double a = piece_value(st_, i, X, y);
    const double c = piece_value(st_, r, X - right_shift(i), y);
    const Piece& pl = st_.p[i];
    const Piece& pr = st_.p[r];
    if (!pl.fan && !pr.fan && std::abs(a - c) <= 1e-9) {
        events_.push_back({y, "constant_merge", X});
        if (!line_ && st_.b.size() == 1) {
            st_.b.clear();
            st_.p.resize(1);
            return;
        }
        st_.p.erase(st_.p.begin() + i);
        st_.b.erase(st_.b.begin() + i);
        return;
    }
    if (a > c + 1e-9) {
        b.kind = Front::Kind::shock;
        return;
    }
    if (std::abs(a - c) <= 1e-9) {
        if (pl.fan && !pr.fan) {
            b.kind = Front::Kind::fan_right_edge;
            return;
        }
        if (pr.fan && !pl.fan) {
            b.kind = Front::Kind::fan_left_edge;
            return;
        }
        b.kind = Front::Kind::shock;
        return;
    }
    throw invariant_violation("front tracking: non-admissible discontinuity (left state below right state)");
}

void FrontSolution::check_entropy() const {
    for (std::size_t i = 0; i < st_.b.size(); ++i) {
        if (st_.b[i].kind != Front::Kind::shock) continue;
        const double X = st_.b[i].pos;
        const double a = piece_value(st_, i, X, st_.y);
        const double c = piece_value(st_, right_piece(i), X - right_shift(i), st_.y);
        if (!(a > c - 1e-10)) throw invariant_violation("front tracking: shock violates the entropy condition");
    }
}

double FrontSolution::piece_integral(const State& s, std::size_t j, double a, double b) const {
    if (b <= a) return 0.0;
    const Piece& q = s.p[j];
    if (!q.fan) return q.value * (b - a);
    const double t = s.y - q.cy;
    if (t <= 0) return piece_value(s, j, 0.5 * (a + b), s.y) * (b - a);
    const double xl = q.cx + speed(q.lo, fp_) * t, xr = q.cx + speed(q.hi, fp_) * t;
    double acc = 0;
    if (a < xl) acc += q.lo * (std::min(b, xl) - a);
    if (b > xr) acc += q.hi * (b - std::max(a, xr));
    const double fa = std::max(a, xl), fb = std::min(b, xr);
    if (fb > fa) acc += t * (fan_primitive((fb - q.cx) / t, fp_) - fan_primitive((fa - q.cx) / t, fp_));
    return acc;
}

double FrontSolution::mass() const {
    if (line_) throw std::logic_error("FrontSolution::mass: circle only");
    const std::size_t k = st_.b.size();
    if (k == 0) return st_.p[0].value * L_;
    double acc = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double s = j == 0 ? bound_pos(st_, k - 1, st_.y) - L_ : bound_pos(st_, j - 1, st_.y);
        acc += piece_integral(st_, j, s, bound_pos(st_, j, st_.y));
    }
    return acc;
}

double FrontSolution::cumulative(double x) const {
    // Circle only: integral from the start of piece 0, extended periodically.
    const std::size_t k = st_.b.size();
    if (k == 0) return st_.p[0].value * x;
    const double o = bound_pos(st_, k - 1, st_.y) - L_;
    const double n = std::floor((x - o) / L_);
    const double r = x - n * L_;
    double acc = n * mass();
    for (std::size_t j = 0; j < k; ++j) {
        const double s = j == 0 ? o : bound_pos(st_, j - 1, st_.y);
        if (r <= s) break;
        acc += piece_integral(st_, j, s, std::min(r, bound_pos(st_, j, st_.y)));
    }
    return acc;
}

double FrontSolution::integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    if (!line_) return cumulative(b) - cumulative(a);
    const std::size_t k = st_.b.size();
    double acc = 0;
    for (std::size_t j = 0; j <= k; ++j) {
        const double s = j == 0 ? -std::numeric_limits<double>::infinity() : bound_pos(st_, j - 1, st_.y);
        const double e = j == k ? std::numeric_limits<double>::infinity() : bound_pos(st_, j, st_.y);
        const double lo = std::max(a, s), hi = std::min(b, e);
        if (hi > lo) acc += piece_integral(st_, j, lo, hi);
    }
    return acc;
}

double FrontSolution::value(double x) const {
    const std::size_t k = st_.b.size();
    if (!line_ && k == 0) return st_.p[0].value;
    if (!line_) {
        const double o = bound_pos(st_, k - 1, st_.y) - L_;
        x -= L_ * std::floor((x - o) / L_);
    }
    std::size_t j = 0;
    while (j < k && x >= bound_pos(st_, j, st_.y)) ++j;
    if (!line_ && j == k) j = 0;  // round-off at the top of the period
    return piece_value(st_, j, x, st_.y);
}

std::vector<Front> FrontSolution::fronts() const {
    std::vector<Front> out;
    for (std::size_t i = 0; i < st_.b.size(); ++i) {
        Front f;
        f.kind = st_.b[i].kind;
        const double X = bound_pos(st_, i, st_.y);
        if (line_) {
            f.position = X;
        } else {
            f.winding = static_cast<long>(std::floor(X / L_));
            f.position = X - f.winding * L_;
        }
        f.left_state = piece_value(st_, i, X, st_.y);
        f.right_state = piece_value(st_, right_piece(i), X - right_shift(i), st_.y);
        if (f.kind == Front::Kind::fan_right_edge) {
            f.fan_x = st_.p[i].cx;
            f.fan_y = st_.p[i].cy;
        } else if (f.kind == Front::Kind::fan_left_edge) {
            f.fan_x = st_.p[right_piece(i)].cx + right_shift(i);
            f.fan_y = st_.p[right_piece(i)].cy;
        }
        out.push_back(f);
    }
    return out;
}

double FrontSolution::front_speed(std::size_t i) const {
    if (i >= st_.b.size()) throw std::out_of_range("FrontSolution::front_speed");
    const Bound& b = st_.b[i];
    if (b.kind == Front::Kind::fan_right_edge) return speed(st_.p[i].hi, fp_);
    if (b.kind == Front::Kind::fan_left_edge) return speed(st_.p[right_piece(i)].lo, fp_);
    std::size_t c = 0;
    for (std::size_t j = 0; j < i; ++j)
        if (st_.b[j].kind == Front::Kind::shock) ++c;
    return shock_rhs(st_, st_.y, shock_positions(st_))[c];
}

FrontSolution FrontSolution::at(double y) const {
    if (y < 0) throw std::invalid_argument("FrontSolution::at: y must be >= 0");
    FrontSolution r(*this);
    if (y >= st_.y) {
        r.checkpoints_.clear();
        r.advance_to(y);
        return r;
    }
    std::size_t c = 0;
    for (std::size_t i = 0; i < checkpoints_.size(); ++i)
        if (checkpoints_[i].y <= y) c = i;
    r.st_ = checkpoints_[c];
    r.checkpoints_.clear();
    std::erase_if(r.events_, [&](const FrontEvent& e) { return e.y > r.st_.y; });
    r.advance_to(y);
    return r;
}

FrontSolution front_track(const PiecewiseDensity& rho0, double y_max, const FluxParams& fp) {
    if (!(y_max >= 0)) throw std::invalid_argument("front_track: y_max must be >= 0");
    FrontSolution s(rho0, fp);
    s.advance_to(y_max);
    return s;
}

}  // namespace stovex
