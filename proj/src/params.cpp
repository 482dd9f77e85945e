#include "stovex/params.hpp"

#include <cmath>

namespace stovex {

void BaxterPoint::validate() const {
    if (!(u > 0.0) || !std::isfinite(u)) throw std::invalid_argument("BaxterPoint: u must be > 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("BaxterPoint: eta must be > 0");
    if (branch != 1 && branch != -1) throw std::invalid_argument("BaxterPoint: branch must be +1 or -1");
}

std::string to_string(VConvention c) {
    switch (c) {
        case VConvention::b1_minus_b2: return "b1_minus_b2";
        case VConvention::b2_minus_b1: return "b2_minus_b1";
        case VConvention::magnitude: return "magnitude";
    }
    return "magnitude";
}

VConvention v_convention_from_string(const std::string& s) {
    if (s == "b1_minus_b2") return VConvention::b1_minus_b2;
    if (s == "b2_minus_b1") return VConvention::b2_minus_b1;
    if (s == "magnitude") return VConvention::magnitude;
    throw std::invalid_argument("unknown v convention: " + s);
}

ModelScale ModelScale::make(double L, double T_len, int M) {
    if (!(L > 0.0) || !(T_len > 0.0) || M < 1) throw std::invalid_argument("ModelScale: L, T_len > 0 and M >= 1 required");
    ModelScale s;
    s.L = L;
    s.M = M;
    s.eps = L / M;
    // Tolerate round-off so that T_len = k * eps gives exactly k rows.
    double rows = T_len / s.eps;
    long n = static_cast<long>(std::floor(rows + 1e-9));
    s.N = static_cast<int>(n);
    s.T_len = s.N * s.eps;
    return s;
}

double delta_of(double a1, double a2, double b1, double b2, double c1, double c2) {
    return (a1 * a2 + b1 * b2 - c1 * c2) / (2.0 * std::sqrt(a1 * a2 * b1 * b2));
}

double drift_param(double b1, double b2, VConvention conv) {
    const double den = 2.0 - b1 - b2;
    switch (conv) {
        case VConvention::b1_minus_b2: return (b1 - b2) / den;
        case VConvention::b2_minus_b1: return (b2 - b1) / den;
        case VConvention::magnitude: return std::abs(b1 - b2) / den;
    }
    return std::abs(b1 - b2) / den;
}

double drift_param(const StochasticWeights& w) { return drift_param(w.b1, w.b2, w.v_convention); }

StochasticWeights weights_from_baxter(const BaxterPoint& p, VConvention conv) {
    p.validate();
    const double s = std::sinh(p.u + p.eta);
    const double br = p.branch;
    StochasticWeights w;
    w.b1 = std::sinh(p.u) * std::exp(br * p.eta) / s;
    w.b2 = std::sinh(p.u) * std::exp(-br * p.eta) / s;
    w.c1 = std::sinh(p.eta) * std::exp(-br * p.u) / s;
    w.c2 = std::sinh(p.eta) * std::exp(br * p.u) / s;
    w.H = br * p.eta / 2.0;
    w.V = -w.H;
    w.lambda = std::exp(-br * p.u);
    w.delta = delta_of(w.a1, w.a2, w.b1, w.b2, w.c1, w.c2);
    w.v_convention = conv;
    w.v = drift_param(w);
    return w;
}

BaxterPoint baxter_from_probabilities(double b1, double b2) {
    if (!(b1 > 0.0 && b1 < 1.0 && b2 > 0.0 && b2 < 1.0) || b1 == b2)
        throw std::invalid_argument("baxter_from_probabilities: need distinct b1, b2 in (0,1)");
    BaxterPoint p;
    p.branch = b1 > b2 ? 1 : -1;
    p.eta = 0.5 * std::abs(std::log(b1 / b2));
    p.u = std::atanh(std::abs(b1 - b2) / (2.0 - b1 - b2));
    return p;
}

StochasticWeights weights_from_probabilities(double b1, double b2, VConvention conv, bool allow_symmetric) {
    if (!(b1 >= 0.0 && b1 < 1.0) || !(b2 >= 0.0 && b2 < 1.0))
        throw std::invalid_argument("weights_from_probabilities: b1, b2 must lie in [0,1)");
    if (b1 == b2 && !allow_symmetric)
        throw std::invalid_argument("weights_from_probabilities: b1 == b2 requires allow_symmetric");
    StochasticWeights w;
    w.b1 = b1;
    w.b2 = b2;
    w.c1 = 1.0 - b1;
    w.c2 = 1.0 - b2;
    w.delta = delta_of(w.a1, w.a2, b1, b2, w.c1, w.c2);
    w.v_convention = conv;
    w.v = drift_param(w);
    if (b1 != b2 && b1 > 0.0 && b2 > 0.0) {
        const BaxterPoint p = baxter_from_probabilities(b1, b2);
        w.H = p.branch * p.eta / 2.0;
        w.V = -w.H;
        w.lambda = std::exp(-p.branch * p.u);
    }
    return w;
}

double critical_line_slope(double t, const BaxterPoint& p, int sign) {
    p.validate();
    if (sign != 1 && sign != -1) throw std::invalid_argument("critical_line_slope: sign must be +1 or -1");
    if (std::abs(t) > 1.0) throw std::invalid_argument("critical_line_slope: |t| must be <= 1");
    const double tau = sign * std::tanh(p.u + p.eta);
    const double den = 1.0 + tau * t;
    if (std::abs(den) < 1e-300) throw std::domain_error("critical_line_slope: singular denominator");
    return (t + tau) / den;
}

}  // namespace stovex
