#pragma once

#include <stdexcept>
#include <string>

namespace stovex {

// Thrown when an internal consistency check fails (bug or non-stochastic input).
struct invariant_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BaxterPoint {
    double u = 0.0;
    double eta = 0.0;
    int branch = 1;  // +1 gives b1 > b2

    void validate() const;
};

enum class VConvention { b1_minus_b2, b2_minus_b1, magnitude };

std::string to_string(VConvention c);
VConvention v_convention_from_string(const std::string& s);

struct StochasticWeights {
    double a1 = 1.0, a2 = 1.0;
    double b1 = 0.0, b2 = 0.0;
    double c1 = 1.0, c2 = 1.0;
    double H = 0.0, V = 0.0;
    double lambda = 1.0;
    double delta = 0.0;
    double v = 0.0;
    VConvention v_convention = VConvention::magnitude;
};

struct ModelScale {
    double L = 1.0;
    double T_len = 1.0;  // snapped to N * eps
    int M = 1;
    int N = 0;
    double eps = 1.0;

    static ModelScale make(double L, double T_len, int M);
};

StochasticWeights weights_from_baxter(const BaxterPoint& p,
                                      VConvention conv = VConvention::magnitude);

// allow_symmetric permits b1 == b2 (v = 0); u and eta are then not recoverable.
StochasticWeights weights_from_probabilities(double b1, double b2,
                                             VConvention conv = VConvention::magnitude,
                                             bool allow_symmetric = false);

// Inverts the stochastic-point formulas. Requires b1 != b2.
BaxterPoint baxter_from_probabilities(double b1, double b2);

// Footnote-style anisotropy (a1 a2 + b1 b2 - c1 c2) / (2 sqrt(a1 a2 b1 b2)).
double delta_of(double a1, double a2, double b1, double b2, double c1, double c2);

double drift_param(const StochasticWeights& w);
double drift_param(double b1, double b2, VConvention conv);

double critical_line_slope(double t, const BaxterPoint& p, int sign);

}  // namespace stovex
