#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "ionpulse/errors.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Symmetry class of the pulse about tau/2. Selects the Fourier family:
/// negative uses sin(2 pi n t / tau), positive uses sin(2 pi (n-1/2) t / tau),
/// mixed is the union of both (tones at pi n / tau).
enum class Parity { negative, positive, mixed };

inline std::string to_string(Parity p) {
    switch (p) {
        case Parity::negative: return "negative";
        case Parity::positive: return "positive";
        case Parity::mixed: return "mixed";
    }
    return "?";
}

inline Parity parity_from_string(const std::string& s) {
    if (s == "negative") return Parity::negative;
    if (s == "positive") return Parity::positive;
    if (s == "mixed") return Parity::mixed;
    throw validation_error("parity: expected negative|positive|mixed, got '" + s + "'");
}

struct PulseBasis {
    double tau = 0.0;  // gate duration, seconds
    int size = 0;      // N_A
    Parity parity = Parity::negative;

    void validate() const {
        if (!(tau > 0.0)) throw validation_error("tau: must be > 0");
        if (size < 1) throw validation_error("basis_size: must be >= 1");
    }

    /// Angular frequency of tone n (1-based).
    double tone_freq(int n) const {
        switch (parity) {
            case Parity::negative: return two_pi * n / tau;
            case Parity::positive: return two_pi * (n - 0.5) / tau;
            case Parity::mixed: return pi * n / tau;
        }
        return 0.0;
    }

    bool operator==(const PulseBasis& o) const {
        return tau == o.tau && size == o.size && parity == o.parity;
    }
};

/// Moment-stabilization order K and the chi-projection count L of the
/// active entanglement stabilization.
struct StabilizationSpec {
    int order = 0;
    int chi_projection_count = 0;

    void validate() const {
        if (order < 0) throw validation_error("order: must be >= 0");
        if (chi_projection_count < 0) throw validation_error("chi_projection_count: must be >= 0");
    }
};

/// Evaluates sin(w_n t) for n = 1..size at one t. Recurrence over n; two
/// flops per tone.
class ToneTable {
public:
    ToneTable(const PulseBasis& basis, double t) {
        const double theta =
            (basis.parity == Parity::mixed ? pi : two_pi) * t / basis.tau;
        c2_ = 2.0 * std::cos(theta);
        if (basis.parity == Parity::positive) {
            prev_ = std::sin(-0.5 * theta);
            cur_ = std::sin(0.5 * theta);
        } else {
            prev_ = std::sin(0.0);
            cur_ = std::sin(theta);
        }
    }
    /// Value for the current tone, then advance.
    double next() {
        const double v = cur_;
        const double nxt = c2_ * cur_ - prev_;
        prev_ = cur_;
        cur_ = nxt;
        return v;
    }

private:
    double c2_, prev_, cur_;
};

/// g(t) = sum_n A_n sin(w_n t); the synthesis output.
struct FourierPulse {
    PulseBasis basis;
    Eigen::VectorXd amplitudes;  // rad/s

    double eval(double t) const {
        ToneTable tones(basis, t);
        double g = 0.0;
        for (int n = 0; n < amplitudes.size(); ++n) g += amplitudes(n) * tones.next();
        return g;
    }

    /// Analytic derivative g'(t).
    double eval_derivative(double t) const {
        double g = 0.0;
        for (int n = 1; n <= amplitudes.size(); ++n) {
            const double w = basis.tone_freq(n);
            g += amplitudes(n - 1) * w * std::cos(w * t);
        }
        return g;
    }

    /// Samples g on a uniform grid of `count` points spanning [0, tau].
    Eigen::VectorXd sample(int count) const {
        Eigen::VectorXd out(count);
        for (int k = 0; k < count; ++k) {
            out(k) = eval(basis.tau * k / (count - 1));
        }
        return out;
    }

    /// max_t |g(t)| by dense sampling (32 per fastest tone period) with
    /// parabolic refinement of the winning sample.
    double peak() const {
        const int cycles = static_cast<int>(
            std::ceil(basis.tone_freq(static_cast<int>(amplitudes.size())) * basis.tau / two_pi));
        const int m = std::max(1024, 32 * cycles);
        double best = 0.0;
        int arg = 0;
        for (int k = 0; k <= m; ++k) {
            const double v = std::abs(eval(basis.tau * k / m));
            if (v > best) {
                best = v;
                arg = k;
            }
        }
        if (arg > 0 && arg < m) {
            const double h = basis.tau / m;
            const double t1 = basis.tau * arg / m;
            const double q0 = std::abs(eval(t1 - h)), q2 = std::abs(eval(t1 + h));
            const double curv = q0 - 2.0 * best + q2;
            if (curv < 0.0) {
                const double dt = 0.5 * h * (q0 - q2) / curv;
                best = std::max(best, std::abs(eval(t1 + dt)));
            }
        }
        return best;
    }

    double norm() const { return amplitudes.norm(); }
};

/// Fixed-detuning pulse: constant mu_0 with piecewise-constant amplitude
/// over equal segments.
struct StepPulse {
    int num_segments = 0;
    double detuning = 0.0;        // mu_0, rad/s
    int half_period_count = 0;    // K = mu_0 tau / pi
    double tau = 0.0;
    Eigen::VectorXd amplitudes;   // Omega_j, rad/s

    double segment_start(int j) const { return tau * j / num_segments; }  // 0-based

    double eval(double t) const {
        if (t < 0.0 || t > tau) return 0.0;
        int j = static_cast<int>(t / tau * num_segments);
        if (j >= num_segments) j = num_segments - 1;
        return amplitudes(j) * std::sin(detuning * t);
    }

    double peak() const { return amplitudes.cwiseAbs().maxCoeff(); }
};

}  // namespace ionpulse
