#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ionpulse/chain.hpp"
#include "ionpulse/errors.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quad.hpp"
#include "ionpulse/trig.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Per-mode frequency offsets (rad/s) applied to the chain.
struct DriftScenario {
    Eigen::VectorXd offsets;

    static DriftScenario none(int num_modes) {
        DriftScenario d;
        d.offsets = Eigen::VectorXd::Zero(num_modes);
        return d;
    }
    static DriftScenario uniform(int num_modes, double df_hz) {
        DriftScenario d;
        d.offsets = Eigen::VectorXd::Constant(num_modes, two_pi * df_hz);
        return d;
    }
    void validate(int num_modes) const {
        if (offsets.size() != num_modes) throw validation_error("drift offsets: wrong length");
        if (!offsets.allFinite()) throw validation_error("drift offsets: must be finite");
    }
};

/// Bare displacement integral alpha_p = int_0^tau g(t) e^{i omega t} dt,
/// closed form per basis tone. Ion scaling: alpha_ip = eta_p^i alpha_p.
inline std::complex<double> alpha(const FourierPulse& pulse, const IonChain& chain, int mode_index,
                                  const DriftScenario& drift) {
    drift.validate(chain.num_modes());
    if (mode_index < 1 || mode_index > chain.num_modes()) {
        throw validation_error("mode_index: out of range");
    }
    const double omega = chain.mode_freqs(mode_index - 1) + drift.offsets(mode_index - 1);
    const double tau = pulse.basis.tau;
    double re = 0.0, im = 0.0;
    for (int n = 1; n <= pulse.amplitudes.size(); ++n) {
        const double w = pulse.basis.tone_freq(n);
        re += pulse.amplitudes(n - 1) * trig::isc(w, omega, tau);
        im += pulse.amplitudes(n - 1) * trig::iss(w, omega, tau);
    }
    return {re, im};
}

namespace detail {

/// Degree-of-entanglement double integral by composite Gauss-Legendre
/// panels with spectral cumulative integration; independent of the
/// coupling-matrix route. `pieces` lists smooth intervals of g.
inline double chi_quadrature(const std::function<double(double)>& g, double tau,
                             const std::vector<double>& breakpoints, double w_fast,
                             const IonChain& chain, const Eigen::VectorXd& eta_products,
                             const DriftScenario& drift) {
    const auto& gl = quad::gauss16();
    const auto& pim = quad::partial_integral_map();

    // collect panels aligned to breakpoints
    std::vector<double> t_nodes, t_weights, panel_half;
    std::vector<int> panel_first;
    for (size_t b = 0; b + 1 < breakpoints.size(); ++b) {
        const double a = breakpoints[b], c = breakpoints[b + 1];
        const int panels = quad::panel_count(w_fast, c - a);
        const double h = (c - a) / panels;
        for (int p = 0; p < panels; ++p) {
            panel_first.push_back(static_cast<int>(t_nodes.size()));
            panel_half.push_back(0.5 * h);
            const double mid = a + (p + 0.5) * h;
            for (int k = 0; k < 16; ++k) {
                t_nodes.push_back(mid + 0.5 * h * gl.x(k));
                t_weights.push_back(0.5 * h * gl.w(k));
            }
        }
    }
    const int num_panels = static_cast<int>(panel_half.size());
    Eigen::VectorXd gv(t_nodes.size());
    for (size_t k = 0; k < t_nodes.size(); ++k) gv(k) = g(t_nodes[k]);

    double total = 0.0;
    Eigen::Matrix<std::complex<double>, 16, 1> f, zpart;
    for (int p = 0; p < chain.num_modes(); ++p) {
        if (eta_products(p) == 0.0) continue;
        const double omega = chain.mode_freqs(p) + drift.offsets(p);
        std::complex<double> z0 = 0.0;
        std::complex<double> acc = 0.0;
        for (int pa = 0; pa < num_panels; ++pa) {
            const int base = panel_first[pa];
            for (int k = 0; k < 16; ++k) {
                const double t = t_nodes[base + k];
                f(k) = gv(base + k) * std::exp(std::complex<double>(0.0, -omega * t));
            }
            zpart = pim.cast<std::complex<double>>() * f * panel_half[pa];
            std::complex<double> panel_total = 0.0;
            for (int k = 0; k < 16; ++k) panel_total += gl.w(k) * f(k);
            panel_total *= panel_half[pa];
            for (int k = 0; k < 16; ++k) {
                const double t = t_nodes[base + k];
                const std::complex<double> outer =
                    gv(base + k) * std::exp(std::complex<double>(0.0, omega * t));
                acc += t_weights[base + k] * outer * (z0 + zpart(k));
            }
            z0 += panel_total;
        }
        total += eta_products(p) * acc.imag();
    }
    return total;
}

}  // namespace detail

/// chi_ij by direct nested quadrature of the double integral with drifted
/// mode frequencies. This is the verification oracle; it does not touch
/// the coupling-matrix path.
inline double chi(const FourierPulse& pulse, const IonChain& chain, const GateSpec& gate,
                  const DriftScenario& drift) {
    gate.validate(chain);
    drift.validate(chain.num_modes());
    const double tau = pulse.basis.tau;
    const double w_fast = pulse.basis.tone_freq(static_cast<int>(pulse.amplitudes.size())) +
                          chain.mode_freqs(chain.num_modes() - 1) +
                          drift.offsets.cwiseAbs().maxCoeff();
    return detail::chi_quadrature([&](double t) { return pulse.eval(t); }, tau, {0.0, tau}, w_fast,
                                  chain, gate.eta_products(chain), drift);
}

inline double chi(const StepPulse& pulse, const IonChain& chain, const GateSpec& gate,
                  const DriftScenario& drift) {
    gate.validate(chain);
    drift.validate(chain.num_modes());
    std::vector<double> breaks;
    for (int j = 0; j <= pulse.num_segments; ++j) breaks.push_back(pulse.segment_start(j));
    const double w_fast = pulse.detuning + chain.mode_freqs(chain.num_modes() - 1) +
                          drift.offsets.cwiseAbs().maxCoeff();
    return detail::chi_quadrature([&](double t) { return pulse.eval(t); }, pulse.tau, breaks,
                                  w_fast, chain, gate.eta_products(chain), drift);
}

/// Zero-temperature infidelity estimate
/// F = (4/5) sum_p (|alpha_ip|^2 + |alpha_jp|^2) with alpha_ip = eta_p^i alpha_p.
inline double infidelity(const FourierPulse& pulse, const IonChain& chain, const GateSpec& gate,
                         const DriftScenario& drift) {
    gate.validate(chain);
    double total = 0.0;
    for (int p = 1; p <= chain.num_modes(); ++p) {
        const double ei = chain.lamb_dicke(p - 1, gate.ion_i - 1);
        const double ej = chain.lamb_dicke(p - 1, gate.ion_j - 1);
        total += (ei * ei + ej * ej) * std::norm(alpha(pulse, chain, p, drift));
    }
    return 0.8 * total;
}

/// Sampled phase-space paths alpha_ip(t) = eta_p^i int_0^t g e^{i omega s} ds.
struct PhaseTrajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXcd displacements;  // (sample, mode)
};

inline PhaseTrajectory phase_trajectory(const FourierPulse& pulse, const IonChain& chain, int ion,
                                        int samples) {
    if (samples < 2) throw validation_error("samples: need at least 2");
    if (ion < 1 || ion > chain.num_ions()) throw validation_error("ion: out of range");
    PhaseTrajectory tr;
    tr.times.resize(samples);
    tr.displacements.resize(samples, chain.num_modes());
    for (int s = 0; s < samples; ++s) {
        const double t = pulse.basis.tau * s / (samples - 1);
        tr.times(s) = t;
        for (int p = 0; p < chain.num_modes(); ++p) {
            const double omega = chain.mode_freqs(p);
            double re = 0.0, im = 0.0;
            for (int n = 1; n <= pulse.amplitudes.size(); ++n) {
                const double w = pulse.basis.tone_freq(n);
                re += pulse.amplitudes(n - 1) * trig::isc(w, omega, t);
                im += pulse.amplitudes(n - 1) * trig::iss(w, omega, t);
            }
            tr.displacements(s, p) =
                chain.lamb_dicke(p, ion - 1) * std::complex<double>(re, im);
        }
    }
    return tr;
}

struct ScanGrid {
    double max_hz = 20e3;
    double step_hz = 50.0;

    void validate() const {
        if (!(max_hz > 0.0) || !(step_hz > 0.0) || step_hz > max_hz) {
            throw validation_error("scan grid: require 0 < step <= max");
        }
    }
};

struct WidthEntry {
    int order = 0;       // K
    double epsilon = 0;  // infidelity tolerance
    double width_hz = 0; // full width of the contiguous window around 0
    bool spans_grid = false;
};

struct ScanResult {
    Eigen::VectorXd grid_hz;
    std::vector<int> orders;
    Eigen::MatrixXd infidelities;  // (order index, grid point)
    std::vector<WidthEntry> widths;
};

namespace detail {

inline double crossing_half_width(const std::function<double(double)>& infid, double eps,
                                  const ScanGrid& grid, int sign, bool& spans) {
    double prev = 0.0;
    for (double x = grid.step_hz; x <= grid.max_hz + 0.5 * grid.step_hz; x += grid.step_hz) {
        const double xx = std::min(x, grid.max_hz);
        if (infid(sign * xx) > eps) {
            double lo = prev, hi = xx;
            while (hi - lo > 1.0) {
                const double mid = 0.5 * (lo + hi);
                if (infid(sign * mid) > eps)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = xx;
        if (xx >= grid.max_hz) break;
    }
    spans = true;
    return grid.max_hz;
}

}  // namespace detail

/// Infidelity-vs-uniform-drift curves for a family of pulses (one per
/// stabilization order) and the widths of the contiguous sub-epsilon
/// windows around zero drift, located by bisection to 1 Hz.
inline ScanResult drift_scan(const std::vector<std::pair<int, FourierPulse>>& pulses,
                             const IonChain& chain, const GateSpec& gate, const ScanGrid& grid,
                             const std::vector<double>& epsilons) {
    grid.validate();
    gate.validate(chain);
    ScanResult res;
    const int points = 2 * static_cast<int>(std::round(grid.max_hz / grid.step_hz)) + 1;
    res.grid_hz.resize(points);
    for (int k = 0; k < points; ++k) {
        res.grid_hz(k) = -grid.max_hz + k * grid.step_hz;
    }
    res.infidelities.resize(pulses.size(), points);
    for (size_t i = 0; i < pulses.size(); ++i) {
        res.orders.push_back(pulses[i].first);
        const FourierPulse& pulse = pulses[i].second;
        const auto infid = [&](double df) {
            return infidelity(pulse, chain, gate, DriftScenario::uniform(chain.num_modes(), df));
        };
        for (int k = 0; k < points; ++k) res.infidelities(i, k) = infid(res.grid_hz(k));
        for (double eps : epsilons) {
            WidthEntry we;
            we.order = pulses[i].first;
            we.epsilon = eps;
            bool spans_r = false, spans_l = false;
            const double right = detail::crossing_half_width(infid, eps, grid, +1, spans_r);
            const double left = detail::crossing_half_width(infid, eps, grid, -1, spans_l);
            we.width_hz = right + left;
            we.spans_grid = spans_r || spans_l;
            res.widths.push_back(we);
        }
    }
    return res;
}

/// Exact analytic lower bound on the peak drive (lab frequency, Hz) for
/// an ij gate. With detuning bounds (rad/s) the sharpened form applies.
/// Returns +infinity when every Lamb-Dicke product vanishes.
inline double power_lower_bound(const IonChain& chain, const GateSpec& gate, double tau,
                                std::optional<std::pair<double, double>> mu_bounds = {}) {
    gate.validate(chain);
    if (!(tau > 0.0)) throw validation_error("tau: must be > 0");
    const Eigen::VectorXd q = gate.eta_products(chain);
    double first = 0.0, second = 0.0;
    for (int p = 0; p < q.size(); ++p) first += q(p) * q(p);
    for (int p = 0; p < q.size(); ++p) {
        for (int pp = 0; pp < q.size(); ++pp) {
            if (pp == p) continue;
            const double dw = (chain.mode_freqs(p) - chain.mode_freqs(pp)) * tau;
            second += 4.0 * std::abs(q(p) * q(pp)) / (dw * dw);
        }
    }
    if (first + second <= 0.0) return std::numeric_limits<double>::infinity();
    const double beta = std::pow(first + second, 0.25);
    if (!mu_bounds) {
        return 1.0 / (std::pow(2.0, 1.75) * std::sqrt(pi) * tau * beta);
    }
    const auto [mu_min, mu_max] = *mu_bounds;
    if (!(mu_min > 0.0) || mu_min > mu_max) {
        throw validation_error("mu_bounds: require 0 < mu_min <= mu_max");
    }
    return std::sqrt(mu_min / (mu_max + 1.0 / tau)) /
           (std::pow(2.0, 1.25) * std::sqrt(pi) * tau * beta);
}

}  // namespace ionpulse
