#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ionpulse/analysis.hpp"
#include "ionpulse/chain.hpp"
#include "ionpulse/errors.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/trig.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Which detuning value feeds the envelope sample Omega(zeta_j).
enum class DetuningConvention { left, right, average };

/// Demodulated form of g(t): zeros zeta_j, piecewise detunings
/// mu_j = pi / (zeta_j - zeta_{j-1}), envelope samples Omega(zeta_j)
/// (right-side up), accumulated phases psi_j = j pi, and the
/// orientation sign.
struct DemodulatedPulse {
    Eigen::VectorXd zeros;        // N_z values, zeta_0 = 0 .. zeta_{Nz-1} = tau
    Eigen::VectorXd detunings;    // N_z - 1 values, rad/s
    Eigen::VectorXd amplitudes;   // N_z - 1 envelope samples at zeta_1..zeta_{Nz-1}
    Eigen::VectorXd zero_derivs;  // g'(zeta_j), j = 1..N_z-1
    Eigen::VectorXd phases;       // psi_j, j = 0..N_z-1
    double sign = 1.0;

    int num_zeros() const { return static_cast<int>(zeros.size()); }
    double tau() const { return zeros(zeros.size() - 1); }

    /// Segment amplitude used for reconstruction: always the left-segment
    /// detuning, independent of the envelope-sample convention.
    double reconstruction_amplitude(int seg) const {
        const double parity_sign = ((seg + 1) % 2 == 0) ? 1.0 : -1.0;
        return parity_sign * zero_derivs(seg) / detunings(seg);
    }

    /// Piecewise reconstruction g~(t) = Omega_j sin[psi_{j-1} + mu_j (t - zeta_{j-1})].
    double reconstruct(double t) const {
        const int nseg = static_cast<int>(detunings.size());
        int j = static_cast<int>(std::upper_bound(zeros.data(), zeros.data() + zeros.size(), t) -
                                 zeros.data()) - 1;
        j = std::clamp(j, 0, nseg - 1);
        return reconstruction_amplitude(j) *
               std::sin(phases(j) + detunings(j) * (t - zeros(j)));
    }
};

/// All zeros of g on [0, tau]: dense sampling (32 per fastest basis
/// period) with sign-change bisection to 1e-13 tau; endpoints included.
/// A sign pattern that dips to zero without crossing is reported as a
/// suspected degenerate zero.
inline Eigen::VectorXd find_zeros(const FourierPulse& pulse) {
    const double tau = pulse.basis.tau;
    const int na = static_cast<int>(pulse.amplitudes.size());
    if (na < 1 || pulse.amplitudes.cwiseAbs().maxCoeff() == 0.0) {
        throw validation_error("pulse: identically zero");
    }
    const double w_max = pulse.basis.tone_freq(na);
    const int m = std::max(64, static_cast<int>(std::ceil(32.0 * w_max * tau / two_pi)));

    Eigen::VectorXd gs(m + 1);
    for (int k = 0; k <= m; ++k) gs(k) = pulse.eval(tau * k / m);
    const double peak = gs.cwiseAbs().maxCoeff();
    const double touch_tol = 1e-7 * peak;

    std::vector<double> zeros;
    zeros.push_back(0.0);
    for (int k = 1; k < m; ++k) {
        const double a = tau * k / m, b = tau * (k + 1) / m;
        double ga = gs(k), gb = gs(k + 1);
        if (k + 1 == m) gb = gs(m);  // endpoint handled separately
        if (ga == 0.0) {
            zeros.push_back(a);
            continue;
        }
        if (k + 1 < m && ga * gb < 0.0) {
            double lo = a, hi = b, glo = ga;
            while (hi - lo > 1e-13 * tau) {
                const double mid = 0.5 * (lo + hi);
                const double gm = pulse.eval(mid);
                if (glo * gm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            zeros.push_back(0.5 * (lo + hi));
        }
        // tangential touch: a local |g| minimum without a sign change whose
        // parabolic refinement reaches (numerically) zero
        if (k >= 2 && k + 1 < m && gs(k - 1) * gs(k + 1) > 0.0 && gs(k) * gs(k + 1) > 0.0) {
            const double q0 = gs(k - 1) * gs(k - 1), q1 = gs(k) * gs(k), q2 = gs(k + 1) * gs(k + 1);
            if (q1 <= q0 && q1 <= q2) {
                const double curv = q0 - 2.0 * q1 + q2;
                const double qmin = curv > 0.0 ? q1 - (q2 - q0) * (q2 - q0) / (8.0 * curv) : q1;
                if (qmin < touch_tol * touch_tol) {
                    throw numerical_error("suspected degenerate (tangential) zero near t = " +
                                          std::to_string(a) + " s");
                }
            }
        }
    }
    zeros.push_back(tau);
    return Eigen::Map<Eigen::VectorXd>(zeros.data(), static_cast<long>(zeros.size()));
}

/// Splits g into detunings and envelope samples via the analytic Fourier
/// derivative at the zeros.
inline DemodulatedPulse demodulate(const FourierPulse& pulse,
                                   DetuningConvention conv = DetuningConvention::left) {
    DemodulatedPulse dm;
    dm.zeros = find_zeros(pulse);
    const int nz = dm.num_zeros();
    if (nz < 2) throw numerical_error("demodulation needs at least two zeros");
    dm.detunings.resize(nz - 1);
    for (int j = 1; j < nz; ++j) {
        const double dt = dm.zeros(j) - dm.zeros(j - 1);
        if (!(dt > 0.0)) throw numerical_error("zeros not strictly increasing");
        dm.detunings(j - 1) = pi / dt;
    }
    dm.phases.resize(nz);
    for (int j = 0; j < nz; ++j) dm.phases(j) = j * pi;

    Eigen::VectorXd gp(nz);
    for (int j = 0; j < nz; ++j) gp(j) = pulse.eval_derivative(dm.zeros(j));
    const double deriv_scale =
        pulse.amplitudes.cwiseAbs().maxCoeff() *
        pulse.basis.tone_freq(static_cast<int>(pulse.amplitudes.size()));
    if (std::abs(gp(1)) < 1e-12 * deriv_scale) {
        throw numerical_error("degenerate zero: vanishing derivative at the first interior zero");
    }
    dm.sign = gp(1) > 0.0 ? -1.0 : 1.0;

    dm.amplitudes.resize(nz - 1);
    dm.zero_derivs.resize(nz - 1);
    for (int j = 1; j < nz; ++j) {
        if (std::abs(gp(j)) < 1e-12 * deriv_scale) {
            throw numerical_error("degenerate zero: vanishing derivative at zero " +
                                  std::to_string(j));
        }
        dm.zero_derivs(j - 1) = gp(j);
        double mu_at = dm.detunings(j - 1);
        if (conv == DetuningConvention::right && j < nz - 1) mu_at = dm.detunings(j);
        if (conv == DetuningConvention::average && j < nz - 1) {
            mu_at = 0.5 * (dm.detunings(j - 1) + dm.detunings(j));
        }
        const double parity_sign = (j % 2 == 0) ? 1.0 : -1.0;
        dm.amplitudes(j - 1) = parity_sign * dm.sign * gp(j) / mu_at;
    }
    return dm;
}

/// Mean-square reconstruction mismatch (1/tau) int (g - g~)^2 dt and the
/// same normalized by the pulse's mean square.
struct ReconstructionError {
    double absolute = 0.0;  // (rad/s)^2
    double relative = 0.0;
};

inline ReconstructionError reconstruction_error(const FourierPulse& pulse,
                                                const DemodulatedPulse& dm) {
    const double tau = pulse.basis.tau;
    const double w_max = pulse.basis.tone_freq(static_cast<int>(pulse.amplitudes.size()));
    const int m = std::max(1 << 12, static_cast<int>(std::ceil(64.0 * w_max * tau / two_pi)));
    double acc = 0.0, ref = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double t = tau * k / m;
        const double wgt = (k == 0 || k == m) ? 0.5 : 1.0;
        const double g = pulse.eval(t);
        const double diff = g - dm.reconstruct(t);
        acc += wgt * diff * diff;
        ref += wgt * g * g;
    }
    ReconstructionError err;
    err.absolute = acc / m;
    err.relative = ref > 0.0 ? acc / ref : 0.0;
    return err;
}

/// alpha of the reconstructed piecewise pulse, closed form per segment.
inline std::complex<double> alpha_reconstructed(const DemodulatedPulse& dm, const IonChain& chain,
                                                int mode_index, const DriftScenario& drift) {
    drift.validate(chain.num_modes());
    const double omega = chain.mode_freqs(mode_index - 1) + drift.offsets(mode_index - 1);
    std::complex<double> acc = 0.0;
    for (int j = 0; j + 1 < dm.num_zeros(); ++j) {
        const double a = dm.zeros(j), b = dm.zeros(j + 1);
        const double mu = dm.detunings(j);
        const double phi = dm.phases(j) - mu * a;
        const double c = std::cos(phi), s = std::sin(phi);
        const double re = c * trig::seg_sc(mu, omega, a, b) + s * trig::seg_cc(mu, omega, a, b);
        const double im = c * trig::seg_ss(mu, omega, a, b) + s * trig::seg_sc(omega, mu, a, b);
        acc += dm.reconstruction_amplitude(j) * std::complex<double>(re, im);
    }
    return acc;
}

}  // namespace ionpulse
