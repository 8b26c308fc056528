#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "ionpulse/errors.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Motional-mode data for an N-ion chain: P mode frequencies (rad/s,
/// strictly increasing) and the P x N Lamb-Dicke matrix eta_p^i.
struct IonChain {
    Eigen::VectorXd mode_freqs;   // omega_p, rad/s
    Eigen::MatrixXd lamb_dicke;   // (p, i), dimensionless
    std::string label;

    int num_modes() const { return static_cast<int>(mode_freqs.size()); }
    int num_ions() const { return static_cast<int>(lamb_dicke.cols()); }

    void validate() const {
        const int p = num_modes();
        if (p < 1) throw validation_error("mode_freqs: chain must have at least one mode");
        if (lamb_dicke.rows() != p) {
            throw validation_error("lamb_dicke: expected " + std::to_string(p) + " rows, got " +
                                   std::to_string(lamb_dicke.rows()));
        }
        const int n = num_ions();
        if (n < 1) throw validation_error("lamb_dicke: chain must have at least one ion");
        if (p > n) {
            throw validation_error("mode_freqs: more modes (" + std::to_string(p) +
                                   ") than ions (" + std::to_string(n) + ")");
        }
        for (int k = 0; k < p; ++k) {
            if (!std::isfinite(mode_freqs(k)) || mode_freqs(k) <= 0.0) {
                throw validation_error("mode_freqs[" + std::to_string(k) + "]: must be finite and > 0");
            }
            if (k > 0 && mode_freqs(k) <= mode_freqs(k - 1)) {
                throw validation_error("mode_freqs[" + std::to_string(k) +
                                       "]: must be strictly increasing");
            }
        }
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < n; ++c) {
                const double e = lamb_dicke(r, c);
                if (!std::isfinite(e) || std::abs(e) >= 1.0) {
                    throw validation_error("lamb_dicke[" + std::to_string(r) + "][" +
                                           std::to_string(c) + "]: must be finite with |eta| < 1");
                }
            }
        }
    }
};

/// Target gate: 1-based ion pair and the entangling angle chi.
struct GateSpec {
    int ion_i = 1;
    int ion_j = 2;
    double chi_target = pi / 8.0;

    void validate(const IonChain& chain) const {
        const int n = chain.num_ions();
        if (ion_i < 1 || ion_i > n) throw validation_error("ion_i: out of range 1.." + std::to_string(n));
        if (ion_j < 1 || ion_j > n) throw validation_error("ion_j: out of range 1.." + std::to_string(n));
        if (ion_i == ion_j) throw validation_error("ion_i, ion_j: must be distinct");
        if (!(std::abs(chi_target) > 0.0) || std::abs(chi_target) > pi / 4.0 ||
            !std::isfinite(chi_target)) {
            throw validation_error("chi_target: require 0 < |chi| <= pi/4");
        }
    }

    /// Per-mode Lamb-Dicke products eta_p^i * eta_p^j.
    Eigen::VectorXd eta_products(const IonChain& chain) const {
        return (chain.lamb_dicke.col(ion_i - 1).array() * chain.lamb_dicke.col(ion_j - 1).array())
            .matrix();
    }
};

struct ChainGenOptions {
    double spacing_um = 5.0;          // uniform inter-ion spacing
    double lamb_dicke_prefactor = 0;  // 0 = normalize so max|eta| = 0.1
    std::string label;
};

/// Synthesizes a transverse-mode chain for test data: N ions on a uniform
/// lattice (the regime used for the power-scaling studies), transverse
/// normal modes from the standard Hessian with Coulomb coupling, and
/// eta_p^i proportional to the orthonormal mode vectors.
///
/// radial_freq is the transverse (COM) frequency in rad/s; axial_ratio is
/// omega_x / omega_r and sets the Coulomb length scale.
inline IonChain generate_chain(int num_ions, double radial_freq, double axial_ratio,
                               const ChainGenOptions& opts = {}) {
    if (num_ions < 2) throw validation_error("num_ions: need at least 2 ions");
    if (!(radial_freq > 0.0)) throw validation_error("radial_freq: must be > 0");
    if (!(axial_ratio > 0.0) || axial_ratio >= 1.0) {
        throw validation_error("axial_ratio: require 0 < omega_x/omega_r < 1");
    }
    if (!(opts.spacing_um > 0.0)) throw validation_error("spacing_um: must be > 0");

    const int n = num_ions;
    const double w_x = radial_freq * axial_ratio;
    // Coulomb length l^3 = (e^2 / 4 pi eps0 m) / w_x^2 for 171Yb+.
    constexpr double coulomb_per_mass = 8.1268e-4;  // m^3 / s^2
    const double ell = std::cbrt(coulomb_per_mass / (w_x * w_x));
    const double sigma = opts.spacing_um * 1e-6 / ell;

    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i) u(i) = (i - 0.5 * (n - 1)) * sigma;

    // Transverse Hessian in units of w_x^2.
    Eigen::MatrixXd t_mat = Eigen::MatrixXd::Zero(n, n);
    const double inv_r2 = 1.0 / (axial_ratio * axial_ratio);
    for (int i = 0; i < n; ++i) {
        double diag = inv_r2;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = std::abs(u(i) - u(j));
            const double c = 1.0 / (d * d * d);
            t_mat(i, j) = c;
            diag -= c;
        }
        t_mat(i, i) = diag;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t_mat);
    if (es.info() != Eigen::Success) throw numerical_error("transverse mode eigensolve failed");
    const Eigen::VectorXd ev = es.eigenvalues();
    if (ev(0) <= 0.0) {
        throw numerical_error("chain is transversely unstable (zigzag) at this spacing/ratio");
    }

    IonChain chain;
    chain.label = opts.label;
    chain.mode_freqs = (w_x * ev.array().sqrt()).matrix();
    chain.lamb_dicke.resize(n, n);
    for (int p = 0; p < n; ++p) {
        Eigen::VectorXd v = es.eigenvectors().col(p);
        // deterministic sign: largest-magnitude entry positive
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        chain.lamb_dicke.row(p) = v.transpose();
    }
    const double pref = opts.lamb_dicke_prefactor > 0.0
                            ? opts.lamb_dicke_prefactor
                            : 0.1 / chain.lamb_dicke.cwiseAbs().maxCoeff();
    chain.lamb_dicke *= pref;
    chain.validate();
    return chain;
}

}  // namespace ionpulse
