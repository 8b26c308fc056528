#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "ionpulse/chain.hpp"
#include "ionpulse/errors.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/quad.hpp"
#include "ionpulse/trig.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Below this distance from a basis-tone frequency, closed forms with
/// (w - omega) denominators switch to quadrature.
inline constexpr double resonance_eps = two_pi * 1.0;  // rad/s

struct RowLabel {
    int mode = 0;    // p, 1-based
    int moment = 0;  // k, 0 for the plain decoupling rows
    char trig = '-'; // 'c' / 's' for mixed or moment rows, '-' for h rows
};

/// Stacked decoupling constraints M (rows normalized to unit Euclidean
/// norm, zero rows dropped).
struct ConstraintMatrix {
    Eigen::MatrixXd rows;          // R x N_A
    std::vector<RowLabel> labels;  // one per surviving row
    PulseBasis basis;
    int order = 0;
};

/// Plain overlap rows of the basis with cos(omega t) and sin(omega t).
inline void mode_trig_rows(const PulseBasis& basis, double omega, Eigen::VectorXd& cos_row,
                           Eigen::VectorXd& sin_row) {
    cos_row.resize(basis.size);
    sin_row.resize(basis.size);
    for (int n = 1; n <= basis.size; ++n) {
        const double w = basis.tone_freq(n);
        cos_row(n - 1) = trig::isc(w, omega, basis.tau);
        sin_row(n - 1) = trig::iss(w, omega, basis.tau);
    }
}

/// k = 0 constraint row for a parity-pure basis: M_pn = int phi_n h_p dt
/// with h_p^(-) = sin[omega (tau/2 - t)] for negative parity and
/// h_p^(+) = cos[omega (tau/2 - t)] for positive parity. The opposite
/// component vanishes identically for the matching pulse parity.
inline Eigen::VectorXd basis_mode_overlap(const PulseBasis& basis, const IonChain& chain,
                                          int mode_index) {
    if (mode_index < 1 || mode_index > chain.num_modes()) {
        throw validation_error("mode_index: out of range");
    }
    if (basis.parity == Parity::mixed) {
        throw validation_error("basis_mode_overlap: mixed basis uses cos/sin rows");
    }
    const double omega = chain.mode_freqs(mode_index - 1);
    const double half = omega * basis.tau * 0.5;
    Eigen::VectorXd c, s;
    mode_trig_rows(basis, omega, c, s);
    if (basis.parity == Parity::negative) {
        return std::sin(half) * c - std::cos(half) * s;
    }
    return std::cos(half) * c + std::sin(half) * s;
}

/// Moment rows int t^k phi_n(t) {cos, sin}(omega_p t) dt for k >= 1,
/// scaled by (2/tau)^k, via composite Gauss-Legendre quadrature (panel
/// width at most a quarter period of the fastest oscillation).
inline void moment_overlap(const PulseBasis& basis, const IonChain& chain, int mode_index,
                           int moment, Eigen::VectorXd& cos_row, Eigen::VectorXd& sin_row) {
    if (moment < 1) {
        throw validation_error("moment: k >= 1 required; use basis_mode_overlap for k = 0");
    }
    if (mode_index < 1 || mode_index > chain.num_modes()) {
        throw validation_error("mode_index: out of range");
    }
    const double tau = basis.tau;
    const double omega = chain.mode_freqs(mode_index - 1);
    const double w_fast = std::max(basis.tone_freq(basis.size), omega);
    const int panels = quad::panel_count(w_fast, tau);
    const auto& g = quad::gauss16();
    const double h = tau / panels;

    cos_row = Eigen::VectorXd::Zero(basis.size);
    sin_row = Eigen::VectorXd::Zero(basis.size);
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int k = 0; k < 16; ++k) {
            const double t = mid + 0.5 * h * g.x(k);
            const double tk = std::pow(2.0 * t / tau, moment);
            const double wc = 0.5 * h * g.w(k) * tk * std::cos(omega * t);
            const double ws = 0.5 * h * g.w(k) * tk * std::sin(omega * t);
            ToneTable tones(basis, t);
            for (int n = 0; n < basis.size; ++n) {
                const double phi = tones.next();
                cos_row(n) += wc * phi;
                sin_row(n) += ws * phi;
            }
        }
    }
}

namespace detail {

/// Moment block for the constraint matrix. Equivalent by a triangular
/// recombination to stacking the raw t^k rows of moment_overlap for
/// k = 1..K together with the plain rows, but evaluated with shifted
/// Legendre weights P_k(2t/tau - 1) so the moment directions stay
/// resolvable at high K.
inline Eigen::MatrixXd legendre_moment_rows(const PulseBasis& basis, const IonChain& chain,
                                            int order, std::vector<RowLabel>& labels) {
    const int num_p = chain.num_modes();
    const int rows_per_p = 2 * order;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(num_p * rows_per_p, basis.size);
    if (order == 0) return out;

    const double tau = basis.tau;
    const double w_fast = std::max(basis.tone_freq(basis.size), chain.mode_freqs(num_p - 1));
    const int panels = quad::panel_count(w_fast, tau);
    const auto& g = quad::gauss16();
    const double h = tau / panels;
    const int total_nodes = panels * 16;
    const int block = 4096;

    Eigen::MatrixXd basis_vals(block, basis.size);
    Eigen::MatrixXd factors(block, num_p * rows_per_p);
    std::vector<double> leg(order + 1);

    for (int start = 0; start < total_nodes; start += block) {
        const int m = std::min(block, total_nodes - start);
        for (int r = 0; r < m; ++r) {
            const int node = start + r;
            const double t = (node / 16 + 0.5) * h + 0.5 * h * g.x(node % 16);
            const double wt = 0.5 * h * g.w(node % 16);
            ToneTable tones(basis, t);
            for (int n = 0; n < basis.size; ++n) basis_vals(r, n) = tones.next();
            const double x = 2.0 * t / tau - 1.0;
            leg[0] = 1.0;
            if (order >= 1) leg[1] = x;
            for (int k = 1; k < order; ++k) {
                leg[k + 1] = ((2.0 * k + 1.0) * x * leg[k] - k * leg[k - 1]) / (k + 1.0);
            }
            for (int p = 0; p < num_p; ++p) {
                const double c = std::cos(chain.mode_freqs(p) * t);
                const double s = std::sin(chain.mode_freqs(p) * t);
                for (int k = 1; k <= order; ++k) {
                    factors(r, p * rows_per_p + 2 * (k - 1)) = wt * leg[k] * c;
                    factors(r, p * rows_per_p + 2 * (k - 1) + 1) = wt * leg[k] * s;
                }
            }
        }
        out.noalias() += factors.topRows(m).transpose() * basis_vals.topRows(m);
    }

    for (int p = 1; p <= num_p; ++p) {
        for (int k = 1; k <= order; ++k) {
            labels.push_back({p, k, 'c'});
            labels.push_back({p, k, 's'});
        }
    }
    return out;
}

}  // namespace detail

/// Stacks the k = 0 decoupling rows and the k = 1..K moment rows, then
/// normalizes every row to unit norm (zero rows dropped).
inline ConstraintMatrix build_constraint_matrix(const PulseBasis& basis, const IonChain& chain,
                                                const StabilizationSpec& stab) {
    basis.validate();
    stab.validate();
    const int num_p = chain.num_modes();
    const int k0_rows = (basis.parity == Parity::mixed ? 2 : 1) * num_p;

    std::vector<RowLabel> labels;
    Eigen::MatrixXd raw(k0_rows + 2 * num_p * stab.order, basis.size);
    int r = 0;
    for (int p = 1; p <= num_p; ++p) {
        if (basis.parity == Parity::mixed) {
            Eigen::VectorXd c, s;
            mode_trig_rows(basis, chain.mode_freqs(p - 1), c, s);
            raw.row(r++) = c.transpose();
            labels.push_back({p, 0, 'c'});
            raw.row(r++) = s.transpose();
            labels.push_back({p, 0, 's'});
        } else {
            raw.row(r++) = basis_mode_overlap(basis, chain, p).transpose();
            labels.push_back({p, 0, '-'});
        }
    }
    std::vector<RowLabel> mom_labels;
    raw.bottomRows(2 * num_p * stab.order) =
        detail::legendre_moment_rows(basis, chain, stab.order, mom_labels);
    labels.insert(labels.end(), mom_labels.begin(), mom_labels.end());

    if (basis.size <= raw.rows()) {
        throw validation_error("basis_size: " + std::to_string(basis.size) +
                               " too small for " + std::to_string(raw.rows()) +
                               " constraint rows");
    }

    ConstraintMatrix cm;
    cm.basis = basis;
    cm.order = stab.order;
    cm.rows.resize(raw.rows(), basis.size);
    int kept = 0;
    for (int i = 0; i < raw.rows(); ++i) {
        const double nrm = raw.row(i).norm();
        if (nrm > 0.0) {
            cm.rows.row(kept) = raw.row(i) / nrm;
            cm.labels.push_back(labels[i]);
            ++kept;
        }
    }
    cm.rows.conservativeResize(kept, basis.size);
    return cm;
}

/// chi coupling D and its symmetrization S for one ion pair.
struct CouplingMatrix {
    Eigen::MatrixXd d;
    Eigen::MatrixXd s;
    int ion_i = 0;
    int ion_j = 0;
};

namespace detail {

/// Column m of the single-mode coupling by quadrature on the outer
/// integral (inner integral in stable closed form); used near resonance.
inline void coupling_column_quadrature(const PulseBasis& basis, double omega, int m,
                                       Eigen::VectorXd& col) {
    const double tau = basis.tau;
    const double v = basis.tone_freq(m);
    const double bp = v + omega, bm = v - omega;
    const double w_fast = basis.tone_freq(basis.size) + omega + v;
    const int panels = quad::panel_count(w_fast, tau);
    const auto& g = quad::gauss16();
    const double h = tau / panels;
    col = Eigen::VectorXd::Zero(basis.size);
    for (int p = 0; p < panels; ++p) {
        for (int k = 0; k < 16; ++k) {
            const double t = (p + 0.5) * h + 0.5 * h * g.x(k);
            const double ic = 0.5 * (trig::vers_int(bp, t) + trig::vers_int(bm, t));
            const double is = 0.5 * (trig::sinc_int(bm, t) - trig::sinc_int(bp, t));
            const double inner = std::sin(omega * t) * ic - std::cos(omega * t) * is;
            const double wt = 0.5 * h * g.w(k) * inner;
            ToneTable tones(basis, t);
            for (int n = 0; n < basis.size; ++n) col(n) += wt * tones.next();
        }
    }
}

/// D_nm for a single mode omega:
///   int_0^tau dt2 int_0^t2 dt1 phi_n(t2) sin[omega (t2 - t1)] phi_m(t1)
/// which collapses to [v ISS(u, omega) - omega ISS(u, v)] / (v^2 - omega^2)
/// with u = w_n, v = w_m.
inline Eigen::MatrixXd single_mode_coupling(const PulseBasis& basis, double omega) {
    const int na = basis.size;
    const double tau = basis.tau;
    Eigen::MatrixXd d(na, na);

    // ISS(u, v) depends only on the index sum and difference.
    const double step = basis.tone_freq(2) - basis.tone_freq(1);
    const double w1 = basis.tone_freq(1);
    Eigen::VectorXd sinc_diff(na), sinc_sum(2 * na + 1);
    for (int k = 0; k < na; ++k) sinc_diff(k) = trig::sinc_int(k * step, tau);
    for (int k = 0; k <= 2 * na; ++k) sinc_sum(k) = trig::sinc_int(2.0 * w1 + k * step, tau);

    Eigen::VectorXd iss_uo(na);
    for (int n = 1; n <= na; ++n) iss_uo(n - 1) = trig::iss(basis.tone_freq(n), omega, tau);

    for (int m = 1; m <= na; ++m) {
        const double v = basis.tone_freq(m);
        if (std::abs(v - omega) < resonance_eps) {
            Eigen::VectorXd col;
            coupling_column_quadrature(basis, omega, m, col);
            d.col(m - 1) = col;
            continue;
        }
        const double denom = (v - omega) * (v + omega);
        for (int n = 1; n <= na; ++n) {
            const double iss_uv = 0.5 * (sinc_diff(std::abs(n - m)) - sinc_sum(n + m - 2));
            d(n - 1, m - 1) = (v * iss_uo(n - 1) - omega * iss_uv) / denom;
        }
    }
    return d;
}

}  // namespace detail

/// Sum over modes of the double-integral coupling, weighted by the
/// Lamb-Dicke products of the gate pair.
inline CouplingMatrix coupling_double_integral(const PulseBasis& basis, const IonChain& chain,
                                               const GateSpec& gate) {
    basis.validate();
    gate.validate(chain);
    const Eigen::VectorXd q = gate.eta_products(chain);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(basis.size, basis.size);
    for (int p = 0; p < chain.num_modes(); ++p) {
        if (q(p) == 0.0) continue;
        d.noalias() += q(p) * detail::single_mode_coupling(basis, chain.mode_freqs(p));
    }
    CouplingMatrix cm;
    cm.d = std::move(d);
    cm.s = 0.5 * (cm.d + cm.d.transpose());
    cm.ion_i = gate.ion_i;
    cm.ion_j = gate.ion_j;
    return cm;
}

/// S_p^(k) = d^k S / d omega_p^k for k in {1, 2}, by Richardson-extrapolated
/// central differences on the single-mode term.
inline Eigen::MatrixXd coupling_derivative(const PulseBasis& basis, const IonChain& chain,
                                           const GateSpec& gate, int mode_index, int order) {
    if (order != 1 && order != 2) throw validation_error("order: must be 1 or 2");
    if (mode_index < 1 || mode_index > chain.num_modes()) {
        throw validation_error("mode_index: out of range");
    }
    gate.validate(chain);
    const double q = gate.eta_products(chain)(mode_index - 1);
    const double omega = chain.mode_freqs(mode_index - 1);
    const double h = two_pi * 0.5;
    const auto sym = [&](double om) {
        Eigen::MatrixXd m = detail::single_mode_coupling(basis, om);
        return (0.5 * q * (m + m.transpose())).eval();
    };
    if (q == 0.0) return Eigen::MatrixXd::Zero(basis.size, basis.size);
    if (order == 1) {
        return (8.0 * (sym(omega + h) - sym(omega - h)) - (sym(omega + 2 * h) - sym(omega - 2 * h))) /
               (12.0 * h);
    }
    const Eigen::MatrixXd s0 = sym(omega);
    return (16.0 * (sym(omega + h) + sym(omega - h) - 2.0 * s0) -
            (sym(omega + 2 * h) + sym(omega - 2 * h) - 2.0 * s0)) /
           (12.0 * h * h);
}

}  // namespace ionpulse
