#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ionpulse/chain.hpp"
#include "ionpulse/errors.hpp"
#include "ionpulse/integrals.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse {

/// Orthonormal basis of the decoupling null space, from the spectrum of
/// Gamma = M^T M.
struct NullSpaceBasis {
    Eigen::MatrixXd vectors;  // N_A x N_0, column-orthonormal
    double eigen_gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd gamma_spectrum;  // ascending

    int dim() const { return static_cast<int>(vectors.cols()); }
};

/// Result of the norm-minimal entanglement optimization.
struct OptimizationResult {
    FourierPulse pulse;
    double lambda_max = 0.0;           // selected eigenvalue of R
    double v_scale = 0.0;              // sqrt(|chi| / |lambda_max|)
    Eigen::VectorXd reduced_spectrum;  // all eigenvalues of R, ascending
    double norm_gamma = 0.0;           // ||A||
    int chi_sign = 0;                  // sign of the realized chi
    int null_dim = 0;
    double constraint_residual = 0.0;  // ||M A||_inf / ||A||
};

/// Eigenvectors of Gamma = M^T M with eigenvalue below rel_threshold times
/// the largest eigenvalue. Requires a sharp spectral transition
/// (eigen_gap >= 100) between the null cluster and the rest.
inline NullSpaceBasis null_space(const ConstraintMatrix& cm, double rel_threshold = 1e-10) {
    const int na = static_cast<int>(cm.rows.cols());
    NullSpaceBasis ns;
    if (cm.rows.rows() == 0) {
        ns.vectors = Eigen::MatrixXd::Identity(na, na);
        ns.gamma_spectrum = Eigen::VectorXd::Zero(na);
        return ns;
    }
    Eigen::MatrixXd gamma = cm.rows.transpose() * cm.rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gamma);
    if (es.info() != Eigen::Success) throw numerical_error("Gamma eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lam_max = ev(na - 1);
    if (!(lam_max > 0.0)) {
        ns.vectors = Eigen::MatrixXd::Identity(na, na);
        ns.gamma_spectrum = ev;
        return ns;
    }
    int n0 = 0;
    while (n0 < na && ev(n0) < rel_threshold * lam_max) ++n0;
    if (n0 == 0) throw numerical_error("null space is empty");
    if (n0 < na) {
        const double largest_null = std::max(ev(n0 - 1), 0.0);
        ns.eigen_gap = largest_null > 0.0 ? ev(n0) / largest_null
                                          : std::numeric_limits<double>::infinity();
        if (ns.eigen_gap < 100.0) {
            throw numerical_error("ambiguous null space: spectral gap " +
                                  std::to_string(ns.eigen_gap) + " < 100");
        }
    }
    ns.vectors = es.eigenvectors().leftCols(n0);
    ns.gamma_spectrum = ev;
    return ns;
}

/// Minimal-norm amplitudes meeting |A^T S A| = |chi_target| inside the
/// null space: the largest-|eigenvalue| eigenvector of the reduced matrix
/// R = N^T S N.
inline OptimizationResult optimize_pulse(const NullSpaceBasis& ns, const CouplingMatrix& coupling,
                                         const GateSpec& gate, const PulseBasis& basis) {
    const int n0 = ns.dim();
    if (n0 < 1) throw numerical_error("empty null space");

    Eigen::MatrixXd r(n0, n0);
    {
        Eigen::MatrixXd sn = coupling.s * ns.vectors;
        r.noalias() = ns.vectors.transpose() * sn;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
    if (es.info() != Eigen::Success) throw numerical_error("reduced matrix eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();

    // Sort by |lambda| descending; on ties (1e-12 relative) keep the
    // smaller sorted index for determinism.
    std::vector<int> idx(n0);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(lam(a)) > std::abs(lam(b)); });
    const int k_max = idx[0];
    const double lam_sel = lam(k_max);
    if (std::abs(lam_sel) < 1e-30) {
        throw numerical_error("pair cannot be entangled in this basis: all eigenvalues vanish");
    }

    OptimizationResult res;
    res.v_scale = std::sqrt(std::abs(gate.chi_target) / std::abs(lam_sel));
    res.lambda_max = lam_sel;
    res.reduced_spectrum = lam;
    res.chi_sign = lam_sel > 0.0 ? 1 : -1;
    res.null_dim = n0;

    Eigen::VectorXd amps = res.v_scale * (ns.vectors * es.eigenvectors().col(k_max));
    const double big = amps.cwiseAbs().maxCoeff();
    for (int n = 0; n < amps.size(); ++n) {
        if (std::abs(amps(n)) > 1e-12 * big) {
            if (amps(n) < 0.0) amps = -amps;
            break;
        }
    }
    res.pulse.basis = basis;
    res.pulse.amplitudes = std::move(amps);
    res.norm_gamma = res.pulse.amplitudes.norm();
    return res;
}

/// Removes from the null space the span of the L eigenvectors of the
/// reduced sensitivity matrices R_p^(1) = N^T S_p^(1) N with the largest
/// |eigenvalue|, ranked globally across modes, then re-orthonormalizes.
inline NullSpaceBasis project_chi_stabilized(const NullSpaceBasis& ns,
                                             const std::vector<Eigen::MatrixXd>& derivatives,
                                             int count) {
    const int n0 = ns.dim();
    if (count < 0) throw validation_error("chi_projection_count: must be >= 0");
    if (count >= n0) {
        throw validation_error("chi_projection_count: " + std::to_string(count) +
                               " >= null-space dimension " + std::to_string(n0));
    }
    if (count == 0) return ns;

    struct Cand {
        double mag;
        int order;
        Eigen::VectorXd vec;
    };
    std::vector<Cand> cands;
    cands.reserve(derivatives.size() * n0);
    int order = 0;
    for (const Eigen::MatrixXd& sp : derivatives) {
        Eigen::MatrixXd rp(n0, n0);
        {
            Eigen::MatrixXd spn = sp * ns.vectors;
            rp.noalias() = ns.vectors.transpose() * spn;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rp);
        if (es.info() != Eigen::Success) throw numerical_error("sensitivity eigendecomposition failed");
        for (int k = 0; k < n0; ++k) {
            cands.push_back({std::abs(es.eigenvalues()(k)), order++, es.eigenvectors().col(k)});
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.mag != b.mag) return a.mag > b.mag;
        return a.order < b.order;
    });

    Eigen::MatrixXd w(n0, count);
    for (int k = 0; k < count; ++k) w.col(k) = cands[k].vec;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n0, n0);

    NullSpaceBasis out;
    out.vectors = ns.vectors * q.rightCols(n0 - count);
    out.eigen_gap = ns.eigen_gap;
    out.gamma_spectrum = ns.gamma_spectrum;
    return out;
}

/// End-to-end synthesis: constraints -> null space -> coupling ->
/// optional chi projection -> optimization. Deterministic for identical
/// inputs.
inline OptimizationResult synthesize(const IonChain& chain, const GateSpec& gate,
                                     const PulseBasis& basis, const StabilizationSpec& stab) {
    chain.validate();
    gate.validate(chain);
    basis.validate();
    stab.validate();
    const ConstraintMatrix cm = build_constraint_matrix(basis, chain, stab);
    NullSpaceBasis ns = null_space(cm);
    const CouplingMatrix coupling = coupling_double_integral(basis, chain, gate);
    if (stab.chi_projection_count > 0) {
        std::vector<Eigen::MatrixXd> derivs;
        derivs.reserve(chain.num_modes());
        for (int p = 1; p <= chain.num_modes(); ++p) {
            derivs.push_back(coupling_derivative(basis, chain, gate, p, 1));
        }
        ns = project_chi_stabilized(ns, derivs, stab.chi_projection_count);
    }
    OptimizationResult res = optimize_pulse(ns, coupling, gate, basis);
    res.constraint_residual = (cm.rows * res.pulse.amplitudes).cwiseAbs().maxCoeff() /
                              res.pulse.amplitudes.norm();
    return res;
}

namespace detail {

/// Segment overlap rows for the step basis phi_j = sin(mu0 t) on segment j,
/// against h_p^(-) and h_p^(+). Both parity components are stacked so the
/// decoupling holds without assuming an envelope symmetry; the symmetric
/// envelope then emerges through the half-period count.
inline Eigen::MatrixXd step_constraint_rows(double mu0, double tau, int num_segments,
                                            const IonChain& chain) {
    const int num_p = chain.num_modes();
    Eigen::MatrixXd rows(2 * num_p, num_segments);
    for (int p = 0; p < num_p; ++p) {
        const double omega = chain.mode_freqs(p);
        const double half = omega * tau * 0.5;
        for (int j = 0; j < num_segments; ++j) {
            const double a = tau * j / num_segments;
            const double b = tau * (j + 1) / num_segments;
            const double sc = trig::seg_sc(mu0, omega, a, b);
            const double ss = trig::seg_ss(mu0, omega, a, b);
            rows(2 * p, j) = std::sin(half) * sc - std::cos(half) * ss;
            rows(2 * p + 1, j) = std::cos(half) * sc + std::sin(half) * ss;
        }
    }
    return rows;
}

/// D_{jk} over the segment step basis for a single mode.
inline Eigen::MatrixXd step_single_mode_coupling(double mu0, double tau, int num_segments,
                                                 double omega) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(num_segments, num_segments);
    const double bp = mu0 + omega, bm = mu0 - omega;
    std::vector<double> edge(num_segments + 1);
    for (int j = 0; j <= num_segments; ++j) edge[j] = tau * j / num_segments;

    if (std::abs(bm) < resonance_eps) {
        // near-resonant detuning: outer integral by quadrature
        const auto& g = quad::gauss16();
        for (int j = 0; j < num_segments; ++j) {
            const double a = edge[j], b = edge[j + 1];
            const int panels = quad::panel_count(2.0 * mu0 + omega, b - a);
            const double h = (b - a) / panels;
            for (int pp = 0; pp < panels; ++pp) {
                for (int k = 0; k < 16; ++k) {
                    const double t = a + (pp + 0.5) * h + 0.5 * h * g.x(k);
                    const double wt = 0.5 * h * g.w(k) * std::sin(mu0 * t);
                    // inner integral from segment start a and full lower segments
                    double ic = 0.5 * (trig::vers_int(bp, t) + trig::vers_int(bm, t)) -
                                0.5 * (trig::vers_int(bp, a) + trig::vers_int(bm, a));
                    double is = 0.5 * (trig::sinc_int(bm, t) - trig::sinc_int(bp, t)) -
                                0.5 * (trig::sinc_int(bm, a) - trig::sinc_int(bp, a));
                    d(j, j) += wt * (std::sin(omega * t) * ic - std::cos(omega * t) * is);
                    for (int kk = 0; kk < j; ++kk) {
                        const double ck = trig::seg_sc(mu0, omega, edge[kk], edge[kk + 1]);
                        const double sk = trig::seg_ss(mu0, omega, edge[kk], edge[kk + 1]);
                        d(j, kk) += wt * (std::sin(omega * t) * ck - std::cos(omega * t) * sk);
                    }
                }
            }
        }
        return d;
    }

    const double pfac = 1.0 / bp, qfac = 1.0 / bm;
    for (int j = 0; j < num_segments; ++j) {
        const double a = edge[j], b = edge[j + 1];
        const double iss_uo = trig::seg_ss(mu0, omega, a, b);
        const double isc_uo = trig::seg_sc(mu0, omega, a, b);
        for (int k = 0; k < j; ++k) {
            const double ck = trig::seg_sc(mu0, omega, edge[k], edge[k + 1]);
            const double sk = trig::seg_ss(mu0, omega, edge[k], edge[k + 1]);
            d(j, k) = ck * iss_uo - sk * isc_uo;
        }
        const double c0 = 0.5 * (pfac * std::cos(bp * a) + qfac * std::cos(bm * a));
        const double s0 = -0.5 * (qfac * std::sin(bm * a) - pfac * std::sin(bp * a));
        d(j, j) = c0 * iss_uo - s0 * isc_uo -
                  0.5 * (qfac - pfac) * trig::seg_ss(mu0, mu0, a, b);
    }
    return d;
}

}  // namespace detail

/// Fixed-detuning step pulse through the same null-space pipeline, with
/// the segment amplitudes as the unknown vector. The gate time follows
/// from the detuning and the integer half-period count.
inline StepPulse synthesize_step_pulse(const IonChain& chain, const GateSpec& gate,
                                       int num_segments, double mu0, int half_period_count) {
    chain.validate();
    gate.validate(chain);
    if (num_segments <= chain.num_modes()) {
        throw validation_error("num_segments: must exceed the mode count");
    }
    if (!(mu0 > 0.0)) throw validation_error("detuning: must be > 0");
    if (half_period_count < 1) throw validation_error("half_period_count: must be >= 1");
    const double tau = half_period_count * pi / mu0;

    Eigen::MatrixXd raw = detail::step_constraint_rows(mu0, tau, num_segments, chain);
    ConstraintMatrix cm;
    cm.basis = PulseBasis{tau, num_segments,
                          half_period_count % 2 == 0 ? Parity::negative : Parity::positive};
    cm.rows.resize(raw.rows(), num_segments);
    int kept = 0;
    for (int i = 0; i < raw.rows(); ++i) {
        const double nrm = raw.row(i).norm();
        if (nrm > 0.0) cm.rows.row(kept++) = raw.row(i) / nrm;
    }
    cm.rows.conservativeResize(kept, num_segments);
    if (num_segments <= kept) {
        throw validation_error("num_segments: " + std::to_string(num_segments) +
                               " too small for " + std::to_string(kept) + " constraint rows");
    }
    const NullSpaceBasis ns = null_space(cm);

    const Eigen::VectorXd q = gate.eta_products(chain);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(num_segments, num_segments);
    for (int p = 0; p < chain.num_modes(); ++p) {
        if (q(p) == 0.0) continue;
        d.noalias() +=
            q(p) * detail::step_single_mode_coupling(mu0, tau, num_segments, chain.mode_freqs(p));
    }
    CouplingMatrix coupling;
    coupling.d = std::move(d);
    coupling.s = 0.5 * (coupling.d + coupling.d.transpose());
    coupling.ion_i = gate.ion_i;
    coupling.ion_j = gate.ion_j;

    const OptimizationResult res = optimize_pulse(ns, coupling, gate, cm.basis);

    StepPulse sp;
    sp.num_segments = num_segments;
    sp.detuning = mu0;
    sp.half_period_count = half_period_count;
    sp.tau = tau;
    sp.amplitudes = res.pulse.amplitudes;
    return sp;
}

}  // namespace ionpulse
