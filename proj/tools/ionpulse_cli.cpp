// Command-line front end: synthesize pulses, scan drift robustness,
// demodulate, evaluate analytic bounds, build step pulses and synthetic
// chains, and emit plot-ready CSV/JSON. All outputs are deterministic.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ionpulse/analysis.hpp"
#include "ionpulse/chain.hpp"
#include "ionpulse/demod.hpp"
#include "ionpulse/io.hpp"
#include "ionpulse/sk.hpp"
#include "ionpulse/synthesis.hpp"

namespace {

using namespace ionpulse;

struct CommonOpts {
    std::string chain_path;
    std::vector<int> pair{1, 2};
    double tau_us = 300.0;
    int na = 1000;
    std::string parity = "negative";
    int stab_order = 0;
    int project = 0;
    std::string out_dir = "out";
    double grid_khz = 20.0;
    std::vector<double> epsilons;
};

std::filesystem::path ensure_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw validation_error("cannot create output directory: " + dir);
    return p;
}

IonChain load_chain_checked(const std::string& path) {
    if (path.empty()) throw validation_error("--chain is required");
    if (!std::filesystem::exists(path)) throw validation_error("chain file not found: " + path);
    return io::load_chain(path);
}

GateSpec gate_from(const CommonOpts& o) {
    if (o.pair.size() != 2) throw validation_error("--pair: expected two ion indices");
    GateSpec g;
    g.ion_i = o.pair[0];
    g.ion_j = o.pair[1];
    return g;
}

PulseBasis basis_from(const CommonOpts& o) {
    PulseBasis b;
    b.tau = us_to_s(o.tau_us);
    b.size = o.na;
    b.parity = parity_from_string(o.parity);
    return b;
}

int cmd_synthesize(const CommonOpts& o) {
    const IonChain chain = load_chain_checked(o.chain_path);
    const GateSpec gate = gate_from(o);
    const PulseBasis basis = basis_from(o);
    const StabilizationSpec stab{o.stab_order, o.project};
    const ConstraintMatrix cm = build_constraint_matrix(basis, chain, stab);
    const NullSpaceBasis ns = null_space(cm);
    const OptimizationResult res = synthesize(chain, gate, basis, stab);
    const auto dir = ensure_out_dir(o.out_dir);
    io::write_amplitudes_csv(res.pulse, (dir / "amplitudes.csv").string());
    io::write_pulse_csv(res.pulse, (dir / "pulse.csv").string());
    io::save_pulse(res.pulse, (dir / "pulse.json").string());
    io::write_metadata_json(res, gate, stab, ns.eigen_gap, (dir / "metadata.json").string());
    std::cout << "pulse: peak " << io::fmt17(radps_to_mhz(res.pulse.peak()))
              << " MHz, null dim " << res.null_dim << ", residual "
              << io::fmt17(res.constraint_residual) << "\n";
    return 0;
}

int cmd_scan(const CommonOpts& o) {
    const IonChain chain = load_chain_checked(o.chain_path);
    const GateSpec gate = gate_from(o);
    const PulseBasis basis = basis_from(o);
    std::vector<std::pair<int, FourierPulse>> pulses;
    for (int k = 0; k <= o.stab_order; ++k) {
        pulses.emplace_back(k, synthesize(chain, gate, basis, StabilizationSpec{k, 0}).pulse);
        std::cout << "synthesized K=" << k << "\n";
    }
    ScanGrid grid{o.grid_khz * 1e3, 50.0};
    std::vector<double> eps = o.epsilons.empty() ? std::vector<double>{1e-3} : o.epsilons;
    const ScanResult scan = drift_scan(pulses, chain, gate, grid, eps);
    const auto dir = ensure_out_dir(o.out_dir);
    io::write_scan_csv(scan, (dir / "scan.csv").string());
    io::write_widths_json(scan, (dir / "widths.json").string());
    for (const WidthEntry& w : scan.widths) {
        std::cout << "K=" << w.order << " eps=" << w.epsilon << " width "
                  << io::fmt17(w.width_hz / 1e3) << " kHz" << (w.spans_grid ? " (spans grid)" : "")
                  << "\n";
    }
    return 0;
}

int cmd_demodulate(const std::string& pulse_path, const std::string& out_dir,
                   const std::string& convention) {
    if (!std::filesystem::exists(pulse_path)) {
        throw validation_error("pulse file not found: " + pulse_path);
    }
    const FourierPulse pulse = io::load_pulse(pulse_path);
    DetuningConvention conv = DetuningConvention::left;
    if (convention == "right") conv = DetuningConvention::right;
    else if (convention == "average") conv = DetuningConvention::average;
    else if (convention != "left") throw validation_error("--convention: left|right|average");
    const DemodulatedPulse dm = demodulate(pulse, conv);
    const ReconstructionError err = reconstruction_error(pulse, dm);
    const auto dir = ensure_out_dir(out_dir);
    io::write_demod_csv(dm, (dir / "demod.csv").string());
    std::cout << "zeros: " << dm.num_zeros() << ", relative reconstruction error "
              << io::fmt17(err.relative) << "\n";
    return 0;
}

int cmd_bound(const CommonOpts& o, bool single_pair) {
    const IonChain chain = load_chain_checked(o.chain_path);
    const double tau = us_to_s(o.tau_us);
    const auto dir = ensure_out_dir(o.out_dir);
    std::ofstream csv(dir / "bounds.csv");
    csv << "i,j,bound_khz\n";
    if (single_pair) {
        const GateSpec gate = gate_from(o);
        const double f = power_lower_bound(chain, gate, tau);
        csv << gate.ion_i << "," << gate.ion_j << "," << io::fmt17(f / 1e3) << "\n";
        std::cout << "(" << gate.ion_i << "," << gate.ion_j << ") " << io::fmt17(f / 1e3)
                  << " kHz\n";
        return 0;
    }
    for (int i = 1; i <= chain.num_ions(); ++i) {
        for (int j = i + 1; j <= chain.num_ions(); ++j) {
            GateSpec gate;
            gate.ion_i = i;
            gate.ion_j = j;
            const double f = power_lower_bound(chain, gate, tau);
            csv << i << "," << j << "," << io::fmt17(f / 1e3) << "\n";
            std::cout << "(" << i << "," << j << ") " << io::fmt17(f / 1e3) << " kHz\n";
        }
    }
    return 0;
}

int cmd_step(const CommonOpts& o, int segments, double mu_mhz, int half_periods) {
    const IonChain chain = load_chain_checked(o.chain_path);
    const GateSpec gate = gate_from(o);
    const StepPulse sp =
        synthesize_step_pulse(chain, gate, segments, mhz_to_radps(mu_mhz), half_periods);
    const auto dir = ensure_out_dir(o.out_dir);
    io::write_step_csv(sp, (dir / "step.csv").string());
    std::cout << "step pulse: tau " << io::fmt17(s_to_us(sp.tau)) << " us, peak "
              << io::fmt17(radps_to_mhz(sp.peak())) << " MHz\n";
    return 0;
}

int cmd_chain_gen(int ions, double radial_mhz, double axial_ratio, double spacing_um,
                  double prefactor, const std::string& label, const std::string& out_path) {
    ChainGenOptions opts;
    opts.spacing_um = spacing_um;
    opts.lamb_dicke_prefactor = prefactor;
    opts.label = label;
    const IonChain chain = generate_chain(ions, mhz_to_radps(radial_mhz), axial_ratio, opts);
    io::save_chain(chain, out_path);
    std::cout << "chain: " << chain.num_modes() << " modes, f1 "
              << io::fmt17(radps_to_mhz(chain.mode_freqs(0))) << " MHz\n";
    return 0;
}

int cmd_sk(double theta, const std::string& out_dir) {
    const SkSequence seq = sk_compensation(theta);
    const auto dir = ensure_out_dir(out_dir);
    io::write_sk_json(seq, (dir / "sk.json").string());
    std::cout << "{\"phi_sk_rad\": " << io::fmt17(seq.phi_sk) << "}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-optimal drift-stabilized XX-gate pulse synthesis"};
    app.require_subcommand(1);

    CommonOpts o;
    int segments = 11;
    double mu_mhz = 2.396;
    int half_periods = 1434;
    int ions = 5;
    double radial_mhz = 2.48038;
    double axial_ratio = 0.088;
    double spacing_um = 5.0;
    double prefactor = 0.0;
    std::string label;
    std::string chain_out = "chain.json";
    std::string pulse_path;
    std::string convention = "left";
    double theta = 0.0;

    const auto add_common = [&](CLI::App* sub, bool needs_chain) {
        if (needs_chain) sub->add_option("--chain", o.chain_path, "chain config JSON");
        sub->add_option("--pair", o.pair, "ion pair (two 1-based indices)")->expected(2);
        sub->add_option("--tau-us", o.tau_us, "gate duration in microseconds");
        sub->add_option("--na", o.na, "basis size N_A");
        sub->add_option("--parity", o.parity, "negative|positive|mixed");
        sub->add_option("--stab-order", o.stab_order, "moment stabilization order K");
        sub->add_option("--project", o.project, "chi-projection count L");
        sub->add_option("--out", o.out_dir, "output directory");
        sub->add_option("--grid-khz", o.grid_khz, "scan half-range in kHz");
        sub->add_option("--epsilon", o.epsilons, "infidelity tolerance (repeatable)");
    };

    auto* syn = app.add_subcommand("synthesize", "synthesize a power-optimal pulse");
    add_common(syn, true);
    auto* scan = app.add_subcommand("scan", "infidelity-vs-drift scan for K = 0..stab-order");
    add_common(scan, true);
    auto* dem = app.add_subcommand("demodulate", "split a pulse into amplitude and detuning");
    dem->add_option("--pulse", pulse_path, "pulse JSON from synthesize")->required();
    dem->add_option("--out", o.out_dir, "output directory");
    dem->add_option("--convention", convention, "detuning sample: left|right|average");
    auto* bound = app.add_subcommand("bound", "analytic lower bound on peak drive");
    add_common(bound, true);
    CLI::Option* bound_pair_opt = bound->get_option("--pair");
    auto* step = app.add_subcommand("step", "fixed-detuning step pulse");
    add_common(step, true);
    step->add_option("--segments", segments, "number of equal segments");
    step->add_option("--mu-mhz", mu_mhz, "detuning mu0/2pi in MHz");
    step->add_option("--half-periods", half_periods, "integer K = mu0 tau / pi");
    auto* gen = app.add_subcommand("chain-gen", "synthesize a test chain");
    gen->add_option("--ions", ions, "number of ions");
    gen->add_option("--radial-mhz", radial_mhz, "transverse COM frequency in MHz");
    gen->add_option("--axial-ratio", axial_ratio, "omega_x / omega_r");
    gen->add_option("--spacing-um", spacing_um, "ion spacing in micrometers");
    gen->add_option("--eta-prefactor", prefactor, "fixed Lamb-Dicke prefactor (0 = auto)");
    gen->add_option("--label", label, "chain label");
    gen->add_option("--out", chain_out, "output chain JSON path");
    auto* sk = app.add_subcommand("sk", "broadband compensation sequence for XX(theta)");
    sk->add_option("--theta", theta, "gate angle in radians")->required();
    sk->add_option("--out", o.out_dir, "output directory");

    try {
        app.parse(argc, argv);
        if (syn->parsed()) return cmd_synthesize(o);
        if (scan->parsed()) return cmd_scan(o);
        if (dem->parsed()) return cmd_demodulate(pulse_path, o.out_dir, convention);
        if (bound->parsed()) return cmd_bound(o, bound_pair_opt->count() > 0);
        if (step->parsed()) return cmd_step(o, segments, mu_mhz, half_periods);
        if (gen->parsed()) return cmd_chain_gen(ions, radial_mhz, axial_ratio, spacing_um,
                                                prefactor, label, chain_out);
        if (sk->parsed()) return cmd_sk(theta, o.out_dir);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ionpulse::validation_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const ionpulse::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
