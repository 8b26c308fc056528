#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "ionpulse/analysis.hpp"
#include "ionpulse/chain.hpp"
#include "ionpulse/demod.hpp"
#include "ionpulse/errors.hpp"
#include "ionpulse/pulse.hpp"
#include "ionpulse/sk.hpp"
#include "ionpulse/synthesis.hpp"
#include "ionpulse/units.hpp"

namespace ionpulse::io {

/// Round-trip float formatting (17 significant digits) so reruns produce
/// byte-identical files.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path + ": JSON parse failure: " + e.what());
    }
    return j;
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw validation_error(where + ": unknown key '" + it.key() + "'");
    }
}

/// Chain config JSON:
///   { "mode_freqs_mhz": [..P..], "lamb_dicke": [[..N..] x P], "label": "..." }
inline IonChain load_chain(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    if (!j.is_object()) throw validation_error(path + ": expected a JSON object");
    reject_unknown_keys(j, {"mode_freqs_mhz", "lamb_dicke", "label"}, path);
    if (!j.contains("mode_freqs_mhz")) throw validation_error(path + ": missing mode_freqs_mhz");
    if (!j.contains("lamb_dicke")) throw validation_error(path + ": missing lamb_dicke");

    IonChain chain;
    try {
        const auto& freqs = j.at("mode_freqs_mhz");
        if (!freqs.is_array() || freqs.empty()) {
            throw validation_error(path + ": mode_freqs_mhz: expected a non-empty array");
        }
        chain.mode_freqs.resize(freqs.size());
        for (size_t p = 0; p < freqs.size(); ++p) {
            chain.mode_freqs(static_cast<long>(p)) = mhz_to_radps(freqs[p].get<double>());
        }
        const auto& eta = j.at("lamb_dicke");
        if (!eta.is_array() || eta.empty() || !eta[0].is_array()) {
            throw validation_error(path + ": lamb_dicke: expected an array of rows");
        }
        const size_t cols = eta[0].size();
        chain.lamb_dicke.resize(eta.size(), cols);
        for (size_t p = 0; p < eta.size(); ++p) {
            if (eta[p].size() != cols) {
                throw validation_error(path + ": lamb_dicke: row " + std::to_string(p) +
                                       " has " + std::to_string(eta[p].size()) +
                                       " columns, expected " + std::to_string(cols));
            }
            for (size_t i = 0; i < cols; ++i) {
                chain.lamb_dicke(static_cast<long>(p), static_cast<long>(i)) =
                    eta[p][i].get<double>();
            }
        }
        chain.label = j.value("label", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path + ": " + e.what());
    }
    try {
        chain.validate();
    } catch (const validation_error& e) {
        throw validation_error(path + ": " + e.what());
    }
    return chain;
}

inline void save_chain(const IonChain& chain, const std::string& path) {
    nlohmann::ordered_json j;
    j["mode_freqs_mhz"] = nlohmann::ordered_json::array();
    for (int p = 0; p < chain.num_modes(); ++p) {
        j["mode_freqs_mhz"].push_back(radps_to_mhz(chain.mode_freqs(p)));
    }
    j["lamb_dicke"] = nlohmann::ordered_json::array();
    for (int p = 0; p < chain.num_modes(); ++p) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (int i = 0; i < chain.num_ions(); ++i) row.push_back(chain.lamb_dicke(p, i));
        j["lamb_dicke"].push_back(row);
    }
    j["label"] = chain.label;
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

/// Self-contained pulse file (basis + amplitudes) for the demodulate and
/// scan commands.
inline void save_pulse(const FourierPulse& pulse, const std::string& path) {
    nlohmann::ordered_json j;
    j["tau_us"] = s_to_us(pulse.basis.tau);
    j["basis_size"] = pulse.basis.size;
    j["parity"] = to_string(pulse.basis.parity);
    j["amplitudes_mhz"] = nlohmann::ordered_json::array();
    for (int n = 0; n < pulse.amplitudes.size(); ++n) {
        j["amplitudes_mhz"].push_back(radps_to_mhz(pulse.amplitudes(n)));
    }
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline FourierPulse load_pulse(const std::string& path) {
    const nlohmann::json j = load_json_file(path);
    reject_unknown_keys(j, {"tau_us", "basis_size", "parity", "amplitudes_mhz"}, path);
    FourierPulse pulse;
    try {
        pulse.basis.tau = us_to_s(j.at("tau_us").get<double>());
        pulse.basis.size = j.at("basis_size").get<int>();
        pulse.basis.parity = parity_from_string(j.at("parity").get<std::string>());
        const auto& amps = j.at("amplitudes_mhz");
        pulse.amplitudes.resize(amps.size());
        for (size_t n = 0; n < amps.size(); ++n) {
            pulse.amplitudes(static_cast<long>(n)) = mhz_to_radps(amps[n].get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path + ": " + e.what());
    }
    pulse.basis.validate();
    if (pulse.amplitudes.size() != pulse.basis.size) {
        throw validation_error(path + ": amplitudes_mhz: expected " +
                               std::to_string(pulse.basis.size) + " entries");
    }
    return pulse;
}

inline void write_amplitudes_csv(const FourierPulse& pulse, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << "n,a_n_mhz\n";
    for (int n = 1; n <= pulse.amplitudes.size(); ++n) {
        out << n << "," << fmt17(radps_to_mhz(pulse.amplitudes(n - 1))) << "\n";
    }
}

inline void write_pulse_csv(const FourierPulse& pulse, const std::string& path,
                            int samples_per_tone = 16) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << "t_us,g_mhz\n";
    const int m = samples_per_tone * pulse.basis.size;
    for (int k = 0; k <= m; ++k) {
        const double t = pulse.basis.tau * k / m;
        out << fmt17(s_to_us(t)) << "," << fmt17(radps_to_mhz(pulse.eval(t))) << "\n";
    }
}

inline void write_metadata_json(const OptimizationResult& res, const GateSpec& gate,
                                const StabilizationSpec& stab, double eigen_gap,
                                const std::string& path) {
    nlohmann::ordered_json j;
    j["pair"] = {gate.ion_i, gate.ion_j};
    j["chi_target"] = gate.chi_target;
    j["chi_sign"] = res.chi_sign;
    j["tau_us"] = s_to_us(res.pulse.basis.tau);
    j["basis_size"] = res.pulse.basis.size;
    j["parity"] = to_string(res.pulse.basis.parity);
    j["stab_order"] = stab.order;
    j["chi_projection"] = stab.chi_projection_count;
    j["null_dim"] = res.null_dim;
    j["eigen_gap"] = eigen_gap;
    j["lambda_max"] = res.lambda_max;
    j["v_scale"] = res.v_scale;
    j["gamma_mhz"] = radps_to_mhz(res.norm_gamma);
    j["peak_mhz"] = radps_to_mhz(res.pulse.peak());
    j["constraint_residual"] = res.constraint_residual;
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline void write_scan_csv(const ScanResult& scan, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << "df_hz,k,infidelity\n";
    for (size_t i = 0; i < scan.orders.size(); ++i) {
        for (int k = 0; k < scan.grid_hz.size(); ++k) {
            out << fmt17(scan.grid_hz(k)) << "," << scan.orders[i] << ","
                << fmt17(scan.infidelities(static_cast<long>(i), k)) << "\n";
        }
    }
}

inline void write_widths_json(const ScanResult& scan, const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const WidthEntry& w : scan.widths) {
        nlohmann::ordered_json e;
        e["K"] = w.order;
        e["epsilon"] = w.epsilon;
        e["width_hz"] = w.width_hz;
        e["spans_grid"] = w.spans_grid;
        arr.push_back(e);
    }
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << arr.dump(2) << "\n";
}

/// Demodulation CSV, one row per zero-to-zero segment.
inline void write_demod_csv(const DemodulatedPulse& dm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << "t_start_us,t_end_us,omega_over_2pi_mhz,mu_over_2pi_mhz,psi_start_rad\n";
    for (int j = 0; j + 1 < dm.num_zeros(); ++j) {
        out << fmt17(s_to_us(dm.zeros(j))) << "," << fmt17(s_to_us(dm.zeros(j + 1))) << ","
            << fmt17(radps_to_mhz(dm.amplitudes(j))) << ","
            << fmt17(radps_to_mhz(dm.detunings(j))) << "," << fmt17(dm.phases(j)) << "\n";
    }
}

inline void write_step_csv(const StepPulse& sp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << "segment,t_start_us,t_end_us,omega_over_2pi_mhz\n";
    for (int j = 0; j < sp.num_segments; ++j) {
        out << (j + 1) << "," << fmt17(s_to_us(sp.segment_start(j))) << ","
            << fmt17(s_to_us(sp.segment_start(j + 1))) << ","
            << fmt17(radps_to_mhz(sp.amplitudes(j))) << "\n";
    }
}

inline void write_sk_json(const SkSequence& seq, const std::string& path) {
    nlohmann::ordered_json j;
    j["phi_sk_rad"] = seq.phi_sk;
    j["gates"] = nlohmann::ordered_json::array();
    for (const SkGate& g : seq.gates) {
        nlohmann::ordered_json e;
        e["label"] = g.label;
        e["xx_angle_rad"] = g.xx_angle;
        e["z_conjugation_rad"] = g.z_conjugation;
        j["gates"].push_back(e);
    }
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace ionpulse::io
