#include "mirrorqed/runconfig.hpp"

#include "mirrorqed/csvio.hpp"
#include "mirrorqed/dynamics.hpp"
#include "mirrorqed/errors.hpp"
#include "mirrorqed/gates.hpp"
#include "mirrorqed/photon.hpp"
#include "mirrorqed/protocol.hpp"
#include "mirrorqed/robustness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <thread>

namespace mirrorqed {

using nlohmann::json;

namespace fs = std::filesystem;

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void expect_keys(const json& obj, const std::vector<std::string>& allowed,
                 const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + context);
    }
}

std::vector<std::string> known_tasks() {
    return {"couplings", "gate",       "emit",       "cz",        "protocol",
            "sweep-fig3a", "sweep-fig3b", "sweep-fig3c", "sweep-figS1"};
}

namespace {

double get_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return obj[key].get<double>();
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw ConfigError(context + " requires numeric '" + key + "'");
    return obj[key].get<double>();
}

std::vector<double> require_number_list(const json& obj, const std::string& key,
                                        const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty())
        throw ConfigError(context + " requires non-empty array '" + key + "'");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) throw ConfigError("'" + key + "' entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

EmitterArray parse_array(const json& cfg) {
    if (!cfg.contains("array")) return EmitterArray::mirror_configuration();
    const json& a = cfg["array"];
    expect_keys(a, {"positions", "gamma0", "gamma_prime"}, "array");
    EmitterArray arr;
    if (a.contains("positions")) {
        for (const auto& v : a["positions"]) arr.positions.push_back(v.get<double>());
    } else {
        arr = EmitterArray::mirror_configuration();
    }
    arr.gamma0 = get_number(a, "gamma0", 1.0);
    arr.gamma_prime = get_number(a, "gamma_prime", 0.0);
    arr.validate();
    return arr;
}

GateSpec parse_gate(const json& g) {
    expect_keys(g, {"kind", "theta", "phi", "Omega", "J", "Delta", "delta_omega"}, "gate");
    if (!g.contains("kind")) throw ConfigError("gate requires 'kind'");
    const std::string kind = g["kind"].get<std::string>();
    GateSpec spec;
    if (kind == "R_DG")
        spec = GateSpec::rotate_dg(require_number(g, "theta", "R_DG"), get_number(g, "phi", 0.0),
                                   require_number(g, "Omega", "R_DG"),
                                   require_number(g, "J", "R_DG"));
    else if (kind == "R_GA")
        spec = GateSpec::rotate_ga(require_number(g, "theta", "R_GA"), get_number(g, "phi", 0.0),
                                   require_number(g, "Omega", "R_GA"),
                                   require_number(g, "J", "R_GA"));
    else if (kind == "P_A")
        spec = GateSpec::phase_a(require_number(g, "phi", "P_A"), require_number(g, "J", "P_A"));
    else if (kind == "P_D")
        spec = GateSpec::phase_d(require_number(g, "phi", "P_D"),
                                 require_number(g, "Delta", "P_D"));
    else if (kind == "P_G")
        spec = GateSpec::phase_g(require_number(g, "phi", "P_G"),
                                 require_number(g, "Omega", "P_G"),
                                 require_number(g, "delta_omega", "P_G"));
    else
        throw ConfigError("unknown gate kind: " + kind);
    spec.validate();
    return spec;
}

struct PacketConfig {
    PacketKind kind;
    double param;   // tau or Jtilde
    double dt;
    double t_end;
    double center;  // Gaussian only
    std::string path; // CSV import
};

PacketConfig parse_packet(const json& p, const std::string& context) {
    expect_keys(p, {"kind", "tau", "center", "Jtilde", "t_end", "dt", "path"}, context);
    if (!p.contains("kind")) throw ConfigError(context + " requires 'kind'");
    const std::string kind = p["kind"].get<std::string>();
    PacketConfig out{};
    out.dt = get_number(p, "dt", 1e-3);
    if (kind == "gaussian") {
        out.kind = PacketKind::Gaussian;
        out.param = require_number(p, "tau", context);
        out.center = get_number(p, "center", 5.0 * out.param);
        out.t_end = get_number(p, "t_end", out.center + 5.0 * out.param);
    } else if (kind == "constant_j") {
        out.kind = PacketKind::ConstantJ;
        out.param = require_number(p, "Jtilde", context);
        const double geff = 24.0 * out.param * out.param;
        out.t_end = get_number(p, "t_end", std::max(40.0, 12.0 / geff));
    } else if (kind == "csv") {
        out.kind = PacketKind::Generic;
        if (!p.contains("path")) throw ConfigError(context + ": csv packet requires 'path'");
        out.path = p["path"].get<std::string>();
    } else {
        throw ConfigError(context + ": unknown packet kind " + kind);
    }
    return out;
}

Wavepacket build_packet(const PacketConfig& cfg, double gamma0 = 1.0) {
    if (!cfg.path.empty()) return read_wavepacket_csv(cfg.path);
    if (cfg.kind == PacketKind::Gaussian)
        return gaussian_packet(cfg.param, cfg.center, cfg.t_end, cfg.dt);
    return constant_j_packet(cfg.param, gamma0, cfg.t_end, cfg.dt);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(threads, n);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j)
            row.push_back({{"re", m(i, j).real()}, {"im", m(i, j).imag()}});
        rows.push_back(row);
    }
    return rows;
}

void write_json(const json& j, const std::string& path) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

// --- task runners ------------------------------------------------------------

struct RunContext {
    fs::path out_dir;
    int threads = 1;
    double dt = 0.0; // 0 = module defaults
    std::uint64_t seed = 0;
    std::vector<std::string> artifacts;

    std::string path(const std::string& name) {
        artifacts.push_back((out_dir / name).string());
        return artifacts.back();
    }
};

void run_couplings(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "array", "out", "dt", "seed", "threads"}, "couplings config");
    const EmitterArray arr = parse_array(cfg);
    const CouplingMatrices c = coupling_matrices(arr);
    const JumpOperator jop = jump_operator(arr);

    auto csv = open_output(ctx.path("couplings.csv"));
    csv << "# couplings in units of gamma0, positions in lambda0\n";
    csv << "n,m,J_nm,Gamma_nm\n";
    for (int i = 0; i < arr.size(); ++i)
        for (int j = 0; j < arr.size(); ++j)
            csv << (i + 1) << ',' << (j + 1) << ',' << fmt_g(c.J(i, j)) << ','
                << fmt_g(c.Gamma(i, j)) << '\n';

    json jj;
    jj["gamma_B"] = jop.gamma_B;
    jj["fully_dark"] = jop.fully_dark;
    json w = json::array();
    for (int i = 0; i < jop.weights.size(); ++i) w.push_back(jop.weights(i));
    jj["weights"] = w;
    write_json(jj, ctx.path("jump_operator.json"));
}

void run_gate(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "array", "gate", "stark_compensation", "out", "dt", "seed", "threads"},
                "gate config");
    if (!cfg.contains("gate")) throw ConfigError("gate task requires 'gate'");
    const EmitterArray arr = parse_array(cfg);
    const GateSpec spec = parse_gate(cfg["gate"]);
    SimulateGateOptions opts;
    opts.dt = ctx.dt;
    if (cfg.contains("stark_compensation")) opts.stark_compensation = cfg["stark_compensation"].get<bool>();
    const GateResult res = simulate_gate(spec, arr, opts);

    json out;
    out["kind"] = to_string(spec.kind);
    out["fidelity"] = res.fidelity;
    out["infidelity"] = 1.0 - res.fidelity;
    out["leakage"] = res.leakage;
    out["duration"] = res.duration;
    out["delta_compensation"] = res.delta_compensation;
    out["warnings"] = res.warnings;
    out["ideal"] = matrix_to_json(res.ideal);
    out["achieved"] = matrix_to_json(res.achieved);
    if (spec.kind == GateKind::RotateDG || spec.kind == GateKind::RotateGA) {
        const ErrorModel m = predicted_error_model(spec.Omega, spec.J, arr.gamma0);
        out["error_model"] = {{"gamma_d", m.gamma_d},
                              {"delta_d", m.delta_d},
                              {"F_leading", m.F_leading}};
    }
    write_json(out, ctx.path("gate.json"));
}

void run_emit(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "array", "target", "out", "dt", "seed", "threads"}, "emit config");
    if (!cfg.contains("target")) throw ConfigError("emit task requires 'target'");
    const EmitterArray arr = parse_array(cfg);
    PacketConfig pc = parse_packet(cfg["target"], "target");
    if (ctx.dt > 0.0) pc.dt = ctx.dt;
    const Wavepacket target = build_packet(pc, arr.gamma0);

    const CouplingSequence seq = optimal_coupling_sequence(target, arr.gamma0);
    const EmissionResult res = emit_with_sequence(0.0, -IMU, seq, arr.gamma0, arr.gamma_prime);

    auto wav = open_output(ctx.path("wavepacket.csv"));
    wav << "# t in 1/gamma0, amplitude in sqrt(gamma0)\n";
    wav << "t,re,im\n";
    for (int k = 0; k < res.photon.size(); ++k)
        wav << fmt_g(res.photon.time(k)) << ',' << fmt_g(res.photon.samples[k].real()) << ','
            << fmt_g(res.photon.samples[k].imag()) << '\n';

    auto ctl = open_output(ctx.path("coupling.csv"));
    ctl << "# piecewise-constant J(t) in gamma0\n";
    ctl << "t,J\n";
    for (size_t k = 0; k < seq.J.size(); ++k)
        ctl << fmt_g(seq.t0 + k * seq.dt) << ',' << fmt_g(seq.J[k]) << '\n';

    const Complex ov = target.overlap(res.photon);
    json out;
    out["photon_norm2"] = res.photon.norm2();
    out["target_overlap_fidelity"] = std::norm(ov) / (target.norm2() * res.photon.norm2());
    out["xi"] = res.xi;
    out["residual_a"] = std::abs(res.a);
    out["residual_b"] = std::abs(res.b);
    out["mean_time"] = res.photon.mean_time();
    out["width"] = res.photon.width();
    write_json(out, ctx.path("emit_summary.json"));
}

void run_cz(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "packet", "J", "out", "dt", "seed", "threads"}, "cz config");
    if (!cfg.contains("packet")) throw ConfigError("cz task requires 'packet'");
    const double J = require_number(cfg, "J", "cz");
    PacketConfig pc = parse_packet(cfg["packet"], "packet");
    if (ctx.dt > 0.0) pc.dt = ctx.dt;
    const Wavepacket packet = build_packet(pc);
    const CzResult res = cz_fidelity(packet, J, pc.kind, pc.param);

    json out;
    out["J"] = J;
    out["O_G"] = {{"re", res.O_G.real()}, {"im", res.O_G.imag()}};
    out["O_D"] = {{"re", res.O_D.real()}, {"im", res.O_D.imag()}};
    out["fidelity"] = res.fidelity;
    out["infidelity"] = 1.0 - res.fidelity;
    if (res.O_G_closed) {
        out["O_G_closed"] = {{"re", res.O_G_closed->real()}, {"im", res.O_G_closed->imag()}};
        out["O_D_closed"] = {{"re", res.O_D_closed->real()}, {"im", res.O_D_closed->imag()}};
        out["fidelity_closed"] = *res.fidelity_closed;
    }
    out["zero_bandwidth_infidelity"] = cz_zero_bandwidth_infidelity(J);
    write_json(out, ctx.path("cz.json"));
}

void run_protocol(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "protocol", "out", "dt", "seed", "threads"}, "protocol config");
    if (!cfg.contains("protocol")) throw ConfigError("protocol task requires 'protocol'");
    const json& p = cfg["protocol"];
    expect_keys(p, {"kind", "m", "rows", "cols", "noisy", "noise"}, "protocol");
    ProtocolSpec spec;
    const std::string kind = p.contains("kind") ? p["kind"].get<std::string>() : "ghz";
    if (kind == "ghz")
        spec.kind = ProtocolKind::GHZ;
    else if (kind == "cluster_1d")
        spec.kind = ProtocolKind::Cluster1D;
    else if (kind == "cluster_2d")
        spec.kind = ProtocolKind::Cluster2D;
    else
        throw ConfigError("unknown protocol kind: " + kind);
    spec.m = static_cast<int>(get_number(p, "m", 2));
    spec.rows = static_cast<int>(get_number(p, "rows", 2));
    spec.cols = static_cast<int>(get_number(p, "cols", 2));
    spec.noisy = p.contains("noisy") && p["noisy"].get<bool>();
    if (p.contains("noise")) {
        const json& n = p["noise"];
        expect_keys(n, {"J", "Omega", "gamma_prime", "packet", "carry_distorted_packet"}, "noise");
        spec.noise.J = get_number(n, "J", spec.noise.J);
        spec.noise.Omega = get_number(n, "Omega", spec.noise.Omega);
        spec.noise.gamma_prime = get_number(n, "gamma_prime", 0.0);
        if (n.contains("packet")) {
            const PacketConfig pc = parse_packet(n["packet"], "noise packet");
            spec.noise.packet = pc.kind;
            spec.noise.packet_param = pc.param;
        }
        if (n.contains("carry_distorted_packet"))
            spec.noise.carry_distorted_packet = n["carry_distorted_packet"].get<bool>();
    }
    spec.validate();

    const ProtocolResult res = apply_sequence(spec);
    const IdealReference ref = ideal_reference(spec);

    json out;
    out["kind"] = kind;
    out["photons"] = spec.photon_count();
    out["fidelity"] = res.fidelity;
    out["matter_purity"] = res.matter_purity;
    json stabs = json::array();
    for (size_t i = 0; i < res.stabilizer_expectations.size(); ++i)
        stabs.push_back({{"stabilizer", ref.stabilizers[i].label()},
                         {"expectation", res.stabilizer_expectations[i]}});
    out["stabilizers"] = stabs;
    if (spec.photon_count() <= 6) {
        json amps = json::array();
        const int block = 1 << res.state.m;
        for (int i = 0; i < res.state.amps.size(); ++i) {
            if (std::abs(res.state.amps(i)) < 1e-12) continue;
            amps.push_back({{"matter", std::vector<std::string>{"D", "G", "A"}[i / block]},
                            {"bins", i % block},
                            {"re", res.state.amps(i).real()},
                            {"im", res.state.amps(i).imag()}});
        }
        out["amplitudes"] = amps;
    }
    if (spec.noisy) {
        json ledger = json::array();
        for (const auto& e : res.ledger)
            ledger.push_back({{"op", e.op},
                              {"amplitude_deficit", e.amplitude_deficit},
                              {"leakage", e.leakage}});
        out["gate_ledger"] = ledger;
    }
    write_json(out, ctx.path("protocol.json"));
}

void run_sweep_fig3a(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "J", "Omega_values", "gamma_prime_values", "out", "dt", "seed",
                      "threads"},
                "sweep-fig3a config");
    const double J = get_number(cfg, "J", 10.0);
    const auto omegas = require_number_list(cfg, "Omega_values", "sweep-fig3a");
    std::vector<double> gps{0.0};
    if (cfg.contains("gamma_prime_values"))
        gps = require_number_list(cfg, "gamma_prime_values", "sweep-fig3a");

    struct Row {
        double omega, T_y, T_cpe, gp, eps_y, eps_cpe;
    };
    const int n = static_cast<int>(omegas.size() * gps.size());
    std::vector<Row> rows(n);
    parallel_for(n, ctx.threads, [&](int i) {
        const double omega = omegas[i / gps.size()];
        const double gp = gps[i % gps.size()];
        const EmitterArray arr = EmitterArray::mirror_configuration(3, 1.0, gp);
        SimulateGateOptions opts;
        opts.dt = ctx.dt;
        const GateResult y = simulate_gate(GateSpec::y_half(omega, J), arr, opts);
        const GateResult t = simulate_gate(GateSpec::transfer_ga(omega, J), arr, opts);
        rows[i] = {omega, PI / (4.0 * omega), PI / (2.0 * omega), gp, 1.0 - y.fidelity,
                   1.0 - t.fidelity};
    });

    auto csv = open_output(ctx.path("fig3a.csv"));
    csv << "# Y_{pi/2} and CPE-transfer infidelity vs gate time at J = " << fmt_g(J)
        << " gamma0\n";
    csv << "Omega,T_y,T_cpe,gamma_prime,eps_y,eps_cpe\n";
    for (const auto& r : rows)
        csv << fmt_g(r.omega) << ',' << fmt_g(r.T_y) << ',' << fmt_g(r.T_cpe) << ','
            << fmt_g(r.gp) << ',' << fmt_g(r.eps_y) << ',' << fmt_g(r.eps_cpe) << '\n';
}

void run_sweep_fig3b(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "Omega", "J_values", "gamma_prime_values", "out", "dt", "seed",
                      "threads"},
                "sweep-fig3b config");
    const double omega = get_number(cfg, "Omega", 0.05);
    const auto js = require_number_list(cfg, "J_values", "sweep-fig3b");
    std::vector<double> gps{0.0};
    if (cfg.contains("gamma_prime_values"))
        gps = require_number_list(cfg, "gamma_prime_values", "sweep-fig3b");

    struct Row {
        double J, gp, eps_y, eps_cpe;
    };
    const int n = static_cast<int>(js.size() * gps.size());
    std::vector<Row> rows(n);
    parallel_for(n, ctx.threads, [&](int i) {
        const double J = js[i / gps.size()];
        const double gp = gps[i % gps.size()];
        const EmitterArray arr = EmitterArray::mirror_configuration(3, 1.0, gp);
        SimulateGateOptions opts;
        opts.dt = ctx.dt;
        const GateResult y = simulate_gate(GateSpec::y_half(omega, J), arr, opts);
        const GateResult t = simulate_gate(GateSpec::transfer_ga(omega, J), arr, opts);
        rows[i] = {J, gp, 1.0 - y.fidelity, 1.0 - t.fidelity};
    });

    auto csv = open_output(ctx.path("fig3b.csv"));
    csv << "# infidelity vs exchange J at Omega = " << fmt_g(omega) << " gamma0 (fixed T)\n";
    csv << "J,gamma_prime,eps_y,eps_cpe\n";
    for (const auto& r : rows)
        csv << fmt_g(r.J) << ',' << fmt_g(r.gp) << ',' << fmt_g(r.eps_y) << ','
            << fmt_g(r.eps_cpe) << '\n';
}

void run_sweep_fig3c(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "J", "bandwidth_values", "out", "dt", "seed", "threads"},
                "sweep-fig3c config");
    const double J = get_number(cfg, "J", 10.0);
    const auto bws = require_number_list(cfg, "bandwidth_values", "sweep-fig3c");
    for (double b : bws)
        if (!(b > 0.0) || b > 1.0)
            throw ConfigError("sweep-fig3c bandwidths must lie in (0, gamma0]");

    struct Row {
        double B, param, eps_num, eps_closed, eps_ref;
        std::string kind;
    };
    const int n = static_cast<int>(bws.size());
    std::vector<Row> gauss(n), constj(n);
    const double floor = cz_zero_bandwidth_infidelity(J);
    parallel_for(n, ctx.threads, [&](int i) {
        const double B = bws[i];
        {
            const double tau = 1.0 / B;
            const double dt = std::min(0.02, tau / 100.0);
            const Wavepacket w = gaussian_packet(tau, 5.0 * tau, 10.0 * tau, dt);
            const CzResult r = cz_fidelity(w, J, PacketKind::Gaussian, tau);
            gauss[i] = {B, tau, 1.0 - r.fidelity, 1.0 - *r.fidelity_closed,
                        cz_infidelity_smallB_gaussian(B, J), "gaussian"};
        }
        {
            // Jtilde from the second-moment bandwidth B = 1/tau = 24 Jt^2 / gamma0.
            const double jt = std::sqrt(B / 24.0);
            const double geff = 24.0 * jt * jt;
            const double t_end = std::max(60.0, 14.0 / geff);
            const Wavepacket w = constant_j_packet(jt, 1.0, t_end, 0.02);
            const CzResult r = cz_fidelity(w, J, PacketKind::ConstantJ, jt);
            constj[i] = {B, jt, 1.0 - r.fidelity, 1.0 - *r.fidelity_closed,
                         cz_infidelity_smallB_constJ(jt, J), "constant_j"};
        }
    });

    auto csv = open_output(ctx.path("fig3c.csv"));
    csv << "# CZ infidelity vs photon bandwidth at J = " << fmt_g(J)
        << " gamma0; zero-bandwidth floor " << fmt_g(floor)
        << "; bandwidth = 1/tau (Gaussian) or 1/(second-moment width) (constant J)\n";
    csv << "kind,bandwidth,shape_param,eps_numeric,eps_closed_form,eps_leading_order\n";
    for (const auto& rows : {gauss, constj})
        for (const auto& r : rows)
            csv << r.kind << ',' << fmt_g(r.B) << ',' << fmt_g(r.param) << ','
                << fmt_g(r.eps_num) << ',' << fmt_g(r.eps_closed) << ',' << fmt_g(r.eps_ref)
                << '\n';
}

void run_sweep_figS1(const json& cfg, RunContext& ctx) {
    expect_keys(cfg, {"task", "modes", "epsilon_values", "gate_realizations",
                      "emission_realizations", "Omega", "J", "target_tau", "out", "dt", "seed",
                      "threads"},
                "sweep-figS1 config");
    const auto eps = require_number_list(cfg, "epsilon_values", "sweep-figS1");
    std::vector<std::string> modes{"gamma_prime", "spacing", "disorder"};
    if (cfg.contains("modes")) {
        modes.clear();
        for (const auto& m : cfg["modes"]) modes.push_back(m.get<std::string>());
    }
    const int gate_reps = static_cast<int>(get_number(cfg, "gate_realizations", 100));
    const int em_reps = static_cast<int>(get_number(cfg, "emission_realizations", 50));
    // Operating point with the small-perturbation plateau well inside the
    // Zeno-limited floor.
    const double omega = get_number(cfg, "Omega", 0.2);
    const double J = get_number(cfg, "J", 10.0);
    const double tau = get_number(cfg, "target_tau", 1.75);

    const EmitterArray base = EmitterArray::mirror_configuration();
    const GateSpec gate = GateSpec::y_half(omega, J);
    const Wavepacket target = gaussian_packet(tau, 5.0 * tau, 10.0 * tau, 1e-3);

    struct Row {
        std::string mode;
        double eps;
        SweepStats gate, emission;
    };
    const int n = static_cast<int>(modes.size() * eps.size());
    std::vector<Row> rows(n);
    parallel_for(n, ctx.threads, [&](int i) {
        Perturbation p;
        p.mode = perturbation_mode_from_string(modes[i / eps.size()]);
        p.epsilon = eps[i % eps.size()];
        p.seed = ctx.seed;
        p.realizations = gate_reps;
        Row row;
        row.mode = modes[i / eps.size()];
        row.eps = p.epsilon;
        SimulateGateOptions opts;
        opts.dt = ctx.dt;
        row.gate = gate_infidelity_under(p, gate, base, opts);
        p.realizations = em_reps;
        row.emission = emission_infidelity_under(p, target, base);
        rows[i] = row;
    });

    auto gate_csv = open_output(ctx.path("figS1_gate.csv"));
    gate_csv << "# Y_{pi/2} infidelity under perturbations; Omega = " << fmt_g(omega)
             << ", J = " << fmt_g(J) << ", seed = " << ctx.seed << '\n';
    gate_csv << "mode,epsilon,realizations,mean_infidelity,stderr\n";
    for (const auto& r : rows)
        gate_csv << r.mode << ',' << fmt_g(r.eps) << ',' << r.gate.realizations << ','
                 << fmt_g(r.gate.mean) << ',' << fmt_g(r.gate.stderr_mean) << '\n';

    auto em_csv = open_output(ctx.path("figS1_emission.csv"));
    em_csv << "# emission infidelity for a Gaussian target, tau = " << fmt_g(tau)
           << "/gamma0, seed = " << ctx.seed << '\n';
    em_csv << "mode,epsilon,realizations,mean_infidelity,stderr\n";
    for (const auto& r : rows)
        em_csv << r.mode << ',' << fmt_g(r.eps) << ',' << r.emission.realizations << ','
               << fmt_g(r.emission.mean) << ',' << fmt_g(r.emission.stderr_mean) << '\n';
}

} // namespace

std::vector<std::string> run_task(const std::string& task, const json& config,
                                  const CliOverrides& overrides) {
    const auto start = std::chrono::steady_clock::now();
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    if (config.contains("task") && config["task"].get<std::string>() != task)
        throw ConfigError("config task '" + config["task"].get<std::string>() +
                          "' does not match requested task '" + task + "'");
    const auto tasks = known_tasks();
    if (std::find(tasks.begin(), tasks.end(), task) == tasks.end())
        throw ConfigError("unknown task: " + task);

    RunContext ctx;
    std::string out = overrides.out;
    if (out.empty() && config.contains("out")) out = config["out"].get<std::string>();
    if (out.empty()) {
        const char* env = std::getenv("MIRRORQED_OUT");
        out = env ? env : "out";
    }
    ctx.out_dir = out;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out);

    ctx.threads = overrides.threads > 0
                      ? overrides.threads
                      : static_cast<int>(get_number(config, "threads",
                                                    std::thread::hardware_concurrency()));
    ctx.dt = overrides.dt > 0.0 ? overrides.dt : get_number(config, "dt", 0.0);
    ctx.seed = overrides.seed_set ? overrides.seed
                                  : static_cast<std::uint64_t>(get_number(config, "seed", 0.0));

    if (task == "couplings")
        run_couplings(config, ctx);
    else if (task == "gate")
        run_gate(config, ctx);
    else if (task == "emit")
        run_emit(config, ctx);
    else if (task == "cz")
        run_cz(config, ctx);
    else if (task == "protocol")
        run_protocol(config, ctx);
    else if (task == "sweep-fig3a")
        run_sweep_fig3a(config, ctx);
    else if (task == "sweep-fig3b")
        run_sweep_fig3b(config, ctx);
    else if (task == "sweep-fig3c")
        run_sweep_fig3c(config, ctx);
    else if (task == "sweep-figS1")
        run_sweep_figS1(config, ctx);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest;
    manifest["task"] = task;
    manifest["config_hash"] = config_hash(config);
    manifest["code_version"] = CODE_VERSION;
    manifest["wall_time_s"] = wall;
    json arts = json::array();
    for (const auto& a : ctx.artifacts) arts.push_back(a);
    manifest["artifacts"] = arts;
    write_json(manifest, (ctx.out_dir / "manifest.json").string());

    auto result = ctx.artifacts;
    result.push_back((ctx.out_dir / "manifest.json").string());
    return result;
}

} // namespace mirrorqed
