// cocyclelab command-line tool: configuration loading, experiment
// orchestration, and deterministic CSV reporting.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocyclelab/coupling.hpp"
#include "cocyclelab/estimators.hpp"

namespace cclab::cli {

using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// exit codes (documented interface)
enum : int { kOk = 0, kConfigError = 1, kNumericalViolation = 2, kInfeasible = 3 };

struct NumericalViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// configuration

struct ExperimentConfig {
    SubshiftSpec spec;
    std::optional<WindowedCocycle> cocycle; // absent for preset families
    std::string preset;                     // "", "near-identity", "diag-rotation"
    Potential potential;
    bool potential_family = false; // phi_t = t * phi0 for the sweep
    int depth = 2;
    double epsilon = kPi / 2 * 0x1p-12;
    long long n = 10000;
    int samples = 100;
    uint64_t seed = 0;
    bool seed_given = false;
    double alpha_bunching = 1.0;
    int n_max = 64;
    double alpha = 0.5, beta = 0.5;   // coupling-demo ledger parameters
    double t_star = 0.0, t0 = 0.25;   // sweep: t_k = t_star + (t0 - t_star) 2^-k
    int grid_points = 6;
    int workers = 0;                  // 0 = available parallelism
    std::string canonical;            // canonical serialization for the hash
};

inline uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// words are written as symbol strings over 1..alphabet_size, e.g. "12"
inline Word parse_word(const std::string& s, int ell, std::vector<std::string>& issues,
                       const std::string& where) {
    Word w;
    for (char c : s) {
        int v = c - '1';
        if (v < 0 || v >= ell) {
            issues.push_back(where + ": symbol '" + std::string(1, c) + "' outside 1.." +
                             std::to_string(ell) + " in word \"" + s + "\"");
            return {};
        }
        w.push_back(v);
    }
    return w;
}

inline bool word_admissible(const SubshiftSpec& spec, const Word& w) {
    for (size_t i = 0; i + 1 < w.size(); ++i)
        if (!spec.allowed(w[i], w[i + 1])) return false;
    return true;
}

inline Mat2 parse_mat(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("matrix needs 4 entries");
    return Mat2{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// loads and fully validates a config; reports every violation, not just the
// first
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    std::vector<std::string> issues;
    ExperimentConfig cfg;
    cfg.canonical = j.dump();

    // subshift
    int ell = 2;
    std::vector<std::vector<int>> q{{1, 1}, {1, 1}};
    double theta = 0.5;
    if (j.contains("subshift")) {
        const json& s = j["subshift"];
        ell = s.value("alphabet", 2);
        theta = s.value("theta", 0.5);
        if (s.contains("transitions"))
            q = s["transitions"].get<std::vector<std::vector<int>>>();
        else
            q.assign((size_t)std::max(ell, 1), std::vector<int>((size_t)std::max(ell, 1), 1));
    }
    auto rep = SubshiftSpec::validate(ell, q, theta);
    for (const auto& msg : rep.issues) issues.push_back("subshift: " + msg);
    if (rep.ok) cfg.spec = SubshiftSpec{ell, q, theta};

    // cocycle: explicit table or a named preset family with parameter t
    if (j.contains("cocycle")) {
        const json& c = j["cocycle"];
        std::string type = c.value("type", "table");
        if (type == "preset") {
            cfg.preset = c.value("family", "");
            if (cfg.preset != "near-identity" && cfg.preset != "diag-rotation")
                issues.push_back("cocycle: unknown preset family \"" + cfg.preset + "\"");
        } else if (type == "table" && rep.ok) {
            long long lo = c.value("w_lo", 0), hi = c.value("w_hi", 1);
            std::map<Word, Mat2> table;
            json entries = c.value("entries", json::object());
            for (const auto& [k, v] : entries.items()) {
                Word w = parse_word(k, ell, issues, "cocycle entry");
                if (!word_admissible(cfg.spec, w))
                    issues.push_back("cocycle entry \"" + k +
                                     "\": word violates the transition matrix");
                else
                    table[w] = parse_mat(v);
            }
            if (issues.empty()) {
                try {
                    cfg.cocycle = WindowedCocycle::make(cfg.spec, lo, hi, table);
                } catch (const std::exception& e) {
                    issues.push_back(std::string("cocycle: ") + e.what());
                }
            }
        } else if (type != "table") {
            issues.push_back("cocycle: unknown type \"" + type + "\"");
        }
    }

    // potential: constant, per-word table, or one-parameter family t * phi0
    if (rep.ok) {
        cfg.potential = Potential::constant(cfg.spec, 0.0);
        if (j.contains("potential")) {
            const json& p = j["potential"];
            std::string type = p.value("type", "constant");
            cfg.potential_family = p.value("family", false);
            if (type == "constant") {
                cfg.potential = Potential::constant(cfg.spec, p.value("value", 0.0));
            } else if (type == "table") {
                long long lo = p.value("w_lo", 0), hi = p.value("w_hi", 1);
                std::map<Word, double> table;
                json entries = p.value("entries", json::object());
                for (const auto& [k, v] : entries.items()) {
                    Word w = parse_word(k, ell, issues, "potential entry");
                    if (!word_admissible(cfg.spec, w))
                        issues.push_back("potential entry \"" + k +
                                         "\": word violates the transition matrix");
                    else
                        table[w] = v.get<double>();
                }
                if (issues.empty()) {
                    try {
                        cfg.potential = Potential::make(cfg.spec, lo, hi, table);
                    } catch (const std::exception& e) {
                        issues.push_back(std::string("potential: ") + e.what());
                    }
                }
            } else {
                issues.push_back("potential: unknown type \"" + type + "\"");
            }
        }
    }

    // numeric knobs with range checks
    auto knob = [&](const char* name, double lo, double hi, double dflt) {
        double v = j.value(name, dflt);
        if (!(v >= lo && v <= hi))
            issues.push_back(std::string(name) + " = " + std::to_string(v) + " outside [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    };
    cfg.depth = (int)knob("depth", 1, 12, 2);
    cfg.epsilon = knob("epsilon", 0, kPi, kPi / 2 * 0x1p-12);
    cfg.n = (long long)knob("n", 1, 1e9, 10000);
    cfg.samples = (int)knob("samples", 1, 100000, 100);
    cfg.alpha_bunching = knob("alpha_bunching", 1e-9, 100, 1.0);
    cfg.n_max = (int)knob("n_max", 1, 4096, 64);
    cfg.alpha = knob("alpha", 1e-9, 1, 0.5);
    cfg.beta = knob("beta", 1e-9, 1, 0.5);
    cfg.t_star = knob("t_star", -100, 100, 0.0);
    cfg.t0 = knob("t0", -100, 100, 0.25);
    cfg.grid_points = (int)knob("grid_points", 2, 64, 6);
    if (j.contains("seed")) {
        cfg.seed = j["seed"].get<uint64_t>();
        cfg.seed_given = true;
    }

    if (!issues.empty()) {
        std::string all = "invalid config:";
        for (const auto& s : issues) all += "\n  - " + s;
        throw std::invalid_argument(all);
    }
    return cfg;
}

// preset cocycle families (illustrative, clearly labeled; not benchmark data)
inline WindowedCocycle preset_cocycle(const ExperimentConfig& cfg, double t) {
    if (cfg.preset == "near-identity") {
        // rotation times a weak diagonal: fiber-bunched for small |t|
        std::vector<Mat2> per;
        for (int s = 0; s < cfg.spec.alphabet_size; ++s) {
            double c = 0.5 + 0.25 * s, th = 0.7 + 0.3 * s;
            per.push_back(Mat2::rotation(th) * Mat2::diag(std::exp(t * c), std::exp(-t * c)));
        }
        return WindowedCocycle::one_step(cfg.spec, per);
    }
    if (cfg.preset == "diag-rotation") {
        // strong diagonal on symbol 0, fixed rotation elsewhere; leaves the
        // bunched locus as |t| grows
        std::vector<Mat2> per;
        per.push_back(Mat2::diag(std::exp(t), std::exp(-t)));
        for (int s = 1; s < cfg.spec.alphabet_size; ++s) per.push_back(Mat2::rotation(1.0));
        return WindowedCocycle::one_step(cfg.spec, per);
    }
    throw std::invalid_argument("no preset family selected");
}

inline WindowedCocycle resolve_cocycle(const ExperimentConfig& cfg, double t) {
    if (cfg.cocycle) return *cfg.cocycle;
    if (!cfg.preset.empty()) return preset_cocycle(cfg, t);
    throw std::invalid_argument("config provides neither a cocycle table nor a preset");
}

inline Potential scaled_potential(const ExperimentConfig& cfg, double t) {
    if (!cfg.potential_family) return cfg.potential;
    std::map<Word, double> tbl;
    for (const auto& [w, v] : cfg.potential.table) tbl[w] = t * v;
    return Potential::make(cfg.spec, cfg.potential.w_lo, cfg.potential.w_hi, tbl);
}

// ---------------------------------------------------------------------------
// CSV emission: stable column order, 17 significant digits, provenance row

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static std::string num(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
    static std::string num(long long v) { return std::to_string(v); }

    void write(const std::string& path, const ExperimentConfig& cfg) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      (unsigned long long)fnv1a(cfg.canonical));
        out << "# cocyclelab " << kVersion << " config_hash " << hash << "\n";
        for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
        out << "\n";
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << "\n";
        }
    }
};

// ---------------------------------------------------------------------------
// commands

inline int cmd_validate(const ExperimentConfig& cfg, const std::string& out) {
    Csv csv;
    csv.header = {"alphabet", "theta", "transitive", "graph_period"};
    auto rep = SubshiftSpec::validate(cfg.spec.alphabet_size, cfg.spec.transitions,
                                      cfg.spec.theta);
    csv.rows.push_back({Csv::num((long long)cfg.spec.alphabet_size), Csv::num(cfg.spec.theta),
                        rep.transitive ? "1" : "0", Csv::num((long long)rep.graph_period)});
    csv.write(out + "/validate.csv", cfg);
    std::cout << "ok: subshift valid, transitive=" << rep.transitive
              << " graph_period=" << rep.graph_period << "\n";
    return kOk;
}

inline int cmd_exponents(const ExperimentConfig& cfg, const std::string& out) {
    if (!cfg.seed_given) throw std::invalid_argument("exponents: seed is mandatory");
    auto c = resolve_cocycle(cfg, cfg.t0);
    auto m = equilibrium(cfg.potential, default_anchors(cfg.spec));
    auto us = lyap_ustate(c, m, cfg.depth, cfg.epsilon);
    auto km = lyap_kingman(c, m, cfg.n, cfg.samples, cfg.seed);
    auto pe = lyap_periodic(c, 6);
    double det = det_integral(c, m);

    Csv csv;
    csv.header = {"estimator", "lambda_plus", "lambda_minus", "err_plus", "err_minus"};
    csv.rows.push_back({"ustate", Csv::num(us.lambda_plus), Csv::num(us.lambda_minus),
                        Csv::num(us.residual_plus), Csv::num(us.residual_minus)});
    csv.rows.push_back({"kingman", Csv::num(km.lambda_plus), Csv::num(km.lambda_minus),
                        Csv::num(km.stderr_plus), Csv::num(km.stderr_minus)});
    csv.rows.push_back({"periodic", Csv::num(pe.lambda_plus), Csv::num(0.0), Csv::num(0.0),
                        Csv::num(0.0)});
    double sum_rule = us.lambda_plus + us.lambda_minus - det;
    double err = 3 * (km.stderr_plus + km.stderr_minus + us.residual_plus + us.residual_minus);
    csv.rows.push_back({"sum_rule_residual", Csv::num(sum_rule), Csv::num(det), Csv::num(err),
                        Csv::num(0.0)});
    double agree = std::abs(us.lambda_plus - km.lambda_plus);
    csv.rows.push_back({"agreement_gap", Csv::num(agree), Csv::num(0.0), Csv::num(err),
                        Csv::num(0.0)});
    csv.write(out + "/exponents.csv", cfg);

    std::cout << "lambda_plus " << Csv::num(us.lambda_plus) << " lambda_minus "
              << Csv::num(us.lambda_minus) << "\n";
    if (std::abs(sum_rule) > err + 1e-9)
        throw NumericalViolation("determinant sum rule violated beyond 3 combined errors");
    if (agree > err + 1e-9)
        throw NumericalViolation("estimator disagreement beyond 3 combined errors");
    return kOk;
}

inline int cmd_bunching(const ExperimentConfig& cfg, const std::string& out) {
    auto c = resolve_cocycle(cfg, cfg.t0);
    auto cert = fiber_bunching(c, cfg.alpha_bunching, cfg.n_max);
    Csv csv;
    csv.header = {"certified", "alpha", "N", "worst_ratio"};
    if (cert)
        csv.rows.push_back({"1", Csv::num(cert->alpha), Csv::num((long long)cert->N),
                            Csv::num(cert->worst_ratio)});
    else
        csv.rows.push_back({"0", Csv::num(cfg.alpha_bunching), Csv::num((long long)cfg.n_max),
                            Csv::num(0.0)});
    csv.write(out + "/bunching.csv", cfg);
    std::cout << (cert ? "certified at N=" + std::to_string(cert->N)
                       : "no certificate up to N=" + std::to_string(cfg.n_max))
              << "\n";
    return kOk;
}

inline int cmd_holonomy(const ExperimentConfig& cfg, const std::string& out) {
    if (!cfg.seed_given) throw std::invalid_argument("holonomy: seed is mandatory");
    auto c = resolve_cocycle(cfg, cfg.t0);
    if (!fiber_bunching(c, cfg.alpha_bunching, cfg.n_max))
        throw std::runtime_error("holonomy: infeasible parameters (cocycle not certified "
                                 "fiber-bunched; holonomies may diverge)");
    auto repn = holonomy_residuals(c, cfg.samples, cfg.seed);
    Csv csv;
    csv.header = {"composition", "identity", "equivariance"};
    csv.rows.push_back(
        {Csv::num(repn.composition), Csv::num(repn.identity), Csv::num(repn.equivariance)});
    csv.write(out + "/holonomy.csv", cfg);
    std::cout << "residuals: composition " << Csv::num(repn.composition) << " identity "
              << Csv::num(repn.identity) << " equivariance " << Csv::num(repn.equivariance)
              << "\n";
    if (std::max({repn.composition, repn.identity, repn.equivariance}) > 1e-9)
        throw NumericalViolation("holonomy axiom residual above 1e-9");
    return kOk;
}

inline int cmd_equilibrium(const ExperimentConfig& cfg, const std::string& out) {
    auto m = equilibrium(cfg.potential, default_anchors(cfg.spec));
    Csv csv;
    csv.header = {"symbol", "zeta", "nu", "pi", "log_lambda"};
    for (int i = 0; i < m.m(); ++i)
        csv.rows.push_back({Csv::num((long long)i), Csv::num(m.zeta[(size_t)i]),
                            Csv::num(m.nu[(size_t)i]), Csv::num(m.pi[(size_t)i]),
                            Csv::num(m.log_lambda)});
    csv.write(out + "/equilibrium.csv", cfg);
    Csv tcsv;
    tcsv.header = {"from", "to", "p"};
    for (int i = 0; i < m.m(); ++i)
        for (int jj = 0; jj < m.m(); ++jj)
            if (m.rc.recoded.allowed(i, jj))
                tcsv.rows.push_back({Csv::num((long long)i), Csv::num((long long)jj),
                                     Csv::num(m.p[(size_t)i][(size_t)jj])});
    tcsv.write(out + "/equilibrium_transitions.csv", cfg);
    std::cout << "log_lambda " << Csv::num(m.log_lambda) << " states " << m.m() << "\n";
    return kOk;
}

inline int cmd_ustate(const ExperimentConfig& cfg, const std::string& out) {
    auto c = resolve_cocycle(cfg, cfg.t0);
    auto m = equilibrium(cfg.potential, default_anchors(cfg.spec));
    auto r = solve_u_state(c, m, cfg.depth, cfg.epsilon, 400);
    double lam = lyap_from_family(r.family, c, m);
    auto su = su_check(r.family, c, m, cfg.samples, cfg.seed);
    Csv csv;
    csv.header = {"lambda_plus", "residual", "iterations", "converged", "s_residual",
                  "u_residual"};
    csv.rows.push_back({Csv::num(lam), Csv::num(r.residual), Csv::num(r.iterations),
                        r.converged ? "1" : "0", Csv::num(su.s_residual),
                        Csv::num(su.u_residual)});
    csv.write(out + "/ustate.csv", cfg);
    std::cout << "lambda_plus " << Csv::num(lam) << " residual " << Csv::num(r.residual)
              << (r.converged ? " (converged)" : " (plateau)") << "\n";
    return kOk;
}

inline int cmd_atoms(const ExperimentConfig& cfg, const std::string& out) {
    auto c = resolve_cocycle(cfg, cfg.t0);
    auto m = equilibrium(cfg.potential, default_anchors(cfg.spec));
    auto r = solve_u_state(c, m, cfg.depth, cfg.epsilon, 400);
    auto sp = atom_spectrum(r.family, c, cfg.epsilon);
    Csv csv;
    csv.header = {"gamma0", "card_min", "card_max", "equivariance_residual"};
    csv.rows.push_back({Csv::num(sp.gamma0), Csv::num((long long)sp.card_min),
                        Csv::num((long long)sp.card_max),
                        Csv::num(sp.equivariance_residual)});
    csv.write(out + "/atoms.csv", cfg);
    std::cout << "gamma0 " << Csv::num(sp.gamma0) << " cardinality [" << sp.card_min << ", "
              << sp.card_max << "]\n";
    return kOk;
}

struct SweepRow {
    int k = 0;
    double t = 0, lp = 0, lm = 0, err = 0, det_resid = 0;
    double weak_star = 0, psi_gap = 0;
};

// continuity sweep: t_k -> t_star geometrically; reports exponents, the
// determinant residual, deviations from the t_star run, and measure gaps
inline int cmd_sweep(const ExperimentConfig& cfg, const std::string& out) {
    if (!cfg.seed_given) throw std::invalid_argument("sweep: seed is mandatory");
    if (cfg.preset.empty()) throw std::invalid_argument("sweep: needs a preset family");

    auto run_one = [&](double t) {
        auto c = resolve_cocycle(cfg, t);
        auto m = equilibrium(scaled_potential(cfg, t), default_anchors(cfg.spec));
        if (!fiber_bunching(c, cfg.alpha_bunching, cfg.n_max))
            throw std::runtime_error(
                "sweep: infeasible parameters (t = " + std::to_string(t) +
                " leaves the certified bunched region)");
        auto us = lyap_ustate(c, m, cfg.depth, cfg.epsilon);
        auto km = lyap_kingman(c, m, cfg.n, cfg.samples, cfg.seed);
        double det = det_integral(c, m);
        SweepRow r;
        r.t = t;
        r.lp = us.lambda_plus;
        r.lm = us.lambda_minus;
        r.err = km.stderr_plus + km.stderr_minus + us.residual_plus + us.residual_minus;
        r.det_resid = us.lambda_plus + us.lambda_minus - det;
        return std::make_pair(r, m);
    };

    auto [star, m_star] = run_one(cfg.t_star);
    std::vector<SweepRow> rows((size_t)cfg.grid_points);
    std::vector<std::string> errors;
    std::mutex mu;
    unsigned nw = cfg.workers > 0 ? (unsigned)cfg.workers
                                  : std::max(1u, std::thread::hardware_concurrency());
    nw = std::min<unsigned>(nw, (unsigned)cfg.grid_points);
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (unsigned wi = 0; wi < nw; ++wi)
        pool.emplace_back([&] {
            for (;;) {
                int k = next.fetch_add(1);
                if (k >= cfg.grid_points) return;
                try {
                    double t = cfg.t_star + (cfg.t0 - cfg.t_star) * std::pow(0.5, k);
                    auto [r, mk] = run_one(t);
                    r.k = k;
                    auto gap = measure_distance(mk, m_star, cfg.depth);
                    r.weak_star = gap.weak_star;
                    r.psi_gap = gap.psi_gap;
                    rows[(size_t)k] = r; // order-stable assembly by grid index
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lk(mu);
                    errors.emplace_back(e.what());
                }
            }
        });
    for (auto& th : pool) th.join();
    if (!errors.empty()) throw std::runtime_error(errors.front());

    Csv csv;
    csv.header = {"k",   "t",         "lambda_plus", "lambda_minus", "err",
                  "det_residual", "dev_plus",    "dev_minus",    "weak_star", "psi_gap"};
    for (const auto& r : rows) {
        csv.rows.push_back({Csv::num((long long)r.k), Csv::num(r.t), Csv::num(r.lp),
                            Csv::num(r.lm), Csv::num(r.err), Csv::num(r.det_resid),
                            Csv::num(std::abs(r.lp - star.lp)),
                            Csv::num(std::abs(r.lm - star.lm)), Csv::num(r.weak_star),
                            Csv::num(r.psi_gap)});
        if (std::abs(r.det_resid) > 3 * r.err + 1e-9)
            throw NumericalViolation("sweep: determinant residual above tolerance at t = " +
                                     std::to_string(r.t));
    }
    csv.write(out + "/sweep.csv", cfg);
    std::cout << "sweep: " << cfg.grid_points << " grid points toward t* = "
              << Csv::num(cfg.t_star) << ", final deviation "
              << Csv::num(std::abs(rows.back().lp - star.lp)) << "\n";
    return kOk;
}

inline int cmd_coupling_demo(const ExperimentConfig& cfg, const std::string& out) {
    if (!cfg.seed_given) throw std::invalid_argument("coupling-demo: seed is mandatory");
    auto ins = coupling_demo_instance(cfg.seed);
    auto run = decrement_iterate(ins.family, ins.cocycle, ins.measure, ins.params);
    Csv csv;
    csv.header = {"step",       "energy_before", "gain",        "kappa_integral",
                  "overheads",  "energy_after",  "bracket_min", "bracket_max",
                  "exact_path", "defect_residual"};
    long long k = 0;
    for (const auto& s : run.steps) {
        double ov = s.overhead_confine + s.overhead_cross + s.overhead_oi + s.overhead_lambda;
        csv.rows.push_back({Csv::num(k++), Csv::num(s.energy_before), Csv::num(s.gain),
                            Csv::num(s.kappa_integral), Csv::num(ov), Csv::num(s.energy_after),
                            Csv::num(s.bracket_min), Csv::num(s.bracket_max),
                            s.exact_path_ok ? "1" : "0", Csv::num(s.defect_residual)});
    }
    csv.write(out + "/coupling_demo.csv", cfg);
    std::cout << "initial energy " << Csv::num(run.initial_energy) << ", " << run.steps.size()
              << " steps, contradiction=" << (run.contradiction ? "yes" : "no") << "\n";
    if (!run.contradiction)
        throw NumericalViolation("coupling-demo: energy did not reach the contradiction within "
                                 "the certified step bound");
    return kOk;
}

} // namespace cclab::cli

int main(int argc, char** argv) {
    using namespace cclab::cli;
    CLI::App app{"cocyclelab: a numerical laboratory for 2-dimensional linear cocycles over "
                 "subshifts of finite type"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    std::string config_path, out_dir = ".";
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0, depth = 0, grid_points = 0;
    app.add_option("--config", config_path, "path to the experiment config")->required();
    app.add_option("--out", out_dir, "output directory for CSV artifacts");
    app.add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--workers", workers, "worker count (0 = available parallelism)");
    app.add_option("--depth", depth, "cylinder depth (overrides config)");
    app.add_option("--grid-points", grid_points, "sweep grid points (overrides config)");

    for (const char* name : {"validate", "exponents", "bunching", "holonomy", "equilibrium",
                             "ustate", "atoms", "sweep", "coupling-demo"})
        app.add_subcommand(name);

    CLI11_PARSE(app, argc, argv);
    std::string cmd = app.get_subcommands().front()->get_name();

    try {
        ExperimentConfig cfg = load_config(config_path);
        if (seed_set) {
            cfg.seed = seed;
            cfg.seed_given = true;
        }
        if (workers > 0) cfg.workers = workers;
        if (depth > 0) cfg.depth = depth;
        if (grid_points > 0) cfg.grid_points = grid_points;
        std::filesystem::create_directories(out_dir);

        if (cmd == "validate") return cmd_validate(cfg, out_dir);
        if (cmd == "exponents") return cmd_exponents(cfg, out_dir);
        if (cmd == "bunching") return cmd_bunching(cfg, out_dir);
        if (cmd == "holonomy") return cmd_holonomy(cfg, out_dir);
        if (cmd == "equilibrium") return cmd_equilibrium(cfg, out_dir);
        if (cmd == "ustate") return cmd_ustate(cfg, out_dir);
        if (cmd == "atoms") return cmd_atoms(cfg, out_dir);
        if (cmd == "sweep") return cmd_sweep(cfg, out_dir);
        if (cmd == "coupling-demo") return cmd_coupling_demo(cfg, out_dir);
        std::cerr << "unknown command\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NumericalViolation& e) {
        std::cerr << "numerical invariant violation: " << e.what() << "\n";
        return kNumericalViolation;
    } catch (const std::exception& e) {
        std::string what = e.what();
        if (what.find("infeasible") != std::string::npos) {
            std::cerr << "infeasible parameters: " << what << "\n";
            return kInfeasible;
        }
        std::cerr << "numerical invariant violation: " << what << "\n";
        return kNumericalViolation;
    }
}
