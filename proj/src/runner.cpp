#include "tauflow/runner.hpp"

#include "tauflow/errors.hpp"
#include "tauflow/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>

namespace tauflow {

namespace fs = std::filesystem;

Trajectory simulate(const RunConfig& config) {
    EvolveOptions options;
    options.volume_target = config.flow.volume_target;
    options.blowup_curvature = config.flow.blowup_curvature;
    return evolve({config.initial_metric(), 0.0}, config.flow_kind(), config.flow.horizon, config.flow.step,
                  config.flow.output_interval, options);
}

namespace {

std::vector<TimeSeries> per_sample_series(const Trajectory& traj) {
    TimeSeries min_r("min_scalar_curvature", "min R");
    TimeSeries avg_r("average_scalar_curvature", "r");
    TimeSeries vol("volume", "Vol");
    TimeSeries diam("diameter", "diam");
    TimeSeries rm("max_curvature_norm", "max |Rm|");
    for (const auto& s : traj.samples) {
        const ScalarField r = scalar_curvature(s.metric);
        min_r.push(s.t, r.min());
        avg_r.push(s.t, average_scalar_curvature(s.metric));
        vol.push(s.t, volume(s.metric));
        diam.push(s.t, diameter(s.metric));
        rm.push(s.t, curvature_norm(s.metric).max());
    }
    return {min_r, avg_r, vol, diam, rm};
}

}  // namespace

Analysis analyze(const RunConfig& config, const Trajectory& traj) {
    Analysis a;
    a.sample_series = per_sample_series(traj);
    a.scalar_evolution = scalar_evolution_check(traj);
    a.scalar_evolution_sampled = scalar_evolution_check(traj, RateSource::sample_differences);
    a.volume_identity = volume_identity_check(traj);
    if (config.geometry.backend == Backend::axisymmetric) a.gauss_bonnet = gauss_bonnet_check(traj);
    a.min_scalar = min_scalar_monitor(traj, config.diagnostics.min_scalar_tolerance);
    a.traceless = traceless_monitor(traj);
    a.hypotheses = hypothesis_monitor(traj, config.diagnostics.bounds);

    const Metric& last = traj.samples.back().metric;
    if (config.entropy.tau) {
        a.entropy_tau = *config.entropy.tau;
    } else if (config.flow.kind == FlowKind::Type::tau_flow) {
        a.entropy_tau = *config.flow.tau;
    } else {
        const double r = average_scalar_curvature(last);
        if (r > 0.0) {
            a.entropy_tau = 0.5 * dimension_of(last) / r;
        } else {
            a.notes.push_back("entropy skipped: final average scalar curvature is not positive");
        }
    }
    if (!config.entropy.enabled) a.entropy_tau.reset();

    if (a.entropy_tau) {
        const Tau tau(*a.entropy_tau);
        a.mu = mu_series(traj, tau, config.entropy.mu_cadence, config.entropy.mu);
        for (std::size_t k = 0; k < a.mu.size(); ++k) {
            a.mu_converged = a.mu_converged && a.mu[k].result.converged;
            if (k > 0) a.mu_max_decrease = std::max(a.mu_max_decrease, a.mu[k - 1].result.mu - a.mu[k].result.mu);
        }
        if (!a.mu_converged) a.notes.push_back("some µ solves did not converge");

        const double span = traj.end_time() - traj.start_time();
        const double window = config.entropy.window;
        if (traj.termination != Termination::completed) {
            a.notes.push_back("conjugate window skipped: run stopped early");
        } else if (window > span + 1e-12) {
            a.notes.push_back("conjugate window skipped: window exceeds the run");
        } else if (!a.mu.back().result.converged) {
            a.notes.push_back("conjugate window skipped: anchor µ did not converge");
        } else {
            try {
                a.conjugate = backward_conjugate_flow(traj, traj.end_time(), a.mu.back().result, window,
                                                      config.entropy.conjugate_step);
                if (a.conjugate->samples.size() >= 3) a.dw = dW_dt_check(traj, *a.conjugate);
            } catch (const PositivityError& e) {
                a.notes.push_back(std::string("conjugate flow: ") + e.what());
            } catch (const DomainError& e) {
                a.notes.push_back(std::string("conjugate window skipped: ") + e.what());
            }
        }
        a.classification =
            classify_limit(traj, a.mu, a.dw, a.hypotheses, tau, config.diagnostics.classification);
    } else {
        a.classification.verdict =
            traj.termination != Termination::completed || !a.hypotheses.all_ok() ? Verdict::diverged : Verdict::inconclusive;
        a.classification.reason = "no entropy scale";
    }
    return a;
}

namespace {

json check_entry(double value, double tolerance, bool pass) {
    json j;
    j["value"] = value;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    return j;
}

json report_json(const RunConfig& config, const Trajectory& traj, const Analysis& a) {
    const auto& d = config.diagnostics;
    json j;
    j["tool_version"] = tool_version;
    j["config_hash"] = config.hash();
    j["termination"] = std::string(to_string(traj.termination));
    j["termination_message"] = traj.termination_message;
    j["samples"] = traj.samples.size();
    j["t_end"] = traj.end_time();
    if (traj.last_valid) j["last_valid"] = state_to_json(*traj.last_valid);
    j["projections"] = traj.projections;
    j["max_projection_deviation"] = traj.max_projection_deviation;
    j["entropy_tau"] = a.entropy_tau ? json(*a.entropy_tau) : json(nullptr);
    j["classification"] = classification_to_json(a.classification);
    j["hypotheses"] = hypothesis_to_json(a.hypotheses);

    json checks;
    checks["scalar_evolution"] =
        check_entry(a.scalar_evolution.max_abs(), d.identity_tolerance, a.scalar_evolution.max_abs() <= d.identity_tolerance);
    checks["scalar_evolution_sampled"] = {{"value", a.scalar_evolution_sampled.max_abs()}, {"informational", true}};
    checks["volume_identity"] =
        check_entry(a.volume_identity.max_abs(), d.identity_tolerance, a.volume_identity.max_abs() <= d.identity_tolerance);
    if (a.gauss_bonnet) {
        checks["gauss_bonnet"] = check_entry(a.gauss_bonnet->max_abs(), 1e-5, a.gauss_bonnet->max_abs() <= 1e-5);
    }
    if (a.traceless.r_inequality_checked) {
        const double worst = a.traceless.r_inequality.min();
        checks["r_inequality"] = check_entry(worst, -d.identity_tolerance, worst >= -d.identity_tolerance);
    } else {
        checks["r_inequality"] = {{"skipped", a.traceless.r_inequality_note}};
    }
    {
        const double worst = a.traceless.t_squared_inequality.min();
        checks["traceless_inequality"] = check_entry(worst, -d.identity_tolerance, worst >= -d.identity_tolerance);
    }
    checks["min_scalar"] = {{"violated", a.min_scalar.violated},
                            {"first_violation", a.min_scalar.first_violation ? json(*a.min_scalar.first_violation)
                                                                            : json(nullptr)}};
    if (!a.mu.empty()) {
        checks["mu_monotone"] = check_entry(a.mu_max_decrease, d.monotonicity_tolerance,
                                            a.mu_max_decrease <= d.monotonicity_tolerance);
        checks["mu_converged"] = a.mu_converged;
    }
    if (a.conjugate) {
        const double dev = a.conjugate->max_constraint_deviation();
        checks["conjugate_normalization"] = check_entry(dev, 1e-6, dev <= 1e-6);
    }
    if (a.dw && config.flow.kind == FlowKind::Type::tau_flow) {
        checks["dW_nonnegative"] = check_entry(a.dw->min_value, -1e-8, a.dw->min_value >= -1e-8);
        checks["dW_agreement"] = check_entry(a.dw->max_abs_difference, 1e-4, a.dw->max_abs_difference <= 1e-4);
    }
    j["checks"] = std::move(checks);

    json traceless;
    traceless["final_sup_norm"] = a.traceless.sup_norm.value.back();
    traceless["cumulative_integral"] = a.traceless.cumulative.value.back();
    traceless["moser_constant"] = a.traceless.moser_constant;
    j["traceless"] = std::move(traceless);
    j["notes"] = a.notes;
    j["tolerances"] = config.to_json().at("diagnostics");
    return j;
}

TimeSeries mu_as_series(const std::vector<MuSample>& mu) {
    TimeSeries s("mu", "µ(g(t), τ)");
    for (const auto& m : mu) s.push(m.t, m.result.mu);
    return s;
}

std::vector<TimeSeries> conjugate_series(const ConjugatePair& pair, const DwDtCheck* dw) {
    TimeSeries mass("conjugate_mass_deviation", "∫(4πτ)^{-n/2}e^{-f}dV - 1");
    for (const auto& s : pair.samples) mass.push(s.s, s.mass - 1.0);
    std::vector<TimeSeries> out{mass};
    if (dw) {
        TimeSeries w("W", "W(g(s), f(s), τ)"), fd("dW_ds", "finite-difference dW/ds"),
            weighted("weighted_soliton_residual", "(4πτ)^{-n/2}∫2τ|Ric + Hess f - g/2τ|²e^{-f}dV");
        for (std::size_t k = 0; k < dw->s.size(); ++k) {
            w.push(dw->s[k], dw->w[k]);
            fd.push(dw->s[k], dw->finite_difference[k]);
            weighted.push(dw->s[k], dw->weighted_integral[k]);
        }
        out.push_back(w);
        out.push_back(fd);
        out.push_back(weighted);
    }
    return out;
}

}  // namespace

Artifacts write_artifacts(const RunConfig& config, const Trajectory& traj, const Analysis& a, const fs::path& out) {
    Artifacts art;
    auto emit = [&](const std::string& rel, const std::string& bytes) {
        write_file(out / rel, bytes);
        art.files.push_back(rel);
    };

    std::vector<const TimeSeries*> table;
    for (const auto& s : a.sample_series) table.push_back(&s);
    table.push_back(&a.scalar_evolution);
    table.push_back(&a.scalar_evolution_sampled);
    table.push_back(&a.volume_identity);
    if (a.gauss_bonnet) table.push_back(&*a.gauss_bonnet);
    table.push_back(&a.traceless.sup_norm);
    table.push_back(&a.traceless.l2_squared);
    table.push_back(&a.traceless.cumulative);
    table.push_back(&a.traceless.t_squared_inequality);
    if (a.traceless.r_inequality_checked) table.push_back(&a.traceless.r_inequality);
    emit("trajectory.csv", table_csv(table));

    std::vector<TimeSeries> extra;
    if (!a.mu.empty()) extra.push_back(mu_as_series(a.mu));
    if (a.conjugate) {
        for (auto& s : conjugate_series(*a.conjugate, a.dw ? &*a.dw : nullptr)) extra.push_back(std::move(s));
    }
    std::vector<const TimeSeries*> all = table;
    for (const auto& s : extra) all.push_back(&s);
    for (const auto* s : all) {
        emit("series/" + s->name + ".csv", series_csv(*s));
        emit("plots/" + s->name + ".svg", series_svg(*s));
    }

    emit("report.json", report_json(config, traj, a).dump(2) + "\n");

    json mu = json::array();
    for (const auto& m : a.mu) {
        json e;
        e["t"] = m.t;
        e["result"] = mu_result_to_json(m.result, false);
        mu.push_back(std::move(e));
    }
    json mu_doc;
    mu_doc["config_hash"] = config.hash();
    mu_doc["backend"] = std::string(to_string(config.geometry.backend));
    mu_doc["intervals"] = config.geometry.backend == Backend::axisymmetric ? json(config.geometry.intervals) : json(nullptr);
    mu_doc["tau"] = a.entropy_tau ? json(*a.entropy_tau) : json(nullptr);
    mu_doc["tolerance"] = config.entropy.mu.tolerance;
    mu_doc["max_iterations"] = config.entropy.mu.max_iterations;
    mu_doc["samples"] = std::move(mu);
    if (!a.mu.empty()) mu_doc["final_minimizer_u"] = a.mu.back().result.minimizer_u.values;
    emit("mu.json", mu_doc.dump(2) + "\n");

    if (a.conjugate) {
        json c;
        c["config_hash"] = config.hash();
        c["backend"] = std::string(to_string(config.geometry.backend));
        c["intervals"] =
            config.geometry.backend == Backend::axisymmetric ? json(config.geometry.intervals) : json(nullptr);
        c["pair"] = conjugate_to_json(*a.conjugate, a.dw ? &*a.dw : nullptr);
        emit("conjugate.json", c.dump(2) + "\n");
    }

    json checkpoint;
    checkpoint["format"] = "tauflow-checkpoint";
    checkpoint["tool_version"] = tool_version;
    checkpoint["config_hash"] = config.hash();
    checkpoint["config"] = config.to_json();
    checkpoint["trajectory"] = trajectory_to_json(traj);
    emit("checkpoint.json", checkpoint.dump() + "\n");
    return art;
}

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const fs::path& out, const std::string& config_hash, const std::string& started,
                    double wall_seconds, const std::string& termination, int exit_code, bool complete,
                    const std::string& error, const std::vector<std::string>& files) {
    json m;
    m["tool"] = "tauflow";
    m["tool_version"] = tool_version;
    m["config_hash"] = config_hash;
    m["started_at"] = started;
    m["finished_at"] = utc_now();
    m["wall_seconds"] = wall_seconds;
    m["termination"] = termination;
    m["exit_code"] = exit_code;
    m["complete"] = complete;
    if (!error.empty()) m["error"] = error;
    json inventory = json::array();
    for (const auto& rel : files) {
        const std::string bytes = read_file(out / rel);
        inventory.push_back({{"path", rel}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    m["files"] = std::move(inventory);
    write_file(out / "manifest.json", m.dump(2) + "\n");
}

int exit_status(const Trajectory& traj, const Analysis& a) {
    if (traj.termination != Termination::completed) return exit_singularity;
    if (!a.hypotheses.all_ok()) return exit_hypothesis;
    return exit_ok;
}

int finish(const RunConfig& config, Trajectory& traj, const fs::path& out, std::ostream& log,
           const std::string& started, std::chrono::steady_clock::time_point t0) {
    std::vector<std::string> files;
    try {
        const Analysis a = analyze(config, traj);
        files = write_artifacts(config, traj, a, out).files;
        const int code = exit_status(traj, a);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(out, config.hash(), started, wall, std::string(to_string(traj.termination)), code, true, "",
                       files);
        log << "termination: " << to_string(traj.termination);
        if (!traj.termination_message.empty()) log << " (" << traj.termination_message << ")";
        log << "\nverdict: " << to_string(a.classification.verdict) << " (" << a.classification.reason << ")\n";
        for (const auto& note : a.notes) log << "note: " << note << "\n";
        log << "outputs: " << out.string() << "\n";
        return code;
    } catch (const std::exception& e) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const int code = traj.termination != Termination::completed ? exit_singularity : exit_config;
        write_manifest(out, config.hash(), started, wall, std::string(to_string(traj.termination)), code, false,
                       e.what(), files);
        log << "error: " << e.what() << "\n";
        return code;
    }
}

}  // namespace

int run_experiment(const RunConfig& config, const fs::path& out, std::ostream& log) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out);
    Trajectory traj;
    try {
        traj = simulate(config);
    } catch (const std::exception& e) {
        // Invalid initial data or step control: nothing to analyze.
        write_manifest(out, config.hash(), started, 0.0, "not_started", exit_config, false, e.what(), {});
        log << "error: " << e.what() << "\n";
        return exit_config;
    }
    return finish(config, traj, out, log, started, t0);
}

int resume_experiment(const fs::path& checkpoint, double extra_horizon, const std::optional<fs::path>& out_opt,
                      std::ostream& log) {
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    if (!(extra_horizon >= 0.0)) {
        log << "error: extra horizon must be >= 0\n";
        return exit_config;
    }
    std::string bytes;
    json manifest;
    try {
        bytes = read_file(checkpoint);
        manifest = json::parse(read_file(checkpoint.parent_path() / "manifest.json"));
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_config;
    }
    const std::string name = checkpoint.filename().string();
    std::string recorded;
    for (const auto& f : manifest.at("files")) {
        if (f.at("path").get<std::string>() == name) recorded = f.at("sha256").get<std::string>();
    }
    if (recorded.empty() || recorded != sha256_hex(bytes)) {
        log << "error: checkpoint digest does not match manifest; refusing to resume\n";
        return exit_config;
    }

    RunConfig config;
    Trajectory traj;
    try {
        const json doc = json::parse(bytes);
        config = RunConfig::from_json(doc.at("config"));
        if (config.hash() != doc.at("config_hash").get<std::string>()) {
            log << "error: checkpoint config does not match its recorded hash\n";
            return exit_config;
        }
        traj = trajectory_from_json(doc.at("trajectory"));
    } catch (const std::exception& e) {
        log << "error: malformed checkpoint: " << e.what() << "\n";
        return exit_config;
    }
    if (traj.termination != Termination::completed) {
        log << "error: cannot resume a run that stopped early\n";
        return exit_singularity;
    }
    config.flow.horizon += extra_horizon;
    const fs::path out = out_opt ? *out_opt : checkpoint.parent_path();
    fs::create_directories(out);
    EvolveOptions options;
    options.volume_target = config.flow.volume_target;
    options.blowup_curvature = config.flow.blowup_curvature;
    extend(traj, extra_horizon, config.flow.step, options);
    return finish(config, traj, out, log, started, t0);
}

namespace {

struct CheckLine {
    std::string name;
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

RunConfig refined(const RunConfig& c) {
    RunConfig r = c;
    if (r.geometry.backend == Backend::axisymmetric) {
        r.geometry.intervals *= 2;
        r.flow.step.dt /= 4.0;
    } else {
        r.flow.step.dt /= 2.0;
    }
    r.flow.output_interval /= 2.0;
    return r;
}

RunConfig shortened(const RunConfig& c) {
    RunConfig s = c;
    s.flow.horizon = std::min(c.flow.horizon, c.verify.horizon);
    s.entropy.mu_cadence = std::min(c.entropy.mu_cadence, s.flow.horizon / 4.0);
    // Whole conjugate steps inside half the short run.
    const double steps = std::floor(0.5 * s.flow.horizon / s.entropy.conjugate_step);
    s.entropy.window = std::min(c.entropy.window, steps * s.entropy.conjugate_step);
    s.output_directory = c.output_directory;
    return s;
}

// Residuals below this are rounding, so refinement cannot be expected to reduce them.
constexpr double noise_floor = 1e-8;

// Max |u_coarse - u_fine| over coarse nodes at the last common sample.
double spatial_disagreement(const Trajectory& coarse, const Trajectory& fine) {
    const auto uc = reduced_unknowns(coarse.samples.back().metric);
    const auto uf = reduced_unknowns(fine.samples.back().metric);
    const std::size_t stride = uc.size() > 1 ? (uf.size() - 1) / (uc.size() - 1) : 1;
    double worst = 0.0;
    for (std::size_t k = 0; k < uc.size(); ++k) worst = std::max(worst, std::abs(uc[k] - uf[k * stride]));
    return worst;
}

std::vector<CheckLine> verify_one(const RunConfig& base) {
    std::vector<CheckLine> lines;
    const RunConfig coarse = shortened(base);
    const RunConfig fine = refined(coarse);
    const Trajectory tc = simulate(coarse);
    const Trajectory tf = simulate(fine);
    const Analysis ac = analyze(coarse, tc);
    const Analysis af = analyze(fine, tf);
    const auto& d = base.diagnostics;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        lines.push_back({name, pass, detail});
    };

    add("termination", tc.termination == Termination::completed && tf.termination == Termination::completed,
        std::string(to_string(tf.termination)));
    if (af.gauss_bonnet) {
        const double v = std::max(ac.gauss_bonnet->max_abs(), af.gauss_bonnet->max_abs());
        add("gauss_bonnet", v <= 1e-5, fmt(v) + " <= 1e-5");
    }
    {
        const double v = af.volume_identity.max_abs();
        add("volume_identity", v <= d.identity_tolerance, fmt(v) + " <= " + fmt(d.identity_tolerance));
        const double c = ac.volume_identity.max_abs();
        add("volume_identity_refinement", v < c || v <= noise_floor, fmt(c) + " -> " + fmt(v));
    }
    {
        const double v = af.scalar_evolution.max_abs();
        add("scalar_evolution", v <= d.identity_tolerance, fmt(v) + " <= " + fmt(d.identity_tolerance));
        const double c = ac.scalar_evolution.max_abs();
        add("scalar_evolution_refinement", v < c || v <= noise_floor, fmt(c) + " -> " + fmt(v));
    }
    if (af.traceless.r_inequality_checked) {
        const double v = af.traceless.r_inequality.min();
        add("r_inequality", v >= -d.identity_tolerance, fmt(v) + " >= " + fmt(-d.identity_tolerance));
    }
    if (tc.termination == Termination::completed && tf.termination == Termination::completed) {
        const double v = spatial_disagreement(tc, tf);
        add("resolution_agreement", v <= d.identity_tolerance, fmt(v) + " <= " + fmt(d.identity_tolerance));
    }
    add("min_scalar_monitor", !af.min_scalar.violated, af.min_scalar.violated ? "violated" : "ok");
    if (base.flow.kind == FlowKind::Type::ricci_normalized) {
        const double v0 = volume(tf.samples.front().metric), v1 = volume(tf.samples.back().metric);
        const double drift = std::abs(v1 - v0) / v0;
        add("normalized_volume", drift <= 1e-6, fmt(drift) + " <= 1e-6");
    }
    if (!af.mu.empty()) {
        add("mu_converged", af.mu_converged && ac.mu_converged, af.mu_converged ? "ok" : "unconverged solves");
        if (base.flow.kind == FlowKind::Type::tau_flow) {
            add("mu_monotone", af.mu_max_decrease <= d.monotonicity_tolerance,
                fmt(af.mu_max_decrease) + " <= " + fmt(d.monotonicity_tolerance));
        }
    }
    if (af.conjugate) {
        const double v = af.conjugate->max_constraint_deviation();
        add("conjugate_normalization", v <= 1e-6, fmt(v) + " <= 1e-6");
    }
    if (af.dw && base.flow.kind == FlowKind::Type::tau_flow) {
        add("dW_nonnegative", af.dw->min_value >= -1e-8, fmt(af.dw->min_value) + " >= -1e-8");
    }
    return lines;
}

}  // namespace

int verify_configs(const std::vector<std::string>& paths, ToleranceProfile profile, std::ostream& log) {
    if (paths.empty()) {
        log << "usage error: verify needs at least one --config\n";
        return exit_config;
    }
    bool all = true;
    for (const auto& path : paths) {
        RunConfig config;
        try {
            config = RunConfig::load(path);
            apply_profile(config, profile);
        } catch (const std::exception& e) {
            log << "FAIL " << path << ": config: " << e.what() << "\n";
            all = false;
            continue;
        }
        try {
            for (const auto& line : verify_one(config)) {
                log << (line.pass ? "PASS " : "FAIL ") << path << ": " << line.name << " (" << line.detail << ")\n";
                all = all && line.pass;
            }
        } catch (const std::exception& e) {
            log << "FAIL " << path << ": " << e.what() << "\n";
            all = false;
        }
    }
    return all ? exit_ok : exit_checks_failed;
}

int report_directory(const fs::path& dir, std::ostream& log) {
    json manifest, report;
    try {
        manifest = json::parse(read_file(dir / "manifest.json"));
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return exit_config;
    }
    bool intact = true;
    for (const auto& f : manifest.at("files")) {
        const std::string rel = f.at("path").get<std::string>();
        std::string digest;
        try {
            digest = sha256_hex(read_file(dir / rel));
        } catch (const std::exception&) {
            digest = "missing";
        }
        if (digest != f.at("sha256").get<std::string>()) {
            log << "digest mismatch: " << rel << "\n";
            intact = false;
        }
    }
    log << "config " << manifest.at("config_hash").get<std::string>() << "\n";
    log << "complete " << (manifest.at("complete").get<bool>() ? "yes" : "no") << ", exit "
        << manifest.at("exit_code").get<int>() << ", termination " << manifest.at("termination").get<std::string>()
        << "\n";
    try {
        report = json::parse(read_file(dir / "report.json"));
    } catch (const std::exception&) {
        log << "no report.json\n";
        return intact ? exit_ok : exit_config;
    }
    const auto& c = report.at("classification");
    log << "verdict " << c.at("verdict").get<std::string>() << " (" << c.at("reason").get<std::string>() << ")\n";
    for (const auto& [name, check] : report.at("checks").items()) {
        if (check.is_object() && check.contains("pass")) {
            log << (check.at("pass").get<bool>() ? "  ok   " : "  FAIL ") << name << " " << check.at("value").dump()
                << "\n";
        }
    }
    for (const auto& note : report.at("notes")) log << "note: " << note.get<std::string>() << "\n";
    return intact ? exit_ok : exit_config;
}

}  // namespace tauflow
