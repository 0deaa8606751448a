#include "tauflow/io.hpp"

#include "tauflow/errors.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tauflow {

json metric_to_json(const Metric& m) {
    json j;
    j["backend"] = std::string(to_string(backend_of(m)));
    j["dimension"] = dimension_of(m);
    j["unknowns"] = reduced_unknowns(m);
    return j;
}

Metric metric_from_json(const json& j) {
    const Backend backend = backend_from_string(j.at("backend").get<std::string>());
    const auto x = j.at("unknowns").get<std::vector<double>>();
    switch (backend) {
        case Backend::axisymmetric: return AxisymmetricSphereMetric(x);
        case Backend::round_scale:
            if (x.size() != 1) throw InvalidMetricError("round_scale metric needs one unknown");
            return RoundScaleMetric(j.at("dimension").get<int>(), x[0]);
        case Backend::su2:
            if (x.size() != 3) throw InvalidMetricError("su2 metric needs three unknowns");
            return HomogeneousSU2Metric(x[0], x[1], x[2]);
    }
    throw InvalidMetricError("unknown backend");
}

json state_to_json(const FlowState& s) {
    json j;
    j["t"] = s.t;
    j["metric"] = metric_to_json(s.metric);
    return j;
}

FlowState state_from_json(const json& j) { return {metric_from_json(j.at("metric")), j.at("t").get<double>()}; }

json flow_kind_to_json(const FlowKind& kind) {
    json j;
    j["type"] = std::string(to_string(kind.type()));
    if (kind.tau()) j["tau"] = kind.tau()->value();
    return j;
}

FlowKind flow_kind_from_json(const json& j) {
    switch (flow_type_from_string(j.at("type").get<std::string>())) {
        case FlowKind::Type::tau_flow: return FlowKind::tau_flow(Tau(j.at("tau").get<double>()));
        case FlowKind::Type::ricci_unnormalized: return FlowKind::unnormalized();
        case FlowKind::Type::ricci_normalized: return FlowKind::normalized();
    }
    throw ConfigError("unknown flow kind");
}

namespace {

Termination termination_from_string(const std::string& s) {
    if (s == "completed") return Termination::completed;
    if (s == "singularity") return Termination::singularity;
    if (s == "stiffness") return Termination::stiffness;
    throw ConfigError("unknown termination '" + s + "'");
}

}  // namespace

json trajectory_to_json(const Trajectory& traj) {
    json j;
    j["kind"] = flow_kind_to_json(traj.kind);
    j["output_interval"] = traj.output_interval;
    j["termination"] = std::string(to_string(traj.termination));
    j["termination_message"] = traj.termination_message;
    j["last_valid"] = traj.last_valid ? state_to_json(*traj.last_valid) : json(nullptr);
    j["projections"] = traj.projections;
    j["max_projection_deviation"] = traj.max_projection_deviation;
    j["next_dt"] = traj.next_dt;
    const Metric& first = traj.samples.front().metric;
    j["backend"] = std::string(to_string(backend_of(first)));
    j["dimension"] = dimension_of(first);
    json times = json::array();
    json unknowns = json::array();
    for (const auto& s : traj.samples) {
        times.push_back(s.t);
        unknowns.push_back(reduced_unknowns(s.metric));
    }
    j["times"] = std::move(times);
    j["unknowns"] = std::move(unknowns);
    return j;
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory traj;
    traj.kind = flow_kind_from_json(j.at("kind"));
    traj.output_interval = j.at("output_interval").get<double>();
    traj.termination = termination_from_string(j.at("termination").get<std::string>());
    traj.termination_message = j.at("termination_message").get<std::string>();
    if (!j.at("last_valid").is_null()) traj.last_valid = state_from_json(j.at("last_valid"));
    traj.projections = j.at("projections").get<std::size_t>();
    traj.max_projection_deviation = j.at("max_projection_deviation").get<double>();
    traj.next_dt = j.at("next_dt").get<double>();
    const auto& times = j.at("times");
    const auto& unknowns = j.at("unknowns");
    if (times.size() != unknowns.size() || times.empty()) throw ConfigError("malformed trajectory checkpoint");
    json like;
    like["backend"] = j.at("backend");
    like["dimension"] = j.at("dimension");
    for (std::size_t k = 0; k < times.size(); ++k) {
        like["unknowns"] = unknowns[k];
        traj.samples.push_back({metric_from_json(like), times[k].get<double>()});
    }
    return traj;
}

json mu_result_to_json(const MuResult& r, bool include_field) {
    json j;
    j["mu"] = r.mu;
    j["tau"] = r.tau;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["el_residual_norm"] = r.el_residual_norm;
    j["tolerance"] = r.tolerance;
    if (include_field) j["minimizer_u"] = r.minimizer_u.values;
    return j;
}

json conjugate_to_json(const ConjugatePair& pair, const DwDtCheck* check) {
    json j;
    j["anchor_time"] = pair.anchor_time;
    j["window"] = pair.window;
    j["step"] = pair.step;
    j["tau"] = pair.tau;
    j["max_constraint_deviation"] = pair.max_constraint_deviation();
    json samples = json::array();
    for (std::size_t k = 0; k < pair.samples.size(); ++k) {
        json s;
        s["s"] = pair.samples[k].s;
        s["mass"] = pair.samples[k].mass;
        if (check) {
            s["W"] = check->w[k];
            s["dW_ds"] = check->finite_difference[k];
            s["weighted_residual"] = check->weighted_integral[k];
        }
        samples.push_back(std::move(s));
    }
    j["samples"] = std::move(samples);
    j["f_anchor"] = pair.samples.back().f.values;
    j["f_earliest"] = pair.samples.front().f.values;
    if (check) {
        j["max_abs_difference"] = check->max_abs_difference;
        j["min_value"] = check->min_value;
        j["integrated_rate"] = check->integrated_rate;
        j["w_increment"] = check->w_increment;
    }
    return j;
}

json time_series_to_json(const TimeSeries& s) {
    json j;
    j["name"] = s.name;
    j["units"] = s.units;
    j["t"] = s.t;
    j["value"] = s.value;
    return j;
}

namespace {

json witness_to_json(const HypothesisWitness& w, double bound) {
    json j;
    j["ok"] = w.ok;
    j["bound"] = bound;
    j["extremum"] = w.extremum;
    j["at_time"] = w.at_time;
    j["first_violation"] = w.first_violation ? json(*w.first_violation) : json(nullptr);
    return j;
}

}  // namespace

json hypothesis_to_json(const HypothesisReport& r) {
    json j;
    j["curvature_bound_ok"] = witness_to_json(r.curvature, r.bounds.curvature);
    j["diameter_bound_ok"] = witness_to_json(r.diameter, r.bounds.diameter);
    j["volume_floor_ok"] = witness_to_json(r.volume, r.bounds.volume_floor);
    return j;
}

json classification_to_json(const LimitClassification& c) {
    json j;
    j["verdict"] = std::string(to_string(c.verdict));
    j["reason"] = c.reason;
    j["tau"] = c.tau;
    j["soliton_residual"] = c.soliton_residual;
    j["mu_rate"] = c.mu_rate;
    j["traceless_norm"] = c.traceless_norm;
    j["scalar_deviation"] = c.scalar_deviation;
    j["scalar_gate"] = c.scalar_gate;
    j["window"] = {c.window_start, c.window_end};
    return j;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string series_csv(const TimeSeries& s) {
    std::string out = "t," + s.name + "\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out += format_double(s.t[k]);
        out += ',';
        out += format_double(s.value[k]);
        out += '\n';
    }
    return out;
}

std::string table_csv(const std::vector<const TimeSeries*>& columns) {
    if (columns.empty()) return "t\n";
    const auto& t = columns.front()->t;
    std::string out = "t";
    for (const auto* c : columns) {
        if (c->t.size() != t.size()) throw DomainError("table columns must share a time grid");
        out += ',' + c->name;
    }
    out += '\n';
    for (std::size_t k = 0; k < t.size(); ++k) {
        out += format_double(t[k]);
        for (const auto* c : columns) {
            out += ',';
            out += format_double(c->value[k]);
        }
        out += '\n';
    }
    return out;
}

std::string series_svg(const TimeSeries& s) {
    constexpr double width = 800, height = 500, left = 80, right = 20, top = 40, bottom = 50;
    double tmin = 0, tmax = 1, vmin = 0, vmax = 1;
    bool any = false;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!std::isfinite(s.value[k])) continue;
        if (!any) {
            tmin = tmax = s.t[k];
            vmin = vmax = s.value[k];
            any = true;
        }
        tmin = std::min(tmin, s.t[k]);
        tmax = std::max(tmax, s.t[k]);
        vmin = std::min(vmin, s.value[k]);
        vmax = std::max(vmax, s.value[k]);
    }
    if (tmax <= tmin) tmax = tmin + 1;
    if (vmax <= vmin) {
        const double pad = vmin == 0 ? 1 : std::abs(vmin) * 1e-3;
        vmin -= pad;
        vmax += pad;
    }
    const double pw = width - left - right, ph = height - top - bottom;
    auto x = [&](double t) { return left + (t - tmin) / (tmax - tmin) * pw; };
    auto y = [&](double v) { return top + (vmax - v) / (vmax - vmin) * ph; };
    char buf[160];
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    out << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"#888\"/>\n",
                  left, top, pw, ph);
    out << buf;
    out << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << s.name
        << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", vmax);
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", vmin);
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + ph + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", tmin);
    out << "<text x=\"" << left << "\" y=\"" << height - 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.6g", tmax);
    out << "<text x=\"" << left + pw << "\" y=\"" << height - 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    out << "<text x=\"400\" y=\"490\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (!std::isfinite(s.value[k])) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x(s.t[k]), y(s.value[k]));
        out << buf;
    }
    out << "\"/>\n</svg>\n";
    return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("short write to " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

}  // namespace tauflow
