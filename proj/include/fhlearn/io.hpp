#pragma once

// JSON documents for instances and reports.
//
// Instance, version 1:
//   {"format": "fhlearn-instance", "version": 1, "sites": N,
//    "edges": [[i, j, h], ...], "xi": [xi_0, ...]}
// Reports embed the instance and add config, schedule, counters and per-target
// estimates. Doubles are written in shortest round-trip form, so reading a
// document and writing it back reproduces the bytes.

#include <complex>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fhlearn/harness.hpp"
#include "fhlearn/hamiltonian.hpp"
#include "fhlearn/protocol.hpp"

namespace fhlearn {

using Json = nlohmann::ordered_json;

inline constexpr const char* kInstanceFormat = "fhlearn-instance";
inline constexpr const char* kReportFormat = "fhlearn-report";
inline constexpr int kInstanceVersion = 1;
inline constexpr int kReportVersion = 1;

class DocumentError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void expect_header(const Json& j, const char* format, int version) {
    if (!j.is_object() || !j.contains("format") || j["format"] != format)
        throw DocumentError(std::string("document is not a ") + format);
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != version)
        throw DocumentError(std::string(format) + ": unsupported version");
}

template <class T>
T field(const Json& j, const char* key) {
    if (!j.contains(key)) throw DocumentError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DocumentError(std::string("field '") + key + "': " + e.what());
    }
}

inline const char* mode_name(AcquisitionMode m) { return m == AcquisitionMode::shot ? "shot" : "exact"; }
inline const char* measure_name(MeasureMode m) { return m == MeasureMode::faithful ? "faithful" : "fast-marginal"; }

}  // namespace detail

inline AcquisitionMode parse_acquisition_mode(const std::string& s) {
    if (s == "shot") return AcquisitionMode::shot;
    if (s == "exact") return AcquisitionMode::exact;
    throw std::invalid_argument("unknown mode '" + s + "' (expected shot or exact)");
}

inline MeasureMode parse_measure_mode(const std::string& s) {
    if (s == "faithful") return MeasureMode::faithful;
    if (s == "fast-marginal") return MeasureMode::fast_marginal;
    throw std::invalid_argument("unknown measure mode '" + s + "' (expected faithful or fast-marginal)");
}

inline Json instance_to_json(const HubbardModel& model) {
    Json j;
    j["format"] = kInstanceFormat;
    j["version"] = kInstanceVersion;
    j["sites"] = model.n_sites();
    Json edges = Json::array();
    for (std::size_t k = 0; k < model.graph.edges().size(); ++k) {
        const Edge e = model.graph.edges()[k];
        edges.push_back(Json::array({e.first, e.second, model.hopping.at(k)}));
    }
    j["edges"] = std::move(edges);
    j["xi"] = model.interaction;
    return j;
}

/// Edges may appear in any order and orientation; they are stored sorted.
inline HubbardModel instance_from_json(const Json& j) {
    detail::expect_header(j, kInstanceFormat, kInstanceVersion);
    const int n = detail::field<int>(j, "sites");
    const Json& raw = j.at("edges");
    if (!raw.is_array()) throw DocumentError("field 'edges' must be an array");
    std::vector<std::pair<Edge, double>> entries;
    for (const Json& e : raw) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            !e[2].is_number())
            throw DocumentError("each edge must be [i, j, h]");
        entries.push_back({Edge::of(e[0].get<int>(), e[1].get<int>()), e[2].get<double>()});
    }
    std::vector<Edge> edges;
    for (const auto& [e, h] : entries) edges.push_back(e);
    HubbardModel m{InteractionGraph(n, edges), std::vector<double>(entries.size()), detail::field<std::vector<double>>(j, "xi")};
    for (const auto& [e, h] : entries) m.hopping[m.graph.index_of(e)] = h;
    require_valid(m);
    return m;
}

inline Json config_to_json(const RunConfig& c) {
    Json j;
    j["epsilon"] = c.epsilon;
    j["eta"] = c.eta;
    j["seed"] = c.seed;
    j["mode"] = detail::mode_name(c.mode);
    j["measure_mode"] = detail::measure_name(c.measure_mode);
    j["calibration_constant"] = c.calibration_constant;
    j["out"] = c.out;
    j["allow_large"] = c.allow_large;
    return j;
}

inline RunConfig config_from_json(const Json& j) {
    RunConfig c;
    c.epsilon = detail::field<double>(j, "epsilon");
    c.eta = detail::field<double>(j, "eta");
    c.seed = detail::field<std::uint64_t>(j, "seed");
    c.mode = parse_acquisition_mode(detail::field<std::string>(j, "mode"));
    c.measure_mode = parse_measure_mode(detail::field<std::string>(j, "measure_mode"));
    c.calibration_constant = detail::field<double>(j, "calibration_constant");
    c.out = detail::field<std::string>(j, "out");
    c.allow_large = detail::field<bool>(j, "allow_large");
    return c;
}

inline Json counters_to_json(const CostCounters& c) {
    return Json{{"total_evolution_time", c.total_evolution_time},
                {"experiments", c.experiments},
                {"insertions", c.insertions}};
}

inline CostCounters counters_from_json(const Json& j) {
    return {detail::field<double>(j, "total_evolution_time"), detail::field<std::int64_t>(j, "experiments"),
            detail::field<std::int64_t>(j, "insertions")};
}

inline Json report_to_json(const RunReport& rep) {
    const LearnReport& L = rep.learn;
    Json j;
    j["format"] = kReportFormat;
    j["version"] = kReportVersion;
    j["config"] = config_to_json(rep.config);
    j["instance"] = instance_to_json(rep.instance);
    Json sched;
    sched["levels"] = L.schedule.levels;
    sched["shots"] = L.schedule.shots;
    sched["shots_per_quadrature"] = L.schedule.shots_per_quadrature();
    // one schedule serves every target; halving 2h makes the hopping error half the phase error
    sched["phase_epsilon"] = L.schedule.epsilon;
    sched["hopping_phase_scale"] = 2;
    sched["insertions_per_level"] = level_insertions(L.schedule, rep.config.calibration_constant);
    j["schedule"] = std::move(sched);
    j["num_colors"] = L.num_colors;
    j["passes"] = L.passes;
    j["counters"] = counters_to_json(L.counters);

    const auto errors = rep.errors();
    Json targets = Json::array();
    for (std::size_t i = 0; i < L.targets.size(); ++i) {
        const TargetEstimate& t = L.targets[i];
        Json e;
        if (t.kind == TargetKind::hopping) {
            e["kind"] = "hopping";
            e["edge"] = Json::array({t.edge.first, t.edge.second});
            e["truth"] = rep.instance.hopping_on(t.edge);
        } else {
            e["kind"] = "interaction";
            e["site"] = t.site;
            e["truth"] = rep.instance.interaction.at(t.site);
        }
        e["color"] = t.color;
        e["estimate"] = t.estimate;
        e["error"] = errors[i];
        e["success"] = errors[i] < rep.config.epsilon;
        e["degenerate_levels"] = t.degenerate_levels;
        Json sig = Json::array();
        for (const SignalRecord& s : t.signals) sig.push_back(Json::array({s.level, s.z.real(), s.z.imag(), s.shots_used}));
        e["signals"] = std::move(sig);
        targets.push_back(std::move(e));
    }
    j["targets"] = std::move(targets);
    j["max_error"] = rep.max_error();
    j["all_success"] = rep.all_within_epsilon();
    return j;
}

/// Rebuilds the report; derived fields (errors, success flags) are recomputed
/// when written again.
inline RunReport report_from_json(const Json& j) {
    detail::expect_header(j, kReportFormat, kReportVersion);
    RunReport rep;
    rep.config = config_from_json(j.at("config"));
    rep.instance = instance_from_json(j.at("instance"));
    LearnReport& L = rep.learn;
    L.schedule = rpe_schedule(rep.config.epsilon, rep.config.eta);
    const Json& s = j.at("schedule");
    if (detail::field<int>(s, "levels") != L.schedule.levels || detail::field<int>(s, "shots") != L.schedule.shots)
        throw DocumentError("schedule does not match epsilon and eta");
    L.seed = rep.config.seed;
    L.num_colors = detail::field<int>(j, "num_colors");
    L.passes = detail::field<int>(j, "passes");
    L.counters = counters_from_json(j.at("counters"));
    L.hopping.assign(rep.instance.graph.edges().size(), 0.0);
    L.interaction.assign(rep.instance.n_sites(), 0.0);
    for (const Json& e : j.at("targets")) {
        const auto kind = detail::field<std::string>(e, "kind");
        TargetEstimate t{kind == "hopping" ? TargetKind::hopping : TargetKind::interaction};
        if (kind != "hopping" && kind != "interaction") throw DocumentError("unknown target kind '" + kind + "'");
        t.color = detail::field<int>(e, "color");
        t.estimate = detail::field<double>(e, "estimate");
        t.degenerate_levels = detail::field<int>(e, "degenerate_levels");
        for (const Json& sig : e.at("signals"))
            t.signals.push_back({sig.at(0).get<int>(), {sig.at(1).get<double>(), sig.at(2).get<double>()}, sig.at(3).get<int>()});
        if (t.kind == TargetKind::hopping) {
            const auto ends = detail::field<std::vector<int>>(e, "edge");
            if (ends.size() != 2) throw DocumentError("edge must have two endpoints");
            t.edge = Edge::of(ends[0], ends[1]);
            const int k = rep.instance.graph.index_of(t.edge);
            if (k < 0) throw DocumentError("report target edge not in instance");
            L.hopping[k] = t.estimate;
        } else {
            t.site = detail::field<int>(e, "site");
            if (t.site < 0 || t.site >= rep.instance.n_sites()) throw DocumentError("report target site out of range");
            L.interaction[t.site] = t.estimate;
        }
        L.targets.push_back(std::move(t));
    }
    return rep;
}

/// Two-space indented JSON followed by a newline.
inline std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }

inline Json parse_document(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DocumentError(std::string("malformed JSON: ") + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + path);
}

inline HubbardModel read_instance(const std::string& path) { return instance_from_json(parse_document(read_text_file(path))); }
inline void write_instance(const std::string& path, const HubbardModel& m) {
    write_text_file(path, dump_document(instance_to_json(m)));
}

}  // namespace fhlearn
