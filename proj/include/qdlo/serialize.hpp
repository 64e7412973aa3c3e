// JSON encodings of the public data types, one schema per document kind.
// Complex numbers serialize as [re, im] pairs; matrices row-major.  Documents
// round-trip exactly: doubles are emitted with shortest-round-trip precision.

#pragma once

#include "qdlo/kcolor.hpp"
#include "qdlo/mbqc.hpp"
#include "qdlo/synth.hpp"

#include <json.hpp>

namespace qdlo::io {

using nlohmann::json;

inline json to_json(const cd& z) { return json::array({z.real(), z.imag()}); }

inline cd complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex entries are [re, im]");
    return cd(j[0].get<double>(), j[1].get<double>());
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

inline Vec vec_from_json(const json& j) {
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
    return v;
}

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(row);
    }
    return rows;
}

inline Mat mat_from_json(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) return Mat(0, 0);
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
            throw std::invalid_argument("ragged matrix");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    return m;
}

// --------------------------------------------------------------------------
// Synthesis problems and results.

inline json to_json(const synth::SynthesisProblem& p) {
    json cols = json::array();
    for (const auto& c : p.columns) {
        cols.push_back({{"input", c.input.n}, {"target", to_json(c.target)}});
    }
    return json{{"comp_modes", p.comp_modes}, {"n_a", p.n_a},       {"n_v", p.n_v},
                {"sigma", p.sigma},           {"lambda_init", p.lambda_init},
                {"lambda_factor", p.lambda_factor}, {"lambda_max", p.lambda_max},
                {"restarts", p.restart_count}, {"seed", p.seed},   {"columns", cols}};
}

inline synth::SynthesisProblem problem_from_json(const json& j) {
    synth::SynthesisProblem p;
    p.comp_modes = j.at("comp_modes").get<int>();
    p.n_a = j.at("n_a").get<int>();
    p.n_v = j.at("n_v").get<int>();
    p.sigma = j.value("sigma", 10.0);
    p.lambda_init = j.value("lambda_init", 0.015625);
    p.lambda_factor = j.value("lambda_factor", 2.0);
    p.lambda_max = j.value("lambda_max", 65536.0);
    p.restart_count = j.value("restarts", 20);
    p.seed = j.value("seed", std::uint64_t{1});
    for (const auto& cj : j.at("columns")) {
        synth::SynthesisColumn c;
        c.input = fock::FockState(cj.at("input").get<std::vector<int>>());
        c.target = vec_from_json(cj.at("target"));
        p.columns.push_back(std::move(c));
    }
    return p;
}

inline json to_json(const synth::StageRecord& s) {
    return json{{"lambda", s.lambda}, {"iterations", s.iterations}, {"L", s.L},
                {"F", s.F},           {"P", s.P},                   {"C", s.C},
                {"accepted", s.accepted}};
}

inline json to_json(const synth::SynthesisResult& r) {
    json stages = json::array();
    for (const auto& s : r.stages) stages.push_back(to_json(s));
    json restarts = json::array();
    for (const auto& o : r.outcomes) {
        restarts.push_back({{"index", o.index},
                            {"reached_fidelity", o.reached_fidelity},
                            {"verified", o.verified},
                            {"fidelity", o.fidelity},
                            {"probability", o.probability},
                            {"constraint", o.constraint}});
    }
    return json{{"succeeded", r.succeeded},
                {"fidelity", r.fidelity},
                {"probability", r.probability},
                {"constraint", r.constraint},
                {"verified", r.verified},
                {"restart_index", r.restart_index},
                {"u", to_json(r.u)},
                {"stages", stages},
                {"restarts", restarts}};
}

// --------------------------------------------------------------------------
// Cluster graphs, patterns, transcripts.

inline json to_json(const mbqc::ClusterGraph& g, const mbqc::MeasurementPattern& pat) {
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back(json::array({e.a, e.b, e.sign}));
    json wires = json::array();
    for (const auto& w : g.wires) wires.push_back(w);
    json meas = json::array();
    for (const auto& m : pat.order) {
        std::vector<double> theta(m.theta.data(), m.theta.data() + m.theta.size());
        meas.push_back({{"node", m.node},
                        {"theta", theta},
                        {"variant", m.variant == mbqc::Variant::HdagBasis ? "hdag" : "h"}});
    }
    return json{{"d", g.d}, {"nodes", g.node_count}, {"edges", edges}, {"wires", wires},
                {"measurements", meas}};
}

inline std::pair<mbqc::ClusterGraph, mbqc::MeasurementPattern> pattern_from_json(const json& j) {
    mbqc::ClusterGraph g;
    g.d = j.at("d").get<int>();
    g.node_count = j.at("nodes").get<int>();
    for (const auto& e : j.at("edges"))
        g.edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    for (const auto& w : j.at("wires")) g.wires.push_back(w.get<std::vector<int>>());
    g.validate();
    mbqc::MeasurementPattern pat;
    for (const auto& mj : j.at("measurements")) {
        mbqc::Measurement m;
        m.node = mj.at("node").get<int>();
        auto theta = mj.at("theta").get<std::vector<double>>();
        m.theta = Eigen::Map<const RVec>(theta.data(), static_cast<Eigen::Index>(theta.size()));
        const std::string v = mj.at("variant").get<std::string>();
        if (v == "hdag")
            m.variant = mbqc::Variant::HdagBasis;
        else if (v == "h")
            m.variant = mbqc::Variant::HBasis;
        else
            throw std::invalid_argument("variant must be 'hdag' or 'h'");
        pat.order.push_back(std::move(m));
    }
    return {std::move(g), std::move(pat)};
}

inline json to_json(const mbqc::RunResult& r) {
    json frames = json::array();
    for (const auto& f : r.transcript.final_frames) frames.push_back(json::array({f.a, f.b}));
    return json{{"outcomes", r.transcript.outcomes},
                {"final_frames", frames},
                {"branch_probability", r.transcript.branch_probability},
                {"seed", r.transcript.seed},
                {"output", to_json(r.output)},
                {"corrected", to_json(r.corrected)}};
}

// --------------------------------------------------------------------------
// Coloring instances and QAOA reports.

inline json to_json(const kcolor::ColoringInstance& g) {
    json edges = json::array();
    for (auto [a, b] : g.edges) edges.push_back(json::array({a, b}));
    return json{{"vertices", g.vertices}, {"edges", edges}, {"k", g.k},
                {"c_weight", g.c_weight}, {"d_weight", g.d_weight}};
}

inline kcolor::ColoringInstance instance_from_json(const json& j) {
    kcolor::ColoringInstance g;
    g.vertices = j.at("vertices").get<int>();
    g.k = j.at("k").get<int>();
    g.c_weight = j.value("c_weight", 1.0);
    g.d_weight = j.value("d_weight", 1.0);
    for (const auto& e : j.at("edges")) g.edges.push_back({e[0].get<int>(), e[1].get<int>()});
    g.validate();
    return g;
}

inline json to_json(const kcolor::QaoaResult& r) {
    std::vector<double> params(r.best_parameters.data(),
                               r.best_parameters.data() + r.best_parameters.size());
    return json{{"best_parameters", params},
                {"initial_energy", r.initial_energy},
                {"best_energy", r.best_energy},
                {"success_probability", r.success_probability},
                {"baseline_probability", r.baseline_probability},
                {"evaluations", r.evaluations},
                {"energy_trace", r.energy_trace}};
}

inline json to_json(const kcolor::ResourceEstimate& r) {
    json out{{"cluster_qudit", r.cluster_qudit}, {"cluster_qubit", r.cluster_qubit},
             {"photons_qudit", r.photons_qudit}, {"photons_qubit", r.photons_qubit},
             {"modes_qudit", r.modes_qudit},     {"modes_qubit", r.modes_qubit}};
    if (r.ratio.has_value())
        out["ratio"] = *r.ratio;
    else
        out["ratio"] = "undefined";
    return out;
}

}  // namespace qdlo::io
