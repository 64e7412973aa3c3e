// qdlo: batch front end for NS-gate synthesis, postselected gate optimization,
// cluster-pattern execution, k-coloring QAOA and the cluster resource model.
//
// Outputs are self-describing JSON/CSV documents embedding the configuration
// and seed; identical (config, seed) runs produce byte-identical files.
// Exit codes: 0 success, 2 parse/validation, 3 size cap, 4 convergence,
// 5 verification.

#include "qdlo/multirail.hpp"
#include "qdlo/serialize.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace qdlo;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitCap = 3;
constexpr int kExitConvergence = 4;
constexpr int kExitVerification = 5;

void write_document(const std::string& path, const std::string& body) {
    if (path.empty() || path == "-") {
        std::cout << body;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file: " + path);
    out << body;
}

void write_json(const std::string& path, const json& doc) { write_document(path, doc.dump(2) + "\n"); }

// Accepts "pi", "2pi/3", "pi/2", "0.75", "1.5pi".
double parse_angle(std::string text) {
    for (auto& ch : text) ch = static_cast<char>(std::tolower(ch));
    double denom = 1.0;
    if (auto slash = text.find('/'); slash != std::string::npos) {
        denom = std::stod(text.substr(slash + 1));
        text = text.substr(0, slash);
    }
    double coeff = 1.0;
    bool has_pi = false;
    if (auto pi_pos = text.find("pi"); pi_pos != std::string::npos) {
        has_pi = true;
        std::string head = text.substr(0, pi_pos);
        if (!head.empty() && head != "+") coeff = (head == "-") ? -1.0 : std::stod(head);
    } else {
        coeff = std::stod(text);
    }
    return coeff * (has_pi ? kPi : 1.0) / denom;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int default_threads() {
    if (const char* env = std::getenv("QDLO_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 0;  // library default: hardware concurrency
}

kcolor::ColoringInstance load_graph(const std::string& path, int k) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        auto j = json::parse(read_file(path));
        auto g = io::instance_from_json(j);
        if (k > 0) g.k = k;
        g.validate();
        return g;
    }
    return kcolor::parse_edge_list(read_file(path), k);
}

// ---------------------------------------------------------------------------

int cmd_ns(const std::string& phi_text, std::uint64_t seed, const std::string& output) {
    const double phi = parse_angle(phi_text);
    auto spec = rail::ns_gate(phi);

    // internal verification: simulated action on random 3-level inputs
    Rng rng(seed);
    double min_fidelity = 1.0;
    for (int rep = 0; rep < 32; ++rep) {
        Vec in(3);
        for (int i = 0; i < 3; ++i) in(i) = cd(rng.gaussian(), rng.gaussian());
        in /= in.norm();
        Vec out = rail::ns_apply(spec, in);
        Vec target(3);
        target << in(0), in(1), std::exp(cd(0, phi)) * in(2);
        min_fidelity = std::min(min_fidelity, std::norm(target.dot(out / out.norm())));
    }

    json doc{{"config", {{"command", "ns"}, {"phi", phi}, {"phi_text", phi_text}, {"seed", seed}}},
             {"u", io::to_json(spec.u)},
             {"u12", spec.u12},
             {"success_probability", spec.success_probability},
             {"simulated_fidelity", min_fidelity}};
    write_json(output, doc);
    return min_fidelity >= 1.0 - 1e-8 ? kExitOk : kExitVerification;
}

synth::SynthesisProblem named_target(const std::string& name, int& na, int& nv) {
    auto fill = [&](int da, int dv) {
        if (na < 0) na = da;
        if (nv < 0) nv = dv;
    };
    if (name == "cz-qubit") {
        fill(2, 0);
        return synth::SynthesisProblem::from_qudit_target(qudit::controlled_z(2), na, nv);
    }
    if (name == "czbar-qutrit") {
        fill(3, 3);
        return synth::SynthesisProblem::from_qudit_target(qudit::one_level_cz(3), na, nv);
    }
    if (name == "cz-qutrit") {
        fill(5, 4);
        return synth::SynthesisProblem::from_qudit_target(qudit::controlled_z(3), na, nv);
    }
    if (name == "ns-pi") {
        fill(1, 1);
        return synth::SynthesisProblem::ns_target(kPi, na, nv);
    }
    if (name == "identity-qubit") {
        fill(0, 0);
        return synth::SynthesisProblem::from_qudit_target(qudit::QuditOperator::identity(2, 1), na, nv);
    }
    throw std::invalid_argument(
        "unknown target '" + name +
        "'; use cz-qubit, czbar-qutrit, cz-qutrit, ns-pi, identity-qubit or pass --config");
}

int cmd_synth(const std::string& target, const std::string& config_path, int na, int nv, int restarts,
              std::uint64_t seed, double sigma, double lambda_init, double stop_at_p, int threads,
              const std::string& output) {
    synth::SynthesisProblem problem;
    if (!config_path.empty()) {
        problem = io::problem_from_json(json::parse(read_file(config_path)));
        if (na >= 0) problem.n_a = na;
        if (nv >= 0) problem.n_v = nv;
    } else {
        problem = named_target(target, na, nv);
    }
    if (restarts > 0) problem.restart_count = restarts;
    problem.seed = seed;
    if (sigma > 0) problem.sigma = sigma;
    if (lambda_init > 0) problem.lambda_init = lambda_init;

    synth::SynthesizeOptions options;
    options.threads = threads;
    if (stop_at_p > 0) options.stop_at_probability = stop_at_p;

    auto result = synth::synthesize(problem, options);

    json doc{{"config",
              {{"command", "synth"},
               {"target", target},
               {"config_file", config_path},
               {"n_a", problem.n_a},
               {"n_v", problem.n_v},
               {"restarts", problem.restart_count},
               {"seed", problem.seed},
               {"sigma", problem.sigma},
               {"lambda_init", problem.lambda_init},
               {"stop_at_probability", stop_at_p}}},
             {"result", io::to_json(result)}};
    write_json(output, doc);
    if (!result.succeeded) return kExitConvergence;
    return result.verified ? kExitOk : kExitVerification;
}

int cmd_mbqc(const std::string& pattern_path, const std::string& inputs_path, std::uint64_t seed,
             const std::string& output) {
    auto [graph, pattern] = io::pattern_from_json(json::parse(read_file(pattern_path)));
    Vec inputs;
    if (inputs_path.empty()) {
        // default: |+> on every logical input
        const auto dim = static_cast<Eigen::Index>(powi(graph.d, static_cast<int>(graph.wires.size())));
        inputs = Vec::Constant(dim, cd(1.0 / std::sqrt(static_cast<double>(dim)), 0));
    } else {
        inputs = io::vec_from_json(json::parse(read_file(inputs_path)).at("amplitudes"));
    }
    auto res = mbqc::run_pattern(graph, pattern, inputs, seed);
    json doc{{"config",
              {{"command", "mbqc"}, {"pattern", pattern_path}, {"inputs", inputs_path}, {"seed", seed}}},
             {"result", io::to_json(res)}};
    write_json(output, doc);
    return kExitOk;
}

int cmd_qaoa(const std::string& graph_path, int k, const std::string& formulation, int layers,
             int budget, std::uint64_t seed, int mixer_range, const std::string& output) {
    auto g = load_graph(graph_path, k);
    kcolor::QaoaConfig cfg;
    cfg.layers = layers;
    cfg.budget = budget;
    cfg.seed = seed;
    cfg.mixer_range = mixer_range;
    if (formulation == "qudit")
        cfg.formulation = kcolor::Formulation::Qudit;
    else if (formulation == "qubit")
        cfg.formulation = kcolor::Formulation::Qubit;
    else
        throw std::invalid_argument("formulation must be 'qudit' or 'qubit'");
    auto res = kcolor::run_qaoa(g, cfg);
    json doc{{"config",
              {{"command", "qaoa"},
               {"graph", graph_path},
               {"k", g.k},
               {"formulation", formulation},
               {"p", layers},
               {"budget", budget},
               {"mixer_range", mixer_range},
               {"seed", seed}}},
             {"instance", io::to_json(g)},
             {"result", io::to_json(res)}};
    write_json(output, doc);
    return kExitOk;
}

int cmd_resources(const std::string& graph_path, int er_vertices, const std::string& probs_text,
                  int samples, int k, std::uint64_t seed, const std::string& output) {
    if (!graph_path.empty()) {
        auto g = load_graph(graph_path, k);
        auto est = kcolor::resource_estimate(g);
        json doc{{"config", {{"command", "resources"}, {"graph", graph_path}, {"k", g.k}, {"seed", seed}}},
                 {"estimate", io::to_json(est)}};
        write_json(output, doc);
        return kExitOk;
    }
    if (er_vertices <= 0) throw std::invalid_argument("provide --graph or --er with --probs");
    std::vector<double> probs;
    std::stringstream ss(probs_text);
    std::string tok;
    while (std::getline(ss, tok, ',')) probs.push_back(std::stod(tok));
    if (probs.empty()) throw std::invalid_argument("--probs needs a comma-separated list");
    auto rows = kcolor::er_graph_sweep(er_vertices, k, probs, samples, seed);
    std::ostringstream body;
    body << "# config: command=resources er=" << er_vertices << " k=" << k << " samples=" << samples
         << " seed=" << seed << " probs=" << probs_text << "\n";
    body << kcolor::sweep_csv(rows);
    write_document(output, body.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-rail photonic qudit toolkit: linear-optical gate synthesis, cluster-state "
                 "simulation and k-coloring QAOA resources"};
    app.require_subcommand(1);

    std::string output = "-";
    app.add_option("-o,--output", output, "Output file (default stdout)")->capture_default_str();

    // ns
    auto* ns = app.add_subcommand("ns", "Nonlinear phase shift: optimal 3-mode interferometer");
    std::string phi_text;
    std::uint64_t ns_seed = 1;
    ns->add_option("--phi", phi_text, "Phase shift, e.g. 'pi', '2pi/3', '0.7'")->required();
    ns->add_option("--seed", ns_seed, "Seed for the fidelity check inputs");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Optimize a postselected linear-optical gate");
    std::string target = "cz-qubit", config_path;
    int na = -1, nv = -1, restarts = 0;
    std::uint64_t synth_seed = 1;
    double sigma = 0, lambda_init = 0, stop_at_p = 0;
    int threads = default_threads();
    synth_cmd->add_option("--target", target,
                          "Named target: cz-qubit, czbar-qutrit, cz-qutrit, ns-pi, identity-qubit");
    synth_cmd->add_option("--config", config_path, "Problem JSON (overrides --target)");
    synth_cmd->add_option("--na", na, "Single-photon ancilla modes");
    synth_cmd->add_option("--nv", nv, "Vacuum ancilla modes");
    synth_cmd->add_option("--restarts", restarts, "Random restarts");
    synth_cmd->add_option("--seed", synth_seed, "Master seed");
    synth_cmd->add_option("--sigma", sigma, "Unitarity penalty weight");
    synth_cmd->add_option("--lambda-init", lambda_init, "First nonzero lambda stage");
    synth_cmd->add_option("--stop-at-p", stop_at_p,
                          "Stop launching restart batches once a verified result reaches this probability");
    synth_cmd->add_option("--threads", threads, "Worker threads (env QDLO_THREADS)");

    // mbqc
    auto* mbqc_cmd = app.add_subcommand("mbqc", "Run a measurement pattern on a cluster state");
    std::string pattern_path, inputs_path;
    std::uint64_t mbqc_seed = 1;
    mbqc_cmd->add_option("--pattern", pattern_path, "Pattern JSON (graph + measurements)")->required();
    mbqc_cmd->add_option("--inputs", inputs_path, "Input state JSON; defaults to |+> inputs");
    mbqc_cmd->add_option("--seed", mbqc_seed, "Measurement sampling seed");

    // qaoa
    auto* qaoa_cmd = app.add_subcommand("qaoa", "k-coloring QAOA (statevector)");
    std::string graph_path, formulation = "qudit";
    int k = 0, layers = 1, budget = 200, mixer_range = 1;
    std::uint64_t qaoa_seed = 1;
    qaoa_cmd->add_option("--graph", graph_path, "Edge list ('u v' per line) or instance JSON")->required();
    qaoa_cmd->add_option("--k", k, "Colors (required for edge lists)");
    qaoa_cmd->add_option("--formulation", formulation, "'qudit' or 'qubit'");
    qaoa_cmd->add_option("--p", layers, "QAOA layers");
    qaoa_cmd->add_option("--budget", budget, "Objective evaluation budget");
    qaoa_cmd->add_option("--seed", qaoa_seed, "Seed");
    qaoa_cmd->add_option("--mixer-range", mixer_range, "r of the qudit r-nearby-values mixer");

    // resources
    auto* res_cmd = app.add_subcommand("resources", "Cluster-size resource model / ER sweep");
    std::string res_graph, probs_text;
    int er_vertices = 0, samples = 1, res_k = 3;
    std::uint64_t res_seed = 1;
    res_cmd->add_option("--graph", res_graph, "Graph file for a single estimate");
    res_cmd->add_option("--er", er_vertices, "Erdos-Renyi vertex count for a sweep");
    res_cmd->add_option("--probs", probs_text, "Comma-separated edge probabilities");
    res_cmd->add_option("--samples", samples, "Samples per probability");
    res_cmd->add_option("--k", res_k, "Colors");
    res_cmd->add_option("--seed", res_seed, "Sweep seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitParse;
    }

    try {
        if (ns->parsed()) return cmd_ns(phi_text, ns_seed, output);
        if (synth_cmd->parsed())
            return cmd_synth(target, config_path, na, nv, restarts, synth_seed, sigma, lambda_init,
                             stop_at_p, threads, output);
        if (mbqc_cmd->parsed()) return cmd_mbqc(pattern_path, inputs_path, mbqc_seed, output);
        if (qaoa_cmd->parsed())
            return cmd_qaoa(graph_path, k, formulation, layers, budget, qaoa_seed, mixer_range, output);
        if (res_cmd->parsed())
            return cmd_resources(res_graph, er_vertices, probs_text, samples, res_k, res_seed, output);
    } catch (const CapError& e) {
        std::cerr << "size cap: " << e.what() << "\n";
        return kExitCap;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const VerificationError& e) {
        std::cerr << "verification: " << e.what() << "\n";
        return kExitVerification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitParse;
}
