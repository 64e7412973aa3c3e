// QAOA for graph k-coloring in two encodings, plus the photonic cluster-state
// resource model.
//
// Conventions shared by both encodings:
//   * the cost of a coloring counts each undirected edge once; the qubit
//     one-hot cost is  C sum_n (1 - sum_i x_{n,i})^2 + D (monochromatic edges),
//     so ZZ coefficients are half of what the full adjacency double sum would
//     give (C/2 vertex terms, D/4 edge terms);
//   * basis indices are big-endian: vertex 0 (or qubit (0,0)) is the most
//     significant digit;
//   * the qudit cost Hamiltonian has eigenvalue k per monochromatic edge, and
//     its layer factorizes exactly into one CX P CX^dag block per edge with
//     P|x> = e^{i alpha k}|x> iff x = 0 (no global-phase mismatch).

#pragma once

#include "qdlo/common.hpp"
#include "qdlo/mbqc.hpp"
#include "qdlo/optim.hpp"
#include "qdlo/qudit.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

namespace qdlo::kcolor {

struct ColoringInstance {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;
    int k = 2;
    double c_weight = 1.0;  // one-hot penalty (qubit encoding only)
    double d_weight = 1.0;  // monochromatic-edge weight (qubit encoding only)

    void validate() const {
        if (vertices < 1) throw std::invalid_argument("instance needs at least one vertex");
        if (k < 2) throw std::invalid_argument("color count must be >= 2");
        if (c_weight <= 0 || d_weight <= 0) throw std::invalid_argument("penalty weights must be positive");
        std::set<std::pair<int, int>> seen;
        for (auto [a, b] : edges) {
            if (a == b) throw std::invalid_argument("self-loop edge");
            if (a < 0 || b < 0 || a >= vertices || b >= vertices)
                throw std::invalid_argument("edge endpoint out of range");
            if (!seen.insert(std::minmax(a, b)).second) throw std::invalid_argument("duplicate edge");
        }
    }

    int max_degree() const {
        std::vector<int> deg(static_cast<std::size_t>(vertices), 0);
        for (auto [a, b] : edges) {
            deg[static_cast<std::size_t>(a)]++;
            deg[static_cast<std::size_t>(b)]++;
        }
        return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    }

    // One-hot penalty dominance: C > D * maxdeg guarantees that ground states
    // are valid colorings.
    bool penalty_dominates() const { return c_weight > d_weight * max_degree(); }
};

inline ColoringInstance triangle(int k) {
    ColoringInstance g;
    g.vertices = 3;
    g.edges = {{0, 1}, {1, 2}, {0, 2}};
    g.k = k;
    return g;
}

inline ColoringInstance parse_edge_list(const std::string& text, int k) {
    ColoringInstance g;
    g.k = k;
    std::istringstream in(text);
    std::string line;
    int max_v = -1;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        long a, b;
        if (!(ls >> a)) continue;  // blank line
        if (!(ls >> b)) throw std::invalid_argument("edge line needs two vertex ids");
        g.edges.push_back({static_cast<int>(a), static_cast<int>(b)});
        max_v = std::max(max_v, static_cast<int>(std::max(a, b)));
    }
    g.vertices = max_v + 1;
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Qubit (one-hot) encoding.  Bit (n, i) lives on qubit n*k + i.

inline int monochromatic_edges(const std::vector<int>& coloring, const ColoringInstance& g) {
    int count = 0;
    for (auto [a, b] : g.edges)
        if (coloring[static_cast<std::size_t>(a)] == coloring[static_cast<std::size_t>(b)]) ++count;
    return count;
}

inline double binary_cost(const std::vector<int>& bits, const ColoringInstance& g) {
    g.validate();
    if (static_cast<int>(bits.size()) != g.vertices * g.k)
        throw std::invalid_argument("bit string length must be k * |V|");
    auto bit = [&](int n, int i) { return bits[static_cast<std::size_t>(n * g.k + i)]; };
    double penalty = 0.0;
    for (int n = 0; n < g.vertices; ++n) {
        int ones = 0;
        for (int i = 0; i < g.k; ++i) ones += bit(n, i);
        penalty += (1.0 - ones) * (1.0 - ones);
    }
    double clashes = 0.0;
    for (auto [a, b] : g.edges)
        for (int i = 0; i < g.k; ++i) clashes += bit(a, i) * bit(b, i);
    return g.c_weight * penalty + g.d_weight * clashes;
}

inline std::vector<int> index_bits(std::uint64_t index, int n_bits) {
    std::vector<int> bits(static_cast<std::size_t>(n_bits));
    for (int q = 0; q < n_bits; ++q)
        bits[static_cast<std::size_t>(q)] = static_cast<int>((index >> (n_bits - 1 - q)) & 1u);
    return bits;
}

// Diagonal of the one-hot cost Hamiltonian, assembled from Pauli-Z terms.
inline RVec qubit_cost_hamiltonian(const ColoringInstance& g) {
    g.validate();
    const int n_bits = g.vertices * g.k;
    if (n_bits > 14) throw CapError("qubit register exceeds the 14-qubit cap");
    const std::uint64_t dim = 1ull << n_bits;
    RVec diag(static_cast<Eigen::Index>(dim));
    for (std::uint64_t x = 0; x < dim; ++x) {
        auto z = [&](int n, int i) {
            return 1.0 - 2.0 * static_cast<double>((x >> (n_bits - 1 - (n * g.k + i))) & 1u);
        };
        double value = 0.0;
        for (int n = 0; n < g.vertices; ++n) {
            double zsum = 0.0;
            for (int i = 0; i < g.k; ++i) zsum += z(n, i);
            const double t = (2.0 - g.k) + zsum;
            value += g.c_weight / 4.0 * t * t;
        }
        for (auto [a, b] : g.edges)
            for (int i = 0; i < g.k; ++i)
                value += g.d_weight / 4.0 * (1.0 - z(a, i)) * (1.0 - z(b, i));
        diag(static_cast<Eigen::Index>(x)) = value;
    }
    return diag;
}

// Interacting (ZZ) part H1; the remainder H0 = H_C - H1 holds the single-Z
// and constant terms.
inline RVec qubit_interacting_part(const ColoringInstance& g) {
    const int n_bits = g.vertices * g.k;
    if (n_bits > 14) throw CapError("qubit register exceeds the 14-qubit cap");
    const std::uint64_t dim = 1ull << n_bits;
    RVec diag(static_cast<Eigen::Index>(dim));
    for (std::uint64_t x = 0; x < dim; ++x) {
        auto z = [&](int n, int i) {
            return 1.0 - 2.0 * static_cast<double>((x >> (n_bits - 1 - (n * g.k + i))) & 1u);
        };
        double value = 0.0;
        for (int n = 0; n < g.vertices; ++n)
            for (int i = 0; i < g.k; ++i)
                for (int j = i + 1; j < g.k; ++j) value += g.c_weight / 2.0 * z(n, i) * z(n, j);
        for (auto [a, b] : g.edges)
            for (int i = 0; i < g.k; ++i) value += g.d_weight / 4.0 * z(a, i) * z(b, i);
        diag(static_cast<Eigen::Index>(x)) = value;
    }
    return diag;
}

struct LayerCheck {
    Vec diagonal;           // the gate-product form
    std::size_t gate_count = 0;
    double max_deviation = 0.0;  // against the matrix exponential
};

// e^{i beta H1} built both as elementwise exponential and as the product of
// |V| C(k,2) + k |E| controlled-rotation blocks CX P CX; asserts agreement.
inline LayerCheck qubit_layer_unitary(double beta, const ColoringInstance& g) {
    g.validate();
    const int n_bits = g.vertices * g.k;
    if (n_bits > 12) throw CapError("qubit layer exceeds the 12-qubit cap");
    const std::uint64_t dim = 1ull << n_bits;

    struct Block {
        int control;
        int target;
        double angle;  // P(angle) = exp(i angle Z_target)
    };
    std::vector<Block> blocks;
    for (int n = 0; n < g.vertices; ++n)
        for (int i = 0; i < g.k; ++i)
            for (int j = i + 1; j < g.k; ++j)
                blocks.push_back({n * g.k + i, n * g.k + j, beta * g.c_weight / 2.0});
    for (auto [a, b] : g.edges)
        for (int i = 0; i < g.k; ++i)
            blocks.push_back({a * g.k + i, b * g.k + i, beta * g.d_weight / 4.0});

    LayerCheck out;
    out.gate_count = blocks.size();
    out.diagonal.resize(static_cast<Eigen::Index>(dim));
    for (std::uint64_t x = 0; x < dim; ++x) {
        std::uint64_t y = x;
        double phase = 0.0;
        for (const auto& blk : blocks) {
            const std::uint64_t cbit = (y >> (n_bits - 1 - blk.control)) & 1u;
            const std::uint64_t tmask = 1ull << (n_bits - 1 - blk.target);
            if (cbit) y ^= tmask;  // CX
            phase += blk.angle * (1.0 - 2.0 * static_cast<double>((y & tmask) != 0));
            if (cbit) y ^= tmask;  // CX
        }
        if (y != x) throw VerificationError("qubit layer product is not diagonal");
        out.diagonal(static_cast<Eigen::Index>(x)) = std::exp(cd(0, phase));
    }

    RVec h1 = qubit_interacting_part(g);
    for (std::uint64_t x = 0; x < dim; ++x) {
        const cd ref = std::exp(cd(0, beta * h1(static_cast<Eigen::Index>(x))));
        out.max_deviation =
            std::max(out.max_deviation, std::abs(out.diagonal(static_cast<Eigen::Index>(x)) - ref));
    }
    if (out.max_deviation > 1e-10)
        throw VerificationError("qubit layer product deviates from exp(i beta H1)");
    return out;
}

// ---------------------------------------------------------------------------
// Qudit encoding (d = k): coloring strings are basis states directly.

inline std::vector<int> index_coloring(std::uint64_t index, int vertices, int k) {
    std::vector<int> c(static_cast<std::size_t>(vertices));
    for (int v = vertices - 1; v >= 0; --v) {
        c[static_cast<std::size_t>(v)] = static_cast<int>(index % static_cast<std::uint64_t>(k));
        index /= static_cast<std::uint64_t>(k);
    }
    return c;
}

inline std::uint64_t qudit_dimension(const ColoringInstance& g) {
    double dim = std::pow(static_cast<double>(g.k), g.vertices);
    if (dim > 59049.0) throw CapError("qudit register exceeds the 3^10 cap");
    return static_cast<std::uint64_t>(dim + 0.5);
}

// Diagonal: k per monochromatic edge.
inline RVec qudit_cost_hamiltonian(const ColoringInstance& g) {
    g.validate();
    const std::uint64_t dim = qudit_dimension(g);
    RVec diag(static_cast<Eigen::Index>(dim));
    for (std::uint64_t x = 0; x < dim; ++x) {
        auto coloring = index_coloring(x, g.vertices, g.k);
        diag(static_cast<Eigen::Index>(x)) = static_cast<double>(g.k * monochromatic_edges(coloring, g));
    }
    return diag;
}

// e^{i alpha H_C} as a product of one CX P CX^dag block per edge, with
// P|x> = e^{i alpha k} |x> iff x = 0.  Exactly equal to the exponential.
inline LayerCheck qudit_layer_unitary(double alpha, const ColoringInstance& g) {
    g.validate();
    const std::uint64_t dim = qudit_dimension(g);
    LayerCheck out;
    out.gate_count = g.edges.size();
    out.diagonal.resize(static_cast<Eigen::Index>(dim));
    for (std::uint64_t x = 0; x < dim; ++x) {
        auto digits = index_coloring(x, g.vertices, g.k);
        double phase = 0.0;
        for (auto [a, b] : g.edges) {
            int db = digits[static_cast<std::size_t>(b)];
            db = ((db - digits[static_cast<std::size_t>(a)]) % g.k + g.k) % g.k;  // CX^dag
            if (db == 0) phase += alpha * g.k;                                    // P
            // CX restores digits
        }
        out.diagonal(static_cast<Eigen::Index>(x)) = std::exp(cd(0, phase));
    }
    RVec hc = qudit_cost_hamiltonian(g);
    for (std::uint64_t x = 0; x < dim; ++x) {
        const cd ref = std::exp(cd(0, alpha * hc(static_cast<Eigen::Index>(x))));
        out.max_deviation =
            std::max(out.max_deviation, std::abs(out.diagonal(static_cast<Eigen::Index>(x)) - ref));
    }
    if (out.max_deviation > 1e-10)
        throw VerificationError("qudit layer product deviates from exp(i alpha H_C)");
    return out;
}

// ---------------------------------------------------------------------------
// QAOA driver.

enum class Formulation { Qubit, Qudit };

struct QaoaConfig {
    Formulation formulation = Formulation::Qudit;
    int layers = 1;
    int budget = 200;  // objective evaluations for the classical outer loop
    std::uint64_t seed = 1;
    int mixer_range = 1;  // r of the r-nearby-values qudit mixer
};

struct QaoaResult {
    RVec best_parameters;  // [alpha_1..alpha_p, beta_1..beta_p]
    double initial_energy = 0.0;
    double best_energy = 0.0;
    double success_probability = 0.0;  // mass on proper colorings at the optimum
    double baseline_probability = 0.0; // mass on proper colorings in |+>^N
    int evaluations = 0;
    std::vector<double> energy_trace;  // best-so-far per evaluation
};

namespace detail {

inline bool is_proper(const std::vector<int>& coloring, const ColoringInstance& g) {
    return monochromatic_edges(coloring, g) == 0;
}

struct Simulator {
    const ColoringInstance& g;
    Formulation form;
    int mixer_range;
    int sites = 0;   // qubits or qudits
    int d = 2;
    Eigen::Index dim = 0;
    RVec cost;       // diagonal cost Hamiltonian
    Mat mixer_gate;  // single-site e^{i alpha h}, rebuilt per alpha
    std::vector<bool> proper;

    Simulator(const ColoringInstance& g_, Formulation f, int r) : g(g_), form(f), mixer_range(r) {
        if (form == Formulation::Qubit) {
            sites = g.vertices * g.k;
            d = 2;
            cost = qubit_cost_hamiltonian(g);
        } else {
            sites = g.vertices;
            d = g.k;
            cost = qudit_cost_hamiltonian(g);
        }
        dim = cost.size();
        proper.resize(static_cast<std::size_t>(dim));
        for (Eigen::Index x = 0; x < dim; ++x) {
            if (form == Formulation::Qudit) {
                proper[static_cast<std::size_t>(x)] =
                    is_proper(index_coloring(static_cast<std::uint64_t>(x), g.vertices, g.k), g);
            } else {
                auto bits = index_bits(static_cast<std::uint64_t>(x), sites);
                std::vector<int> coloring(static_cast<std::size_t>(g.vertices), -1);
                bool onehot = true;
                for (int n = 0; n < g.vertices && onehot; ++n) {
                    int found = -1;
                    for (int i = 0; i < g.k; ++i) {
                        if (!bits[static_cast<std::size_t>(n * g.k + i)]) continue;
                        if (found >= 0) {
                            onehot = false;
                            break;
                        }
                        found = i;
                    }
                    if (found < 0) onehot = false;
                    coloring[static_cast<std::size_t>(n)] = found;
                }
                proper[static_cast<std::size_t>(x)] = onehot && is_proper(coloring, g);
            }
        }
    }

    Vec plus_state() const {
        return Vec::Constant(dim, cd(1.0 / std::sqrt(static_cast<double>(dim)), 0));
    }

    Mat single_site_mixer(double alpha) const {
        if (form == Formulation::Qubit) {
            Mat m(2, 2);
            m << std::cos(alpha), cd(0, 1) * std::sin(alpha), cd(0, 1) * std::sin(alpha), std::cos(alpha);
            return m;  // e^{i alpha X}
        }
        // e^{i alpha h}, h = sum_{i=1..r} (X^i + X^{-i}) = H^dag diag(mu) H
        Mat h = qudit::hadamard(d).m;
        Vec phases(d);
        for (int n = 0; n < d; ++n) {
            double mu = 0.0;
            for (int i = 1; i <= mixer_range; ++i) mu += 2.0 * std::cos(2.0 * kPi * n * i / d);
            phases(n) = std::exp(cd(0, alpha * mu));
        }
        return h.adjoint() * phases.asDiagonal() * h;
    }

    void apply_single_all(Vec& psi, const Mat& gate) const {
        Vec scratch(d);
        for (int site = 0; site < sites; ++site) {
            Eigen::Index st = 1;
            for (int i = sites - 1; i > site; --i) st *= d;
            const Eigen::Index block = st * d;
            for (Eigen::Index base = 0; base < psi.size(); base += block) {
                for (Eigen::Index off = 0; off < st; ++off) {
                    for (int l = 0; l < d; ++l) scratch(l) = psi(base + l * st + off);
                    for (int l = 0; l < d; ++l) {
                        cd v(0, 0);
                        for (int kk = 0; kk < d; ++kk) v += gate(l, kk) * scratch(kk);
                        psi(base + l * st + off) = v;
                    }
                }
            }
        }
    }

    Vec evolve(const RVec& params, int p) const {
        Vec psi = plus_state();
        for (int layer = 0; layer < p; ++layer) {
            const double alpha = params(layer);
            const double beta = params(p + layer);
            for (Eigen::Index x = 0; x < dim; ++x) psi(x) *= std::exp(cd(0, beta * cost(x)));
            apply_single_all(psi, single_site_mixer(alpha));
        }
        return psi;
    }

    double energy(const Vec& psi) const {
        double e = 0.0;
        for (Eigen::Index x = 0; x < dim; ++x) e += cost(x) * std::norm(psi(x));
        return e;
    }

    double success(const Vec& psi) const {
        double s = 0.0;
        for (Eigen::Index x = 0; x < dim; ++x)
            if (proper[static_cast<std::size_t>(x)]) s += std::norm(psi(x));
        return s;
    }
};

}  // namespace detail

inline QaoaResult run_qaoa(const ColoringInstance& g, const QaoaConfig& cfg) {
    g.validate();
    if (cfg.layers < 0 || cfg.budget < 0) throw std::invalid_argument("layers and budget must be >= 0");
    detail::Simulator sim(g, cfg.formulation, cfg.mixer_range);
    QaoaResult res;
    res.baseline_probability = sim.success(sim.plus_state());

    const int p = cfg.layers;
    if (p == 0) {
        Vec psi = sim.plus_state();
        res.initial_energy = res.best_energy = sim.energy(psi);
        res.success_probability = res.baseline_probability;
        res.best_parameters = RVec::Zero(0);
        return res;
    }

    Rng rng(cfg.seed);
    auto objective = [&](const RVec& x) { return sim.energy(sim.evolve(x, p)); };

    RVec best_x = RVec::Zero(2 * p);
    double best_e = std::numeric_limits<double>::infinity();
    bool first = true;
    int used = 0;
    while (used < cfg.budget || first) {
        RVec x0(2 * p);
        for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(0.0, 2.0 * kPi);
        if (first) {
            res.initial_energy = objective(x0);
            ++used;
            res.energy_trace.push_back(res.initial_energy);
            if (res.initial_energy < best_e) {
                best_e = res.initial_energy;
                best_x = x0;
            }
            first = false;
            if (cfg.budget == 0) break;
        }
        if (used >= cfg.budget) break;
        auto nm = opt::nelder_mead(objective, x0, 0.6, cfg.budget - used);
        used += nm.evaluations;
        for (double v : nm.trace) res.energy_trace.push_back(std::min(v, best_e));
        if (nm.value < best_e) {
            best_e = nm.value;
            best_x = nm.x;
        }
    }
    res.evaluations = used;
    res.best_energy = best_e;
    res.best_parameters = best_x;
    res.success_probability = sim.success(sim.evolve(best_x, p));
    return res;
}

// ---------------------------------------------------------------------------
// Resource model: cluster sizes for one cost layer.

struct ResourceEstimate {
    std::uint64_t cluster_qudit = 0;  // |C_d| = 8 |E|
    std::uint64_t cluster_qubit = 0;  // |C_2| = 8 C(k,2) |V| + 8 k |E|
    std::optional<double> ratio;      // |C_2| / |C_d|, undefined for empty graphs
    std::uint64_t photons_qudit = 0;
    std::uint64_t photons_qubit = 0;
    std::uint64_t modes_qudit = 0;  // d |C_d|
    std::uint64_t modes_qubit = 0;  // 2 |C_2|
};

inline ResourceEstimate resource_estimate(const ColoringInstance& g) {
    g.validate();
    ResourceEstimate r;
    const std::uint64_t e = g.edges.size();
    const std::uint64_t v = static_cast<std::uint64_t>(g.vertices);
    const std::uint64_t k = static_cast<std::uint64_t>(g.k);
    r.cluster_qudit = 8 * e;
    r.cluster_qubit = 8 * (k * (k - 1) / 2) * v + 8 * k * e;
    if (e > 0) r.ratio = static_cast<double>(r.cluster_qubit) / static_cast<double>(r.cluster_qudit);
    r.photons_qudit = r.cluster_qudit;
    r.photons_qubit = r.cluster_qubit;
    r.modes_qudit = k * r.cluster_qudit;
    r.modes_qubit = 2 * r.cluster_qubit;
    return r;
}

struct SweepRow {
    double edge_probability = 0.0;
    int sample = 0;
    std::uint64_t edges = 0;
    std::uint64_t cluster_qubit = 0;
    std::uint64_t cluster_qudit = 0;
    std::optional<double> ratio;
};

inline std::vector<SweepRow> er_graph_sweep(int vertices, int k, const std::vector<double>& probs,
                                            int samples, std::uint64_t seed) {
    if (vertices < 1 || samples < 1) throw std::invalid_argument("sweep needs vertices and samples");
    std::vector<SweepRow> rows;
    Rng master(seed);
    for (std::size_t pi = 0; pi < probs.size(); ++pi) {
        for (int s = 0; s < samples; ++s) {
            Rng rng = master.split(pi * static_cast<std::size_t>(samples) + static_cast<std::size_t>(s));
            ColoringInstance g;
            g.vertices = vertices;
            g.k = k;
            for (int a = 0; a < vertices; ++a)
                for (int b = a + 1; b < vertices; ++b)
                    if (rng.uniform() < probs[pi]) g.edges.push_back({a, b});
            auto est = resource_estimate(g);
            rows.push_back({probs[pi], s, static_cast<std::uint64_t>(g.edges.size()), est.cluster_qubit,
                            est.cluster_qudit, est.ratio});
        }
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "edges,c2,cd,ratio\n";
    for (const auto& r : rows) {
        out << r.edges << "," << r.cluster_qubit << "," << r.cluster_qudit << ",";
        if (r.ratio.has_value())
            out << *r.ratio;
        else
            out << "undefined";
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Cluster-state execution of the qudit cost layer: applies one edge rotation
// through the measured two-wire cluster and compares state evolution against
// the dense diagonal.  Links the MBQC machinery to the QAOA layer.

inline Vec apply_edge_rotation_mbqc(const Vec& reg, int vertices, int d, int site_a, int site_b,
                                    double alpha, std::uint64_t seed) {
    auto [g, pat] = mbqc::compile_zz_rotation(alpha, d);
    const int cluster_extra = g.node_count - 2;  // non-input cluster nodes
    double size = std::pow(static_cast<double>(d), vertices + cluster_extra);
    if (size > static_cast<double>(mbqc::kStateCap))
        throw CapError("register + cluster exceeds the state cap");

    const int in_a = g.wires[0].front();
    const int in_b = g.wires[1].front();
    const int out_a = g.wires[0].back();
    const int out_b = g.wires[1].back();

    // Axis ids: register site s -> 1000 + s, except sites a/b which are the
    // cluster input nodes; remaining cluster nodes keep their own ids.
    auto site_id = [&](int s) {
        if (s == site_a) return in_a;
        if (s == site_b) return in_b;
        return 1000 + s;
    };
    mbqc::RegisterState st;
    st.d = d;
    for (int s = 0; s < vertices; ++s) st.axes.push_back(site_id(s));
    std::vector<int> extra_nodes;
    for (int n = 0; n < g.node_count; ++n)
        if (n != in_a && n != in_b) {
            st.axes.push_back(n);
            extra_nodes.push_back(n);
        }

    const Eigen::Index dim = static_cast<Eigen::Index>(size + 0.5);
    st.amps.resize(dim);
    const int total_axes = vertices + cluster_extra;
    const double plus_norm = std::pow(1.0 / std::sqrt(static_cast<double>(d)), cluster_extra);
    std::vector<cd> omega_pow(static_cast<std::size_t>(d));
    for (int k2 = 0; k2 < d; ++k2)
        omega_pow[static_cast<std::size_t>(k2)] = std::exp(cd(0, 2.0 * kPi * k2 / d));
    std::vector<int> node_axis(static_cast<std::size_t>(g.node_count), -1);
    for (int n = 0; n < g.node_count; ++n) {
        for (std::size_t i = 0; i < st.axes.size(); ++i)
            if (st.axes[i] == n) node_axis[static_cast<std::size_t>(n)] = static_cast<int>(i);
    }

    std::vector<int> digits(static_cast<std::size_t>(total_axes));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rem = idx;
        for (int i = total_axes - 1; i >= 0; --i) {
            digits[static_cast<std::size_t>(i)] = static_cast<int>(rem % d);
            rem /= d;
        }
        Eigen::Index reg_idx = 0;
        for (int s = 0; s < vertices; ++s) reg_idx = reg_idx * d + digits[static_cast<std::size_t>(s)];
        int expo = 0;
        for (const auto& e : g.edges) {
            expo += e.sign * digits[static_cast<std::size_t>(node_axis[static_cast<std::size_t>(e.a)])] *
                    digits[static_cast<std::size_t>(node_axis[static_cast<std::size_t>(e.b)])];
            expo %= d;
        }
        st.amps(idx) = reg(reg_idx) * plus_norm * omega_pow[static_cast<std::size_t>(((expo % d) + d) % d)];
    }

    auto res = mbqc::run_pattern_on(st, g, pat, seed);
    // Frame corrections on the two outputs, then restore register order.
    st.apply_single(mbqc::frame_correction(res.transcript.final_frames[0].a,
                                                   res.transcript.final_frames[0].b, d),
                    st.axis_of(out_a));
    st.apply_single(mbqc::frame_correction(res.transcript.final_frames[1].a,
                                                   res.transcript.final_frames[1].b, d),
                    st.axis_of(out_b));
    std::vector<int> order;
    for (int s = 0; s < vertices; ++s) {
        if (s == site_a)
            order.push_back(out_a);
        else if (s == site_b)
            order.push_back(out_b);
        else
            order.push_back(1000 + s);
    }
    st.permute_to(order);
    return st.amps;
}

// Full cost layer through clusters, one edge at a time.
inline Vec qudit_cost_layer_mbqc(const Vec& reg, const ColoringInstance& g, double alpha,
                                 std::uint64_t seed) {
    g.validate();
    Vec psi = reg;
    std::uint64_t s = seed;
    for (auto [a, b] : g.edges) {
        psi = apply_edge_rotation_mbqc(psi, g.vertices, g.k, a, b, alpha, s++);
    }
    return psi;
}

}  // namespace qdlo::kcolor
