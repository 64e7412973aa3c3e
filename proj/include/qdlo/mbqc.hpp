// Qudit cluster states and adaptive single-site measurements.
//
// A cluster graph carries signed edges: +1 applies CZ, -1 applies CZ^dag
// during preparation.  Logical qudits are explicit node chains ("wires");
// consecutive chain nodes teleport the logical state forward, any other edge
// acts as a two-qudit gate between wires.  Measuring a node with angles theta
// applies one factor to its wire:
//   * wire edge +1: measure P(theta) then H^dag, factor X^m H P(theta)
//   * wire edge -1: measure P(theta) then H,     factor X^m H^dag P(theta)
// Byproducts X^a Z^b are tracked per wire and folded into later measurement
// angles; cross edges commute them as CZ^s (X^a Z^b x X^c Z^e) CZ^-s =
// X^a Z^{b+sc} x X^c Z^{e+sa} up to global phase.

#pragma once

#include "qdlo/common.hpp"
#include "qdlo/qudit.hpp"

#include <optional>
#include <set>
#include <utility>

namespace qdlo::mbqc {

inline constexpr int kStateCap = 59049;  // 3^10 amplitudes

struct SignedEdge {
    int a = 0;
    int b = 0;
    int sign = 1;  // +1 CZ, -1 CZ^dag
};

struct ClusterGraph {
    int d = 2;
    int node_count = 0;
    std::vector<SignedEdge> edges;
    std::vector<std::vector<int>> wires;  // node chains; front = input, back = output

    std::vector<int> input_nodes() const {
        std::vector<int> v;
        for (const auto& w : wires) v.push_back(w.front());
        return v;
    }
    std::vector<int> output_nodes() const {
        std::vector<int> v;
        for (const auto& w : wires) v.push_back(w.back());
        return v;
    }

    void validate() const {
        if (d < 2) throw std::invalid_argument("cluster dimension must be >= 2");
        std::vector<int> seen(static_cast<std::size_t>(node_count), 0);
        for (const auto& w : wires) {
            if (w.empty()) throw std::invalid_argument("empty wire");
            for (int n : w) {
                if (n < 0 || n >= node_count) throw std::invalid_argument("wire node out of range");
                if (seen[static_cast<std::size_t>(n)]++) throw std::invalid_argument("node on two wires");
            }
        }
        for (int n = 0; n < node_count; ++n)
            if (!seen[static_cast<std::size_t>(n)]) throw std::invalid_argument("node not on any wire");
        std::vector<int> wire_idx(static_cast<std::size_t>(node_count), -1);
        std::vector<int> wire_pos(static_cast<std::size_t>(node_count), -1);
        for (std::size_t w = 0; w < wires.size(); ++w)
            for (std::size_t i = 0; i < wires[w].size(); ++i) {
                wire_idx[static_cast<std::size_t>(wires[w][i])] = static_cast<int>(w);
                wire_pos[static_cast<std::size_t>(wires[w][i])] = static_cast<int>(i);
            }
        std::set<std::pair<int, int>> pairs;
        for (const auto& e : edges) {
            if (e.a == e.b) throw std::invalid_argument("self-loop edge");
            if (e.a < 0 || e.a >= node_count || e.b < 0 || e.b >= node_count)
                throw std::invalid_argument("edge endpoint out of range");
            if (e.sign != 1 && e.sign != -1) throw std::invalid_argument("edge sign must be +-1");
            auto key = std::minmax(e.a, e.b);
            if (!pairs.insert(key).second) throw std::invalid_argument("duplicate edge");
            if (wire_idx[static_cast<std::size_t>(e.a)] == wire_idx[static_cast<std::size_t>(e.b)] &&
                std::abs(wire_pos[static_cast<std::size_t>(e.a)] - wire_pos[static_cast<std::size_t>(e.b)]) != 1)
                throw std::invalid_argument("same-wire edges must join consecutive nodes");
        }
    }

    // Sign of the edge between consecutive wire nodes a -> b.
    int wire_edge_sign(int a, int b) const {
        for (const auto& e : edges) {
            if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.sign;
        }
        throw std::invalid_argument("missing wire edge");
    }
};

enum class Variant {
    HdagBasis,  // P(theta) then H^dag; factor X^m H P(theta); CZ wire edge
    HBasis,     // P(theta) then H;     factor X^m H^dag P(theta); CZ^dag wire edge
};

struct Measurement {
    int node = 0;
    RVec theta;
    Variant variant = Variant::HdagBasis;
};

struct MeasurementPattern {
    std::vector<Measurement> order;
};

struct PauliFrame {
    int a = 0;
    int b = 0;
};

// Solves  [H or H^dag] P(theta') X^a Z^b = X^{a'} Z^{b'} [H or H^dag] P(theta)
// exactly.  theta' entries are reduced to [0, 2 pi).
struct AdaptedAngles {
    RVec theta;
    PauliFrame frame;  // (a', b') before the new outcome is added
};

inline AdaptedAngles adapt_angles(const RVec& theta, PauliFrame f, Variant variant, int d) {
    if (theta.size() != d) throw std::invalid_argument("theta length must equal d");
    const int a = ((f.a % d) + d) % d;
    const int b = ((f.b % d) + d) % d;
    AdaptedAngles out;
    out.theta.resize(d);
    const double shift = 2.0 * kPi * a * b / d;
    for (int k = 0; k < d; ++k) {
        double v = theta((k - a + d) % d) + shift;
        v = std::fmod(v, 2.0 * kPi);
        if (v < 0) v += 2.0 * kPi;
        out.theta(k) = v;
    }
    if (variant == Variant::HdagBasis) {
        out.frame = PauliFrame{(d - b) % d, a};
    } else {
        out.frame = PauliFrame{b, (d - a) % d};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dense register with named axes.

struct RegisterState {
    int d = 2;
    std::vector<int> axes;  // axis id (node id or spectator id), most significant first
    Vec amps;

    int axis_of(int id) const {
        for (std::size_t i = 0; i < axes.size(); ++i)
            if (axes[i] == id) return static_cast<int>(i);
        throw std::invalid_argument("axis id not present");
    }

    Eigen::Index stride(int axis) const {
        Eigen::Index s = 1;
        for (std::size_t i = axes.size(); i-- > static_cast<std::size_t>(axis) + 1;) s *= d;
        return s;
    }

    void apply_single(const Mat& g, int axis) {
        const Eigen::Index st = stride(axis);
        const Eigen::Index block = st * d;
        Vec scratch(d);
        for (Eigen::Index base = 0; base < amps.size(); base += block) {
            for (Eigen::Index off = 0; off < st; ++off) {
                for (int l = 0; l < d; ++l) scratch(l) = amps(base + l * st + off);
                for (int l = 0; l < d; ++l) {
                    cd v(0, 0);
                    for (int k = 0; k < d; ++k) v += g(l, k) * scratch(k);
                    amps(base + l * st + off) = v;
                }
            }
        }
    }

    // Probabilities of slicing `axis` at each digit.
    RVec axis_probabilities(int axis) const {
        RVec p = RVec::Zero(d);
        const Eigen::Index st = stride(axis);
        const Eigen::Index block = st * d;
        for (Eigen::Index base = 0; base < amps.size(); base += block)
            for (Eigen::Index off = 0; off < st; ++off)
                for (int l = 0; l < d; ++l) p(l) += std::norm(amps(base + l * st + off));
        return p;
    }

    // Keeps digit m of `axis`, removes the axis, renormalizes.
    void collapse(int axis, int m) {
        const Eigen::Index st = stride(axis);
        const Eigen::Index block = st * d;
        Vec out(amps.size() / d);
        Eigen::Index w = 0;
        for (Eigen::Index base = 0; base < amps.size(); base += block)
            for (Eigen::Index off = 0; off < st; ++off) out(w++) = amps(base + m * st + off);
        const double n = out.norm();
        if (n > 0) out /= n;
        amps = std::move(out);
        axes.erase(axes.begin() + axis);
    }

    // Reorders axes to the requested id order.
    void permute_to(const std::vector<int>& order) {
        if (order.size() != axes.size()) throw std::invalid_argument("permutation size mismatch");
        std::vector<int> src(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) src[i] = axis_of(order[i]);
        const int k = static_cast<int>(axes.size());
        Vec out(amps.size());
        std::vector<Eigen::Index> strides(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) strides[i] = stride(static_cast<int>(i));
        for (Eigen::Index idx = 0; idx < out.size(); ++idx) {
            Eigen::Index rem = idx;
            Eigen::Index from = 0;
            for (int i = 0; i < k; ++i) {
                const Eigen::Index digit = rem / strides[static_cast<std::size_t>(i)] % d;
                // digit i of the target order comes from axis src[i]
                from += digit * strides[static_cast<std::size_t>(src[static_cast<std::size_t>(i)])];
                rem %= strides[static_cast<std::size_t>(i)];
            }
            out(idx) = amps(from);
        }
        amps = std::move(out);
        axes = order;
    }
};

// Measures one register site in the (variant, theta) basis, Born-sampling
// with the caller's generator.  Collapses and removes the site.
inline int measure_node(RegisterState& st, int node, const RVec& theta, Variant variant, Rng& rng,
                        int forced_outcome = -1, double* branch_probability = nullptr) {
    const int axis = st.axis_of(node);
    const Mat basis_gate = (variant == Variant::HdagBasis)
                               ? Mat(qudit::hadamard(st.d).m.adjoint() * qudit::phase_gate(theta).m)
                               : Mat(qudit::hadamard(st.d).m * qudit::phase_gate(theta).m);
    st.apply_single(basis_gate, axis);
    RVec probs = st.axis_probabilities(axis);
    int outcome;
    if (forced_outcome >= 0) {
        outcome = forced_outcome;
    } else {
        double r = rng.uniform();
        outcome = st.d - 1;
        double acc = 0.0;
        for (int m = 0; m < st.d; ++m) {
            acc += probs(m);
            if (r < acc) {
                outcome = m;
                break;
            }
        }
    }
    if (branch_probability) *branch_probability = probs(outcome);
    st.collapse(axis, outcome);
    return outcome;
}

// ---------------------------------------------------------------------------
// Cluster preparation.
//
// Inputs form a joint state over the wire-front nodes (wire order, most
// significant first); every other node starts in |+>.  Edge phases are
// accumulated as integer exponents mod d, so the prepared state is exactly
// independent of edge order.

inline RegisterState prepare_cluster(const ClusterGraph& g, const Vec& inputs) {
    g.validate();
    double size = std::pow(static_cast<double>(g.d), g.node_count);
    if (size > static_cast<double>(kStateCap))
        throw CapError("cluster state exceeds the 3^10 amplitude cap");
    const auto in_nodes = g.input_nodes();
    const Eigen::Index in_dim = static_cast<Eigen::Index>(powi(g.d, static_cast<int>(in_nodes.size())));
    if (inputs.size() != in_dim) throw std::invalid_argument("input state has wrong dimension");

    RegisterState st;
    st.d = g.d;
    st.axes.resize(static_cast<std::size_t>(g.node_count));
    for (int n = 0; n < g.node_count; ++n) st.axes[static_cast<std::size_t>(n)] = n;
    const Eigen::Index dim = static_cast<Eigen::Index>(powi(g.d, g.node_count));
    st.amps.resize(dim);

    std::vector<int> in_axis(static_cast<std::size_t>(g.node_count), -1);
    for (std::size_t i = 0; i < in_nodes.size(); ++i)
        in_axis[static_cast<std::size_t>(in_nodes[i])] = static_cast<int>(i);
    const double plus_norm =
        std::pow(1.0 / std::sqrt(static_cast<double>(g.d)), g.node_count - static_cast<int>(in_nodes.size()));
    std::vector<cd> omega_pow(static_cast<std::size_t>(g.d));
    for (int k = 0; k < g.d; ++k) omega_pow[static_cast<std::size_t>(k)] = std::exp(cd(0, 2.0 * kPi * k / g.d));

    std::vector<int> digits(static_cast<std::size_t>(g.node_count));
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        Eigen::Index rem = idx;
        for (int n = g.node_count - 1; n >= 0; --n) {
            digits[static_cast<std::size_t>(n)] = static_cast<int>(rem % g.d);
            rem /= g.d;
        }
        Eigen::Index in_idx = 0;
        for (int node : in_nodes) in_idx = in_idx * g.d + digits[static_cast<std::size_t>(node)];
        int expo = 0;
        for (const auto& e : g.edges) {
            expo += e.sign * digits[static_cast<std::size_t>(e.a)] * digits[static_cast<std::size_t>(e.b)];
            expo %= g.d;
        }
        st.amps(idx) =
            inputs(in_idx) * plus_norm * omega_pow[static_cast<std::size_t>(((expo % g.d) + g.d) % g.d)];
    }
    return st;
}

// ---------------------------------------------------------------------------
// Pattern execution.

struct Transcript {
    std::uint64_t seed = 0;
    std::vector<int> outcomes;            // in measurement order
    std::vector<PauliFrame> final_frames;  // per wire
    double branch_probability = 1.0;
};

struct RunResult {
    Vec output;     // over output nodes in wire order, uncorrected
    Vec corrected;  // after X^{-a} Z^{-b} per wire
    Transcript transcript;
};

// Z^{-b} X^{-a}, undoing an accumulated X^a Z^b byproduct.
inline Mat frame_correction(int a, int b, int d) {
    Mat x = qudit::pauli_x(d).m, z = qudit::pauli_z(d).m;
    Mat xa = Mat::Identity(d, d), zb = Mat::Identity(d, d);
    for (int i = 0; i < ((d - a % d) % d + d) % d; ++i) xa = x * xa;
    for (int i = 0; i < ((d - b % d) % d + d) % d; ++i) zb = z * zb;
    return zb * xa;
}

// Runs the pattern on a prepared register whose axes already contain the
// graph's nodes (and possibly spectator axes).  Outcomes can be forced for
// branch enumeration.
inline RunResult run_pattern_on(RegisterState& st, const ClusterGraph& g,
                                const MeasurementPattern& pattern, std::uint64_t seed,
                                const std::vector<int>* forced = nullptr) {
    const int n_wires = static_cast<int>(g.wires.size());
    std::vector<int> wire_pos(static_cast<std::size_t>(n_wires), 0);
    std::vector<PauliFrame> frames(static_cast<std::size_t>(n_wires));
    std::vector<int> wire_of(static_cast<std::size_t>(g.node_count), -1);
    for (int w = 0; w < n_wires; ++w)
        for (int n : g.wires[static_cast<std::size_t>(w)]) wire_of[static_cast<std::size_t>(n)] = w;

    std::vector<bool> fired(g.edges.size(), false);
    auto current_node = [&](int w) { return g.wires[static_cast<std::size_t>(w)][static_cast<std::size_t>(wire_pos[static_cast<std::size_t>(w)])]; };
    auto is_wire_edge = [&](const SignedEdge& e) {
        if (wire_of[static_cast<std::size_t>(e.a)] != wire_of[static_cast<std::size_t>(e.b)]) return false;
        const auto& w = g.wires[static_cast<std::size_t>(wire_of[static_cast<std::size_t>(e.a)])];
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if ((w[i] == e.a && w[i + 1] == e.b) || (w[i] == e.b && w[i + 1] == e.a)) return true;
        return false;
    };
    auto fire_ready_edges = [&] {
        for (std::size_t i = 0; i < g.edges.size(); ++i) {
            if (fired[i] || is_wire_edge(g.edges[i])) continue;
            const auto& e = g.edges[i];
            const int wa = wire_of[static_cast<std::size_t>(e.a)], wb = wire_of[static_cast<std::size_t>(e.b)];
            if (current_node(wa) != e.a || current_node(wb) != e.b) continue;
            // CZ^s commutes the accumulated byproducts onto the partner wire.
            auto& fa = frames[static_cast<std::size_t>(wa)];
            auto& fb = frames[static_cast<std::size_t>(wb)];
            const int d = g.d;
            fa.b = ((fa.b + e.sign * fb.a) % d + d) % d;
            fb.b = ((fb.b + e.sign * fa.a) % d + d) % d;
            fired[i] = true;
        }
    };

    RunResult res;
    res.transcript.seed = seed;
    Rng rng(seed);
    int step = 0;
    for (const auto& meas : pattern.order) {
        const int w = wire_of[static_cast<std::size_t>(meas.node)];
        if (w < 0) throw std::invalid_argument("measured node not on a wire");
        if (current_node(w) != meas.node)
            throw std::invalid_argument("pattern measures a node out of wire order");
        if (meas.node == g.wires[static_cast<std::size_t>(w)].back())
            throw std::invalid_argument("pattern measures an output node");
        fire_ready_edges();
        for (std::size_t i = 0; i < g.edges.size(); ++i)
            if (!fired[i] && !is_wire_edge(g.edges[i]) &&
                (g.edges[i].a == meas.node || g.edges[i].b == meas.node))
                throw std::invalid_argument("cross edge consumed before partner wire arrival");

        auto adapted = adapt_angles(meas.theta, frames[static_cast<std::size_t>(w)], meas.variant, g.d);
        double pbranch = 0.0;
        const int want = forced ? (*forced)[static_cast<std::size_t>(step)] : -1;
        const int m = measure_node(st, meas.node, adapted.theta, meas.variant, rng, want, &pbranch);
        res.transcript.outcomes.push_back(m);
        res.transcript.branch_probability *= pbranch;
        frames[static_cast<std::size_t>(w)] = PauliFrame{(adapted.frame.a + m) % g.d, adapted.frame.b};
        wire_pos[static_cast<std::size_t>(w)] += 1;
        ++step;
    }
    fire_ready_edges();
    for (int w = 0; w < n_wires; ++w)
        if (current_node(w) != g.wires[static_cast<std::size_t>(w)].back())
            throw std::invalid_argument("pattern does not cover all non-output nodes");

    res.transcript.final_frames = frames;
    return res;
}

inline RunResult run_pattern(const ClusterGraph& g, const MeasurementPattern& pattern,
                             const Vec& inputs, std::uint64_t seed,
                             const std::vector<int>* forced = nullptr) {
    RegisterState st = prepare_cluster(g, inputs);
    RunResult res = run_pattern_on(st, g, pattern, seed, forced);

    st.permute_to(g.output_nodes());
    res.output = st.amps;
    RegisterState corrected = st;
    for (std::size_t w = 0; w < g.wires.size(); ++w) {
        const auto& f = res.transcript.final_frames[w];
        corrected.apply_single(frame_correction(f.a, f.b, g.d), static_cast<int>(w));
    }
    res.corrected = corrected.amps;
    return res;
}

// ---------------------------------------------------------------------------
// Builders.

// Linear wire implementing a single-qudit unitary as a chain of H P(theta)
// steps from the numerical factorization.
inline std::pair<ClusterGraph, MeasurementPattern> compile_wire(const Mat& u, int d,
                                                                std::uint64_t seed = 20240501) {
    auto fac = qudit::hp_factorize(u, d, seed);
    const int k = static_cast<int>(fac.thetas.size());
    ClusterGraph g;
    g.d = d;
    g.node_count = k + 1;
    g.wires = {std::vector<int>(static_cast<std::size_t>(k) + 1)};
    for (int i = 0; i <= k; ++i) g.wires[0][static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k; ++i) g.edges.push_back({i, i + 1, +1});
    MeasurementPattern pat;
    for (int i = 0; i < k; ++i) pat.order.push_back({i, fac.thetas[static_cast<std::size_t>(i)], Variant::HdagBasis});
    return {g, pat};
}

// Two-wire cluster implementing U = CX P(theta) CX^dag on (control, target),
// the two-qudit building block of the coloring compiler: a 3-node control wire, a
// 5-node target wire, a CZ^dag edge into the target's second node and a CZ
// edge from the control output into the target's fourth node.
inline std::pair<ClusterGraph, MeasurementPattern> compile_cx_phase_cxdag(const RVec& theta, int d) {
    if (theta.size() != d) throw std::invalid_argument("theta length must equal d");
    ClusterGraph g;
    g.d = d;
    g.node_count = 8;
    // control wire A: 0 -> 1 -> 2; target wire B: 3 -> 4 -> 5 -> 6 -> 7
    g.wires = {{0, 1, 2}, {3, 4, 5, 6, 7}};
    g.edges = {
        {0, 1, +1}, {1, 2, -1},                          // A teleports: HP(0), then HdagP(0)
        {3, 4, +1}, {4, 5, -1}, {5, 6, +1}, {6, 7, -1},  // B teleports
        {0, 4, -1},                                      // CZ^dag while B sits at node 4
        {2, 6, +1},                                      // CZ onto the control output
    };
    RVec zero = RVec::Zero(d);
    MeasurementPattern pat;
    pat.order = {
        {3, zero, Variant::HdagBasis},  // B: H
        {0, zero, Variant::HdagBasis},  // A: H
        {1, zero, Variant::HBasis},     // A: H^dag  (wire A net identity)
        {4, zero, Variant::HBasis},     // B: H^dag
        {5, theta, Variant::HdagBasis}, // B: H P(theta)
        {6, zero, Variant::HBasis},     // B: H^dag
    };
    return {g, pat};
}

// Pattern for exp(i alpha * sum_i Z^i x Z^{d-i}) on one graph edge: the
// CX P CX^dag block with theta = (alpha * d, 0, ..., 0).
inline std::pair<ClusterGraph, MeasurementPattern> compile_zz_rotation(double alpha, int d) {
    RVec theta = RVec::Zero(d);
    theta(0) = alpha * d;
    return compile_cx_phase_cxdag(theta, d);
}

}  // namespace qdlo::mbqc
