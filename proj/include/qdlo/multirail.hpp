// Multi-rail encoding and its linear-optical toolbox.
//
// Encoding: qudit q at level l occupies optical mode q*d + l, one photon per
// contiguous d-mode block.
//
// Beamsplitter convention (fixed for the whole project): T(theta, phi) acting
// on modes (a, b) mixes the single-photon amplitudes as
//     [ e^{i phi} cos(theta)   -sin(theta) ]
//     [ e^{i phi} sin(theta)    cos(theta) ]
// so theta = pi/4, phi = 0 is the real 50/50 coupler and T(-pi/4, 0) is its
// inverse.  Meshes list elements in physical order (first applied first) and
// finish with per-mode output phases.

#pragma once

#include "qdlo/fock.hpp"
#include "qdlo/optim.hpp"
#include "qdlo/qudit.hpp"

#include <optional>
#include <variant>

namespace qdlo::rail {

using fock::FockBasis;
using fock::FockState;
using fock::Interferometer;
using fock::StateVector;

// ---------------------------------------------------------------------------
// Encoding

struct MultiRailRegister {
    int qudits = 1;
    int d = 2;

    MultiRailRegister(int qudits_, int d_) : qudits(qudits_), d(d_) {
        if (qudits < 1 || d < 2) throw std::invalid_argument("invalid register shape");
    }
    int modes() const { return qudits * d; }
    int codewords() const { return powi(d, qudits); }
};

inline FockState encode(const std::vector<int>& levels, const MultiRailRegister& reg) {
    if (static_cast<int>(levels.size()) != reg.qudits)
        throw std::invalid_argument("level string length does not match register");
    std::vector<int> occ(static_cast<std::size_t>(reg.modes()), 0);
    for (int q = 0; q < reg.qudits; ++q) {
        const int l = levels[static_cast<std::size_t>(q)];
        if (l < 0 || l >= reg.d) throw std::invalid_argument("level out of range");
        occ[static_cast<std::size_t>(q * reg.d + l)] = 1;
    }
    return FockState(occ);
}

// Leakage (any non-codeword occupation) decodes to nullopt.
inline std::optional<std::vector<int>> decode(const FockState& s, const MultiRailRegister& reg) {
    if (s.modes() != reg.modes()) throw std::invalid_argument("mode count mismatch");
    std::vector<int> levels(static_cast<std::size_t>(reg.qudits), -1);
    for (int q = 0; q < reg.qudits; ++q) {
        int found = -1;
        for (int l = 0; l < reg.d; ++l) {
            const int occ = s[q * reg.d + l];
            if (occ == 0) continue;
            if (occ > 1 || found >= 0) return std::nullopt;
            found = l;
        }
        if (found < 0) return std::nullopt;
        levels[static_cast<std::size_t>(q)] = found;
    }
    return levels;
}

// Tensor index of a level string, qudit 0 most significant.
inline int codeword_index(const std::vector<int>& levels, int d) {
    int idx = 0;
    for (int l : levels) idx = idx * d + l;
    return idx;
}

inline std::vector<int> codeword_levels(int index, const MultiRailRegister& reg) {
    std::vector<int> levels(static_cast<std::size_t>(reg.qudits));
    for (int q = reg.qudits - 1; q >= 0; --q) {
        levels[static_cast<std::size_t>(q)] = index % reg.d;
        index /= reg.d;
    }
    return levels;
}

// ---------------------------------------------------------------------------
// Beamsplitter meshes and the Clements compilation

struct Beamsplitter {
    int mode = 0;  // acts on (mode, mode+1)
    double theta = 0.0;
    double phi = 0.0;
};

struct BeamsplitterMesh {
    int modes = 0;
    std::vector<Beamsplitter> elements;  // physical order
    RVec output_phases;                  // angles, applied after all elements
};

// T(theta, phi) embedded on modes (a, b) of an m-mode identity.
inline Mat two_mode_mixer(int m, int a, int b, double theta, double phi) {
    Mat u = Mat::Identity(m, m);
    const double c = std::cos(theta), s = std::sin(theta);
    const cd e = std::exp(cd(0, phi));
    u(a, a) = e * c;
    u(a, b) = -s;
    u(b, a) = e * s;
    u(b, b) = c;
    return u;
}

inline Mat recompose(const BeamsplitterMesh& mesh) {
    Mat u = Mat::Identity(mesh.modes, mesh.modes);
    for (const auto& el : mesh.elements)
        u = two_mode_mixer(mesh.modes, el.mode, el.mode + 1, el.theta, el.phi) * u;
    Mat d = Mat::Zero(mesh.modes, mesh.modes);
    for (int i = 0; i < mesh.modes; ++i) d(i, i) = std::exp(cd(0, mesh.output_phases(i)));
    return d * u;
}

// Rectangular mesh of exactly m(m-1)/2 nearest-neighbour beamsplitters plus
// output phases that recomposes to the input unitary.
inline BeamsplitterMesh clements_compile(const Mat& u_in, double unitary_tol = 1e-8) {
    if (u_in.rows() != u_in.cols()) throw std::invalid_argument("unitary must be square");
    const int m = static_cast<int>(u_in.rows());
    if (!qdlo::is_unitary(u_in, unitary_tol))
        throw std::invalid_argument("clements_compile requires a unitary matrix");

    Mat u = u_in;
    std::vector<Beamsplitter> lefts, rights;

    for (int i = 0; i < m - 1; ++i) {
        for (int j = 0; j <= i; ++j) {
            if (i % 2 == 0) {
                // zero u(r, c) by a right multiplication on columns (c, c+1)
                const int r = m - 1 - j;
                const int c = i - j;
                double theta = std::atan2(std::abs(u(r, c)), std::abs(u(r, c + 1)));
                double phi = std::arg(u(r, c)) - std::arg(u(r, c + 1));
                if (std::abs(u(r, c)) < 1e-300) {
                    theta = 0.0;
                    phi = 0.0;
                }
                const double cth = std::cos(theta), sth = std::sin(theta);
                const cd e = std::exp(cd(0, -phi));
                for (int row = 0; row < m; ++row) {
                    const cd a = u(row, c), b = u(row, c + 1);
                    u(row, c) = e * cth * a - sth * b;
                    u(row, c + 1) = e * sth * a + cth * b;
                }
                rights.push_back({c, theta, phi});
            } else {
                // zero u(r, c) by a left multiplication on rows (r-1, r)
                const int r = m - 1 - i + j;
                const int c = j;
                double theta = std::atan2(std::abs(u(r, c)), std::abs(u(r - 1, c)));
                double phi = kPi + std::arg(u(r, c)) - std::arg(u(r - 1, c));
                if (std::abs(u(r, c)) < 1e-300) {
                    theta = 0.0;
                    phi = 0.0;
                }
                const double cth = std::cos(theta), sth = std::sin(theta);
                const cd e = std::exp(cd(0, phi));
                for (int col = 0; col < m; ++col) {
                    const cd a = u(r - 1, col), b = u(r, col);
                    u(r - 1, col) = e * cth * a - sth * b;
                    u(r, col) = e * sth * a + cth * b;
                }
                lefts.push_back({r - 1, theta, phi});
            }
        }
    }

    // u is now diagonal: U = L1^-1 ... Lk^-1 D Rq ... R1.  Push the left
    // inverses through D with T^{-1}(theta, phi) D = D' T(theta, phi') where
    // phi' = arg(-d_a / d_b), d_a' = -e^{-i phi} d_b.
    Vec diag(m);
    for (int i = 0; i < m; ++i) diag(i) = u(i, i);

    std::vector<Beamsplitter> pushed(lefts.size());
    for (std::size_t t = lefts.size(); t-- > 0;) {
        const auto& el = lefts[t];
        const cd da = diag(el.mode), db = diag(el.mode + 1);
        const double phi_new = std::arg(-da / db);
        diag(el.mode) = -std::exp(cd(0, -el.phi)) * db;
        pushed[t] = {el.mode, el.theta, phi_new};
    }

    // Matrix order: D * T'_{L1} ... T'_{Lk} * R_q ... R_1, so the physical
    // order is R_1, ..., R_q, T'_{Lk}, ..., T'_{L1}.
    BeamsplitterMesh mesh;
    mesh.modes = m;
    mesh.elements = rights;
    for (std::size_t t = pushed.size(); t-- > 0;) mesh.elements.push_back(pushed[t]);
    mesh.output_phases.resize(m);
    for (int i = 0; i < m; ++i) mesh.output_phases(i) = std::arg(diag(i));
    return mesh;
}

// ---------------------------------------------------------------------------
// Nonlinear phase shift NS_phi
//
// Family of 3-mode interferometers parametrized by |U12|; postselecting the
// ancilla modes (2, 3) prepared as |1, 0> on the same pattern maps
// a0|0> + a1|1> + a2|2>  ->  a0|0> + a1|1> + e^{i phi} a2|2>
// on mode 1, uniformly with amplitude sqrt(P).

struct NSGateSpec {
    double phi = 0.0;
    double u12 = 0.0;  // the maximizing |U12|
    double success_probability = 0.0;
    Mat u;  // 3x3 unitary
};

inline double ns_success_probability(double phi, double u12) {
    const cd u11 = cd(1, 0) - std::sqrt(cd(1, 0) - std::exp(cd(0, phi)));
    const double a2 = std::norm(u11);
    const double b2 = u12 * u12;
    const double denom13 = 1.0 - a2 - b2;
    if (denom13 <= 0.0 || u12 <= 0.0) return 0.0;
    const cd t = (std::conj(u11) * (cd(1, 0) - u11) / b2 + 1.0) * u12;
    const double term1 = std::norm(t) / denom13;
    const double term2 = std::norm(cd(1, 0) - u11) / b2;
    return 1.0 / (term1 + term2 + 1.0);
}

inline Mat ns_matrix(double phi, double u12) {
    const cd u11 = cd(1, 0) - std::sqrt(cd(1, 0) - std::exp(cd(0, phi)));
    const double p = ns_success_probability(phi, u12);
    const double sp = std::sqrt(p);
    const double u13 = std::sqrt(std::max(0.0, 1.0 - std::norm(u11) - u12 * u12));
    Mat u(3, 3);
    u(0, 0) = u11;
    u(0, 1) = u12;
    u(0, 2) = u13;
    u(1, 0) = sp * (cd(1, 0) - u11) / u12;
    u(1, 1) = sp;
    u(1, 2) = sp * (std::norm(u11) - std::conj(u11) - u12 * u12) / (u12 * u13);
    // third row completes the unitary: eps_{ijk} conj(U_1j) conj(U_2k)
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        u(2, i) = std::conj(u(0, j)) * std::conj(u(1, k)) - std::conj(u(0, k)) * std::conj(u(1, j));
    }
    return u;
}

inline NSGateSpec ns_gate(double phi) {
    if (!(phi > 0.0 && phi < 2.0 * kPi))
        throw std::invalid_argument(
            "NS phase must lie in (0, 2*pi); phi = 0 is the identity and needs no ancillas");
    const cd u11 = cd(1, 0) - std::sqrt(cd(1, 0) - std::exp(cd(0, phi)));
    const double hi = std::sqrt(1.0 - std::norm(u11));
    const double eps = 1e-9;
    NSGateSpec spec;
    spec.phi = phi;
    spec.u12 = opt::golden_maximize([&](double x) { return ns_success_probability(phi, x); }, eps,
                                    hi - eps, 1e-10);
    spec.success_probability = ns_success_probability(phi, spec.u12);
    spec.u = ns_matrix(phi, spec.u12);
    return spec;
}

// Applies the postselected NS gate to (a0, a1, a2) by per-sector Fock
// amplitudes.  Returns the unnormalized output coefficients; each carries the
// uniform factor sqrt(P).
inline Vec ns_apply(const NSGateSpec& spec, const Vec& input) {
    if (input.size() != 3) throw std::invalid_argument("NS input must have 3 components");
    fock::AmplitudeEngine eng;
    Vec out(3);
    for (int k = 0; k < 3; ++k) {
        FockState state({k, 1, 0});
        out(k) = eng.amplitude(spec.u, state, state) * input(k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Naive one-level controlled-Z cascade (two qudits, 2d modes).
//
// For each target level l = 1..d-1 a two-mode gadget between the control rail
// d-1 and the target rail d+l applies the phase exp(i 2 pi l / d) to the
// doubly-occupied component: 50/50 coupler, NS_{phi_l} on both arms, inverse
// coupler.  2(d-1) beamsplitters and 2(d-1) NS gates in total.

struct CzBarBeamsplitter {
    int mode_a = 0;
    int mode_b = 0;
    double theta = 0.0;
};

struct CzBarNs {
    int mode = 0;
    NSGateSpec spec;
};

using CzBarOp = std::variant<CzBarBeamsplitter, CzBarNs>;

struct CzBarCircuit {
    int d = 2;
    std::vector<CzBarOp> ops;
    double success_probability = 0.0;

    int ns_count() const {
        int n = 0;
        for (const auto& op : ops)
            if (std::holds_alternative<CzBarNs>(op)) ++n;
        return n;
    }
    int beamsplitter_count() const { return static_cast<int>(ops.size()) - ns_count(); }
};

inline CzBarCircuit naive_czbar(int d) {
    if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
    CzBarCircuit circ;
    circ.d = d;
    circ.success_probability = 1.0;
    const int control = d - 1;
    for (int l = 1; l < d; ++l) {
        const int target = d + l;
        const double phase = 2.0 * kPi * l / d;
        NSGateSpec ns = ns_gate(phase);
        circ.ops.push_back(CzBarBeamsplitter{control, target, kPi / 4});
        circ.ops.push_back(CzBarNs{control, ns});
        circ.ops.push_back(CzBarNs{target, ns});
        circ.ops.push_back(CzBarBeamsplitter{control, target, -kPi / 4});
        circ.success_probability *= ns.success_probability * ns.success_probability;
    }
    return circ;
}

struct CzBarRun {
    StateVector state;       // renormalized output on the 2d modes
    double probability = 1;  // cumulative postselection probability
};

// End-to-end Fock simulation of the cascade on one two-qudit input state
// (given over the codeword-photon basis of 2d modes, 2 photons).
inline CzBarRun simulate_czbar(const CzBarCircuit& circ, const StateVector& input) {
    const int m = 2 * circ.d;
    if (input.basis->modes() != m || input.basis->photons() != 2)
        throw std::invalid_argument("input must live on 2d modes with 2 photons");
    CzBarRun run{input, 1.0};
    for (const auto& op : circ.ops) {
        if (const auto* bs = std::get_if<CzBarBeamsplitter>(&op)) {
            Mat u = Mat::Identity(m, m);
            const double c = std::cos(bs->theta), s = std::sin(bs->theta);
            u(bs->mode_a, bs->mode_a) = c;
            u(bs->mode_a, bs->mode_b) = -s;
            u(bs->mode_b, bs->mode_a) = s;
            u(bs->mode_b, bs->mode_b) = c;
            run.state = fock::evolve(Interferometer(u), run.state);
        } else {
            const auto& ns = std::get<CzBarNs>(op);
            // extend with the two NS ancilla modes prepared as |1, 0>
            auto ext_basis = FockBasis::get(m + 2, run.state.basis->photons() + 1);
            Vec ext = Vec::Zero(static_cast<Eigen::Index>(ext_basis->size()));
            for (std::size_t i = 0; i < run.state.basis->size(); ++i) {
                std::vector<int> occ = run.state.basis->state(i).n;
                occ.push_back(1);
                occ.push_back(0);
                ext(ext_basis->index_of(FockState(occ))) = run.state.amps(static_cast<Eigen::Index>(i));
            }
            Mat u = Mat::Identity(m + 2, m + 2);
            const int idx[3] = {ns.mode, m, m + 1};
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) u(idx[r], idx[c]) = ns.spec.u(r, c);
            StateVector evolved = fock::evolve(Interferometer(u), StateVector(ext_basis, ext));
            auto sel = fock::postselect(evolved, {m, m + 1}, {1, 0});
            run.probability *= sel.probability;
            if (!sel.state.has_value()) {
                run.state = StateVector(FockBasis::get(m, 2),
                                        Vec::Zero(static_cast<Eigen::Index>(FockBasis::get(m, 2)->size())));
                run.probability = 0.0;
                return run;
            }
            run.state = *sel.state;
        }
    }
    return run;
}

}  // namespace qdlo::rail
