#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdlo/mbqc.hpp"

using namespace qdlo;
using namespace qdlo::mbqc;

namespace {

Vec random_state(int dim, Rng& rng) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cd(rng.gaussian(), rng.gaussian());
    return v / v.norm();
}

RVec random_theta(int d, Rng& rng) {
    RVec t(d);
    for (int i = 0; i < d; ++i) t(i) = rng.uniform(0.0, 2.0 * kPi);
    return t;
}

Mat xpow(int d, int a) {
    Mat m = Mat::Identity(d, d);
    for (int i = 0; i < a; ++i) m = qudit::pauli_x(d).m * m;
    return m;
}
Mat zpow(int d, int b) {
    Mat m = Mat::Identity(d, d);
    for (int i = 0; i < b; ++i) m = qudit::pauli_z(d).m * m;
    return m;
}

ClusterGraph two_node_wire(int d, int sign) {
    ClusterGraph g;
    g.d = d;
    g.node_count = 2;
    g.wires = {{0, 1}};
    g.edges = {{0, 1, sign}};
    return g;
}

}  // namespace

TEST_CASE("adapt_angles: trivial frame, qubit case, random identity checks") {
    RVec theta(3);
    theta << 0.3, 1.1, 2.2;
    auto r = adapt_angles(theta, {0, 0}, Variant::HdagBasis, 3);
    CHECK((r.theta - theta).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(r.frame.a == 0);
    CHECK(r.frame.b == 0);

    Rng rng(77);
    for (int d : {2, 3, 5}) {
        Mat h = qudit::hadamard(d).m;
        for (int rep = 0; rep < 100; ++rep) {
            RVec t = random_theta(d, rng);
            PauliFrame f{static_cast<int>(rng.below(d)), static_cast<int>(rng.below(d))};
            for (auto variant : {Variant::HdagBasis, Variant::HBasis}) {
                auto ad = adapt_angles(t, f, variant, d);
                Mat base = (variant == Variant::HdagBasis) ? h : Mat(h.adjoint());
                Mat lhs = base * qudit::phase_gate(ad.theta).m * xpow(d, f.a) * zpow(d, f.b);
                Mat rhs = xpow(d, ad.frame.a) * zpow(d, ad.frame.b) * base * qudit::phase_gate(t).m;
                CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("prepare_cluster: plus states, qubit pair, qutrit CZ^dag, cap") {
    ClusterGraph single;
    single.d = 3;
    single.node_count = 1;
    single.wires = {{0}};
    Vec plus3 = Vec::Constant(3, cd(1.0 / std::sqrt(3.0), 0));
    auto st = prepare_cluster(single, plus3);
    CHECK((st.amps - plus3).cwiseAbs().maxCoeff() < 1e-15);

    ClusterGraph pair2 = two_node_wire(2, +1);
    Vec plus2 = Vec::Constant(2, cd(1.0 / std::sqrt(2.0), 0));
    auto st2 = prepare_cluster(pair2, plus2);
    Vec expect(4);
    expect << 0.5, 0.5, 0.5, -0.5;
    CHECK((st2.amps - expect).cwiseAbs().maxCoeff() < 1e-14);

    ClusterGraph pair3 = two_node_wire(3, -1);
    auto st3 = prepare_cluster(pair3, plus3);
    Vec pp = Vec::Constant(9, cd(1.0 / 3.0, 0));
    Vec oracle = qudit::controlled_z(3).m.adjoint() * pp;
    CHECK((st3.amps - oracle).cwiseAbs().maxCoeff() < 1e-14);

    ClusterGraph big;
    big.d = 3;
    big.node_count = 11;
    big.wires = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
    for (int i = 0; i < 10; ++i) big.edges.push_back({i, i + 1, +1});
    CHECK_THROWS_AS(prepare_cluster(big, plus3), CapError);
}

TEST_CASE("prepare_cluster: edge application order is exactly irrelevant") {
    Rng rng(5);
    ClusterGraph g;
    g.d = 3;
    g.node_count = 4;
    g.wires = {{0, 1}, {2, 3}};
    g.edges = {{0, 1, +1}, {2, 3, -1}, {0, 2, +1}, {1, 3, -1}};
    Vec in = random_state(9, rng);
    auto a = prepare_cluster(g, in);
    std::reverse(g.edges.begin(), g.edges.end());
    auto b = prepare_cluster(g, in);
    for (Eigen::Index i = 0; i < a.amps.size(); ++i) CHECK(a.amps(i) == b.amps(i));
}

TEST_CASE("measure_node: plus state with theta=0 gives outcome 0 deterministically") {
    ClusterGraph single;
    single.d = 2;
    single.node_count = 1;
    single.wires = {{0}};
    Vec plus = Vec::Constant(2, cd(1.0 / std::sqrt(2.0), 0));
    auto st = prepare_cluster(single, plus);
    Rng rng(3);
    double p = 0.0;
    int m = measure_node(st, 0, RVec::Zero(2), Variant::HdagBasis, rng, -1, &p);
    CHECK(m == 0);
    CHECK(p == doctest::Approx(1.0));
}

TEST_CASE("teleportation identities on both edge signs, every branch") {
    Rng rng(2024);
    for (int d : {2, 3, 5}) {
        Mat h = qudit::hadamard(d).m;
        for (int rep = 0; rep < 25; ++rep) {
            Vec psi = random_state(d, rng);
            RVec theta = random_theta(d, rng);
            for (int sign : {+1, -1}) {
                ClusterGraph g = two_node_wire(d, sign);
                MeasurementPattern pat;
                pat.order = {{0, theta, sign > 0 ? Variant::HdagBasis : Variant::HBasis}};
                for (int m = 0; m < d; ++m) {
                    std::vector<int> forced{m};
                    auto res = run_pattern(g, pat, psi, 1, &forced);
                    CHECK(res.transcript.branch_probability == doctest::Approx(1.0 / d).epsilon(1e-9));
                    Mat base = sign > 0 ? h : Mat(h.adjoint());
                    Vec expect = xpow(d, m) * base * qudit::phase_gate(theta).m * psi;
                    CHECK(phase_aligned_distance(res.output, expect) < 1e-8);
                    Vec corrected_expect = base * qudit::phase_gate(theta).m * psi;
                    CHECK(phase_aligned_distance(res.corrected, corrected_expect) < 1e-8);
                }
            }
        }
    }
}

TEST_CASE("run_pattern: two-node wire with theta = 0 teleports H") {
    Rng rng(9);
    Vec psi = random_state(2, rng);
    ClusterGraph g = two_node_wire(2, +1);
    MeasurementPattern pat;
    pat.order = {{0, RVec::Zero(2), Variant::HdagBasis}};
    auto res = run_pattern(g, pat, psi, 42);
    Vec expect = qudit::hadamard(2).m * psi;
    CHECK(phase_aligned_distance(res.corrected, expect) < 1e-10);
}

TEST_CASE("run_pattern: linear cluster implements a random qutrit unitary over all branches") {
    Rng rng(31);
    Mat u = haar_unitary(3, rng);
    auto [g, pat] = compile_wire(u, 3);
    const int steps = static_cast<int>(pat.order.size());
    CHECK(g.node_count == steps + 1);
    Vec psi = random_state(3, rng);
    Vec expect = u * psi;
    const int branches = powi(3, steps);
    for (int b = 0; b < branches; ++b) {
        std::vector<int> forced(static_cast<std::size_t>(steps));
        int rem = b;
        for (int i = 0; i < steps; ++i) {
            forced[static_cast<std::size_t>(i)] = rem % 3;
            rem /= 3;
        }
        auto res = run_pattern(g, pat, psi, 1, &forced);
        CHECK(phase_aligned_distance(res.corrected, expect) < 1e-8);
    }
}

TEST_CASE("run_pattern: outcome independence across seeds") {
    Rng rng(55);
    RVec theta = random_theta(3, rng);
    auto [g, pat] = compile_cx_phase_cxdag(theta, 3);
    Vec psi = random_state(9, rng);
    auto a = run_pattern(g, pat, psi, 111);
    auto b = run_pattern(g, pat, psi, 222);
    CHECK(phase_aligned_distance(a.corrected, b.corrected) < 1e-8);
}

TEST_CASE("run_pattern: the 8-node block implements CX P(theta) CX^dag") {
    Rng rng(606);
    for (int d : {2, 3}) {
        for (int rep = 0; rep < 3; ++rep) {
            RVec theta = random_theta(d, rng);
            auto [g, pat] = compile_cx_phase_cxdag(theta, d);
            CHECK(g.node_count == 8);
            Mat cx = qudit::controlled_x(d).m;
            Mat oracle = cx * qudit::embed(qudit::phase_gate(theta), {1}, 2).m * cx.adjoint();
            Vec psi = random_state(d * d, rng);
            Vec expect = oracle * psi;
            for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
                auto res = run_pattern(g, pat, psi, seed);
                CHECK(phase_aligned_distance(res.corrected, expect) < 1e-8);
            }
            const int steps = static_cast<int>(pat.order.size());
            for (int b = 0; b < 32; ++b) {
                std::vector<int> forced(static_cast<std::size_t>(steps));
                std::uint64_t h = 0x9e3779b97f4a7c15ull * (b + 1);
                for (int i = 0; i < steps; ++i) {
                    forced[static_cast<std::size_t>(i)] = static_cast<int>(h % static_cast<std::uint64_t>(d));
                    h /= static_cast<std::uint64_t>(d);
                }
                auto res = run_pattern(g, pat, psi, 1, &forced);
                CHECK(phase_aligned_distance(res.corrected, expect) < 1e-8);
            }
        }
    }
}

TEST_CASE("compile_zz_rotation: alpha = 0 is the identity; qubit case matches exp(i a ZZ)") {
    Rng rng(7);
    Vec psi = random_state(4, rng);
    {
        auto [g, pat] = compile_zz_rotation(0.0, 2);
        auto res = run_pattern(g, pat, psi, 5);
        CHECK(phase_aligned_distance(res.corrected, psi) < 1e-8);
    }
    const double alpha = kPi / 4.0;
    auto [g, pat] = compile_zz_rotation(alpha, 2);
    Mat zz = Mat::Zero(4, 4);
    Mat z = qudit::pauli_z(2).m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) zz(i * 2 + j, i * 2 + j) = std::exp(cd(0, alpha) * z(i, i) * z(j, j));
    Vec expect = zz * psi;
    auto res = run_pattern(g, pat, psi, 5);
    CHECK(phase_aligned_distance(res.corrected, expect) < 1e-8);
}

TEST_CASE("compile_zz_rotation: qutrit edge term matches the dense exponential") {
    const int d = 3;
    const double alpha = 0.37;
    Mat expected = Mat::Zero(9, 9);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            expected(a * d + b, a * d + b) = std::exp(cd(0, alpha * ((a == b) ? d : 0)));

    Rng rng(908);
    Vec psi = random_state(9, rng);
    auto [g, pat] = compile_zz_rotation(alpha, d);
    auto res = run_pattern(g, pat, psi, 17);
    CHECK(phase_aligned_distance(res.corrected, Vec(expected * psi)) < 1e-8);
}

TEST_CASE("run_pattern: malformed patterns are rejected") {
    ClusterGraph g = two_node_wire(2, +1);
    Vec psi(2);
    psi << 1, 0;
    MeasurementPattern empty;
    CHECK_THROWS_AS(run_pattern(g, empty, psi, 1), std::invalid_argument);

    MeasurementPattern wrong;
    wrong.order = {{1, RVec::Zero(2), Variant::HdagBasis}};
    CHECK_THROWS_AS(run_pattern(g, wrong, psi, 1), std::invalid_argument);
}

TEST_CASE("run_pattern: single-node wires pass inputs through") {
    ClusterGraph g;
    g.d = 2;
    g.node_count = 2;
    g.wires = {{0}, {1}};
    Rng rng(12);
    Vec psi = random_state(4, rng);
    MeasurementPattern empty;
    auto res = run_pattern(g, empty, psi, 1);
    CHECK(phase_aligned_distance(res.corrected, psi) < 1e-12);
}
