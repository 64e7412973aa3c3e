// Photon-number (Fock) simulation core: bases, permanents, interferometer
// amplitudes, evolution and PNRD postselection.
//
// Conventions:
//   * A FockState lists occupations per optical mode, |n_1, ..., n_M>.
//   * An interferometer u acts on creation operators, a'_i^dag = sum_j u_ij a_j^dag.
//   * <m|U|n> = Per(u[m, n]) / sqrt(prod_i m_i! prod_j n_j!), where u[m, n]
//     repeats row i of u m_i times and column j n_j times.
// All types are immutable values after construction; the basis cache is
// internally synchronised.

#pragma once

#include "qdlo/common.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>

namespace qdlo::fock {

struct FockState {
    std::vector<int> n;

    FockState() = default;
    explicit FockState(std::vector<int> occ) : n(std::move(occ)) {
        for (int v : n)
            if (v < 0) throw std::invalid_argument("negative occupation");
    }

    int modes() const { return static_cast<int>(n.size()); }
    int total() const {
        int t = 0;
        for (int v : n) t += v;
        return t;
    }
    int operator[](int i) const { return n[static_cast<std::size_t>(i)]; }

    bool operator==(const FockState& o) const { return n == o.n; }
    bool operator!=(const FockState& o) const { return n != o.n; }

    std::string str() const {
        std::string s = "|";
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(n[i]);
        }
        return s + ">";
    }
};

// prod_i n_i!
inline double occupation_factorial(const FockState& s) {
    double r = 1.0;
    for (int v : s.n) r *= factorial(v);
    return r;
}

namespace detail {
// 4 bits per mode; valid while every occupation <= 15 and modes <= 16,
// which covers everything at desk scale.
inline bool packable(const std::vector<int>& n) {
    if (n.size() > 16) return false;
    for (int v : n)
        if (v > 15) return false;
    return true;
}
inline std::uint64_t pack(const std::vector<int>& n) {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < n.size(); ++i)
        k |= static_cast<std::uint64_t>(n[i]) << (4 * i);
    return k;
}
}  // namespace detail

// All Fock states with fixed mode count M and photon number N, ordered
// lexicographically descending: (N,0,...,0) first, (0,...,0,N) last.
// The ordering is the index space used by the synthesis module, so it must
// stay stable.
class FockBasis {
public:
    FockBasis(int modes, int photons) : modes_(modes), photons_(photons) {
        if (modes < 0 || photons < 0) throw std::invalid_argument("negative basis parameters");
        if (modes == 0) {
            if (photons == 0) states_.push_back(FockState(std::vector<int>{}));
            build_index();
            return;
        }
        std::vector<int> v(static_cast<std::size_t>(modes), 0);
        v[0] = photons;
        while (true) {
            states_.push_back(FockState(v));
            int pivot = -1;
            for (int i = modes - 2; i >= 0; --i) {
                if (v[static_cast<std::size_t>(i)] > 0) {
                    pivot = i;
                    break;
                }
            }
            if (pivot < 0) break;
            int tail = 1;
            for (int j = pivot + 1; j < modes; ++j) {
                tail += v[static_cast<std::size_t>(j)];
                v[static_cast<std::size_t>(j)] = 0;
            }
            v[static_cast<std::size_t>(pivot)] -= 1;
            v[static_cast<std::size_t>(pivot + 1)] = tail;
        }
        build_index();
    }

    int modes() const { return modes_; }
    int photons() const { return photons_; }
    std::size_t size() const { return states_.size(); }
    const FockState& state(std::size_t i) const { return states_[i]; }
    const std::vector<FockState>& states() const { return states_; }

    // -1 when the occupation vector is not a member.
    int index_of(const FockState& s) const {
        if (s.modes() != modes_ || s.total() != photons_) return -1;
        if (packed_) {
            auto it = packed_index_.find(detail::pack(s.n));
            return it == packed_index_.end() ? -1 : it->second;
        }
        auto it = map_index_.find(s.n);
        return it == map_index_.end() ? -1 : it->second;
    }

    // Shared, mutex-guarded cache keyed by (modes, photons).
    static std::shared_ptr<const FockBasis> get(int modes, int photons) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::shared_ptr<const FockBasis>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(modes, photons);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto basis = std::make_shared<const FockBasis>(modes, photons);
        cache.emplace(key, basis);
        return basis;
    }

private:
    void build_index() {
        packed_ = true;
        for (const auto& s : states_)
            if (!detail::packable(s.n)) packed_ = false;
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (packed_)
                packed_index_.emplace(detail::pack(states_[i].n), static_cast<int>(i));
            else
                map_index_.emplace(states_[i].n, static_cast<int>(i));
        }
    }

    int modes_;
    int photons_;
    std::vector<FockState> states_;
    bool packed_ = true;
    std::unordered_map<std::uint64_t, int> packed_index_;
    std::map<std::vector<int>, int> map_index_;
};

// M x M mode transformation.  `unitary` is checked on construction; candidate
// matrices visited by the optimizer use `unchecked`.
class Interferometer {
public:
    static constexpr double kUnitaryTol = 1e-10;

    explicit Interferometer(Mat m) : m_(std::move(m)), unitary_(true) {
        if (m_.rows() != m_.cols()) throw std::invalid_argument("interferometer must be square");
        if (!qdlo::is_unitary(m_, kUnitaryTol))
            throw std::invalid_argument("matrix is not unitary within 1e-10");
    }

    static Interferometer unchecked(Mat m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("interferometer must be square");
        Interferometer u;
        u.m_ = std::move(m);
        u.unitary_ = false;
        return u;
    }

    const Mat& matrix() const { return m_; }
    int modes() const { return static_cast<int>(m_.rows()); }
    bool unitary_flagged() const { return unitary_; }

private:
    Interferometer() = default;
    Mat m_;
    bool unitary_ = false;
};

// Matrix permanent, Ryser's formula with Gray-code subset enumeration.
// O(2^k k); exact up to rounding.  Per(empty) = 1.
inline cd permanent(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("permanent requires a square matrix");
    const int k = static_cast<int>(a.rows());
    if (k == 0) return cd(1, 0);
    std::vector<cd> rowsum(static_cast<std::size_t>(k), cd(0, 0));
    cd total(0, 0);
    const std::uint64_t end = 1ull << k;
    std::uint64_t gray = 0;
    for (std::uint64_t t = 1; t < end; ++t) {
        const int j = std::countr_zero(t);
        const std::uint64_t bit = 1ull << j;
        gray ^= bit;
        if (gray & bit)
            for (int i = 0; i < k; ++i) rowsum[static_cast<std::size_t>(i)] += a(i, j);
        else
            for (int i = 0; i < k; ++i) rowsum[static_cast<std::size_t>(i)] -= a(i, j);
        cd prod(1, 0);
        for (int i = 0; i < k; ++i) prod *= rowsum[static_cast<std::size_t>(i)];
        const int subset = std::popcount(gray);
        if ((k - subset) & 1)
            total -= prod;
        else
            total += prod;
    }
    return total;
}

// Reusable buffers for the repeated-row/column amplitude computation; this is
// the hot path of the synthesis optimizer.
class AmplitudeEngine {
public:
    // <out|U|in>; exactly 0 when photon numbers differ.
    cd amplitude(const Mat& u, const FockState& in, const FockState& out) {
        if (in.modes() != u.cols() || out.modes() != u.rows())
            throw std::invalid_argument("mode count mismatch between interferometer and states");
        const int nph = in.total();
        if (nph != out.total()) return cd(0, 0);
        if (nph == 0) return cd(1, 0);
        rows_.clear();
        cols_.clear();
        for (int i = 0; i < out.modes(); ++i)
            for (int r = 0; r < out[i]; ++r) rows_.push_back(i);
        for (int j = 0; j < in.modes(); ++j)
            for (int c = 0; c < in[j]; ++c) cols_.push_back(j);
        sub_.resize(nph, nph);
        for (int r = 0; r < nph; ++r)
            for (int c = 0; c < nph; ++c)
                sub_(r, c) = u(rows_[static_cast<std::size_t>(r)], cols_[static_cast<std::size_t>(c)]);
        const double norm = std::sqrt(occupation_factorial(in) * occupation_factorial(out));
        return permanent(sub_) / norm;
    }

private:
    std::vector<int> rows_;
    std::vector<int> cols_;
    Mat sub_;
};

inline cd fock_amplitude(const Interferometer& u, const FockState& in, const FockState& out) {
    AmplitudeEngine eng;
    return eng.amplitude(u.matrix(), in, out);
}

// Amplitudes over a shared FockBasis.  Unnormalized vectors carry the success
// probability of a postselection as their squared norm.
struct StateVector {
    std::shared_ptr<const FockBasis> basis;
    Vec amps;

    StateVector() = default;
    StateVector(std::shared_ptr<const FockBasis> b, Vec a) : basis(std::move(b)), amps(std::move(a)) {
        if (static_cast<std::size_t>(amps.size()) != basis->size())
            throw std::invalid_argument("amplitude count does not match basis size");
    }

    static StateVector basis_state(std::shared_ptr<const FockBasis> b, const FockState& s) {
        Vec a = Vec::Zero(static_cast<Eigen::Index>(b->size()));
        int idx = b->index_of(s);
        if (idx < 0) throw std::invalid_argument("state not in basis");
        a(idx) = cd(1, 0);
        return StateVector(std::move(b), std::move(a));
    }

    double squared_norm() const { return amps.squaredNorm(); }
    bool normalized(double tol = 1e-10) const { return std::abs(squared_norm() - 1.0) <= tol; }
};

// Full Fock-space matrix of u on the given basis (rows: outputs).
inline Mat fock_matrix(const Mat& u, const FockBasis& basis) {
    AmplitudeEngine eng;
    const auto sz = static_cast<Eigen::Index>(basis.size());
    Mat big(sz, sz);
    for (Eigen::Index col = 0; col < sz; ++col)
        for (Eigen::Index row = 0; row < sz; ++row)
            big(row, col) = eng.amplitude(u, basis.state(static_cast<std::size_t>(col)),
                                          basis.state(static_cast<std::size_t>(row)));
    return big;
}

inline StateVector evolve(const Interferometer& u, const StateVector& psi) {
    if (u.modes() != psi.basis->modes())
        throw std::invalid_argument("interferometer and state have different mode counts");
    AmplitudeEngine eng;
    const auto sz = static_cast<Eigen::Index>(psi.basis->size());
    Vec out = Vec::Zero(sz);
    for (Eigen::Index col = 0; col < sz; ++col) {
        const cd a = psi.amps(col);
        if (a == cd(0, 0)) continue;
        const FockState& in = psi.basis->state(static_cast<std::size_t>(col));
        for (Eigen::Index row = 0; row < sz; ++row)
            out(row) += eng.amplitude(u.matrix(), in, psi.basis->state(static_cast<std::size_t>(row))) * a;
    }
    return StateVector(psi.basis, std::move(out));
}

struct PostselectResult {
    double probability = 0.0;
    std::optional<StateVector> state;  // renormalized; empty when probability is 0
};

// Projects the listed ancilla modes onto an exact occupation pattern and
// returns the renormalized conditional state on the remaining modes.
inline PostselectResult postselect(const StateVector& psi, const std::vector<int>& ancilla_modes,
                                   const std::vector<int>& pattern) {
    const int m = psi.basis->modes();
    if (ancilla_modes.size() != pattern.size())
        throw std::invalid_argument("ancilla/pattern length mismatch");
    std::vector<bool> is_anc(static_cast<std::size_t>(m), false);
    for (int a : ancilla_modes) {
        if (a < 0 || a >= m) throw std::invalid_argument("ancilla mode out of range");
        if (is_anc[static_cast<std::size_t>(a)]) throw std::invalid_argument("duplicate ancilla mode");
        is_anc[static_cast<std::size_t>(a)] = true;
    }
    int pat_total = 0;
    for (int p : pattern) {
        if (p < 0) throw std::invalid_argument("negative pattern occupation");
        pat_total += p;
    }
    const int n_rem = psi.basis->photons() - pat_total;
    const int m_rem = m - static_cast<int>(ancilla_modes.size());
    if (n_rem < 0) return {};

    auto out_basis = FockBasis::get(m_rem, n_rem);
    Vec out = Vec::Zero(static_cast<Eigen::Index>(out_basis->size()));
    std::vector<int> reduced(static_cast<std::size_t>(m_rem));
    for (std::size_t i = 0; i < psi.basis->size(); ++i) {
        const FockState& s = psi.basis->state(i);
        bool match = true;
        for (std::size_t a = 0; a < ancilla_modes.size(); ++a) {
            if (s[ancilla_modes[a]] != pattern[a]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        int j = 0;
        for (int mode = 0; mode < m; ++mode)
            if (!is_anc[static_cast<std::size_t>(mode)]) reduced[static_cast<std::size_t>(j++)] = s[mode];
        int idx = out_basis->index_of(FockState(reduced));
        out(idx) += psi.amps(static_cast<Eigen::Index>(i));
    }
    PostselectResult res;
    res.probability = out.squaredNorm();
    if (res.probability > 0.0)
        res.state = StateVector(out_basis, out / std::sqrt(res.probability));
    return res;
}

}  // namespace qdlo::fock
