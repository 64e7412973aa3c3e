// Dense qudit operator library: generalized Pauli gates, the qudit Hadamard
// (discrete Fourier) gate, controlled gates, the one-level controlled-Z, and
// diagonal phase gates.  Dimension d is a runtime parameter; registers are
// indexed big-endian (site 0 is the most significant digit).

#pragma once

#include "qdlo/common.hpp"
#include "qdlo/optim.hpp"

#include <utility>

namespace qdlo::qudit {

inline cd omega(int d) { return std::exp(cd(0, 2.0 * kPi / d)); }

struct QuditOperator {
    int d = 2;
    int sites = 1;
    Mat m;

    QuditOperator() = default;
    QuditOperator(int d_, int sites_, Mat mat) : d(d_), sites(sites_), m(std::move(mat)) {
        if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
        if (sites < 1) throw std::invalid_argument("site count must be >= 1");
        const int dim = powi(d, sites);
        if (m.rows() != dim || m.cols() != dim)
            throw std::invalid_argument("matrix size does not match d^sites");
    }

    int dim() const { return powi(d, sites); }

    bool is_unitary(double tol = 1e-10) const { return qdlo::is_unitary(m, tol); }

    QuditOperator dagger() const { return QuditOperator(d, sites, m.adjoint()); }

    QuditOperator operator*(const QuditOperator& o) const {
        if (d != o.d || sites != o.sites) throw std::invalid_argument("operator shape mismatch");
        return QuditOperator(d, sites, m * o.m);
    }

    static QuditOperator identity(int d, int sites = 1) {
        const int dim = powi(d, sites);
        return QuditOperator(d, sites, Mat::Identity(dim, dim));
    }
};

// X|n> = |n+1 mod d>
inline QuditOperator pauli_x(int d) {
    if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
    Mat m = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) m((n + 1) % d, n) = cd(1, 0);
    return QuditOperator(d, 1, std::move(m));
}

// Z|n> = w^n |n>
inline QuditOperator pauli_z(int d) {
    if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
    Mat m = Mat::Zero(d, d);
    const cd w = omega(d);
    for (int n = 0; n < d; ++n) m(n, n) = std::pow(w, n);
    return QuditOperator(d, 1, std::move(m));
}

// H(n, m) = w^{nm} / sqrt(d); satisfies H X H^dag = Z.
inline QuditOperator hadamard(int d) {
    if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
    Mat m(d, d);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (int n = 0; n < d; ++n)
        for (int k = 0; k < d; ++k) m(n, k) = s * std::exp(cd(0, 2.0 * kPi * n * k / d));
    return QuditOperator(d, 1, std::move(m));
}

// CX|n, m> = |n, n+m mod d>
inline QuditOperator controlled_x(int d) {
    const int dim = d * d;
    Mat m = Mat::Zero(dim, dim);
    for (int n = 0; n < d; ++n)
        for (int k = 0; k < d; ++k) m(n * d + (n + k) % d, n * d + k) = cd(1, 0);
    return QuditOperator(d, 2, std::move(m));
}

// CZ|n, m> = w^{nm} |n, m>
inline QuditOperator controlled_z(int d) {
    const int dim = d * d;
    Mat m = Mat::Zero(dim, dim);
    const cd w = omega(d);
    for (int n = 0; n < d; ++n)
        for (int k = 0; k < d; ++k) m(n * d + k, n * d + k) = std::pow(w, n * k);
    return QuditOperator(d, 2, std::move(m));
}

// One-level controlled-Z: phase exp(i 2 pi l / d) on |k, l> iff k = d-1.
inline QuditOperator one_level_cz(int d) {
    const int dim = d * d;
    Mat m = Mat::Zero(dim, dim);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            cd phase = (k == d - 1) ? std::exp(cd(0, 2.0 * kPi * l / d)) : cd(1, 0);
            m(k * d + l, k * d + l) = phase;
        }
    return QuditOperator(d, 2, std::move(m));
}

// P(theta)|n> = exp(i theta_n) |n>
inline QuditOperator phase_gate(const RVec& theta) {
    const int d = static_cast<int>(theta.size());
    if (d < 2) throw std::invalid_argument("phase vector must have length >= 2");
    for (int n = 0; n < d; ++n)
        if (!std::isfinite(theta(n))) throw std::invalid_argument("phase angles must be finite");
    Mat m = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) m(n, n) = std::exp(cd(0, theta(n)));
    return QuditOperator(d, 1, std::move(m));
}

inline QuditOperator kron(const QuditOperator& a, const QuditOperator& b) {
    if (a.d != b.d) throw std::invalid_argument("kron requires equal qudit dimensions");
    Mat m(a.m.rows() * b.m.rows(), a.m.cols() * b.m.cols());
    for (Eigen::Index i = 0; i < a.m.rows(); ++i)
        for (Eigen::Index j = 0; j < a.m.cols(); ++j)
            m.block(i * b.m.rows(), j * b.m.cols(), b.m.rows(), b.m.cols()) = a.m(i, j) * b.m;
    return QuditOperator(a.d, a.sites + b.sites, std::move(m));
}

// Tensor-embeds op on the listed register sites (operator site order), with
// identity elsewhere.
inline QuditOperator embed(const QuditOperator& op, const std::vector<int>& sites, int n_total) {
    if (static_cast<int>(sites.size()) != op.sites)
        throw std::invalid_argument("site list length does not match operator");
    std::vector<bool> used(static_cast<std::size_t>(n_total), false);
    for (int s : sites) {
        if (s < 0 || s >= n_total) throw std::invalid_argument("embed site out of range");
        if (used[static_cast<std::size_t>(s)]) throw std::invalid_argument("embed site collision");
        used[static_cast<std::size_t>(s)] = true;
    }
    const int d = op.d;
    const int dim = powi(d, n_total);
    const int opdim = op.dim();
    const int k = op.sites;

    std::vector<int> place(static_cast<std::size_t>(n_total));
    for (int s = 0; s < n_total; ++s) place[static_cast<std::size_t>(s)] = powi(d, n_total - 1 - s);

    Mat out = Mat::Zero(dim, dim);
    std::vector<int> digits(static_cast<std::size_t>(n_total));
    for (int col = 0; col < dim; ++col) {
        int rem = col;
        for (int s = 0; s < n_total; ++s) {
            digits[static_cast<std::size_t>(s)] = rem / place[static_cast<std::size_t>(s)];
            rem %= place[static_cast<std::size_t>(s)];
        }
        int op_col = 0;
        for (int a = 0; a < k; ++a) op_col = op_col * d + digits[static_cast<std::size_t>(sites[static_cast<std::size_t>(a)])];
        for (int op_row = 0; op_row < opdim; ++op_row) {
            cd v = op.m(op_row, op_col);
            if (v == cd(0, 0)) continue;
            int row = col;
            int rr = op_row;
            for (int a = k - 1; a >= 0; --a) {
                const int site = sites[static_cast<std::size_t>(a)];
                const int digit = rr % d;
                rr /= d;
                row += (digit - digits[static_cast<std::size_t>(site)]) * place[static_cast<std::size_t>(site)];
            }
            out(row, col) += v;
        }
    }
    return QuditOperator(d, n_total, std::move(out));
}

// ---------------------------------------------------------------------------
// Factorization of a single-qudit unitary into layers of H P(theta_k),
//   U = e^{i gamma} * H P(theta_{K-1}) * ... * H P(theta_0),
// found by least-squares fitting of the layer phases.  theta[0] is the first
// factor applied.  Used by the cluster-state compiler, where each layer is
// one measurement step.
//
// K = d+1 layers matches the parameter count of U(d) and works for almost
// every unitary; a small exceptional set only factors with one extra layer,
// so the search widens to d+2 before giving up.

struct HpFactorization {
    std::vector<RVec> thetas;  // application order
    double gamma = 0.0;
    double residual = 0.0;
};

inline Mat hp_product(const std::vector<RVec>& thetas, int d) {
    const Mat h = hadamard(d).m;
    Mat m = Mat::Identity(d, d);
    for (const auto& th : thetas) m = h * phase_gate(th).m * m;
    return m;
}

namespace detail {

inline bool hp_fit(const Mat& u, int d, int layers, Rng master, int restarts, double target,
                   HpFactorization& best) {
    const Mat h = hadamard(d).m;

    // parameters: layers*d phases followed by the global phase gamma
    auto unpack = [&](const RVec& x) {
        std::vector<RVec> th(static_cast<std::size_t>(layers));
        for (int k = 0; k < layers; ++k) th[static_cast<std::size_t>(k)] = x.segment(k * d, d);
        return th;
    };

    auto objective = [&](const RVec& x, RVec& grad) {
        auto th = unpack(x);
        const double gamma = x(layers * d);
        // forward partial products F_k = H P_{k-1} ... H P_0, F_0 = I
        std::vector<Mat> fwd(static_cast<std::size_t>(layers) + 1);
        fwd[0] = Mat::Identity(d, d);
        std::vector<Mat> pk(static_cast<std::size_t>(layers));
        for (int k = 0; k < layers; ++k) {
            pk[static_cast<std::size_t>(k)] = phase_gate(th[static_cast<std::size_t>(k)]).m;
            fwd[static_cast<std::size_t>(k) + 1] =
                h * pk[static_cast<std::size_t>(k)] * fwd[static_cast<std::size_t>(k)];
        }
        // suffix products S_k = H P_{K-1} ... H P_{k+1}, S_{K-1} = I
        std::vector<Mat> suf(static_cast<std::size_t>(layers));
        suf[static_cast<std::size_t>(layers) - 1] = Mat::Identity(d, d);
        for (int k = layers - 2; k >= 0; --k)
            suf[static_cast<std::size_t>(k)] =
                suf[static_cast<std::size_t>(k) + 1] * h * pk[static_cast<std::size_t>(k) + 1];

        const cd c = std::exp(cd(0, gamma));
        Mat r = fwd[static_cast<std::size_t>(layers)] - c * u;
        const double f = r.squaredNorm();

        grad.resize(layers * d + 1);
        for (int k = 0; k < layers; ++k) {
            // dM/dtheta_{k,n} = S_k * H * (i E_nn P_k) * F_k, via the cyclic trace
            Mat w = pk[static_cast<std::size_t>(k)] * fwd[static_cast<std::size_t>(k)] * r.adjoint() *
                    suf[static_cast<std::size_t>(k)] * h;
            for (int n = 0; n < d; ++n) grad(k * d + n) = -2.0 * std::imag(w(n, n));
        }
        grad(layers * d) = 2.0 * std::real((r.adjoint() * (cd(0, -1) * c * u)).trace());
        return f;
    };

    for (int attempt = 0; attempt < restarts; ++attempt) {
        Rng rng = master.split(static_cast<std::uint64_t>(attempt));
        RVec x(layers * d + 1);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(0.0, 2.0 * kPi);
        opt::TrustRegionSettings cfg;
        cfg.max_iterations = 600;
        cfg.gradient_tol = 1e-12;
        opt::trust_region_minimize(objective, x, cfg);
        RVec g(x.size());
        const double f = objective(x, g);
        if (f < best.residual) {
            best.residual = f;
            best.thetas = unpack(x);
            best.gamma = x(layers * d);
        }
        if (best.residual <= target) return true;
    }
    return false;
}

}  // namespace detail

inline HpFactorization hp_factorize(const Mat& u, int d, std::uint64_t seed = 20240501,
                                    int restarts_per_size = 60, double target = 1e-12) {
    if (u.rows() != d || u.cols() != d) throw std::invalid_argument("matrix size does not match d");
    if (!qdlo::is_unitary(u, 1e-8)) throw std::invalid_argument("hp_factorize requires a unitary");
    Rng master(seed);
    for (int layers = d + 1; layers <= d + 2; ++layers) {
        HpFactorization best;
        best.residual = std::numeric_limits<double>::infinity();
        if (detail::hp_fit(u, d, layers, master.split(static_cast<std::uint64_t>(layers)),
                           restarts_per_size, target, best))
            return best;
        if (layers == d + 2 && best.residual <= 1e-8) return best;
    }
    throw ConvergenceError("hp_factorize did not reach the target residual");
}

}  // namespace qdlo::qudit
