// Shared aliases, numeric helpers and deterministic randomness used by every
// qdlo module.  All random draws in the library go through Rng below, never
// through std distributions, so that identical seeds give identical results
// on every platform.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdlo {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Error classes mirrored by the CLI exit codes.
struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline int powi(int base, int exp) {
    int r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Counter-based splitmix64.  Good enough statistically for simulation work
// and trivially splittable: child streams are derived by hashing the parent
// seed with a stream index.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Box-Muller; one value per call keeps the stream layout simple.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    Rng split(std::uint64_t stream) const {
        Rng child(state_ ^ (0xd1342543de82ef95ull * (stream + 1)));
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

inline Mat ginibre(int n, Rng& rng) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = cd(rng.gaussian(), rng.gaussian());
    return g;
}

// Haar-distributed unitary via QR of a Ginibre matrix with the standard
// phase fix on R's diagonal.
inline Mat haar_unitary(int n, Rng& rng) {
    Mat g = ginibre(n, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        cd d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= (a > 0) ? d / a : cd(1, 0);
    }
    return q;
}

inline bool is_unitary(const Mat& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return (u * u.adjoint() - Mat::Identity(u.rows(), u.cols())).norm() <= tol;
}

// Phase that best aligns b onto a (maximises Re(e^{-i phi} <a,b>)).
inline cd alignment_phase(const Vec& a, const Vec& b) {
    cd ov = b.dot(a);  // <b, a>
    double m = std::abs(ov);
    return (m > 0) ? ov / m : cd(1, 0);
}

// Max elementwise deviation between a and b after optimal global phase.
inline double phase_aligned_distance(const Vec& a, const Vec& b) {
    cd ph = alignment_phase(a, b);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

inline double phase_aligned_distance(const Mat& a, const Mat& b) {
    cd ov = (b.adjoint() * a).trace();
    cd ph = (std::abs(ov) > 0) ? ov / std::abs(ov) : cd(1, 0);
    return (a - ph * b).cwiseAbs().maxCoeff();
}

}  // namespace qdlo
