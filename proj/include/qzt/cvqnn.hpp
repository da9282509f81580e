#pragma once

// Continuous-variable phase-space algebra.
//
// A Gaussian operation acts on the quadrature mean vector r = (x_1..x_N,
// p_1..p_N) as r -> M r + d with M symplectic: M^T Omega M = Omega,
// Omega = [[0, I], [-I, 0]]. Displacements follow the convention
// D(alpha)|x> = |x + sqrt(2) alpha>.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "qzt/error.hpp"

namespace qzt::cv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kSymplecticTol = 1e-9;
inline constexpr double kOrthogonalTol = 1e-9;

inline Mat omega(int n) {
    Mat w = Mat::Zero(2 * n, 2 * n);
    w.topRightCorner(n, n) = Mat::Identity(n, n);
    w.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return w;
}

inline double symplectic_residual(const Mat& m) {
    const auto n = static_cast<int>(m.rows() / 2);
    return (m.transpose() * omega(n) * m - omega(n)).cwiseAbs().maxCoeff();
}

inline bool is_symplectic(const Mat& m, double tol = kSymplecticTol) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0) return false;
    return symplectic_residual(m) <= tol;
}

inline bool is_orthogonal(const Mat& o, double tol = kOrthogonalTol) {
    if (o.rows() != o.cols()) return false;
    return (o.transpose() * o - Mat::Identity(o.rows(), o.cols())).cwiseAbs().maxCoeff() <= tol;
}

struct GaussianOp {
    int n_modes = 0;
    Mat symplectic;
    Vec displacement;

    static GaussianOp identity(int n) { return {n, Mat::Identity(2 * n, 2 * n), Vec::Zero(2 * n)}; }
};

inline GaussianOp interferometer_op(const Mat& o) {
    if (o.rows() != o.cols() || o.rows() == 0) throw DimensionError("interferometer needs a square matrix");
    if (!is_orthogonal(o)) throw NumericError("interferometer matrix is not orthogonal");
    const auto n = static_cast<int>(o.rows());
    GaussianOp g = GaussianOp::identity(n);
    g.symplectic.topLeftCorner(n, n) = o;
    g.symplectic.bottomRightCorner(n, n) = o;
    return g;
}

// x_i -> e^{-r_i} x_i, p_i -> e^{r_i} p_i.
inline GaussianOp squeeze_op(const Vec& r) {
    if (r.size() == 0) throw DimensionError("squeeze needs at least one mode");
    if (!r.allFinite()) throw NumericError("squeeze parameters must be finite");
    const auto n = static_cast<int>(r.size());
    GaussianOp g = GaussianOp::identity(n);
    for (int i = 0; i < n; ++i) {
        g.symplectic(i, i) = std::exp(-r(i));
        g.symplectic(n + i, n + i) = std::exp(r(i));
    }
    return g;
}

inline GaussianOp displace_op(const Vec& alpha) {
    if (alpha.size() == 0) throw DimensionError("displacement needs at least one mode");
    if (!alpha.allFinite()) throw NumericError("displacement must be finite");
    const auto n = static_cast<int>(alpha.size());
    GaussianOp g = GaussianOp::identity(n);
    g.displacement.head(n) = std::numbers::sqrt2 * alpha;
    return g;
}

// (x, p) -> (p, -x) on every mode.
inline GaussianOp fourier_op(int n_modes) {
    if (n_modes < 1) throw DimensionError("fourier transform needs at least one mode");
    return {n_modes, omega(n_modes), Vec::Zero(2 * n_modes)};
}

// ops[0] acts first.
inline GaussianOp compose(const std::vector<GaussianOp>& ops) {
    if (ops.empty()) throw DimensionError("compose of an empty list");
    GaussianOp out = GaussianOp::identity(ops.front().n_modes);
    for (const auto& op : ops) {
        if (op.n_modes != out.n_modes) throw DimensionError("compose of operations on different mode counts");
        out.symplectic = op.symplectic * out.symplectic;
        out.displacement = op.symplectic * out.displacement + op.displacement;
    }
    return out;
}

inline Vec apply_mean(const GaussianOp& op, const Vec& r) {
    if (r.size() != 2 * op.n_modes) throw DimensionError("mean vector does not match mode count");
    return op.symplectic * r + op.displacement;
}

// x-quadrature means after acting on (x, p = 0).
inline Vec mean_forward(const GaussianOp& op, const Vec& x) {
    if (x.size() != op.n_modes) throw DimensionError("input has " + std::to_string(x.size()) + " entries, op has " +
                                                     std::to_string(op.n_modes) + " modes");
    Vec r = Vec::Zero(2 * op.n_modes);
    r.head(op.n_modes) = x;
    return apply_mean(op, r).head(op.n_modes);
}

struct AffineLayerPlan {
    Mat W;
    Vec b;
    Mat O2;
    Vec sigma;
    Mat O1;
    std::vector<GaussianOp> sequence;  // interferometer(O1), squeeze, interferometer(O2), displace
    GaussianOp composed;
    // False when W was padded to square or a zero singular value needed a
    // clamped squeeze; the mean map is then only approximately W x + b.
    bool exact = true;
    int in_dim = 0;
    int out_dim = 0;
};

// Singular values at or below this fraction of the largest are treated as zero.
inline constexpr double kSingularTol = 1e-12;
// Squeezing used in place of an infinite one when exactness is not demanded.
inline constexpr double kMaxSqueeze = 30.0;

inline AffineLayerPlan affine_layer_from(const Mat& W, const Vec& b, bool require_exact = true) {
    if (W.rows() == 0 || W.cols() == 0) throw DimensionError("weight matrix is empty");
    if (b.size() != W.rows()) throw DimensionError("bias length does not match weight rows");
    if (!W.allFinite() || !b.allFinite()) throw NumericError("weights and bias must be finite");
    AffineLayerPlan plan;
    plan.W = W;
    plan.b = b;
    plan.out_dim = static_cast<int>(W.rows());
    plan.in_dim = static_cast<int>(W.cols());
    const auto k = std::max(W.rows(), W.cols());
    if (W.rows() != W.cols()) {
        if (require_exact) throw NumericError("degenerate embedding: non-square weight matrix");
        plan.exact = false;
    }
    Mat Wk = Mat::Zero(k, k);
    Wk.topLeftCorner(W.rows(), W.cols()) = W;
    Vec bk = Vec::Zero(k);
    bk.head(b.size()) = b;

    Eigen::JacobiSVD<Mat> svd(Wk, Eigen::ComputeFullU | Eigen::ComputeFullV);
    plan.O2 = svd.matrixU();
    plan.sigma = svd.singularValues();
    plan.O1 = svd.matrixV().transpose();

    const double smax = plan.sigma.maxCoeff();
    Vec r(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double s = plan.sigma(i);
        if (s <= kSingularTol * smax || s == 0.0) {
            if (require_exact)
                throw NumericError("degenerate embedding: singular value " + std::to_string(s) +
                                   " needs infinite squeezing");
            plan.exact = false;
            r(i) = kMaxSqueeze;
        } else {
            r(i) = -std::log(s);
        }
    }
    plan.sequence = {interferometer_op(plan.O1), squeeze_op(r), interferometer_op(plan.O2),
                     displace_op(bk / std::numbers::sqrt2)};
    plan.composed = compose(plan.sequence);
    return plan;
}

inline Vec mean_forward(const AffineLayerPlan& plan, const Vec& x) {
    if (x.size() != plan.in_dim) throw DimensionError("input does not match layer width");
    Vec xk = Vec::Zero(plan.composed.n_modes);
    xk.head(x.size()) = x;
    return mean_forward(plan.composed, xk).head(plan.out_dim);
}

struct Activation {
    std::string name = "identity";
    std::function<double(double)> fn = [](double v) { return v; };

    double operator()(double v) const { return fn(v); }

    static Activation identity() { return {}; }
    static Activation tanh() { return {"tanh", [](double v) { return std::tanh(v); }}; }
    static Activation cubic() { return {"cubic", [](double v) { return v * v * v; }}; }
    static Activation square() { return {"square", [](double v) { return v * v; }}; }
    static Activation sine() { return {"sin", [](double v) { return std::sin(v); }}; }
    static Activation zero() { return {"zero", [](double) { return 0.0; }}; }
    static Activation custom(std::string name, std::function<double(double)> f) { return {std::move(name), std::move(f)}; }
};

inline Vec apply_activation(const Activation& phi, const Vec& v) {
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out(i) = phi(v(i));
        if (!std::isfinite(out(i))) throw NumericError("activation " + phi.name + " is undefined at " + std::to_string(v(i)));
    }
    return out;
}

// (x, p) -> (x, p + lambda x^2)
inline std::pair<double, double> cubic_phase_mean(double x, double p, double lambda) {
    return {x, p + lambda * x * x};
}

// Two-mode x-means after |x>|0> -> |x>|x + phi(x)>.
inline std::pair<double, double> residual_sum_mean(double x, const Activation& phi) {
    const double v = phi(x);
    if (!std::isfinite(v)) throw NumericError("residual nonlinearity " + phi.name + " is undefined at " + std::to_string(x));
    return {x, x + v};
}

inline Vec classical_forward(const std::vector<Mat>& weights, const std::vector<Vec>& biases, const Activation& phi,
                             const Vec& x) {
    if (weights.size() != biases.size()) throw DimensionError("weights and biases differ in layer count");
    Vec h = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].cols() != h.size() || weights[l].rows() != biases[l].size())
            throw DimensionError("layer " + std::to_string(l) + " dimensions do not chain");
        h = apply_activation(phi, weights[l] * h + biases[l]);
    }
    return h;
}

inline Vec cv_forward(const std::vector<std::pair<AffineLayerPlan, Activation>>& layers, const Vec& x0) {
    Vec h = x0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].first.in_dim != h.size())
            throw DimensionError("layer " + std::to_string(l) + " expects width " +
                                 std::to_string(layers[l].first.in_dim) + ", got " + std::to_string(h.size()));
        h = apply_activation(layers[l].second, mean_forward(layers[l].first, h));
    }
    return h;
}

// Optical interferometer whose action on position eigenstates is
// |x> -> |U^T x>: symplectic blockdiag(U^T, U^T).
inline GaussianOp interferometer_unitary_op(const Mat& U) { return interferometer_op(U.transpose()); }

inline Vec interferometer_on_x(const Mat& U, const Vec& x) {
    return mean_forward(interferometer_unitary_op(U), x);
}

struct QuadraticHamiltonian {
    Mat Hxx, Hxp, Hpx, Hpp;

    int n_modes() const { return static_cast<int>(Hxx.rows()); }

    Mat full() const {
        const auto n = Hxx.rows();
        for (const Mat* b : {&Hxx, &Hxp, &Hpx, &Hpp})
            if (b->rows() != n || b->cols() != n) throw DimensionError("Hamiltonian blocks must all be N x N");
        Mat h(2 * n, 2 * n);
        h << Hxx, Hxp, Hpx, Hpp;
        return h;
    }

    static QuadraticHamiltonian zero(int n) {
        return {Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
    }
};

// Every N x N block is circulant: B(i, j) = B(i+1, j+1) with cyclic indices.
inline bool is_block_toeplitz(const Mat& m, double tol = 1e-8) {
    const auto n = m.rows() / 2;
    for (int bi = 0; bi < 2; ++bi)
        for (int bj = 0; bj < 2; ++bj) {
            const Mat b = m.block(bi * n, bj * n, n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (std::abs(b(i, j) - b((i + 1) % n, (j + 1) % n)) > tol) return false;
        }
    return true;
}

// M = exp(t Omega H~).
inline std::pair<GaussianOp, bool> toeplitz_symplectic(const QuadraticHamiltonian& h, double t) {
    const Mat hf = h.full();
    if ((hf - hf.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw NumericError("quadratic Hamiltonian is not symmetric");
    const int n = h.n_modes();
    const Mat gen = t * omega(n) * hf;
    GaussianOp op{n, gen.exp(), Vec::Zero(2 * n)};
    const bool toeplitz = is_block_toeplitz(op.symplectic);
    return {std::move(op), toeplitz};
}

struct FockOperator {
    int cutoff = 10;
    CMat matrix;
};

// Truncated position operator (a + a^dagger) / sqrt(2).
inline Mat fock_position(int cutoff) {
    Mat x = Mat::Zero(cutoff, cutoff);
    for (int k = 1; k < cutoff; ++k) {
        x(k - 1, k) = std::sqrt(static_cast<double>(k)) / std::numbers::sqrt2;
        x(k, k - 1) = x(k - 1, k);
    }
    return x;
}

// exp(i lambda x^3) with x the truncated position operator. The truncated
// x^3 is real symmetric, so the exponential is taken through its
// eigendecomposition and is unitary on the retained subspace.
inline FockOperator fock_cubic_phase(double lambda, int cutoff = 10) {
    if (cutoff < 4) throw ConfigError("Fock cutoff must be at least 4");
    if (!std::isfinite(lambda)) throw NumericError("cubic phase strength must be finite");
    const Mat x = fock_position(cutoff);
    const Mat x3 = x * x * x;
    Eigen::SelfAdjointEigenSolver<Mat> es(x3);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition of x^3 failed");
    const Mat& v = es.eigenvectors();
    Eigen::VectorXcd phase(cutoff);
    for (int k = 0; k < cutoff; ++k) phase(k) = std::polar(1.0, lambda * es.eigenvalues()(k));
    FockOperator op;
    op.cutoff = cutoff;
    op.matrix = v.cast<std::complex<double>>() * phase.asDiagonal() * v.transpose().cast<std::complex<double>>();
    const double err =
        (op.matrix.adjoint() * op.matrix - CMat::Identity(cutoff, cutoff)).cwiseAbs().maxCoeff();
    if (err > 1e-6) throw NumericError("cubic phase operator is not unitary at cutoff " + std::to_string(cutoff));
    return op;
}

}  // namespace qzt::cv
