#ifndef GAZEFILT_DETAIL_LINALG_HPP
#define GAZEFILT_DETAIL_LINALG_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gazefilt/errors.hpp"

namespace gazefilt::detail {

/// Row-major square matrix, just enough for the small systems the designers need.
class SquareMatrix {
public:
    explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    double&       operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

private:
    std::size_t         n_;
    std::vector<double> data_;
};

/// Solves A·x = rhs by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(SquareMatrix a, std::vector<double> rhs) {
    const std::size_t n = a.size();
    require(rhs.size() == n, "solve: dimension mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(a(pivot, col)) < 1e-300) {
            throw NumericalError("solve: singular matrix");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(col, c), a(pivot, c));
            }
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t c = col; c < n; ++c) {
                a(r, c) -= factor * a(col, c);
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) {
            acc -= a(i, c) * x[c];
        }
        x[i] = acc / a(i, i);
    }
    return x;
}

/// Expands prod(1 - r·z^-1) into real coefficients [1, c1, c2, ...].
/// Roots must come in conjugate pairs; the residual imaginary parts are dropped.
inline std::vector<double> poly_from_roots(std::span<const std::complex<double>> roots) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (const auto& root : roots) {
        coeffs.emplace_back(0.0);
        for (std::size_t k = coeffs.size() - 1; k > 0; --k) {
            coeffs[k] -= root * coeffs[k - 1];
        }
    }
    std::vector<double> real(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        real[k] = coeffs[k].real();
    }
    return real;
}

/// Roots of c0·z^n + c1·z^(n-1) + ... + cn, i.e. the poles/zeros of a z^-1 polynomial.
inline std::vector<std::complex<double>> poly_roots(std::span<const double> coeffs) {
    std::size_t first = 0;
    while (first < coeffs.size() && coeffs[first] == 0.0) {
        ++first;
    }
    std::size_t last = coeffs.size();
    while (last > first && coeffs[last - 1] == 0.0) {
        --last; // trailing zeros are roots at z = 0
    }
    std::vector<std::complex<double>> roots(coeffs.size() - last, {0.0, 0.0});
    if (last <= first + 1) {
        return roots;
    }
    const auto degree = static_cast<Eigen::Index>(last - first - 1);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (Eigen::Index c = 0; c < degree; ++c) {
        companion(0, c) = -coeffs[first + 1 + static_cast<std::size_t>(c)] / coeffs[first];
    }
    for (Eigen::Index r = 1; r < degree; ++r) {
        companion(r, r - 1) = 1.0;
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("poly_roots: eigenvalue iteration did not converge");
    }
    for (Eigen::Index i = 0; i < degree; ++i) {
        roots.push_back(solver.eigenvalues()(i));
    }
    return roots;
}

/// Evaluates sum c[k]·z^-k at z = e^{j·omega}.
inline std::complex<double> eval_on_unit_circle(std::span<const double> coeffs, double omega) {
    const std::complex<double> zinv = std::polar(1.0, -omega);
    std::complex<double>       acc{0.0, 0.0};
    for (std::size_t k = coeffs.size(); k-- > 0;) {
        acc = acc * zinv + coeffs[k];
    }
    return acc;
}

} // namespace gazefilt::detail

#endif // GAZEFILT_DETAIL_LINALG_HPP
