#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace creditrisk::detail {

// Dense symmetric positive-definite solver via Cholesky. Matrices here are
// tiny (feature dimension squared), so a textbook O(d^3) factorization is
// all that's needed. Returns false if the matrix is not (numerically) SPD.
class Cholesky {
public:
    bool factorize(std::span<const double> matrix, std::size_t n) {
        n_ = n;
        lower_.assign(matrix.begin(), matrix.end());
        for (std::size_t j = 0; j < n_; ++j) {
            double diag = lower_[j * n_ + j];
            for (std::size_t k = 0; k < j; ++k) {
                const double l = lower_[j * n_ + k];
                diag -= l * l;
            }
            if (!(diag > 0.0) || !std::isfinite(diag)) return false;
            const double root = std::sqrt(diag);
            lower_[j * n_ + j] = root;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double sum = lower_[i * n_ + j];
                for (std::size_t k = 0; k < j; ++k) {
                    sum -= lower_[i * n_ + k] * lower_[j * n_ + k];
                }
                lower_[i * n_ + j] = sum / root;
            }
        }
        return true;
    }

    std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> y(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n_; ++i) {
            double sum = y[i];
            for (std::size_t k = 0; k < i; ++k) sum -= lower_[i * n_ + k] * y[k];
            y[i] = sum / lower_[i * n_ + i];
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double sum = y[ii];
            for (std::size_t k = ii + 1; k < n_; ++k) sum -= lower_[k * n_ + ii] * y[k];
            y[ii] = sum / lower_[ii * n_ + ii];
        }
        return y;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> lower_;
};

inline bool solve_spd(std::span<const double> matrix, std::span<const double> rhs,
                      std::size_t n, std::vector<double>& solution) {
    Cholesky chol;
    if (!chol.factorize(matrix, n)) return false;
    solution = chol.solve(rhs);
    return true;
}

} // namespace creditrisk::detail
