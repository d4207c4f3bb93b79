#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "mlas/errors.hpp"

namespace mlas {

/// Dense column vector, 64-bit floats.
using Vec = std::vector<double>;

/// Dense row-major matrix.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static Mat zeros(std::size_t r, std::size_t c) { return Mat(r, c); }
    static Mat identity(std::size_t n);

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::size_t size() const { return data.size(); }
};

/// Deterministic random source. All draws are derived from raw mt19937_64
/// output, so the stream does not depend on libstdc++ distribution
/// internals. Identical seeds give identical streams.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (cos branch only).
    double normal();

    /// Unbiased integer in [0, n). n must be >= 1.
    std::uint64_t below(std::uint64_t n);

    /// Independent generator derived from this one's seed and a salt.
    /// Forking does not consume or depend on draw position.
    Rng fork(std::uint64_t salt) const;

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

/// Fisher-Yates with Rng::below, so shuffles are reproducible across
/// standard library implementations.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// -- products and elementwise kernels ------------------------------------

/// M v. Throws ShapeError on width mismatch.
Vec matvec(const Mat& m, const Vec& v);

/// M^T v. Throws ShapeError on height mismatch.
Vec matvec_t(const Mat& m, const Vec& v);

/// M += a b^T.
void add_outer(Mat& m, const Vec& a, const Vec& b);

Vec concat(const Vec& a, const Vec& b);

double dot(const Vec& a, const Vec& b);

/// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

double sigmoid(double z);
Vec sigmoid(const Vec& z);
Vec tanh_vec(const Vec& z);
double relu(double z);
Vec relu(const Vec& z);

// -- initializers ---------------------------------------------------------

/// Entries i.i.d. uniform on +-sqrt(6 / (rows + cols)).
Mat glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// Orthogonal n x n matrix from the QR factorization of a Gaussian draw,
/// with R's diagonal signs fixed so the result is unique per seed.
/// Satisfies |Q^T Q - I|_max < 1e-10.
Mat orthogonal_init(std::size_t n, Rng& rng);

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
/// Used for validating caller-supplied metric matrices.
Vec symmetric_eigenvalues(const Mat& m);

} // namespace mlas
