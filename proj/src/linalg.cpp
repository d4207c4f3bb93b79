#include "mlas/linalg.hpp"

#include <cmath>
#include <string>

namespace mlas {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

double Rng::normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling over the largest multiple of n, no modulo bias.
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

Rng Rng::fork(std::uint64_t salt) const {
    // splitmix64 over seed ^ salt; decorrelates nearby seeds.
    std::uint64_t z = seed_ ^ (salt + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return Rng(z);
}

Vec matvec(const Mat& m, const Vec& v) {
    if (m.cols != v.size()) {
        throw ShapeError("matvec: matrix is " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols) + " but vector has length " +
                         std::to_string(v.size()));
    }
    Vec out(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

Vec matvec_t(const Mat& m, const Vec& v) {
    if (m.rows != v.size()) {
        throw ShapeError("matvec_t: matrix is " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols) + " but vector has length " +
                         std::to_string(v.size()));
    }
    Vec out(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) out[j] += row[j] * v[i];
    }
    return out;
}

void add_outer(Mat& m, const Vec& a, const Vec& b) {
    if (m.rows != a.size() || m.cols != b.size()) {
        throw ShapeError("add_outer: shape mismatch");
    }
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* row = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += a[i] * b[j];
    }
}

Vec concat(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Vec sigmoid(const Vec& z) {
    Vec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
    return out;
}

Vec tanh_vec(const Vec& z) {
    Vec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::tanh(z[i]);
    return out;
}

double relu(double z) { return z > 0.0 ? z : 0.0; }

Vec relu(const Vec& z) {
    Vec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = relu(z[i]);
    return out;
}

Mat glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Mat m(rows, cols);
    for (double& x : m.data) x = rng.uniform(-bound, bound);
    return m;
}

namespace {

// Householder QR of a square matrix, in place. Returns the Q factor.
Mat qr_q_factor(Mat a) {
    std::size_t n = a.rows;
    Mat q = Mat::identity(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        // Householder vector for column k below the diagonal.
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a.at(i, k) * a.at(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        double alpha = a.at(k, k) > 0 ? -norm : norm;
        Vec v(n, 0.0);
        v[k] = a.at(k, k) - alpha;
        for (std::size_t i = k + 1; i < n; ++i) v[i] = a.at(i, k);
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        // A <- (I - 2 v v^T / v^T v) A ; Q <- Q (I - 2 v v^T / v^T v)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < n; ++i) s += v[i] * a.at(i, j);
            s = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < n; ++i) a.at(i, j) -= s * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k; j < n; ++j) s += q.at(i, j) * v[j];
            s = 2.0 * s / vnorm2;
            for (std::size_t j = k; j < n; ++j) q.at(i, j) -= s * v[j];
        }
    }
    // Fix column signs so diag(R) >= 0; makes the factorization unique.
    for (std::size_t j = 0; j < n; ++j) {
        if (a.at(j, j) < 0.0) {
            for (std::size_t i = 0; i < n; ++i) q.at(i, j) = -q.at(i, j);
        }
    }
    return q;
}

} // namespace

Mat orthogonal_init(std::size_t n, Rng& rng) {
    Mat g(n, n);
    for (double& x : g.data) x = rng.normal();
    if (n == 1) {
        g.at(0, 0) = g.at(0, 0) >= 0.0 ? 1.0 : -1.0;
        return g;
    }
    return qr_q_factor(std::move(g));
}

Vec symmetric_eigenvalues(const Mat& m) {
    if (m.rows != m.cols) throw ShapeError("symmetric_eigenvalues: matrix not square");
    std::size_t n = m.rows;
    Mat a = m;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vec eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
    return eig;
}

} // namespace mlas
