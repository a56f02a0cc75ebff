#pragma once

// Small fixed-capacity dense vectors/matrices for d-dimensional path
// statistics (d <= kMaxDim), plus the two tiny dense solvers the library
// needs: Gaussian elimination with partial pivoting and a Jacobi
// eigenvalue sweep for symmetric matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace roughwalk {

inline constexpr int kMaxDim = 6;

class Vec {
public:
    Vec() = default;
    explicit Vec(int dim) : d_(check_dim(dim)) {}
    Vec(std::initializer_list<double> xs) : d_(check_dim(static_cast<int>(xs.size()))) {
        std::copy(xs.begin(), xs.end(), v_.begin());
    }

    static Vec unit(int dim, int axis) {
        Vec e(dim);
        if (axis < 0 || axis >= dim) throw std::out_of_range("Vec::unit: axis out of range");
        e[axis] = 1.0;
        return e;
    }

    int dim() const { return d_; }
    double& operator[](int i) { return v_[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v_[static_cast<size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < d_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < d_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (int i = 0; i < d_; ++i) v_[i] *= c;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double c, Vec a) { return a *= c; }
    friend Vec operator*(Vec a, double c) { return a *= c; }
    friend Vec operator-(Vec a) { return a *= -1.0; }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < d_; ++i) s += v_[i] * o.v_[i];
        return s;
    }
    double norm_sq() const { return dot(*this); }
    double norm() const { return std::sqrt(norm_sq()); }
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < d_; ++i) m = std::max(m, std::abs(v_[i]));
        return m;
    }

    bool operator==(const Vec& o) const {
        if (d_ != o.d_) return false;
        for (int i = 0; i < d_; ++i)
            if (v_[i] != o.v_[i]) return false;
        return true;
    }

    static int check_dim(int d) {
        if (d < 0 || d > kMaxDim) throw std::invalid_argument("Vec: dim must be in [0, kMaxDim]");
        return d;
    }

private:
    std::array<double, kMaxDim> v_{};
    int d_ = 0;
};

class Mat {
public:
    Mat() = default;
    explicit Mat(int dim) : d_(Vec::check_dim(dim)) {}

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return d_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i * d_ + j)]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i * d_ + j)]; }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < d_ * d_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < d_ * d_; ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double c) {
        for (int i = 0; i < d_ * d_; ++i) a_[i] *= c;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(double c, Mat a) { return a *= c; }
    friend Mat operator*(Mat a, double c) { return a *= c; }
    friend Mat operator-(Mat a) { return a *= -1.0; }

    Mat transpose() const {
        Mat t(d_);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius_sq() const {
        double s = 0.0;
        for (int i = 0; i < d_ * d_; ++i) s += a_[i] * a_[i];
        return s;
    }
    double frobenius() const { return std::sqrt(frobenius_sq()); }
    double max_abs() const {
        double m = 0.0;
        for (int i = 0; i < d_ * d_; ++i) m = std::max(m, std::abs(a_[i]));
        return m;
    }

    bool operator==(const Mat& o) const {
        if (d_ != o.d_) return false;
        for (int i = 0; i < d_ * d_; ++i)
            if (a_[i] != o.a_[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDim * kMaxDim> a_{};
    int d_ = 0;
};

inline Mat outer(const Vec& x, const Vec& y) {
    Mat m(x.dim());
    for (int i = 0; i < x.dim(); ++i)
        for (int j = 0; j < y.dim(); ++j) m(i, j) = x[i] * y[j];
    return m;
}

// (M + M^T)/2
inline Mat sym_part(const Mat& m) {
    Mat s(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

// (M - M^T)/2
inline Mat antisym_part(const Mat& m) {
    Mat a(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) a(i, j) = 0.5 * (m(i, j) - m(j, i));
    return a;
}

// Solve A X = B for X, with A n-by-n and B n-by-k, both row-major.
// Gaussian elimination with partial pivoting; throws on (near-)singular A.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b, int n, int k = 1) {
    if (static_cast<int>(a.size()) != n * n || static_cast<int>(b.size()) != n * k)
        throw std::invalid_argument("solve_linear: shape mismatch");
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a[static_cast<size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::abs(a[static_cast<size_t>(r) * n + col]);
            if (v > best) { best = v; piv = r; }
        }
        if (best < 1e-14) throw std::runtime_error("solve_linear: singular system");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(piv) * n + j], a[static_cast<size_t>(col) * n + j]);
            for (int j = 0; j < k; ++j) std::swap(b[static_cast<size_t>(piv) * k + j], b[static_cast<size_t>(col) * k + j]);
        }
        const double inv = 1.0 / a[static_cast<size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<size_t>(r) * n + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[static_cast<size_t>(r) * n + j] -= f * a[static_cast<size_t>(col) * n + j];
            for (int j = 0; j < k; ++j) b[static_cast<size_t>(r) * k + j] -= f * b[static_cast<size_t>(col) * k + j];
        }
    }
    std::vector<double> x(static_cast<size_t>(n) * k);
    for (int r = n - 1; r >= 0; --r) {
        for (int j = 0; j < k; ++j) {
            double s = b[static_cast<size_t>(r) * k + j];
            for (int c = r + 1; c < n; ++c) s -= a[static_cast<size_t>(r) * n + c] * x[static_cast<size_t>(c) * k + j];
            x[static_cast<size_t>(r) * k + j] = s / a[static_cast<size_t>(r) * n + r];
        }
    }
    return x;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
inline std::vector<double> sym_eigenvalues(const Mat& m) {
    const int n = m.dim();
    Mat a = sym_part(m);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) ev[static_cast<size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace roughwalk
