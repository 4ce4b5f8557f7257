#include "oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace oracle {

namespace {

constexpr int N = 8;
constexpr int M = 4;

using Mat = std::vector<double>;

Mat matmul(const Mat& a, const Mat& b, int n, int k, int m) {
    Mat c(static_cast<std::size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int t = 0; t < k; ++t) s += a[i * k + t] * b[t * m + j];
            c[i * m + j] = s;
        }
    }
    return c;
}

Mat transpose(const Mat& a, int n, int m) {
    Mat t(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) t[j * n + i] = a[i * m + j];
    }
    return t;
}

Mat identity(int n) {
    Mat e(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return e;
}

Mat transition() {
    Mat f = identity(N);
    for (int i = 0; i < M; ++i) f[i * N + (i + M)] = 1.0;
    return f;
}

Mat observation() {
    Mat h(static_cast<std::size_t>(M) * N, 0.0);
    for (int i = 0; i < M; ++i) h[i * N + i] = 1.0;
    return h;
}

}  // namespace

std::vector<double> gauss_jordan_inverse(std::vector<double> a, int n) {
    std::vector<double> inv = identity(n);
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (a[pivot * n + col] == 0.0) throw std::runtime_error("gauss_jordan_inverse: singular matrix");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) {
                std::swap(a[col * n + j], a[pivot * n + j]);
                std::swap(inv[col * n + j], inv[pivot * n + j]);
            }
        }
        const double d = a[col * n + col];
        for (int j = 0; j < n; ++j) {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a[r * n + col];
            for (int j = 0; j < n; ++j) {
                a[r * n + j] -= factor * a[col * n + j];
                inv[r * n + j] -= factor * inv[col * n + j];
            }
        }
    }
    return inv;
}

DenseKalman::DenseKalman(const Rect& b0, double q, double r, double p0) : x_(N, 0.0), p_(identity(N)), q_(q), r_(r) {
    x_[0] = b0.x + b0.w / 2.0;
    x_[1] = b0.y + b0.h / 2.0;
    x_[2] = b0.w;
    x_[3] = b0.h;
    for (auto& v : p_) v *= p0;
}

void DenseKalman::predict() {
    const Mat f = transition();
    x_ = matmul(f, x_, N, N, 1);
    p_ = matmul(matmul(f, p_, N, N, N), transpose(f, N, N), N, N, N);
    for (int i = 0; i < N; ++i) p_[i * N + i] += q_;
}

void DenseKalman::update(const Rect& zb) {
    if (!(zb.w * zb.h > 0.0)) return;
    const Mat h = observation();
    const Mat ht = transpose(h, M, N);
    const Mat z = {zb.x + zb.w / 2.0, zb.y + zb.h / 2.0, zb.w, zb.h};

    const Mat hx = matmul(h, x_, M, N, 1);
    Mat y(M);
    for (int i = 0; i < M; ++i) y[i] = z[i] - hx[i];

    Mat s = matmul(matmul(h, p_, M, N, N), ht, M, N, M);
    for (int i = 0; i < M; ++i) s[i * M + i] += r_;
    const Mat k = matmul(matmul(p_, ht, N, N, M), gauss_jordan_inverse(s, M), N, M, M);

    const Mat ky = matmul(k, y, N, M, 1);
    for (int i = 0; i < N; ++i) x_[i] += ky[i];

    Mat i_kh = identity(N);
    const Mat kh = matmul(k, h, N, M, N);
    for (std::size_t i = 0; i < i_kh.size(); ++i) i_kh[i] -= kh[i];
    p_ = matmul(i_kh, p_, N, N, N);
}

}  // namespace oracle
