// Small dense real matrices and their eigenvalues.
//
// The spectra needed here come from Jacobians of a few-species chemostat, so
// dimensions stay in the tens. The classical dense pipeline is plenty:
// balance the matrix, reduce to upper Hessenberg form with Householder
// reflections, then run the implicit double-shift QR iteration (the EISPACK
// hqr scheme). Dimensions 1 and 2 are solved in closed form.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace chemostat {

struct Matrix {
    int n = 0;
    std::vector<double> a;  // row-major n*n

    Matrix() = default;
    explicit Matrix(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static Matrix identity(int dim) {
        Matrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline double trace(const Matrix& m) {
    double t = 0.0;
    for (int i = 0; i < m.n; ++i) t += m(i, i);
    return t;
}

// Determinant by LU with partial pivoting; used by tests as a spectrum oracle.
inline double determinant(Matrix m) {
    const int n = m.n;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(m(i, col)) > std::abs(m(piv, col))) piv = i;
        if (m(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(col, j));
            det = -det;
        }
        det *= m(col, col);
        for (int i = col + 1; i < n; ++i) {
            double factor = m(i, col) / m(col, col);
            for (int j = col; j < n; ++j) m(i, j) -= factor * m(col, j);
        }
    }
    return det;
}

namespace detail {

// Diagonal similarity scaling so row and column norms roughly match
// (improves eigenvalue conditioning; eigenvalues are unchanged).
inline void balance(Matrix& m) {
    const int n = m.n;
    const double radix = 2.0, sqrdx = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (int i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(m(j, i));
                r += std::abs(m(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0, s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (int j = 0; j < n; ++j) m(i, j) *= g;
                for (int j = 0; j < n; ++j) m(j, i) *= f;
            }
        }
    }
}

// Householder reduction to upper Hessenberg form (similarity transform).
inline void hessenberg(Matrix& m) {
    const int n = m.n;
    std::vector<double> v(n);
    for (int k = 0; k + 2 < n; ++k) {
        double scale = 0.0;
        for (int i = k + 1; i < n; ++i) scale += std::abs(m(i, k));
        if (scale == 0.0) continue;
        double sigma = 0.0;
        int len = n - k - 1;
        for (int i = 0; i < len; ++i) {
            v[i] = m(k + 1 + i, k) / scale;
            sigma += v[i] * v[i];
        }
        double norm = std::sqrt(sigma);
        if (v[0] < 0.0) norm = -norm;
        v[0] += norm;
        if (norm == 0.0 || v[0] == 0.0) continue;
        double beta = 1.0 / (norm * v[0]);  // 2 / v'v for this construction

        // left: rows k+1..n-1, all columns from k on (earlier ones are zero)
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < len; ++i) s += v[i] * m(k + 1 + i, j);
            s *= beta;
            for (int i = 0; i < len; ++i) m(k + 1 + i, j) -= s * v[i];
        }
        // right: all rows, columns k+1..n-1
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < len; ++j) s += v[j] * m(i, k + 1 + j);
            s *= beta;
            for (int j = 0; j < len; ++j) m(i, k + 1 + j) -= s * v[j];
        }
        m(k + 1, k) = -norm * scale;
        for (int i = k + 2; i < n; ++i) m(i, k) = 0.0;
    }
}

// Implicit double-shift QR on an upper Hessenberg matrix; returns all
// eigenvalues. Destroys its argument.
inline std::vector<std::complex<double>> hqr(Matrix& h) {
    const int n = h.n;
    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<std::complex<double>> eig;
    eig.reserve(n);

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) return std::vector<std::complex<double>>(n, 0.0);

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l = 0;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(h(l, l - 1)) <= eps * s) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = h(nn, nn);
            if (l == nn) {
                eig.emplace_back(x + t, 0.0);
                --nn;
            } else {
                double y = h(nn - 1, nn - 1);
                double w = h(nn, nn - 1) * h(nn - 1, nn);
                if (l == nn - 1) {
                    double p = 0.5 * (y - x);
                    double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + (p >= 0.0 ? z : -z);
                        double r1 = x + z;
                        double r2 = (z != 0.0) ? x - w / z : r1;
                        eig.emplace_back(r1, 0.0);
                        eig.emplace_back(r2, 0.0);
                    } else {
                        eig.emplace_back(x + p, z);
                        eig.emplace_back(x + p, -z);
                    }
                    nn -= 2;
                } else {
                    if (its == 30)
                        throw std::runtime_error(
                            "eigenvalue iteration failed to converge (found " +
                            std::to_string(eig.size()) + " of " + std::to_string(n) + ")");
                    double p = 0.0, q = 0.0, r = 0.0, z = 0.0, s = 0.0;
                    if (its == 10 || its == 20) {
                        // exceptional shift to break symmetry-induced stalls
                        t += x;
                        for (int i = 0; i <= nn; ++i) h(i, i) -= x;
                        s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    for (m = nn - 2; m >= l; --m) {
                        z = h(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                        q = h(m + 1, m + 1) - z - r - s;
                        r = h(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                        double v = std::abs(p) *
                                   (std::abs(h(m - 1, m - 1)) + std::abs(z) + std::abs(h(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m + 2; i <= nn; ++i) {
                        h(i, i - 2) = 0.0;
                        if (i != m + 2) h(i, i - 3) = 0.0;
                    }
                    for (int k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = h(k, k - 1);
                            q = h(k + 1, k - 1);
                            r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        double mag = std::sqrt(p * p + q * q + r * r);
                        s = (p >= 0.0) ? mag : -mag;
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) h(k, k - 1) = -h(k, k - 1);
                        } else {
                            h(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            p = h(k, j) + q * h(k + 1, j);
                            if (k != nn - 1) {
                                p += r * h(k + 2, j);
                                h(k + 2, j) -= p * z;
                            }
                            h(k + 1, j) -= p * yy;
                            h(k, j) -= p * x;
                        }
                        int mmin = (nn < k + 3) ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            p = x * h(i, k) + yy * h(i, k + 1);
                            if (k != nn - 1) {
                                p += z * h(i, k + 2);
                                h(i, k + 2) -= p * r;
                            }
                            h(i, k + 1) -= p * q;
                            h(i, k) -= p;
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
    return eig;
}

}  // namespace detail

// All eigenvalues of a real square matrix, sorted by (re, im) for
// deterministic output.
inline std::vector<std::complex<double>> eigenvalues(Matrix m) {
    for (double v : m.a)
        if (!std::isfinite(v)) throw std::invalid_argument("matrix has non-finite entries");

    std::vector<std::complex<double>> eig;
    if (m.n == 0) {
        return eig;
    } else if (m.n == 1) {
        eig.emplace_back(m(0, 0), 0.0);
    } else if (m.n == 2) {
        double tr = m(0, 0) + m(1, 1);
        double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        double disc = tr * tr - 4.0 * det;
        if (disc >= 0.0) {
            double sd = std::sqrt(disc);
            double r1 = 0.5 * (tr + (tr >= 0.0 ? sd : -sd));
            double r2 = (r1 != 0.0) ? det / r1 : 0.5 * (tr - (tr >= 0.0 ? sd : -sd));
            eig.emplace_back(r1, 0.0);
            eig.emplace_back(r2, 0.0);
        } else {
            double im = 0.5 * std::sqrt(-disc);
            eig.emplace_back(0.5 * tr, im);
            eig.emplace_back(0.5 * tr, -im);
        }
    } else {
        detail::balance(m);
        detail::hessenberg(m);
        eig = detail::hqr(m);
    }
    std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eig;
}

}  // namespace chemostat
