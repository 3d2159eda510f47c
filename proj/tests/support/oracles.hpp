#pragma once

// Reference values computed by routes that share no code with the library's
// SLD/optimizer paths: the pure-state formula, a direct linear solve of the
// SLD equation, and an exhaustive Bloch-angle grid for two qubits.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mifisher/matcore.hpp"

namespace mifisher::oracle {

using cd = std::complex<double>;

// 4 (<dpsi|dpsi> - |<psi|dpsi>|^2), written out by hand.
inline double qfi_pure(const std::vector<cd> &psi, const std::vector<cd> &dpsi) {
    cd overlap = 0.0;
    double dd = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        overlap += std::conj(psi[i]) * dpsi[i];
        dd += std::norm(dpsi[i]);
    }
    return 4.0 * (dd - std::norm(overlap));
}

// Solves (L rho + rho L)/2 = drho as an n^2 x n^2 linear system and returns
// tr(drho L). Full-rank rho only.
inline double qfi_linear_solve(const CMatrix &rho, const CMatrix &drho) {
    const std::size_t n = rho.rows(), N = n * n;
    std::vector<cd> a(N * N), b(N);
    // row-major vec: vec(L rho) = (1 (x) rho^T) vec L, vec(rho L) = (rho (x) 1) vec L
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = i * n + j;
            b[row] = drho(i, j);
            for (std::size_t k = 0; k < n; ++k) {
                a[row * N + (i * n + k)] += 0.5 * rho(k, j);  // (L rho)_ij = sum_k L_ik rho_kj
                a[row * N + (k * n + j)] += 0.5 * rho(i, k);  // (rho L)_ij = sum_k rho_ik L_kj
            }
        }
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(a[r * N + c]) > std::abs(a[piv * N + c])) piv = r;
        if (std::abs(a[piv * N + c]) < 1e-300) throw std::runtime_error("singular SLD system");
        if (piv != c) {
            for (std::size_t k = 0; k < N; ++k) std::swap(a[c * N + k], a[piv * N + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < N; ++r) {
            const cd f = a[r * N + c] / a[c * N + c];
            if (f == cd(0.0)) continue;
            for (std::size_t k = c; k < N; ++k) a[r * N + k] -= f * a[c * N + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<cd> x(N);
    for (std::size_t c = N; c-- > 0;) {
        cd s = b[c];
        for (std::size_t k = c + 1; k < N; ++k) s -= a[c * N + k] * x[k];
        x[c] = s / a[c * N + c];
    }
    cd f = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f += drho(i, j) * x[j * n + i];
    return f.real();
}

// Two-qubit Pauli coordinates: rho = (1 + a.s (x) 1 + 1 (x) b.s + sum T_ij s_i (x) s_j) / 4.
struct Bloch2 {
    std::array<double, 3> a{}, b{};
    std::array<std::array<double, 3>, 3> t{};
};

inline Bloch2 bloch2(const CMatrix &m) {
    const CMatrix s[3] = {pauli::X(), pauli::Y(), pauli::Z()};
    const CMatrix id = CMatrix::identity(2);
    Bloch2 out;
    for (int i = 0; i < 3; ++i) {
        out.a[i] = trace_product(m, kron(s[i], id)).real();
        out.b[i] = trace_product(m, kron(id, s[i])).real();
        for (int j = 0; j < 3; ++j) out.t[i][j] = trace_product(m, kron(s[i], s[j])).real();
    }
    return out;
}

inline Bloch2 swap_parties(const Bloch2 &x) {
    Bloch2 y;
    y.a = x.b;
    y.b = x.a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) y.t[i][j] = x.t[j][i];
    return y;
}

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3 &x, const Vec3 &y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

inline std::vector<Vec3> bloch_grid(int polar = 64, int azimuthal = 128) {
    std::vector<Vec3> dirs;
    for (int k = 0; k < polar; ++k)
        for (int l = 0; l < azimuthal; ++l) {
            const double th = k * std::numbers::pi / polar, ph = l * 2.0 * std::numbers::pi / azimuthal;
            dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
            if (k == 0) break;  // the pole has no azimuth
        }
    return dirs;
}

// Outcomes with vanishing p and non-vanishing derivative make the grid point
// infeasible, the same rule the library applies.
inline bool add_term(double p, double dp, double &fi) {
    if (p < 1e-12) return std::abs(dp) < 1e-6;
    fi += dp * dp / p;
    return true;
}

// Qubit QFI from the Bloch vector and its derivative.
inline double qubit_qfi(const Vec3 &r, const Vec3 &dr) {
    const double rr = dot(r, r), drdr = dot(dr, dr), rdr = dot(r, dr);
    const double purity_gap = 1.0 - rr;
    if (purity_gap < 1e-10) return drdr;
    return drdr + rdr * rdr / purity_gap;
}

inline Vec3 apply_t(const std::array<std::array<double, 3>, 3> &t, const Vec3 &m) {
    return {dot(t[0], m), dot(t[1], m), dot(t[2], m)};
}

inline Vec3 apply_tt(const std::array<std::array<double, 3>, 3> &t, const Vec3 &n) {
    Vec3 out{};
    for (int j = 0; j < 3; ++j) out[j] = t[0][j] * n[0] + t[1][j] * n[1] + t[2][j] * n[2];
    return out;
}

// max over projective n (x) m measurements on the grid.
inline double product_grid(const CMatrix &rho, const CMatrix &drho, int polar = 64, int azimuthal = 128) {
    const Bloch2 s = bloch2(rho), ds = bloch2(drho);
    const auto dirs = bloch_grid(polar, azimuthal);
    double best = 0.0;
    for (const auto &n : dirs) {
        const double an = dot(s.a, n), dan = dot(ds.a, n);
        const Vec3 tn = apply_tt(s.t, n), dtn = apply_tt(ds.t, n);
        for (const auto &m : dirs) {
            const double bm = dot(s.b, m), dbm = dot(ds.b, m), ntm = dot(tn, m), dntm = dot(dtn, m);
            double fi = 0.0;
            bool ok = true;
            for (int sa = -1; sa <= 1 && ok; sa += 2)
                for (int sb = -1; sb <= 1 && ok; sb += 2) {
                    const double p = 0.25 * (1.0 + sa * an + sb * bm + sa * sb * ntm);
                    const double dp = 0.25 * (sa * dan + sb * dbm + sa * sb * dntm);
                    ok = add_term(p, dp, fi);
                }
            if (ok) best = std::max(best, fi);
        }
    }
    return best;
}

// max over the first party's projective measurement n; the second party
// measures optimally given each outcome (qubit QFI of the conditional).
inline double adaptive_grid(const Bloch2 &s, const Bloch2 &ds, int polar = 64, int azimuthal = 128) {
    double best = 0.0;
    for (const auto &n : bloch_grid(polar, azimuthal)) {
        const double an = dot(s.a, n), dan = dot(ds.a, n);
        const Vec3 tn = apply_tt(s.t, n), dtn = apply_tt(ds.t, n);
        double fi = 0.0;
        bool ok = true;
        for (int sg = -1; sg <= 1 && ok; sg += 2) {
            const double q = 1.0 + sg * an, dq = sg * dan;
            const double p = 0.5 * q, dp = 0.5 * dq;
            ok = add_term(p, dp, fi);
            if (!ok || p < 1e-12) continue;
            Vec3 r, dr;
            for (int j = 0; j < 3; ++j) {
                r[j] = (s.b[j] + sg * tn[j]) / q;
                dr[j] = (ds.b[j] + sg * dtn[j] - r[j] * dq) / q;
            }
            fi += p * qubit_qfi(r, dr);
        }
        if (ok) best = std::max(best, fi);
    }
    return best;
}

inline double adaptive_ab_grid(const CMatrix &rho, const CMatrix &drho) { return adaptive_grid(bloch2(rho), bloch2(drho)); }

inline double adaptive_ba_grid(const CMatrix &rho, const CMatrix &drho) {
    return adaptive_grid(swap_parties(bloch2(rho)), swap_parties(bloch2(drho)));
}

}  // namespace mifisher::oracle
