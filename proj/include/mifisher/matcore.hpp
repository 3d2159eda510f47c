#pragma once

// Dense complex matrix kernel: arithmetic, tensor products, partial traces and
// a cyclic Jacobi eigensolver for Hermitian matrices. Sized for operators on
// a few qubits/qutrits; every routine is O(d^3) or better and allocation-happy.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mifisher/error.hpp"

namespace mifisher {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

namespace tol {
inline constexpr double kHermitian = 1e-9;
inline constexpr double kTrace = 1e-9;
inline constexpr double kPositivity = 1e-9;
inline constexpr double kCompleteness = 1e-8;
inline constexpr double kEigenTie = 1e-12;
}  // namespace tol

class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorCode::DimMismatch, "entry count does not match rows*cols");
        }
    }
    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto &row : rows) {
            if (row.size() != cols_) throw Error(ErrorCode::DimMismatch, "ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static CMatrix zeros(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }
    static CMatrix zeros(std::size_t n) { return CMatrix(n, n); }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix diag(std::span<const double> values) {
        CMatrix m(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
        return m;
    }
    static CMatrix diag(std::initializer_list<double> values) {
        return diag(std::span<const double>(values.begin(), values.size()));
    }

    // |u><v|
    static CMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
        CMatrix m(u.size(), v.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
        return m;
    }
    static CMatrix projector(std::span<const cplx> v) { return outer(v, v); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    cplx &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> data() noexcept { return data_; }

    CVector col(std::size_t j) const {
        CVector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    CMatrix adjoint() const {
        CMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    CMatrix transpose() const {
        CMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
        return out;
    }

    cplx trace() const {
        cplx t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    CMatrix &operator+=(const CMatrix &o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    CMatrix &operator-=(const CMatrix &o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    CMatrix &operator*=(cplx s) {
        for (auto &x : data_) x *= s;
        return *this;
    }
    CMatrix &operator*=(double s) {
        for (auto &x : data_) x *= s;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix &b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix &b) { return a -= b; }
    friend CMatrix operator-(CMatrix a) { return a *= -1.0; }
    friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
    friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
    friend CMatrix operator*(CMatrix a, double s) { return a *= s; }
    friend CMatrix operator*(double s, CMatrix a) { return a *= s; }

    friend CMatrix operator*(const CMatrix &a, const CMatrix &b) {
        if (a.cols_ != b.rows_) throw Error(ErrorCode::DimMismatch, "matrix product shapes");
        CMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend CVector operator*(const CMatrix &a, std::span<const cplx> v) {
        if (a.cols_ != v.size()) throw Error(ErrorCode::DimMismatch, "matrix-vector shapes");
        CVector out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
        return out;
    }

  private:
    void check_same_shape(const CMatrix &o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::DimMismatch, "shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

inline double max_abs(const CMatrix &m) {
    double best = 0.0;
    for (const auto &x : m.data()) best = std::max(best, std::abs(x));
    return best;
}

inline double max_abs_diff(const CMatrix &a, const CMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimMismatch, "shape mismatch");
    double best = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) best = std::max(best, std::abs(a.data()[k] - b.data()[k]));
    return best;
}

inline bool approx_equal(const CMatrix &a, const CMatrix &b, double tolerance) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return max_abs_diff(a, b) <= tolerance;
}

inline double frobenius_norm(const CMatrix &m) {
    double s = 0.0;
    for (const auto &x : m.data()) s += std::norm(x);
    return std::sqrt(s);
}

inline double hermiticity_residual(const CMatrix &m) {
    if (!m.square()) throw Error(ErrorCode::DimMismatch, "hermiticity check needs a square matrix");
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j) - std::conj(m(j, i))));
    return best;
}

inline bool is_hermitian(const CMatrix &m, double tolerance = tol::kHermitian) {
    return m.square() && hermiticity_residual(m) <= tolerance;
}

// (m + m^dagger) / 2
inline CMatrix hermitian_part(const CMatrix &m) {
    CMatrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out(i, i) = m(i, i).real();
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const cplx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            out(i, j) = v;
            out(j, i) = std::conj(v);
        }
    }
    return out;
}

inline CMatrix commutator(const CMatrix &a, const CMatrix &b) { return a * b - b * a; }

// tr(AB) without forming the product.
inline cplx trace_product(const CMatrix &a, const CMatrix &b) {
    if (a.cols() != b.rows() || a.rows() != b.cols()) throw Error(ErrorCode::DimMismatch, "trace_product shapes");
    cplx t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) t += a(i, k) * b(k, i);
    return t;
}

inline cplx inner(std::span<const cplx> u, std::span<const cplx> v) {
    if (u.size() != v.size()) throw Error(ErrorCode::DimMismatch, "inner product lengths");
    cplx s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s;
}

inline double norm(std::span<const cplx> v) { return std::sqrt(std::abs(inner(v, v))); }

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

inline CVector kron(std::span<const cplx> u, std::span<const cplx> v) {
    CVector out(u.size() * v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i * v.size() + j] = u[i] * v[j];
    return out;
}

enum class Party { A, B };

constexpr std::string_view to_string(Party p) { return p == Party::A ? "a" : "b"; }
constexpr Party other(Party p) { return p == Party::A ? Party::B : Party::A; }

struct BipartiteDims {
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;

    std::size_t total() const noexcept { return dim_a * dim_b; }
    std::size_t of(Party p) const noexcept { return p == Party::A ? dim_a : dim_b; }
    friend bool operator==(const BipartiteDims &, const BipartiteDims &) = default;
};

// Reduced operator on the kept party.
inline CMatrix partial_trace(const CMatrix &m, BipartiteDims dims, Party keep) {
    if (dims.dim_a == 0 || dims.dim_b == 0) throw Error(ErrorCode::DimMismatch, "party dimensions must be positive");
    if (!m.square() || m.rows() != dims.total())
        throw Error(ErrorCode::DimMismatch, "operator side " + std::to_string(m.rows()) + " != dim_a*dim_b " +
                                                std::to_string(dims.total()));
    const std::size_t da = dims.dim_a, db = dims.dim_b;
    if (keep == Party::A) {
        CMatrix out(da, da);
        for (std::size_t i = 0; i < da; ++i)
            for (std::size_t j = 0; j < da; ++j) {
                cplx s = 0.0;
                for (std::size_t k = 0; k < db; ++k) s += m(i * db + k, j * db + k);
                out(i, j) = s;
            }
        return out;
    }
    CMatrix out(db, db);
    for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) {
            cplx s = 0.0;
            for (std::size_t i = 0; i < da; ++i) s += m(i * db + k, i * db + l);
            out(k, l) = s;
        }
    return out;
}

// Lifts a single-party operator to the composite space: X (x) 1 or 1 (x) X.
inline CMatrix embed_operator(const CMatrix &x, BipartiteDims dims, Party party) {
    if (x.rows() != dims.of(party) || !x.square()) throw Error(ErrorCode::DimMismatch, "local operator dimension");
    return party == Party::A ? kron(x, CMatrix::identity(dims.dim_b)) : kron(CMatrix::identity(dims.dim_a), x);
}

struct EigDecomposition {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // columns are eigenvectors

    CMatrix reconstruct() const {
        const std::size_t n = values.size();
        CMatrix out(n, n);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) {
                const cplx vik = vectors(i, k) * values[k];
                for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(vectors(j, k));
            }
        return out;
    }
};

struct EigOptions {
    double hermitian_tol = tol::kHermitian;
    int max_sweeps = 100;
};

namespace detail {

// Rotates each column's phase so its largest-magnitude entry (lowest index on
// ties) is real and positive. Makes eigenvectors reproducible.
inline void canonicalize_phases(CMatrix &v) {
    for (std::size_t k = 0; k < v.cols(); ++k) {
        std::size_t pivot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < v.rows(); ++i) {
            const double a = std::abs(v(i, k));
            if (a > best + 1e-12) {
                best = a;
                pivot = i;
            }
        }
        if (best <= 0.0) continue;
        const cplx phase = std::conj(v(pivot, k)) / std::abs(v(pivot, k));
        for (std::size_t i = 0; i < v.rows(); ++i) v(i, k) *= phase;
        v(pivot, k) = std::abs(v(pivot, k));
    }
}

inline bool lexicographic_less(const CMatrix &v, std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const cplx x = v(i, a), y = v(i, b);
        if (std::abs(x - y) <= tol::kEigenTie) continue;
        if (std::abs(x.real() - y.real()) > tol::kEigenTie) return x.real() < y.real();
        return x.imag() < y.imag();
    }
    return a < b;
}

}  // namespace detail

// Cyclic Jacobi for Hermitian matrices. Each (p,q) rotation first removes the
// phase of a_pq with a diagonal unitary, then applies the real symmetric
// Jacobi rotation that annihilates it.
inline EigDecomposition herm_eig(const CMatrix &m, const EigOptions &opts = {}) {
    if (!m.square()) throw Error(ErrorCode::DimMismatch, "herm_eig needs a square matrix");
    const double residual = hermiticity_residual(m);
    if (residual > opts.hermitian_tol)
        throw Error(ErrorCode::NotHermitian, "max |m - m^dagger| = " + std::to_string(residual));

    const std::size_t n = m.rows();
    CMatrix a = hermitian_part(m);
    CMatrix v = CMatrix::identity(n);
    const double scale = frobenius_norm(a);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a(p, q));
        return std::sqrt(s);
    };

    bool converged = scale == 0.0 || n < 2;
    for (int sweep = 0; !converged && sweep < opts.max_sweeps; ++sweep) {
        if (off_norm() <= 1e-15 * scale) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300 || mag <= 1e-18 * scale) continue;
                const cplx phase_conj = std::conj(apq) / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // 2x2 block of the unitary acting on columns p, q.
                const cplx upp = c, upq = s, uqp = -s * phase_conj, uqq = c * phase_conj;

                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * upp + vkq * uqp;
                    v(k, q) = vkp * upq + vkq * uqq;
                }
            }
        }
    }
    if (!converged && off_norm() > 1e-12 * scale)
        throw Error(ErrorCode::NoConvergence, "Jacobi sweeps exhausted (" + std::to_string(opts.max_sweeps) + ")");

    detail::canonicalize_phases(v);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
    // Near-degenerate runs are ordered by first differing eigenvector entry.
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start + 1;
        const double ref = a(order[start], order[start]).real();
        while (end < n && std::abs(a(order[end], order[end]).real() - ref) <= tol::kEigenTie * std::max(1.0, std::abs(ref)))
            ++end;
        if (end - start > 1)
            std::sort(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end),
                      [&](std::size_t x, std::size_t y) { return detail::lexicographic_less(v, x, y); });
        start = end;
    }

    EigDecomposition out;
    out.values.resize(n);
    out.vectors = CMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

// V f(Lambda) V^dagger for a complex-valued spectral function.
template <class F>
CMatrix spectral_apply(const EigDecomposition &eig, F &&f) {
    const std::size_t n = eig.values.size();
    CMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx fk = f(eig.values[k]);
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = eig.vectors(i, k) * fk;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
        }
    }
    return out;
}

// exp(i t H) for Hermitian H.
inline CMatrix expi_hermitian(const CMatrix &h, double t = 1.0) {
    return spectral_apply(herm_eig(h), [t](double lambda) { return std::polar(1.0, t * lambda); });
}

inline double min_eigenvalue(const CMatrix &m) {
    const auto eig = herm_eig(m);
    return eig.values.empty() ? 0.0 : eig.values.front();
}

inline double unitarity_residual(const CMatrix &u) {
    if (!u.square()) return INFINITY;
    return max_abs_diff(u.adjoint() * u, CMatrix::identity(u.rows()));
}

namespace pauli {
inline CMatrix I() { return CMatrix::identity(2); }
inline CMatrix X() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline CMatrix Y() { return {{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}}; }
inline CMatrix Z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

}  // namespace mifisher
