#pragma once

// Density matrices and one-parameter state families theta -> rho_theta,
// together with their theta-derivatives (closed form where one exists,
// otherwise finite differences).

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mifisher/matcore.hpp"

namespace mifisher {

// Returns a human-readable reason if m is not a valid density matrix.
inline std::optional<std::string> density_violation(const CMatrix &m, double tolerance = tol::kHermitian) {
    if (!m.square() || m.rows() == 0) return "not a non-empty square matrix";
    const double herm = hermiticity_residual(m);
    if (herm > tolerance) return "not Hermitian (residual " + std::to_string(herm) + ")";
    const double tr_err = std::abs(m.trace() - cplx(1.0));
    if (tr_err > tolerance) return "trace differs from 1 by " + std::to_string(tr_err);
    const double lowest = min_eigenvalue(m);
    if (lowest < -tolerance) return "negative eigenvalue " + std::to_string(lowest);
    return std::nullopt;
}

class DensityMatrix {
  public:
    explicit DensityMatrix(CMatrix m, std::optional<BipartiteDims> dims = std::nullopt,
                           double tolerance = tol::kHermitian)
        : mat_(std::move(m)), dims_(dims) {
        if (auto why = density_violation(mat_, tolerance)) throw Error(ErrorCode::InvalidState, *why);
        if (dims_ && dims_->total() != mat_.rows())
            throw Error(ErrorCode::DimMismatch, "bipartite dims do not match the operator size");
        mat_ = hermitian_part(mat_);
    }

    static DensityMatrix pure(std::span<const cplx> psi, std::optional<BipartiteDims> dims = std::nullopt) {
        const double n = norm(psi);
        if (std::abs(n - 1.0) > 1e-9) throw Error(ErrorCode::NotNormalized, "state vector norm " + std::to_string(n));
        return DensityMatrix(CMatrix::projector(psi), dims);
    }

    const CMatrix &matrix() const noexcept { return mat_; }
    std::size_t dim() const noexcept { return mat_.rows(); }
    const std::optional<BipartiteDims> &dims() const noexcept { return dims_; }

    DensityMatrix reduced(Party keep) const {
        if (!dims_) throw Error(ErrorCode::DimMismatch, "state has no bipartite structure");
        return DensityMatrix(partial_trace(mat_, *dims_, keep));
    }

  private:
    CMatrix mat_;
    std::optional<BipartiteDims> dims_;
};

enum class DerivativeScheme { Auto, Analytic, Central, Richardson };

struct DerivativeOptions {
    DerivativeScheme scheme = DerivativeScheme::Auto;
    double step = 1e-5;
};

enum class BuiltinName {
    BellPhase,
    CcBernoulli,
    CosSin,
    PlusPhaseTimesZero,
    ProductOf,
    // Single-qubit factors for product_of.
    QubitBernoulli,
    QubitPhase,
    QubitZero,
};

constexpr std::string_view to_string(BuiltinName name) {
    switch (name) {
        case BuiltinName::BellPhase: return "bell_phase";
        case BuiltinName::CcBernoulli: return "cc_bernoulli";
        case BuiltinName::CosSin: return "cossin";
        case BuiltinName::PlusPhaseTimesZero: return "plus_phase_times_zero";
        case BuiltinName::ProductOf: return "product_of";
        case BuiltinName::QubitBernoulli: return "qubit_bernoulli";
        case BuiltinName::QubitPhase: return "qubit_phase";
        case BuiltinName::QubitZero: return "qubit_zero";
    }
    return "?";
}

inline BuiltinName builtin_from_string(std::string_view s) {
    for (auto n : {BuiltinName::BellPhase, BuiltinName::CcBernoulli, BuiltinName::CosSin,
                   BuiltinName::PlusPhaseTimesZero, BuiltinName::ProductOf, BuiltinName::QubitBernoulli,
                   BuiltinName::QubitPhase, BuiltinName::QubitZero})
        if (to_string(n) == s) return n;
    throw Error(ErrorCode::UnknownName, "unknown builtin family '" + std::string(s) + "'");
}

// Interior of the Bernoulli(theta) parameter range; the endpoints have
// divergent Fisher information.
inline constexpr double kBernoulliMargin = 1e-6;

struct GridPoint {
    double theta;
    CMatrix rho;
};

namespace detail {

class FamilyImpl {
  public:
    virtual ~FamilyImpl() = default;
    virtual std::size_t dim() const = 0;
    virtual bool admissible(double theta) const { return std::isfinite(theta); }
    virtual CMatrix value(double theta) const = 0;
    virtual bool has_analytic() const { return false; }
    virtual CMatrix analytic_derivative(double) const {
        throw Error(ErrorCode::AnalyticUnavailable, "no closed-form derivative for this family");
    }
    virtual std::string describe() const = 0;

    virtual CMatrix fd_derivative(double theta, DerivativeScheme scheme, double h) const {
        auto central = [&](double step) {
            if (!admissible(theta - step) || !admissible(theta + step))
                throw Error(ErrorCode::ThetaOutOfDomain, "finite-difference stencil leaves the domain at theta=" +
                                                             std::to_string(theta));
            CMatrix d = value(theta + step) - value(theta - step);
            return d *= 1.0 / (2.0 * step);
        };
        if (scheme == DerivativeScheme::Richardson) {
            CMatrix fine = central(h);
            CMatrix coarse = central(2.0 * h);
            return (fine * 4.0 - coarse) * (1.0 / 3.0);
        }
        return central(h);
    }
};

inline CMatrix pure_derivative(std::span<const cplx> psi, std::span<const cplx> dpsi) {
    return CMatrix::outer(dpsi, psi) + CMatrix::outer(psi, dpsi);
}

class GeneratorImpl final : public FamilyImpl {
  public:
    GeneratorImpl(CMatrix rho0, CMatrix g) : rho0_(std::move(rho0)), g_(std::move(g)), eig_(herm_eig(g_)) {}
    std::size_t dim() const override { return rho0_.rows(); }
    CMatrix value(double theta) const override {
        const CMatrix u = spectral_apply(eig_, [theta](double l) { return std::polar(1.0, -theta * l); });
        return hermitian_part(u * rho0_ * u.adjoint());
    }
    bool has_analytic() const override { return true; }
    CMatrix analytic_derivative(double theta) const override {
        return hermitian_part(commutator(g_, value(theta)) * cplx(0.0, -1.0));
    }
    std::string describe() const override { return "generator(dim=" + std::to_string(dim()) + ")"; }

  private:
    CMatrix rho0_;
    CMatrix g_;
    EigDecomposition eig_;
};

class PureBuiltinImpl final : public FamilyImpl {
  public:
    explicit PureBuiltinImpl(BuiltinName name) : name_(name) {}
    std::size_t dim() const override { return 4; }
    CMatrix value(double theta) const override { return CMatrix::projector(state(theta)); }
    bool has_analytic() const override { return true; }
    CMatrix analytic_derivative(double theta) const override {
        return pure_derivative(state(theta), state_derivative(theta));
    }
    std::string describe() const override { return "builtin:" + std::string(to_string(name_)); }

    CVector state(double theta) const {
        const double r = 1.0 / std::numbers::sqrt2;
        CVector psi(4);
        switch (name_) {
            case BuiltinName::BellPhase:
                psi[0] = r;
                psi[3] = r * std::polar(1.0, theta);
                break;
            case BuiltinName::CosSin:
                psi[0] = std::cos(theta / 2.0);
                psi[3] = std::sin(theta / 2.0);
                break;
            case BuiltinName::PlusPhaseTimesZero:
                psi[0] = r;
                psi[2] = r * std::polar(1.0, theta);
                break;
            default: throw Error(ErrorCode::UnknownName, "not a pure builtin");
        }
        return psi;
    }

    CVector state_derivative(double theta) const {
        const double r = 1.0 / std::numbers::sqrt2;
        const cplx i(0.0, 1.0);
        CVector d(4);
        switch (name_) {
            case BuiltinName::BellPhase: d[3] = r * i * std::polar(1.0, theta); break;
            case BuiltinName::CosSin:
                d[0] = -0.5 * std::sin(theta / 2.0);
                d[3] = 0.5 * std::cos(theta / 2.0);
                break;
            case BuiltinName::PlusPhaseTimesZero: d[2] = r * i * std::polar(1.0, theta); break;
            default: throw Error(ErrorCode::UnknownName, "not a pure builtin");
        }
        return d;
    }

  private:
    BuiltinName name_;
};

// rho_theta = theta |00><00| + (1 - theta) |11><11|
class BernoulliImpl final : public FamilyImpl {
  public:
    std::size_t dim() const override { return 4; }
    bool admissible(double theta) const override {
        return std::isfinite(theta) && theta >= kBernoulliMargin && theta <= 1.0 - kBernoulliMargin;
    }
    CMatrix value(double theta) const override { return CMatrix::diag({theta, 0.0, 0.0, 1.0 - theta}); }
    bool has_analytic() const override { return true; }
    CMatrix analytic_derivative(double) const override { return CMatrix::diag({1.0, 0.0, 0.0, -1.0}); }
    std::string describe() const override { return "builtin:cc_bernoulli"; }
};

// diag(theta, 1 - theta), (|0> + e^{i theta}|1>)/sqrt2, or the fixed |0>.
class QubitImpl final : public FamilyImpl {
  public:
    explicit QubitImpl(BuiltinName name) : name_(name) {}
    std::size_t dim() const override { return 2; }
    bool admissible(double theta) const override {
        if (name_ == BuiltinName::QubitBernoulli)
            return std::isfinite(theta) && theta >= kBernoulliMargin && theta <= 1.0 - kBernoulliMargin;
        return std::isfinite(theta);
    }
    CMatrix value(double theta) const override {
        switch (name_) {
            case BuiltinName::QubitBernoulli: return CMatrix::diag({theta, 1.0 - theta});
            case BuiltinName::QubitPhase: {
                const CVector psi{1.0 / std::numbers::sqrt2, std::polar(1.0 / std::numbers::sqrt2, theta)};
                return CMatrix::projector(psi);
            }
            default: return CMatrix::diag({1.0, 0.0});
        }
    }
    bool has_analytic() const override { return true; }
    CMatrix analytic_derivative(double theta) const override {
        switch (name_) {
            case BuiltinName::QubitBernoulli: return CMatrix::diag({1.0, -1.0});
            case BuiltinName::QubitPhase: {
                const CVector psi{1.0 / std::numbers::sqrt2, std::polar(1.0 / std::numbers::sqrt2, theta)};
                const CVector dpsi{0.0, cplx(0.0, 1.0) * psi[1]};
                return pure_derivative(psi, dpsi);
            }
            default: return CMatrix::zeros(2);
        }
    }
    std::string describe() const override { return "builtin:" + std::string(to_string(name_)); }

  private:
    BuiltinName name_;
};

class ProductImpl final : public FamilyImpl {
  public:
    ProductImpl(std::shared_ptr<const FamilyImpl> a, std::shared_ptr<const FamilyImpl> b)
        : a_(std::move(a)), b_(std::move(b)) {}
    std::size_t dim() const override { return a_->dim() * b_->dim(); }
    bool admissible(double theta) const override { return a_->admissible(theta) && b_->admissible(theta); }
    CMatrix value(double theta) const override { return kron(a_->value(theta), b_->value(theta)); }
    bool has_analytic() const override { return a_->has_analytic() && b_->has_analytic(); }
    CMatrix analytic_derivative(double theta) const override {
        return kron(a_->analytic_derivative(theta), b_->value(theta)) +
               kron(a_->value(theta), b_->analytic_derivative(theta));
    }
    std::string describe() const override { return "builtin:product_of(" + a_->describe() + "," + b_->describe() + ")"; }

  private:
    std::shared_ptr<const FamilyImpl> a_, b_;
};

class GridImpl final : public FamilyImpl {
  public:
    explicit GridImpl(std::vector<GridPoint> pts) : pts_(std::move(pts)) {}
    std::size_t dim() const override { return pts_.front().rho.rows(); }
    bool admissible(double theta) const override { return index_of(theta).has_value(); }
    CMatrix value(double theta) const override { return pts_[*index_of(theta)].rho; }
    std::string describe() const override { return "grid(" + std::to_string(pts_.size()) + " points)"; }

    CMatrix fd_derivative(double theta, DerivativeScheme scheme, double) const override {
        const std::size_t k = *index_of(theta);
        const std::size_t n = pts_.size();
        auto t = [&](std::size_t i) { return pts_[i].theta; };
        auto f = [&](std::size_t i) -> const CMatrix & { return pts_[i].rho; };
        if (scheme == DerivativeScheme::Richardson) {
            if (k < 2 || k + 2 >= n)
                throw Error(ErrorCode::InvalidArgument, "Richardson on a grid needs two tabulated neighbours per side");
            const double h = t(k + 1) - t(k);
            for (std::size_t i = k - 2; i < k + 2; ++i)
                if (std::abs((t(i + 1) - t(i)) - h) > 1e-9 * std::max(1.0, std::abs(h)))
                    throw Error(ErrorCode::InvalidArgument, "Richardson on a grid needs uniform spacing");
            CMatrix fine = (f(k + 1) - f(k - 1)) * (1.0 / (2.0 * h));
            CMatrix coarse = (f(k + 2) - f(k - 2)) * (1.0 / (4.0 * h));
            return (fine * 4.0 - coarse) * (1.0 / 3.0);
        }
        // Second-order three-point stencils on a possibly non-uniform grid.
        if (k == 0) {
            const double h1 = t(1) - t(0), h2 = t(2) - t(1);
            return f(0) * (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) + f(1) * ((h1 + h2) / (h1 * h2)) +
                   f(2) * (-h1 / (h2 * (h1 + h2)));
        }
        if (k == n - 1) {
            const double h1 = t(n - 2) - t(n - 3), h2 = t(n - 1) - t(n - 2);
            return f(n - 3) * (h2 / (h1 * (h1 + h2))) + f(n - 2) * (-(h1 + h2) / (h1 * h2)) +
                   f(n - 1) * ((h1 + 2.0 * h2) / (h2 * (h1 + h2)));
        }
        const double h1 = t(k) - t(k - 1), h2 = t(k + 1) - t(k);
        return f(k - 1) * (-h2 / (h1 * (h1 + h2))) + f(k) * ((h2 - h1) / (h1 * h2)) + f(k + 1) * (h1 / (h2 * (h1 + h2)));
    }

  private:
    std::optional<std::size_t> index_of(double theta) const {
        for (std::size_t i = 0; i < pts_.size(); ++i)
            if (std::abs(pts_[i].theta - theta) <= 1e-12 * std::max(1.0, std::abs(theta))) return i;
        return std::nullopt;
    }
    std::vector<GridPoint> pts_;
};

class MixtureImpl final : public FamilyImpl {
  public:
    MixtureImpl(std::shared_ptr<const FamilyImpl> a, std::shared_ptr<const FamilyImpl> b, double lambda)
        : a_(std::move(a)), b_(std::move(b)), lambda_(lambda) {}
    std::size_t dim() const override { return a_->dim(); }
    bool admissible(double theta) const override { return a_->admissible(theta) && b_->admissible(theta); }
    CMatrix value(double theta) const override { return a_->value(theta) * lambda_ + b_->value(theta) * (1.0 - lambda_); }
    bool has_analytic() const override { return a_->has_analytic() && b_->has_analytic(); }
    CMatrix analytic_derivative(double theta) const override {
        return a_->analytic_derivative(theta) * lambda_ + b_->analytic_derivative(theta) * (1.0 - lambda_);
    }
    CMatrix fd_derivative(double theta, DerivativeScheme scheme, double h) const override {
        return a_->fd_derivative(theta, scheme, h) * lambda_ + b_->fd_derivative(theta, scheme, h) * (1.0 - lambda_);
    }
    std::string describe() const override {
        return "mixture(" + std::to_string(lambda_) + "," + a_->describe() + "," + b_->describe() + ")";
    }

  private:
    std::shared_ptr<const FamilyImpl> a_, b_;
    double lambda_;
};

using LinearMap = std::function<CMatrix(const CMatrix &)>;

class MappedImpl final : public FamilyImpl {
  public:
    MappedImpl(std::shared_ptr<const FamilyImpl> base, LinearMap map, std::size_t out_dim, std::string label)
        : base_(std::move(base)), map_(std::move(map)), out_dim_(out_dim), label_(std::move(label)) {}
    std::size_t dim() const override { return out_dim_; }
    bool admissible(double theta) const override { return base_->admissible(theta); }
    CMatrix value(double theta) const override { return hermitian_part(map_(base_->value(theta))); }
    bool has_analytic() const override { return base_->has_analytic(); }
    CMatrix analytic_derivative(double theta) const override { return map_(base_->analytic_derivative(theta)); }
    CMatrix fd_derivative(double theta, DerivativeScheme scheme, double h) const override {
        return map_(base_->fd_derivative(theta, scheme, h));
    }
    std::string describe() const override { return label_ + "(" + base_->describe() + ")"; }

  private:
    std::shared_ptr<const FamilyImpl> base_;
    LinearMap map_;
    std::size_t out_dim_;
    std::string label_;
};

}  // namespace detail

using LinearMap = detail::LinearMap;

class Family {
  public:
    enum class Kind { Generator, Builtin, Grid, Mapped, Mixture };

    // rho_theta = exp(-i theta G) rho0 exp(i theta G)
    static Family generator(const DensityMatrix &rho0, const CMatrix &g) {
        if (!g.square() || g.rows() != rho0.dim()) throw Error(ErrorCode::DimMismatch, "generator size differs from rho0");
        if (!is_hermitian(g)) throw Error(ErrorCode::NotHermitian, "generator must be Hermitian");
        return Family(Kind::Generator, std::make_shared<detail::GeneratorImpl>(rho0.matrix(), hermitian_part(g)),
                      rho0.dims());
    }

    static Family builtin(BuiltinName name) {
        switch (name) {
            case BuiltinName::BellPhase:
            case BuiltinName::CosSin:
            case BuiltinName::PlusPhaseTimesZero:
                return Family(Kind::Builtin, std::make_shared<detail::PureBuiltinImpl>(name), BipartiteDims{2, 2}, name);
            case BuiltinName::CcBernoulli:
                return Family(Kind::Builtin, std::make_shared<detail::BernoulliImpl>(), BipartiteDims{2, 2}, name);
            case BuiltinName::QubitBernoulli:
            case BuiltinName::QubitPhase:
            case BuiltinName::QubitZero:
                return Family(Kind::Builtin, std::make_shared<detail::QubitImpl>(name), std::nullopt, name);
            case BuiltinName::ProductOf:
                throw Error(ErrorCode::InvalidArgument, "product_of needs factor families; use Family::product_of");
        }
        throw Error(ErrorCode::UnknownName, "unknown builtin");
    }

    // sigma^a_theta (x) sigma^b_theta
    static Family product_of(const Family &a, const Family &b) {
        return Family(Kind::Builtin, std::make_shared<detail::ProductImpl>(a.impl_, b.impl_),
                      BipartiteDims{a.dim(), b.dim()}, BuiltinName::ProductOf);
    }

    static Family grid(std::vector<GridPoint> points, std::optional<BipartiteDims> dims = std::nullopt) {
        if (points.size() < 3) throw Error(ErrorCode::InvalidArgument, "grid family needs at least 3 points");
        std::sort(points.begin(), points.end(), [](const GridPoint &x, const GridPoint &y) { return x.theta < y.theta; });
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i].theta)) throw Error(ErrorCode::InvalidArgument, "grid theta must be finite");
            if (i > 0 && !(points[i].theta > points[i - 1].theta))
                throw Error(ErrorCode::InvalidArgument, "grid thetas must be distinct");
            if (points[i].rho.rows() != points[0].rho.rows())
                throw Error(ErrorCode::DimMismatch, "grid matrices differ in size");
            points[i].rho = DensityMatrix(points[i].rho, dims).matrix();
        }
        return Family(Kind::Grid, std::make_shared<detail::GridImpl>(std::move(points)), dims);
    }

    static Family mixture(const Family &a, const Family &b, double lambda) {
        if (a.dim() != b.dim()) throw Error(ErrorCode::DimMismatch, "mixture components differ in dimension");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidArgument, "mixing weight outside [0,1]");
        return Family(Kind::Mixture, std::make_shared<detail::MixtureImpl>(a.impl_, b.impl_, lambda), a.dims_);
    }

    // Pushes the family through a theta-independent linear map (e.g. a channel).
    static Family mapped(const Family &base, LinearMap map, std::size_t out_dim, std::optional<BipartiteDims> dims,
                         std::string label) {
        if (dims && dims->total() != out_dim) throw Error(ErrorCode::DimMismatch, "mapped dims vs output size");
        return Family(Kind::Mapped,
                      std::make_shared<detail::MappedImpl>(base.impl_, std::move(map), out_dim, std::move(label)), dims);
    }

    Kind kind() const noexcept { return kind_; }
    std::optional<BuiltinName> builtin_name() const noexcept { return builtin_; }
    std::size_t dim() const { return impl_->dim(); }
    const std::optional<BipartiteDims> &dims() const noexcept { return dims_; }
    bool has_analytic_derivative() const { return impl_->has_analytic(); }
    bool admissible(double theta) const { return impl_->admissible(theta); }
    std::string describe() const { return impl_->describe(); }

    DensityMatrix eval(double theta) const {
        require_admissible(theta);
        return DensityMatrix(impl_->value(theta), dims_);
    }

    CMatrix derivative(double theta, const DerivativeOptions &opts = {}) const {
        require_admissible(theta);
        DerivativeScheme scheme = opts.scheme;
        if (scheme == DerivativeScheme::Auto)
            scheme = impl_->has_analytic() ? DerivativeScheme::Analytic : DerivativeScheme::Central;
        if (scheme == DerivativeScheme::Analytic) {
            if (!impl_->has_analytic())
                throw Error(ErrorCode::AnalyticUnavailable, describe() + " has no closed-form derivative");
            return hermitian_part(impl_->analytic_derivative(theta));
        }
        if (!(opts.step > 0.0) || !std::isfinite(opts.step))
            throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
        return hermitian_part(impl_->fd_derivative(theta, scheme, opts.step));
    }

    // Closed-form state vector and its derivative for the pure builtins.
    std::optional<std::pair<CVector, CVector>> pure_state(double theta) const {
        auto p = std::dynamic_pointer_cast<const detail::PureBuiltinImpl>(impl_);
        if (!p) return std::nullopt;
        require_admissible(theta);
        return std::make_pair(p->state(theta), p->state_derivative(theta));
    }

  private:
    Family(Kind kind, std::shared_ptr<const detail::FamilyImpl> impl, std::optional<BipartiteDims> dims,
           std::optional<BuiltinName> builtin = std::nullopt)
        : kind_(kind), impl_(std::move(impl)), dims_(dims), builtin_(builtin) {
        if (dims_ && dims_->total() != impl_->dim()) throw Error(ErrorCode::DimMismatch, "bipartite dims vs family size");
    }

    void require_admissible(double theta) const {
        if (!impl_->admissible(theta))
            throw Error(ErrorCode::ThetaOutOfDomain, "theta=" + std::to_string(theta) + " not admissible for " + describe());
    }

    Kind kind_;
    std::shared_ptr<const detail::FamilyImpl> impl_;
    std::optional<BipartiteDims> dims_;
    std::optional<BuiltinName> builtin_;
};

inline DensityMatrix eval(const Family &f, double theta) { return f.eval(theta); }

inline CMatrix eval_derivative(const Family &f, double theta, DerivativeScheme scheme = DerivativeScheme::Auto,
                               double step = 1e-5) {
    return f.derivative(theta, {scheme, step});
}

inline Family make_builtin(BuiltinName name) { return Family::builtin(name); }
inline Family make_builtin(std::string_view name) { return Family::builtin(builtin_from_string(name)); }

}  // namespace mifisher
