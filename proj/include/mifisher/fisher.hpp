#pragma once

// Quantum Fisher information via the symmetric logarithmic derivative,
// classical Fisher information of a POVM, classical-quantum states derived
// from a local measurement, and the adaptive-measurement decompositions.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mifisher/matcore.hpp"
#include "mifisher/povm.hpp"
#include "mifisher/states.hpp"

namespace mifisher {

inline constexpr double kSldTruncation = 1e-10;
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kTracelessTol = 1e-7;

struct SLDResult {
    CMatrix sld;               // L, with d rho = (L rho + rho L) / 2 on the support
    double qfi = 0.0;          // tr(rho L^2)
    std::size_t support_rank = 0;
    double truncation_tol = kSldTruncation;
};

// In the eigenbasis of rho: L_jk = 2 D_jk / (l_j + l_k) for l_j + l_k > tol,
// zero otherwise, where D is d rho in that basis.
inline SLDResult sld(const CMatrix &rho, const CMatrix &drho, double tol = kSldTruncation) {
    if (!rho.square() || rho.rows() != drho.rows() || drho.rows() != drho.cols())
        throw Error(ErrorCode::DimMismatch, "rho and d rho must be square and of equal size");
    if (std::abs(drho.trace()) > kTracelessTol)
        throw Error(ErrorCode::NotTraceless, "tr(d rho) = " + std::to_string(std::abs(drho.trace())));
    if (hermiticity_residual(drho) > kTracelessTol) throw Error(ErrorCode::NotHermitian, "d rho is not Hermitian");

    const std::size_t n = rho.rows();
    const EigDecomposition eig = herm_eig(rho);
    const CMatrix &v = eig.vectors;
    const CMatrix d = v.adjoint() * drho * v;

    SLDResult out;
    out.truncation_tol = tol;
    CMatrix l(n, n);
    double qfi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (eig.values[j] > tol) ++out.support_rank;
        for (std::size_t k = 0; k < n; ++k) {
            const double s = eig.values[j] + eig.values[k];
            if (s <= tol) continue;
            l(j, k) = 2.0 * d(j, k) / s;
            qfi += 2.0 * std::norm(d(j, k)) / s;
        }
    }
    out.sld = hermitian_part(v * l * v.adjoint());
    out.qfi = std::max(0.0, qfi);
    return out;
}

inline SLDResult sld(const DensityMatrix &rho, const CMatrix &drho, double tol = kSldTruncation) {
    return sld(rho.matrix(), drho, tol);
}

// 4 (<d psi|d psi> - |<psi|d psi>|^2)
inline double qfi_pure(std::span<const cplx> psi, std::span<const cplx> dpsi) {
    if (psi.size() != dpsi.size()) throw Error(ErrorCode::DimMismatch, "psi and d psi lengths differ");
    const double n = norm(psi);
    if (std::abs(n - 1.0) > 1e-9) throw Error(ErrorCode::NotNormalized, "norm of psi is " + std::to_string(n));
    const double value = 4.0 * (inner(dpsi, dpsi).real() - std::norm(inner(psi, dpsi)));
    return std::max(0.0, value);
}

// sum_i dp_i^2 / p_i. Outcomes below p_tol are dropped when their derivative
// is below sqrt(p_tol); otherwise the information diverges.
inline double classical_fi_from_probabilities(std::span<const double> p, std::span<const double> dp,
                                              double p_tol = kProbabilityFloor) {
    if (p.size() != dp.size()) throw Error(ErrorCode::DimMismatch, "probability and derivative lengths differ");
    double fi = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < p_tol) {
            if (std::abs(dp[i]) < std::sqrt(p_tol)) continue;
            throw Error(ErrorCode::SingularOutcome, "outcome " + std::to_string(i) + " has p=" + std::to_string(p[i]) +
                                                        " but dp=" + std::to_string(dp[i]));
        }
        fi += dp[i] * dp[i] / p[i];
    }
    return fi;
}

inline double classical_fi(const CMatrix &rho, const CMatrix &drho, const Povm &m, double p_tol = kProbabilityFloor) {
    if (m.dim() != rho.rows() || drho.rows() != rho.rows())
        throw Error(ErrorCode::DimMismatch, "POVM dim " + std::to_string(m.dim()) + " vs state dim " +
                                                std::to_string(rho.rows()));
    std::vector<double> p(m.size()), dp(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        p[i] = trace_product(rho, m[i]).real();
        dp[i] = trace_product(drho, m[i]).real();
    }
    return classical_fi_from_probabilities(p, dp, p_tol);
}

inline double classical_fi(const DensityMatrix &rho, const CMatrix &drho, const Povm &m,
                           double p_tol = kProbabilityFloor) {
    return classical_fi(rho.matrix(), drho, m, p_tol);
}

// rho's spectrum with round-off negatives clamped to zero.
inline EigDecomposition clamped_spectrum(const CMatrix &rho) {
    EigDecomposition e = herm_eig(rho);
    for (auto &l : e.values) l = std::max(l, 0.0);
    return e;
}

// Classical FI of the rank-1 projective measurement onto the columns of u.
// p_i = sum_k lambda_k |<e_k|u_i>|^2 keeps full relative precision for tiny
// probabilities, which tr(rho M_i) does not.
inline double classical_fi_projective(const EigDecomposition &rho, const CMatrix &drho, const CMatrix &u,
                                      double p_tol = kProbabilityFloor) {
    const std::size_t d = u.rows();
    if (rho.vectors.rows() != d || drho.rows() != d) throw Error(ErrorCode::DimMismatch, "measurement vs state dimension");
    const CMatrix w = rho.vectors.adjoint() * u;
    const CMatrix du = drho * u;
    std::vector<double> p(u.cols(), 0.0), dp(u.cols(), 0.0);
    for (std::size_t i = 0; i < u.cols(); ++i) {
        for (std::size_t k = 0; k < d; ++k) p[i] += rho.values[k] * std::norm(w(k, i));
        cplx acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += std::conj(u(k, i)) * du(k, i);
        dp[i] = acc.real();
    }
    return classical_fi_from_probabilities(p, dp, p_tol);
}

// Projectors onto the eigenbasis of the SLD; attains the QFI.
inline Povm sld_basis_measurement(const SLDResult &s) { return projective_from_unitary(herm_eig(s.sld).vectors); }

// Unitary whose columns are the SLD eigenvectors of (rho, d rho).
inline CMatrix sld_eigenbasis(const CMatrix &rho, const CMatrix &drho) {
    return herm_eig(sld(rho, drho).sld).vectors;
}

// sum_i p(i) |i><i| (x) rho^{b|i} after a local first-stage measurement,
// with theta-derivatives. For b->a the roles of the parties swap.
struct CQState {
    Direction direction = Direction::AtoB;
    BipartiteDims dims;
    std::vector<int> labels;
    std::vector<double> probs;
    std::vector<double> dprobs;
    std::vector<CMatrix> conditionals;   // identity/d placeholder where excluded
    std::vector<CMatrix> dconditionals;  // zero where excluded
    std::vector<CMatrix> unnormalized;   // tr_first((M_i (x) 1) rho)
    std::vector<CMatrix> dunnormalized;
    std::vector<bool> included;          // probs[i] >= p_tol

    std::size_t outcomes() const noexcept { return probs.size(); }
    std::size_t conditional_dim() const noexcept { return dims.of(other(first_party(direction))); }

    // Block-diagonal matrix sum_i |i><i| (x) p_i rho^{.|i}.
    CMatrix joint_matrix() const { return block_diag(unnormalized); }
    CMatrix joint_derivative() const { return block_diag(dunnormalized); }

  private:
    CMatrix block_diag(const std::vector<CMatrix> &blocks) const {
        const std::size_t d = conditional_dim();
        CMatrix out(blocks.size() * d, blocks.size() * d);
        for (std::size_t i = 0; i < blocks.size(); ++i)
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c) out(i * d + r, i * d + c) = blocks[i](r, c);
        return out;
    }
};

inline CQState cq_state(const CMatrix &rho, const CMatrix &drho, const Povm &first, BipartiteDims dims,
                        Direction dir = Direction::AtoB, double p_tol = kProbabilityFloor) {
    const Party measured = first_party(dir);
    const Party kept = other(measured);
    if (first.dim() != dims.of(measured)) throw Error(ErrorCode::DimMismatch, "first-stage POVM dimension");
    if (rho.rows() != dims.total() || drho.rows() != dims.total())
        throw Error(ErrorCode::DimMismatch, "state dimension vs bipartite dims");

    CQState cq;
    cq.direction = dir;
    cq.dims = dims;
    cq.labels = first.labels();
    const std::size_t d = dims.of(kept);
    for (std::size_t i = 0; i < first.size(); ++i) {
        const CMatrix lifted = embed_operator(first[i], dims, measured);
        CMatrix tau = hermitian_part(partial_trace(lifted * rho, dims, kept));
        CMatrix dtau = hermitian_part(partial_trace(lifted * drho, dims, kept));
        const double p = tau.trace().real();
        const double dp = dtau.trace().real();
        cq.probs.push_back(p);
        cq.dprobs.push_back(dp);
        if (p >= p_tol) {
            CMatrix cond = tau * (1.0 / p);
            CMatrix dcond = (dtau - cond * dp) * (1.0 / p);
            // The quotient rule is traceless analytically; remove round-off.
            const cplx tr = dcond.trace();
            for (std::size_t k = 0; k < d; ++k) dcond(k, k) -= tr / static_cast<double>(d);
            cq.conditionals.push_back(std::move(cond));
            cq.dconditionals.push_back(std::move(dcond));
            cq.included.push_back(true);
        } else {
            cq.conditionals.push_back(CMatrix::identity(d) * (1.0 / static_cast<double>(d)));
            cq.dconditionals.push_back(CMatrix::zeros(d));
            cq.included.push_back(false);
        }
        cq.unnormalized.push_back(std::move(tau));
        cq.dunnormalized.push_back(std::move(dtau));
    }
    return cq;
}

// Same construction for the projective first stage onto the columns of u,
// with tau_i = sum_k lambda_k v_ik v_ik^dagger (v_ik = (<u_i| (x) 1)|e_k>)
// so that small blocks stay positive and relatively accurate.
inline CQState cq_state_projective(const EigDecomposition &rho, const CMatrix &drho, const CMatrix &u, BipartiteDims dims,
                                   Direction dir = Direction::AtoB, double p_tol = kProbabilityFloor) {
    const Party measured = first_party(dir);
    const std::size_t dm = dims.of(measured), d = dims.of(other(measured));
    if (u.rows() != dm || rho.vectors.rows() != dims.total() || drho.rows() != dims.total())
        throw Error(ErrorCode::DimMismatch, "first-stage basis vs bipartite dims");
    // flat index of (measured index m, kept index k)
    auto at = [&](std::size_t m, std::size_t k) { return measured == Party::A ? m * d + k : k * dims.dim_b + m; };

    CQState cq;
    cq.direction = dir;
    cq.dims = dims;
    for (std::size_t i = 0; i < u.cols(); ++i) {
        cq.labels.push_back(static_cast<int>(i));
        CMatrix tau(d, d), dtau(d, d);
        for (std::size_t e = 0; e < rho.values.size(); ++e) {
            if (rho.values[e] == 0.0) continue;
            CVector v(d);
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t m = 0; m < dm; ++m) v[k] += std::conj(u(m, i)) * rho.vectors(at(m, k), e);
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c) tau(r, c) += rho.values[e] * v[r] * std::conj(v[c]);
        }
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                cplx acc = 0.0;
                for (std::size_t m = 0; m < dm; ++m)
                    for (std::size_t n = 0; n < dm; ++n) acc += std::conj(u(m, i)) * drho(at(m, r), at(n, c)) * u(n, i);
                dtau(r, c) = acc;
            }
        tau = hermitian_part(tau);
        dtau = hermitian_part(dtau);
        const double p = tau.trace().real();
        const double dp = dtau.trace().real();
        cq.probs.push_back(p);
        cq.dprobs.push_back(dp);
        if (p >= p_tol) {
            CMatrix cond = tau * (1.0 / p);
            CMatrix dcond = (dtau - cond * dp) * (1.0 / p);
            const cplx tr = dcond.trace();
            for (std::size_t k = 0; k < d; ++k) dcond(k, k) -= tr / static_cast<double>(d);
            cq.conditionals.push_back(std::move(cond));
            cq.dconditionals.push_back(std::move(dcond));
            cq.included.push_back(true);
        } else {
            cq.conditionals.push_back(CMatrix::identity(d) * (1.0 / static_cast<double>(d)));
            cq.dconditionals.push_back(CMatrix::zeros(d));
            cq.included.push_back(false);
        }
        cq.unnormalized.push_back(std::move(tau));
        cq.dunnormalized.push_back(std::move(dtau));
    }
    return cq;
}

inline CQState cq_state(const Family &f, double theta, const Povm &first, BipartiteDims dims,
                        Direction dir = Direction::AtoB, const DerivativeOptions &opts = {}) {
    return cq_state(f.eval(theta).matrix(), f.derivative(theta, opts), first, dims, dir);
}

// F(rho^first | M) + sum_i p(i) F(rho^{.|i}): the QFI of the derived
// classical-quantum state, i.e. the best adaptive value for this first stage.
inline double adaptive_fi_given_first(const CQState &cq, double p_tol = kProbabilityFloor,
                                      double sld_tol = kSldTruncation) {
    double fi = classical_fi_from_probabilities(cq.probs, cq.dprobs, p_tol);
    for (std::size_t i = 0; i < cq.outcomes(); ++i)
        if (cq.included[i]) fi += cq.probs[i] * sld(cq.conditionals[i], cq.dconditionals[i], sld_tol).qfi;
    return fi;
}

inline double adaptive_fi_given_first(const CMatrix &rho, const CMatrix &drho, const Povm &first, BipartiteDims dims,
                                      Direction dir, double p_tol = kProbabilityFloor) {
    return adaptive_fi_given_first(cq_state(rho, drho, first, dims, dir, p_tol), p_tol);
}

inline double adaptive_fi_given_first(const Family &f, double theta, const Povm &first, BipartiteDims dims,
                                      Direction dir = Direction::AtoB, const DerivativeOptions &opts = {}) {
    return adaptive_fi_given_first(cq_state(f, theta, first, dims, dir, opts));
}

struct AdaptiveRoutes {
    double joint = 0.0;          // classical FI of the embedded joint POVM
    double decomposition = 0.0;  // first-stage FI + sum_i p(i) F(rho^{.|i} | M^{.|i})
    double first_stage = 0.0;
    double residual = 0.0;       // |joint - decomposition|
};

inline AdaptiveRoutes adaptive_fi_explicit(const CMatrix &rho, const CMatrix &drho, const AdaptivePovm &ap,
                                           BipartiteDims dims, Direction dir, double p_tol = kProbabilityFloor) {
    AdaptiveRoutes r;
    r.joint = classical_fi(rho, drho, adaptive_embed(ap, dims, dir), p_tol);
    const CQState cq = cq_state(rho, drho, ap.first, dims, dir, p_tol);
    r.first_stage = classical_fi_from_probabilities(cq.probs, cq.dprobs, p_tol);
    r.decomposition = r.first_stage;
    for (std::size_t i = 0; i < cq.outcomes(); ++i)
        if (cq.included[i])
            r.decomposition += cq.probs[i] * classical_fi(cq.conditionals[i], cq.dconditionals[i], ap.conditionals[i], p_tol);
    r.residual = std::abs(r.joint - r.decomposition);
    return r;
}

inline AdaptiveRoutes adaptive_fi_explicit(const Family &f, double theta, const AdaptivePovm &ap, BipartiteDims dims,
                                           Direction dir = Direction::AtoB, const DerivativeOptions &opts = {}) {
    return adaptive_fi_explicit(f.eval(theta).matrix(), f.derivative(theta, opts), ap, dims, dir);
}

// F(rho^party), the best value over measurements on one party alone.
inline double fi_marginal(const CMatrix &rho, const CMatrix &drho, BipartiteDims dims, Party party) {
    return sld(partial_trace(rho, dims, party), partial_trace(drho, dims, party)).qfi;
}

inline double fi_marginal(const Family &f, double theta, BipartiteDims dims, Party party,
                          const DerivativeOptions &opts = {}) {
    return fi_marginal(f.eval(theta).matrix(), f.derivative(theta, opts), dims, party);
}

inline double qfi(const Family &f, double theta, const DerivativeOptions &opts = {}) {
    return sld(f.eval(theta), f.derivative(theta, opts)).qfi;
}

struct ExtensionCheck {
    double extended = 0.0;  // F(rho~ | M (x) 1)
    double reduced = 0.0;   // F(rho^a | M)
    double residual = 0.0;
};

// Measures M (x) 1 on a purification-style extension of rho^a_theta into
// C^{dim_a} (x) C^{extension_dim}: |sqrt(rho^a)>> pushed through a random
// isometry on the ancilla. Its theta-derivative comes from the Sylvester
// equation S X + X S = d rho^a.
inline ExtensionCheck check_extension_invariance(const Family &f, double theta, BipartiteDims dims, const Povm &m,
                                                 std::size_t extension_dim, std::uint64_t seed = 0,
                                                 const DerivativeOptions &opts = {}) {
    const CMatrix rho_a = partial_trace(f.eval(theta).matrix(), dims, Party::A);
    const CMatrix drho_a = partial_trace(f.derivative(theta, opts), dims, Party::A);
    const std::size_t da = dims.dim_a;
    if (m.dim() != da) throw Error(ErrorCode::DimMismatch, "measurement must act on party a");
    if (extension_dim < da) throw Error(ErrorCode::InvalidArgument, "extension dimension must be at least dim_a");

    const EigDecomposition eig = herm_eig(rho_a);
    std::vector<double> s(da);
    for (std::size_t k = 0; k < da; ++k) s[k] = std::sqrt(std::max(0.0, eig.values[k]));
    const CMatrix &v = eig.vectors;
    const CMatrix sqrt_rho = spectral_apply(eig, [](double l) { return cplx(std::sqrt(std::max(0.0, l))); });
    const CMatrix d = v.adjoint() * drho_a * v;
    CMatrix x(da, da);
    for (std::size_t j = 0; j < da; ++j)
        for (std::size_t k = 0; k < da; ++k)
            if (s[j] + s[k] > 1e-12) x(j, k) = d(j, k) / (s[j] + s[k]);
    x = v * x * v.adjoint();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    CMatrix h(extension_dim, extension_dim);
    for (std::size_t i = 0; i < extension_dim; ++i)
        for (std::size_t j = 0; j < extension_dim; ++j) h(i, j) = cplx(gauss(rng), gauss(rng));
    const CMatrix w = expi_hermitian(hermitian_part(h));  // first da columns form the isometry

    auto vectorize = [&](const CMatrix &op) {
        CVector out(da * extension_dim);
        for (std::size_t j = 0; j < da; ++j)
            for (std::size_t l = 0; l < extension_dim; ++l) {
                cplx acc = 0.0;
                for (std::size_t k = 0; k < da; ++k) acc += op(j, k) * w(l, k);
                out[j * extension_dim + l] = acc;
            }
        return out;
    };
    const CVector psi = vectorize(sqrt_rho);
    const CVector dpsi = vectorize(x);
    const CMatrix rho_ext = CMatrix::projector(psi);
    const CMatrix drho_ext = detail::pure_derivative(psi, dpsi);

    ExtensionCheck out;
    out.extended = classical_fi(rho_ext, drho_ext, embed_local(m, {da, extension_dim}, Party::A));
    out.reduced = classical_fi(rho_a, drho_a, m);
    out.residual = std::abs(out.extended - out.reduced);
    return out;
}

}  // namespace mifisher
