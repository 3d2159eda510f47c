#pragma once

// POVMs, their validation, the bipartite measurement classes (local, product,
// adaptive, global) and the projective-measurement manifold the optimizers
// search over.

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mifisher/matcore.hpp"

namespace mifisher {

class Povm {
  public:
    Povm() = default;
    explicit Povm(std::vector<CMatrix> elements, std::vector<int> labels = {})
        : elements_(std::move(elements)), labels_(std::move(labels)) {
        if (elements_.empty()) throw Error(ErrorCode::InvalidArgument, "POVM needs at least one element");
        for (const auto &e : elements_)
            if (!e.square() || e.rows() != elements_.front().rows())
                throw Error(ErrorCode::DimMismatch, "POVM elements must be square and equally sized");
        if (labels_.empty()) {
            labels_.resize(elements_.size());
            for (std::size_t i = 0; i < labels_.size(); ++i) labels_[i] = static_cast<int>(i);
        }
        if (labels_.size() != elements_.size()) throw Error(ErrorCode::DimMismatch, "one label per POVM element");
    }

    std::size_t size() const noexcept { return elements_.size(); }
    std::size_t dim() const noexcept { return elements_.empty() ? 0 : elements_.front().rows(); }
    const CMatrix &operator[](std::size_t i) const { return elements_[i]; }
    const std::vector<CMatrix> &elements() const noexcept { return elements_; }
    const std::vector<int> &labels() const noexcept { return labels_; }

  private:
    std::vector<CMatrix> elements_;
    std::vector<int> labels_;
};

struct PovmTolerances {
    double hermitian = tol::kHermitian;
    double positivity = tol::kPositivity;
    double completeness = tol::kCompleteness;
};

struct PovmValidation {
    double hermiticity_residual = 0.0;  // worst element
    double positivity_residual = 0.0;   // max(0, -lowest eigenvalue) over elements
    double completeness_residual = 0.0; // max |sum_i M_i - 1|
    bool hermitian_ok = true;
    bool positive_ok = true;
    bool complete_ok = true;

    bool pass() const noexcept { return hermitian_ok && positive_ok && complete_ok; }
};

inline PovmValidation validate(const Povm &m, const PovmTolerances &tols = {}) {
    PovmValidation r;
    CMatrix sum = CMatrix::zeros(m.dim());
    for (const auto &e : m.elements()) {
        const double h = hermiticity_residual(e);
        r.hermiticity_residual = std::max(r.hermiticity_residual, h);
        sum += e;
        if (h <= tols.hermitian) {
            r.positivity_residual = std::max(r.positivity_residual, -min_eigenvalue(hermitian_part(e)));
        } else {
            r.positive_ok = false;
        }
    }
    r.completeness_residual = max_abs_diff(sum, CMatrix::identity(m.dim()));
    r.hermitian_ok = r.hermiticity_residual <= tols.hermitian;
    r.positive_ok = r.positive_ok && r.positivity_residual <= tols.positivity;
    r.complete_ok = r.completeness_residual <= tols.completeness;
    return r;
}

// Measurement classes on H^a (x) H^b, one per row of the usual taxonomy.
enum class PovmClass { LocalA, LocalB, Product, AdaptiveAtoB, AdaptiveBtoA, Global };

constexpr std::string_view to_string(PovmClass c) {
    switch (c) {
        case PovmClass::LocalA: return "local_a";
        case PovmClass::LocalB: return "local_b";
        case PovmClass::Product: return "product";
        case PovmClass::AdaptiveAtoB: return "adaptive_ab";
        case PovmClass::AdaptiveBtoA: return "adaptive_ba";
        case PovmClass::Global: return "global";
    }
    return "?";
}

// Element pattern of each class, e.g. "M_i^a (x) M_j^{b|i}".
constexpr std::string_view element_form(PovmClass c) {
    switch (c) {
        case PovmClass::LocalA: return "M_i^a (x) 1^b";
        case PovmClass::LocalB: return "1^a (x) M_i^b";
        case PovmClass::Product: return "M_i^a (x) M_j^b";
        case PovmClass::AdaptiveAtoB: return "M_i^a (x) M_j^{b|i}";
        case PovmClass::AdaptiveBtoA: return "M_i^{a|j} (x) M_j^b";
        case PovmClass::Global: return "M_i^{ab}";
    }
    return "?";
}

inline constexpr PovmClass kAllClasses[] = {PovmClass::LocalA,       PovmClass::LocalB,       PovmClass::Product,
                                            PovmClass::AdaptiveAtoB, PovmClass::AdaptiveBtoA, PovmClass::Global};

enum class Direction { AtoB, BtoA };

constexpr Party first_party(Direction d) { return d == Direction::AtoB ? Party::A : Party::B; }

inline Povm computational_basis(std::size_t dim) {
    std::vector<CMatrix> els;
    for (std::size_t i = 0; i < dim; ++i) {
        CMatrix e(dim, dim);
        e(i, i) = 1.0;
        els.push_back(std::move(e));
    }
    return Povm(std::move(els));
}

// The one-outcome measurement {1}.
inline Povm trivial_povm(std::size_t dim) { return Povm({CMatrix::identity(dim)}); }

// Rank-1 projectors onto the columns of a unitary.
inline Povm projective_from_unitary(const CMatrix &u) {
    std::vector<CMatrix> els;
    els.reserve(u.cols());
    for (std::size_t k = 0; k < u.cols(); ++k) els.push_back(CMatrix::projector(u.col(k)));
    return Povm(std::move(els));
}

inline Povm embed_local(const Povm &m, BipartiteDims dims, Party party) {
    if (m.dim() != dims.of(party))
        throw Error(ErrorCode::DimMismatch, "POVM acts on dim " + std::to_string(m.dim()) + ", party " +
                                                std::string(to_string(party)) + " has dim " +
                                                std::to_string(dims.of(party)));
    std::vector<CMatrix> els;
    els.reserve(m.size());
    for (const auto &e : m.elements()) els.push_back(embed_operator(e, dims, party));
    return Povm(std::move(els), m.labels());
}

// Outcome (i, j) gets label i * |mb| + j.
inline Povm product_povm(const Povm &ma, const Povm &mb) {
    std::vector<CMatrix> els;
    els.reserve(ma.size() * mb.size());
    for (std::size_t i = 0; i < ma.size(); ++i)
        for (std::size_t j = 0; j < mb.size(); ++j) els.push_back(kron(ma[i], mb[j]));
    return Povm(std::move(els));
}

inline Povm product_povm(const Povm &ma, const Povm &mb, BipartiteDims dims) {
    if (ma.dim() != dims.dim_a || mb.dim() != dims.dim_b) throw Error(ErrorCode::DimMismatch, "product POVM dims");
    return product_povm(ma, mb);
}

// First-stage measurement on one party; the other party's measurement is
// chosen by the first outcome.
struct AdaptivePovm {
    Povm first;
    std::vector<Povm> conditionals;
};

// Joint elements M_i^a (x) M_j^{b|i} (a->b) or M_i^{a|j} (x) M_j^b (b->a),
// enumerated first-outcome-major with sequential labels.
inline Povm adaptive_embed(const AdaptivePovm &ap, BipartiteDims dims, Direction dir) {
    const Party first = first_party(dir);
    if (ap.first.dim() != dims.of(first)) throw Error(ErrorCode::DimMismatch, "first-stage POVM dimension");
    if (ap.conditionals.size() < ap.first.size())
        throw Error(ErrorCode::MissingConditional, std::to_string(ap.first.size()) + " first-stage outcomes but only " +
                                                       std::to_string(ap.conditionals.size()) + " conditionals");
    if (ap.conditionals.size() > ap.first.size())
        throw Error(ErrorCode::InvalidArgument, "more conditionals than first-stage outcomes");
    std::vector<CMatrix> els;
    for (std::size_t i = 0; i < ap.first.size(); ++i) {
        const Povm &cond = ap.conditionals[i];
        if (cond.dim() != dims.of(other(first))) throw Error(ErrorCode::DimMismatch, "conditional POVM dimension");
        for (std::size_t j = 0; j < cond.size(); ++j)
            els.push_back(dir == Direction::AtoB ? kron(ap.first[i], cond[j]) : kron(cond[j], ap.first[i]));
    }
    return Povm(std::move(els));
}

// Real coordinates of a dense Hermitian generator H on C^dim: dim diagonal
// entries followed by (Re, Im) of H_pq for p < q in row-major order.
struct ProjectiveParam {
    std::size_t dim = 0;
    std::vector<double> params;
};

inline CMatrix generator_from_params(std::size_t dim, std::span<const double> params) {
    if (params.size() != dim * dim)
        throw Error(ErrorCode::DimMismatch, "expected " + std::to_string(dim * dim) + " parameters, got " +
                                                std::to_string(params.size()));
    CMatrix h(dim, dim);
    std::size_t k = 0;
    for (std::size_t i = 0; i < dim; ++i) h(i, i) = params[k++];
    for (std::size_t p = 0; p < dim; ++p)
        for (std::size_t q = p + 1; q < dim; ++q) {
            const cplx v(params[k], params[k + 1]);
            k += 2;
            h(p, q) = v;
            h(q, p) = std::conj(v);
        }
    return h;
}

// exp(iH) with H from the parameter vector.
inline CMatrix unitary_from_params(std::size_t dim, std::span<const double> params) {
    return expi_hermitian(generator_from_params(dim, params));
}

inline Povm projective_from_params(const ProjectiveParam &p) {
    return projective_from_unitary(unitary_from_params(p.dim, p.params));
}

}  // namespace mifisher
