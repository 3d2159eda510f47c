#pragma once

// Theta-independent quantum channels in Kraus form, the adjoint action on
// POVMs, a few stock channels, and Fisher-information flow along a chain.

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mifisher/hierarchy.hpp"
#include "mifisher/matcore.hpp"
#include "mifisher/povm.hpp"
#include "mifisher/states.hpp"

namespace mifisher {

class QuantumChannel {
  public:
    explicit QuantumChannel(std::vector<CMatrix> kraus, std::string label = "kraus", double tolerance = 1e-9)
        : kraus_(std::move(kraus)), label_(std::move(label)) {
        if (kraus_.empty()) throw Error(ErrorCode::InvalidArgument, "channel needs at least one Kraus operator");
        dim_out_ = kraus_.front().rows();
        dim_in_ = kraus_.front().cols();
        CMatrix sum = CMatrix::zeros(dim_in_);
        for (const auto &k : kraus_) {
            if (k.rows() != dim_out_ || k.cols() != dim_in_) throw Error(ErrorCode::DimMismatch, "Kraus operator shapes differ");
            sum += k.adjoint() * k;
        }
        const double err = max_abs_diff(sum, CMatrix::identity(dim_in_));
        if (err > tolerance)
            throw Error(ErrorCode::NotTracePreserving, "|sum E^dagger E - 1| = " + std::to_string(err));
    }

    static QuantumChannel identity(std::size_t dim) { return QuantumChannel({CMatrix::identity(dim)}, "identity"); }

    static QuantumChannel unitary(const CMatrix &u, std::string label = "unitary") {
        if (unitarity_residual(u) > 1e-9) throw Error(ErrorCode::NotTracePreserving, "operator is not unitary");
        return QuantumChannel({u}, std::move(label));
    }

    // Kraus set {sqrt(1 - 3q/4) 1, sqrt(q/4) X, sqrt(q/4) Y, sqrt(q/4) Z};
    // q = 1 maps every state to 1/2.
    static QuantumChannel depolarizing(double q) {
        if (!(q >= 0.0 && q <= 4.0 / 3.0)) throw Error(ErrorCode::InvalidArgument, "depolarizing q outside [0, 4/3]");
        const double a = std::sqrt(std::max(0.0, 1.0 - 0.75 * q)), b = std::sqrt(q / 4.0);
        return QuantumChannel({pauli::I() * a, pauli::X() * b, pauli::Y() * b, pauli::Z() * b},
                              "depolarizing(" + std::to_string(q) + ")");
    }

    const std::vector<CMatrix> &kraus() const noexcept { return kraus_; }
    std::size_t dim_in() const noexcept { return dim_in_; }
    std::size_t dim_out() const noexcept { return dim_out_; }
    const std::string &label() const noexcept { return label_; }

    // sum_mu E_mu X E_mu^dagger (linear, any operator)
    CMatrix apply(const CMatrix &x) const {
        if (x.rows() != dim_in_ || x.cols() != dim_in_) throw Error(ErrorCode::DimMismatch, "channel input dimension");
        CMatrix out = CMatrix::zeros(dim_out_);
        for (const auto &k : kraus_) out += k * x * k.adjoint();
        return out;
    }

    // sum_mu E_mu^dagger X E_mu
    CMatrix adjoint(const CMatrix &x) const {
        if (x.rows() != dim_out_ || x.cols() != dim_out_) throw Error(ErrorCode::DimMismatch, "channel output dimension");
        CMatrix out = CMatrix::zeros(dim_in_);
        for (const auto &k : kraus_) out += k.adjoint() * x * k;
        return out;
    }

  private:
    std::vector<CMatrix> kraus_;
    std::size_t dim_in_ = 0, dim_out_ = 0;
    std::string label_;
};

inline DensityMatrix apply(const QuantumChannel &ch, const DensityMatrix &rho) {
    std::optional<BipartiteDims> dims = rho.dims();
    if (ch.dim_out() != ch.dim_in()) dims.reset();
    return DensityMatrix(ch.apply(rho.matrix()), dims);
}

inline Povm adjoint_apply(const QuantumChannel &ch, const Povm &m) {
    std::vector<CMatrix> els;
    els.reserve(m.size());
    for (const auto &e : m.elements()) els.push_back(hermitian_part(ch.adjoint(e)));
    return Povm(std::move(els), m.labels());
}

// |0><0| (x) 1 + |1><1| (x) X on two qubits (control a, target b).
inline QuantumChannel cnot() {
    CMatrix u(4, 4);
    u(0, 0) = 1.0;
    u(1, 1) = 1.0;
    u(2, 3) = 1.0;
    u(3, 2) = 1.0;
    return QuantumChannel({u}, "cnot");
}

// sum_i |c_i><c_i| (x) U_i with control basis columns c_i (computational
// basis when omitted).
inline QuantumChannel conditional_unitary(const std::vector<CMatrix> &unitaries,
                                          const std::optional<CMatrix> &control_basis = std::nullopt) {
    if (unitaries.empty()) throw Error(ErrorCode::NotUnitaryBlock, "no target unitaries");
    const std::size_t da = control_basis ? control_basis->cols() : unitaries.size();
    if (control_basis && (unitarity_residual(*control_basis) > 1e-9))
        throw Error(ErrorCode::NotUnitaryBlock, "control basis is not orthonormal");
    if (unitaries.size() != da) throw Error(ErrorCode::NotUnitaryBlock, "one target unitary per control basis state");
    const std::size_t db = unitaries.front().rows();
    CMatrix u = CMatrix::zeros(da * db);
    for (std::size_t i = 0; i < da; ++i) {
        if (unitaries[i].rows() != db || unitarity_residual(unitaries[i]) > 1e-9)
            throw Error(ErrorCode::NotUnitaryBlock, "target operator " + std::to_string(i) + " is not a unitary on dim " +
                                                        std::to_string(db));
        CVector c(da);
        if (control_basis)
            c = control_basis->col(i);
        else
            c[i] = 1.0;
        u += kron(CMatrix::projector(c), unitaries[i]);
    }
    return QuantumChannel({u}, "conditional_unitary");
}

// E^a (x) E^b with Kraus operators {E_mu (x) F_nu}.
inline QuantumChannel local_channel(const QuantumChannel &a, const QuantumChannel &b) {
    std::vector<CMatrix> ks;
    for (const auto &ea : a.kraus())
        for (const auto &eb : b.kraus()) ks.push_back(kron(ea, eb));
    return QuantumChannel(std::move(ks), a.label() + "(x)" + b.label());
}

inline QuantumChannel local_channel(const QuantumChannel &ch, BipartiteDims dims, Party party) {
    if (ch.dim_in() != dims.of(party) || ch.dim_out() != dims.of(party))
        throw Error(ErrorCode::DimMismatch, "local channel dimension vs party");
    const QuantumChannel id = QuantumChannel::identity(dims.of(other(party)));
    return party == Party::A ? local_channel(ch, id) : local_channel(id, ch);
}

// second after first.
inline QuantumChannel compose(const QuantumChannel &first, const QuantumChannel &second) {
    if (first.dim_out() != second.dim_in()) throw Error(ErrorCode::DimMismatch, "channel composition dims");
    std::vector<CMatrix> ks;
    for (const auto &f : second.kraus())
        for (const auto &e : first.kraus()) ks.push_back(f * e);
    return QuantumChannel(std::move(ks), second.label() + "*" + first.label());
}

// theta -> E(rho_theta); the derivative is E(d rho_theta).
inline Family push_forward(const Family &f, const QuantumChannel &ch) {
    if (ch.dim_in() != f.dim()) throw Error(ErrorCode::DimMismatch, "channel input dim vs family dim");
    std::optional<BipartiteDims> dims = f.dims();
    if (dims && dims->total() != ch.dim_out()) dims.reset();
    return Family::mapped(
        f, [ch](const CMatrix &x) { return ch.apply(x); }, ch.dim_out(), dims, ch.label());
}

struct FlowStep {
    std::string label;
    HierarchyReport report;
};

struct FlowTrace {
    std::vector<FlowStep> steps;  // steps[0] is the unmodified family
};

inline FlowTrace flow_trace(const Family &f, double theta, const std::vector<QuantumChannel> &chain,
                            const OptimizerConfig &cfg = {}) {
    if (!f.dims()) throw Error(ErrorCode::DimMismatch, "flow tracking needs a bipartite family");
    FlowTrace trace;
    trace.steps.push_back({"input", hierarchy_report(f, theta, cfg)});
    Family current = f;
    for (const auto &ch : chain) {
        if (ch.dim_in() != current.dim() || ch.dim_out() != current.dim())
            throw Error(ErrorCode::DimMismatch, "channel '" + ch.label() + "' does not preserve the system dimension");
        current = push_forward(current, ch);
        trace.steps.push_back({ch.label(), hierarchy_report(current, theta, cfg)});
    }
    return trace;
}

}  // namespace mifisher
