#pragma once

// Suprema of the classical Fisher information over each measurement class,
// and the six-entry hierarchy report built from them.
//
// Local and global classes have closed forms (marginal and global QFI).
// Product and adaptive classes are maximized over rank-1 projective
// measurements with dim outcomes per party, so their values are certified
// lower bounds on the class suprema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mifisher/fisher.hpp"
#include "mifisher/nelder_mead.hpp"

namespace mifisher {

struct OptimizerConfig {
    int starts = 16;
    std::uint64_t seed = 0;
    double ftol = 1e-9;
    std::size_t max_evals = 2000;  // per start
    double initial_step = 0.5;
    int threads = 1;               // >1 runs restarts concurrently
    DerivativeOptions derivative{};
    double p_tol = kProbabilityFloor;
    double chain_slack = 1e-6;
};

enum class Method { ClosedForm, OptimizedLowerBound };

constexpr std::string_view to_string(Method m) {
    return m == Method::ClosedForm ? "closed-form" : "optimized-lower-bound";
}

struct OptimizerDiagnostics {
    int starts = 0;
    int best_start = -1;
    int converged_starts = 0;
    bool best_converged = false;
    std::size_t evaluations = 0;
    std::size_t singular_probes = 0;  // probes rejected for a divergent outcome
    std::vector<double> best_params;
    std::vector<double> start_values;  // best value reached from each start
};

struct ClassResult {
    PovmClass cls = PovmClass::Global;
    double value = 0.0;
    Method method = Method::ClosedForm;
    Povm measurement;                      // attaining (or best found) joint POVM
    std::optional<AdaptivePovm> adaptive;  // adaptive classes only
    std::optional<OptimizerDiagnostics> diagnostics;
    // Best unitaries per party for product/adaptive searches; used to seed
    // neighbouring classes.
    std::optional<CMatrix> unitary_a, unitary_b;
};

namespace detail {

inline std::uint64_t start_seed(std::uint64_t seed, PovmClass cls, int start) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(cls) * 1024 + static_cast<std::uint64_t>(start) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct StartPoint {
    std::vector<CMatrix> bases;  // one per searched party
    std::vector<double> params;
};

struct StartRuns {
    std::size_t best = 0;
    std::vector<NelderMeadResult> results;
    std::vector<std::size_t> singular_probes;  // per start
};

// Runs every start (serially or concurrently) and reduces to the best
// value, ties going to the lowest start index. Probes that raise
// SingularOutcome count as infeasible points.
template <class Objective>
StartRuns run_starts(const std::vector<StartPoint> &starts, Objective objective, const OptimizerConfig &cfg) {
    NelderMeadOptions nm;
    nm.ftol = cfg.ftol;
    nm.max_evals = cfg.max_evals;
    nm.initial_step = cfg.initial_step;

    StartRuns runs;
    runs.results.resize(starts.size());
    runs.singular_probes.assign(starts.size(), 0);
    auto run_one = [&](std::size_t k) {
        const StartPoint &sp = starts[k];
        std::size_t &singular = runs.singular_probes[k];
        return nelder_mead(
            [&](const std::vector<double> &x) {
                try {
                    return -objective(sp.bases, x);
                } catch (const Error &e) {
                    if (e.code() != ErrorCode::SingularOutcome) throw;
                    ++singular;
                    return std::numeric_limits<double>::infinity();
                }
            },
            sp.params, nm);
    };

    if (cfg.threads > 1) {
        std::vector<std::future<NelderMeadResult>> futures;
        for (std::size_t k = 0; k < starts.size(); ++k) futures.push_back(std::async(std::launch::async, run_one, k));
        for (std::size_t k = 0; k < starts.size(); ++k) runs.results[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < starts.size(); ++k) runs.results[k] = run_one(k);
    }
    for (std::size_t k = 1; k < runs.results.size(); ++k)
        if (runs.results[k].fx < runs.results[runs.best].fx) runs.best = k;
    if (!std::isfinite(runs.results[runs.best].fx))
        throw Error(ErrorCode::SingularOutcome, "every probed measurement has a divergent outcome");
    return runs;
}

inline OptimizerDiagnostics summarize(const StartRuns &runs) {
    OptimizerDiagnostics d;
    d.starts = static_cast<int>(runs.results.size());
    d.best_start = static_cast<int>(runs.best);
    for (std::size_t k = 0; k < runs.results.size(); ++k) {
        const auto &r = runs.results[k];
        d.evaluations += r.evaluations;
        d.converged_starts += r.converged ? 1 : 0;
        d.singular_probes += runs.singular_probes[k];
        d.start_values.push_back(-r.fx);
    }
    d.best_converged = runs.results[runs.best].converged;
    d.best_params = runs.results[runs.best].x;
    return d;
}

inline std::vector<double> random_params(std::size_t n, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-3.14159265358979323846, 3.14159265358979323846);
    std::vector<double> x(n);
    for (auto &v : x) v = u(rng);
    return x;
}

inline CMatrix search_unitary(const CMatrix &base, std::span<const double> params) {
    return base * unitary_from_params(base.rows(), params);
}

}  // namespace detail

inline ClassResult optimize_product(const CMatrix &rho, const CMatrix &drho, BipartiteDims dims,
                                    const OptimizerConfig &cfg) {
    if (cfg.starts < 1) throw Error(ErrorCode::InvalidArgument, "optimizer needs at least one start");
    const std::size_t na = dims.dim_a * dims.dim_a, nb = dims.dim_b * dims.dim_b;
    const CMatrix rho_a = partial_trace(rho, dims, Party::A), rho_b = partial_trace(rho, dims, Party::B);
    const CMatrix drho_a = partial_trace(drho, dims, Party::A), drho_b = partial_trace(drho, dims, Party::B);

    std::vector<detail::StartPoint> starts;
    starts.push_back({{sld_eigenbasis(rho_a, drho_a), sld_eigenbasis(rho_b, drho_b)}, std::vector<double>(na + nb)});
    starts.push_back({{CMatrix::identity(dims.dim_a), CMatrix::identity(dims.dim_b)}, std::vector<double>(na + nb)});
    for (int k = static_cast<int>(starts.size()); k < cfg.starts; ++k) {
        std::mt19937_64 rng(detail::start_seed(cfg.seed, PovmClass::Product, k));
        starts.push_back({{CMatrix::identity(dims.dim_a), CMatrix::identity(dims.dim_b)}, detail::random_params(na + nb, rng)});
    }
    starts.resize(static_cast<std::size_t>(std::max(1, cfg.starts)));

    auto unitaries = [&](const std::vector<CMatrix> &bases, std::span<const double> x) {
        return std::make_pair(detail::search_unitary(bases[0], x.subspan(0, na)),
                              detail::search_unitary(bases[1], x.subspan(na, nb)));
    };
    const EigDecomposition spectrum = clamped_spectrum(rho);
    auto objective = [&](const std::vector<CMatrix> &bases, const std::vector<double> &x) {
        const auto [ua, ub] = unitaries(bases, x);
        return classical_fi_projective(spectrum, drho, kron(ua, ub), cfg.p_tol);
    };
    const detail::StartRuns runs = detail::run_starts(starts, objective, cfg);

    ClassResult out;
    out.cls = PovmClass::Product;
    out.method = Method::OptimizedLowerBound;
    const auto [ua, ub] = unitaries(starts[runs.best].bases, runs.results[runs.best].x);
    out.measurement = product_povm(projective_from_unitary(ua), projective_from_unitary(ub));
    out.value = classical_fi_projective(spectrum, drho, kron(ua, ub), cfg.p_tol);
    out.unitary_a = ua;
    out.unitary_b = ub;
    out.diagnostics = detail::summarize(runs);
    return out;
}

// Maximizes the derived classical-quantum QFI over the first-stage
// projective measurement. seed_bases are tried (with zero parameters) before
// the SLD basis of the first party's marginal, the computational basis, and
// random starts.
inline ClassResult optimize_adaptive(const CMatrix &rho, const CMatrix &drho, BipartiteDims dims, Direction dir,
                                     const OptimizerConfig &cfg, const std::vector<CMatrix> &seed_bases = {}) {
    if (cfg.starts < 1) throw Error(ErrorCode::InvalidArgument, "optimizer needs at least one start");
    const Party first = first_party(dir);
    const std::size_t d = dims.of(first);
    const std::size_t n = d * d;
    const PovmClass cls = dir == Direction::AtoB ? PovmClass::AdaptiveAtoB : PovmClass::AdaptiveBtoA;

    std::vector<detail::StartPoint> starts;
    for (const auto &b : seed_bases) starts.push_back({{b}, std::vector<double>(n)});
    starts.push_back({{sld_eigenbasis(partial_trace(rho, dims, first), partial_trace(drho, dims, first))},
                      std::vector<double>(n)});
    starts.push_back({{CMatrix::identity(d)}, std::vector<double>(n)});
    for (int k = static_cast<int>(starts.size()); k < cfg.starts; ++k) {
        std::mt19937_64 rng(detail::start_seed(cfg.seed, cls, k));
        starts.push_back({{CMatrix::identity(d)}, detail::random_params(n, rng)});
    }
    starts.resize(static_cast<std::size_t>(std::max<int>(cfg.starts, static_cast<int>(seed_bases.size()))));

    const EigDecomposition spectrum = clamped_spectrum(rho);
    auto objective = [&](const std::vector<CMatrix> &bases, const std::vector<double> &x) {
        return adaptive_fi_given_first(
            cq_state_projective(spectrum, drho, detail::search_unitary(bases[0], x), dims, dir, cfg.p_tol), cfg.p_tol);
    };
    const detail::StartRuns runs = detail::run_starts(starts, objective, cfg);

    ClassResult out;
    out.cls = cls;
    out.method = Method::OptimizedLowerBound;
    const CMatrix u = detail::search_unitary(starts[runs.best].bases[0], runs.results[runs.best].x);
    AdaptivePovm ap{projective_from_unitary(u), {}};
    const CQState cq = cq_state_projective(spectrum, drho, u, dims, dir, cfg.p_tol);
    for (std::size_t i = 0; i < cq.outcomes(); ++i)
        ap.conditionals.push_back(cq.included[i] ? projective_from_unitary(sld_eigenbasis(cq.conditionals[i], cq.dconditionals[i]))
                                                 : computational_basis(cq.conditional_dim()));
    out.value = adaptive_fi_given_first(cq, cfg.p_tol);
    out.measurement = adaptive_embed(ap, dims, dir);
    out.adaptive = std::move(ap);
    (first == Party::A ? out.unitary_a : out.unitary_b) = u;
    out.diagnostics = detail::summarize(runs);
    return out;
}

inline ClassResult optimize_class(const CMatrix &rho, const CMatrix &drho, BipartiteDims dims, PovmClass cls,
                                  const OptimizerConfig &cfg = {}) {
    if (rho.rows() != dims.total()) throw Error(ErrorCode::DimMismatch, "state dimension vs bipartite dims");
    ClassResult out;
    out.cls = cls;
    switch (cls) {
        case PovmClass::LocalA:
        case PovmClass::LocalB: {
            const Party p = cls == PovmClass::LocalA ? Party::A : Party::B;
            const CMatrix r = partial_trace(rho, dims, p), dr = partial_trace(drho, dims, p);
            const SLDResult s = sld(r, dr);
            out.value = s.qfi;
            out.measurement = embed_local(sld_basis_measurement(s), dims, p);
            return out;
        }
        case PovmClass::Global: {
            const SLDResult s = sld(rho, drho);
            out.value = s.qfi;
            out.measurement = sld_basis_measurement(s);
            return out;
        }
        case PovmClass::Product: return optimize_product(rho, drho, dims, cfg);
        case PovmClass::AdaptiveAtoB: return optimize_adaptive(rho, drho, dims, Direction::AtoB, cfg);
        case PovmClass::AdaptiveBtoA: return optimize_adaptive(rho, drho, dims, Direction::BtoA, cfg);
    }
    return out;
}

inline ClassResult optimize_class(const Family &f, double theta, BipartiteDims dims, PovmClass cls,
                                  const OptimizerConfig &cfg = {}) {
    return optimize_class(f.eval(theta).matrix(), f.derivative(theta, cfg.derivative), dims, cls, cfg);
}

struct ChainVerdict {
    std::string relation;  // e.g. "fi_local_a <= fi_product_lb"
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    bool holds = true;
};

struct HierarchyReport {
    double theta = 0.0;
    BipartiteDims dims;
    std::vector<ClassResult> entries;  // in kAllClasses order
    std::vector<ChainVerdict> verdicts;

    const ClassResult &at(PovmClass c) const { return entries.at(static_cast<std::size_t>(c)); }
    double value(PovmClass c) const { return at(c).value; }
    double fi_local_a() const { return value(PovmClass::LocalA); }
    double fi_local_b() const { return value(PovmClass::LocalB); }
    double fi_product() const { return value(PovmClass::Product); }
    double fi_adaptive_ab() const { return value(PovmClass::AdaptiveAtoB); }
    double fi_adaptive_ba() const { return value(PovmClass::AdaptiveBtoA); }
    double fi_global() const { return value(PovmClass::Global); }

    bool chain_holds() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const ChainVerdict &v) { return v.holds; });
    }
    bool optimizer_converged() const {
        return std::all_of(entries.begin(), entries.end(),
                           [](const ClassResult &e) { return !e.diagnostics || e.diagnostics->best_converged; });
    }
};

// Field names used in serialized reports; optimized entries carry _lb.
constexpr std::string_view report_key(PovmClass c) {
    switch (c) {
        case PovmClass::LocalA: return "fi_local_a";
        case PovmClass::LocalB: return "fi_local_b";
        case PovmClass::Product: return "fi_product_lb";
        case PovmClass::AdaptiveAtoB: return "fi_adaptive_ab_lb";
        case PovmClass::AdaptiveBtoA: return "fi_adaptive_ba_lb";
        case PovmClass::Global: return "fi_global";
    }
    return "?";
}

inline std::vector<ChainVerdict> chain_verdicts(const HierarchyReport &r, double slack) {
    const std::pair<PovmClass, PovmClass> chain[] = {
        {PovmClass::LocalA, PovmClass::Product},       {PovmClass::Product, PovmClass::AdaptiveAtoB},
        {PovmClass::AdaptiveAtoB, PovmClass::Global},  {PovmClass::LocalB, PovmClass::Product},
        {PovmClass::Product, PovmClass::AdaptiveBtoA}, {PovmClass::AdaptiveBtoA, PovmClass::Global},
        {PovmClass::Product, PovmClass::Global},
    };
    std::vector<ChainVerdict> out;
    for (const auto &[lo, hi] : chain) {
        ChainVerdict v;
        v.relation = std::string(report_key(lo)) + " <= " + std::string(report_key(hi));
        v.lhs = r.value(lo);
        v.rhs = r.value(hi);
        v.slack = slack;
        v.holds = v.lhs <= v.rhs + slack;
        out.push_back(std::move(v));
    }
    return out;
}

inline HierarchyReport hierarchy_report(const CMatrix &rho, const CMatrix &drho, double theta, BipartiteDims dims,
                                        const OptimizerConfig &cfg = {}) {
    HierarchyReport r;
    r.theta = theta;
    r.dims = dims;
    r.entries.resize(std::size(kAllClasses));
    auto slot = [&](PovmClass c) -> ClassResult & { return r.entries[static_cast<std::size_t>(c)]; };
    slot(PovmClass::LocalA) = optimize_class(rho, drho, dims, PovmClass::LocalA, cfg);
    slot(PovmClass::LocalB) = optimize_class(rho, drho, dims, PovmClass::LocalB, cfg);
    slot(PovmClass::Global) = optimize_class(rho, drho, dims, PovmClass::Global, cfg);
    slot(PovmClass::Product) = optimize_product(rho, drho, dims, cfg);
    // Seeding each adaptive search with the product optimum's first-party
    // basis guarantees adaptive >= product.
    const ClassResult &prod = slot(PovmClass::Product);
    slot(PovmClass::AdaptiveAtoB) = optimize_adaptive(rho, drho, dims, Direction::AtoB, cfg, {*prod.unitary_a});
    slot(PovmClass::AdaptiveBtoA) = optimize_adaptive(rho, drho, dims, Direction::BtoA, cfg, {*prod.unitary_b});
    r.verdicts = chain_verdicts(r, cfg.chain_slack);
    return r;
}

inline HierarchyReport hierarchy_report(const Family &f, double theta, BipartiteDims dims, const OptimizerConfig &cfg = {}) {
    if (f.dims() && *f.dims() != dims) throw Error(ErrorCode::DimMismatch, "family carries different bipartite dims");
    return hierarchy_report(f.eval(theta).matrix(), f.derivative(theta, cfg.derivative), theta, dims, cfg);
}

inline HierarchyReport hierarchy_report(const Family &f, double theta, const OptimizerConfig &cfg = {}) {
    if (!f.dims()) throw Error(ErrorCode::DimMismatch, "family has no bipartite structure");
    return hierarchy_report(f, theta, *f.dims(), cfg);
}

enum class DistributionType { NoInformation, LocallyOwnedA, LocallyOwnedB, LocallyOwned, LocallyInaccessible, FullyShared, Mixed };
enum class Additivity { Additive, Superadditive, Subadditive };

constexpr std::string_view to_string(DistributionType t) {
    switch (t) {
        case DistributionType::NoInformation: return "no information";
        case DistributionType::LocallyOwnedA: return "locally owned by a";
        case DistributionType::LocallyOwnedB: return "locally owned by b";
        case DistributionType::LocallyOwned: return "locally owned";
        case DistributionType::LocallyInaccessible: return "locally inaccessible";
        case DistributionType::FullyShared: return "fully shared";
        case DistributionType::Mixed: return "mixed";
    }
    return "?";
}

constexpr std::string_view to_string(Additivity a) {
    switch (a) {
        case Additivity::Additive: return "additive";
        case Additivity::Superadditive: return "superadditive";
        case Additivity::Subadditive: return "subadditive";
    }
    return "?";
}

struct Distribution {
    DistributionType type = DistributionType::NoInformation;
    Additivity additivity = Additivity::Additive;
};

// Places (F(rho^a), F(rho^b), F(rho)) among the extremal distribution types.
inline Distribution classify(double local_a, double local_b, double global, double tolerance = 1e-6) {
    const double t = tolerance * std::max(1.0, global);
    Distribution d;
    const double sum = local_a + local_b;
    d.additivity = global > sum + t ? Additivity::Superadditive : global < sum - t ? Additivity::Subadditive : Additivity::Additive;
    if (global <= t)
        d.type = DistributionType::NoInformation;
    else if (local_a <= t && local_b <= t)
        d.type = DistributionType::LocallyInaccessible;
    else if (std::abs(local_a - global) <= t && std::abs(local_b - global) <= t)
        d.type = DistributionType::FullyShared;
    else if (std::abs(sum - global) <= t)
        d.type = local_b <= t ? DistributionType::LocallyOwnedA
                 : local_a <= t ? DistributionType::LocallyOwnedB
                                : DistributionType::LocallyOwned;
    else
        d.type = DistributionType::Mixed;
    return d;
}

inline Distribution classify(const HierarchyReport &r, double tolerance = 1e-6) {
    return classify(r.fi_local_a(), r.fi_local_b(), r.fi_global(), tolerance);
}

}  // namespace mifisher
