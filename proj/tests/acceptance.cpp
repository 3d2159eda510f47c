// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mifisher/cli.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace mifisher;
using json = nlohmann::ordered_json;
using mifisher::testing::Rng;
namespace rt = mifisher::testing;

namespace {

constexpr double kPi = std::numbers::pi;
const BipartiteDims k22{2, 2};

// Collects failed checks for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::string notes;

    bool expect(bool ok, const std::string &what) {
        if (!ok) failures.push_back(what);
        return ok;
    }
    bool near(double actual, double expected, double tol, const std::string &what) {
        std::ostringstream s;
        s.precision(12);
        s << what << ": got " << actual << ", want " << expected << " +- " << tol;
        return expect(std::abs(actual - expected) <= tol, s.str());
    }
    bool le(double lhs, double rhs, const std::string &what) {
        std::ostringstream s;
        s.precision(12);
        s << what << ": " << lhs << " > " << rhs;
        return expect(lhs <= rhs, s.str());
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json cli_json(const std::vector<std::string> &args, Check &c) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (!c.expect(code == 0, args[0] + " exited " + std::to_string(code) + ": " + err.str())) return json::object();
    return json::parse(out.str());
}

double value(const json &report, const char *key) { return report["values"][key].get<double>(); }

const char *const kSix[] = {"fi_local_a", "fi_local_b", "fi_product_lb", "fi_adaptive_ab_lb", "fi_adaptive_ba_lb", "fi_global"};

bool is_optimized(const std::string &key) { return key.find("_lb") != std::string::npos; }

void ac1(Check &c) {
    auto t0 = std::chrono::steady_clock::now();
    const json cs = cli_json({"hierarchy", "--family", "builtin:cossin", "--theta", "1.1"}, c);
    if (cs.contains("values")) {
        c.near(value(cs, "fi_local_a"), 1.0, 1e-6, "cossin fi_local_a");
        c.near(value(cs, "fi_local_b"), 1.0, 1e-6, "cossin fi_local_b");
        c.near(value(cs, "fi_global"), 1.0, 1e-6, "cossin fi_global");
    }
    const double t_cs = seconds_since(t0);
    c.le(t_cs, 10.0, "cossin runtime (s)");

    t0 = std::chrono::steady_clock::now();
    const json cc = cli_json({"hierarchy", "--family", "builtin:cc_bernoulli", "--theta", "0.5"}, c);
    if (cc.contains("values"))
        for (const char *k : kSix) c.near(value(cc, k), 4.0, is_optimized(k) ? 1e-3 : 1e-8, std::string("cc_bernoulli ") + k);
    const double t_cc = seconds_since(t0);
    c.le(t_cc, 10.0, "cc_bernoulli runtime (s)");
    char buf[96];
    std::snprintf(buf, sizeof buf, "cossin %.2fs, cc_bernoulli %.2fs", t_cs, t_cc);
    c.notes = buf;
}

void ac2(Check &c) {
    const double theta = kPi / 3.0;
    const Family f = make_builtin(BuiltinName::BellPhase);
    const auto [psi, dpsi] = *f.pure_state(theta);
    const double pure = oracle::qfi_pure(psi, dpsi);
    const CMatrix rho = f.eval(theta).matrix(), drho = f.derivative(theta);
    const double grid_product = oracle::product_grid(rho, drho), grid_ab = oracle::adaptive_ab_grid(rho, drho),
                 grid_ba = oracle::adaptive_ba_grid(rho, drho);
    const bool agree = c.near(grid_product, pure, 1e-3, "product grid vs pure-state QFI") &
                       c.near(grid_ab, pure, 1e-3, "adaptive a->b grid vs pure-state QFI") &
                       c.near(grid_ba, pure, 1e-3, "adaptive b->a grid vs pure-state QFI");
    const double pinned = 1.0;
    c.near(pure, pinned, 1e-12, "oracle value pinned at 1");
    if (!agree) return;

    const json r = cli_json({"hierarchy", "--family", "builtin:bell_phase", "--theta", "1.0471975511965976"}, c);
    if (!r.contains("values")) return;
    c.near(value(r, "fi_local_a"), 0.0, 1e-9, "fi_local_a");
    c.near(value(r, "fi_local_b"), 0.0, 1e-9, "fi_local_b");
    c.near(value(r, "fi_global"), pinned, 1e-8, "fi_global");
    c.expect(r["distribution"]["additivity"] == "superadditive", "additivity verdict " + r["distribution"]["additivity"].dump());
    char buf[128];
    std::snprintf(buf, sizeof buf, "oracle QFI %.10f, grid %.6f/%.6f/%.6f", pure, grid_product, grid_ab, grid_ba);
    c.notes = buf;
}

void ac3(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<json> ex;
    for (const char *name : {"transfer-1", "transfer-2", "transfer-3"}) {
        ex.push_back(cli_json({"example", name}, c));
        if (!ex.back().contains("flow")) return;
        c.expect(ex.back()["pass"] == true, std::string(name) + " expectation checks");
    }
    auto stage = [&](int e, int s, const char *key) { return ex[e]["flow"][s]["report"]["values"][key].get<double>(); };

    c.near(stage(1, 0, "fi_local_a"), 1.0, 1e-8, "transfer-2 input fi_local_a");
    c.near(stage(1, 0, "fi_local_b"), 0.0, 1e-9, "transfer-2 input fi_local_b");
    c.near(stage(1, 0, "fi_global"), 1.0, 1e-8, "transfer-2 input fi_global");
    c.near(stage(1, 1, "fi_local_a"), 0.0, 1e-9, "transfer-2 output fi_local_a");
    c.near(stage(1, 1, "fi_local_b"), 0.0, 1e-9, "transfer-2 output fi_local_b");
    c.near(stage(1, 1, "fi_global"), 1.0, 1e-8, "transfer-2 output fi_global");
    c.expect(ex[1]["classification"] == "locally owned → locally inaccessible", "transfer-2 classification");

    for (const char *k : {"fi_local_a", "fi_local_b", "fi_global"}) {
        c.near(stage(2, 0, k), stage(1, 1, k), 1e-8, std::string("transfer-3 input = transfer-2 output, ") + k);
        c.near(stage(2, 1, k), stage(1, 0, k), 1e-8, std::string("transfer-3 output = transfer-2 input, ") + k);
    }
    c.expect(ex[2]["classification"] == "concentration of Fisher information", "transfer-3 classification");

    c.near(stage(0, 1, "fi_local_a"), stage(0, 0, "fi_local_a"), 1e-9, "transfer-1 marginal a unchanged");
    c.expect(stage(0, 1, "fi_local_b") > stage(0, 0, "fi_local_b") + 1e-6, "transfer-1 marginal b gains");

    const double t = seconds_since(t0);
    c.le(t, 10.0, "runtime (s)");
    char buf[96];
    std::snprintf(buf, sizeof buf, "transfer-1 b: %.6f -> %.6f, %.2fs", stage(0, 0, "fi_local_b"), stage(0, 1, "fi_local_b"), t);
    c.notes = buf;
}

void ac4(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_gap = -1e300, worst_attain = 0.0;
    int checked = 0;
    for (std::size_t d : {2, 3})
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(1000 * d + seed);
            const Family f = rt::random_generator_family(d, rng);
            const double theta = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
            const CMatrix rho = f.eval(theta).matrix(), drho = f.derivative(theta);
            const SLDResult s = sld(rho, drho);
            const std::string tag = "d=" + std::to_string(d) + " seed " + std::to_string(seed);
            for (int k = 0; k < 200; ++k) {
                const Povm m = k % 4 == 0 ? rt::random_projective(d, rng) : rt::random_povm(d, 2 + k % 5, rng);
                const double cfi = classical_fi(rho, drho, m);
                worst_gap = std::max(worst_gap, cfi - s.qfi);
                c.le(cfi, s.qfi + 1e-7, tag + " povm " + std::to_string(k));
                ++checked;
            }
            const double attained = classical_fi(rho, drho, sld_basis_measurement(s));
            worst_attain = std::max(worst_attain, std::abs(attained - s.qfi));
            c.near(attained, s.qfi, 1e-7, tag + " SLD basis");
        }
    const double t = seconds_since(t0);
    c.le(t, 60.0, "runtime (s)");
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d POVMs, max(F_M - F_Q) = %.2e, SLD basis gap %.2e, %.2fs", checked, worst_gap, worst_attain, t);
    c.notes = buf;
}

void ac5(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    const OptimizerConfig cfg;  // 16 starts
    double worst_excess = -1e300;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(2000 + seed);
        // full rank, rank 2 and pure initial states in turn
        const std::size_t rank = seed % 3 == 0 ? 0 : (seed % 3 == 1 ? 2 : 1);
        const Family f = Family::generator(DensityMatrix(rt::random_density(4, rng, rank), k22), rt::random_hermitian(4, rng));
        const double theta = std::uniform_real_distribution<double>(0.0, kPi)(rng);
        const HierarchyReport r = hierarchy_report(f, theta, cfg);
        const std::string tag = "seed " + std::to_string(seed);
        for (const auto &v : chain_verdicts(r, cfg.chain_slack))
            c.expect(v.holds, tag + " chain " + v.relation);
        for (auto cls : {PovmClass::Product, PovmClass::AdaptiveAtoB, PovmClass::AdaptiveBtoA}) {
            worst_excess = std::max(worst_excess, r.value(cls) - r.fi_global());
            c.le(r.value(cls), r.fi_global() + 1e-6, tag + " " + std::string(report_key(cls)) + " vs fi_global");
        }
    }
    const double t = seconds_since(t0);
    c.le(t, 300.0, "runtime (s)");
    char buf[96];
    std::snprintf(buf, sizeof buf, "max(optimized - global) = %.2e, %.1fs", worst_excess, t);
    c.notes = buf;
}

void ac6(Check &c) {
    double worst_route = 0.0, worst_closed = 0.0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(3000 + seed);
        const BipartiteDims dims{2, 2 + seed % 2};
        const Family f = rt::random_generator_family(dims.total(), rng, dims);
        const double theta = std::uniform_real_distribution<double>(0.0, kPi)(rng);
        const Direction dir = seed % 2 == 0 ? Direction::AtoB : Direction::BtoA;
        const Party first = first_party(dir);
        const std::size_t outcomes = 2 + seed % 3;
        AdaptivePovm ap{rt::random_povm(dims.of(first), outcomes, rng), {}};
        for (std::size_t i = 0; i < outcomes; ++i) ap.conditionals.push_back(rt::random_povm(dims.of(other(first)), 2 + i, rng));
        const std::string tag = "seed " + std::to_string(seed);
        const AdaptiveRoutes r = adaptive_fi_explicit(f, theta, ap, dims, dir);
        worst_route = std::max(worst_route, std::abs(r.joint - r.decomposition));
        c.near(r.decomposition, r.joint, 1e-6, tag + " routes");

        const CQState cq = cq_state(f, theta, ap.first, dims, dir);
        const double closed = adaptive_fi_given_first(cq), direct = sld(cq.joint_matrix(), cq.joint_derivative()).qfi;
        worst_closed = std::max(worst_closed, std::abs(closed - direct));
        c.near(closed, direct, 1e-6, tag + " CQ closed form vs SLD");
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "route gap %.2e, closed-form gap %.2e", worst_route, worst_closed);
    c.notes = buf;
}

void ac7(Check &c) {
    const auto t0 = std::chrono::steady_clock::now();
    const OptimizerConfig cfg;
    double worst_closed = -1e300, worst_opt = -1e300;
    for (std::uint64_t k = 0; k < 50; ++k) {
        Rng rng(4000 + k);
        const Family f = rt::random_generator_family(4, rng, k22);
        const double theta = std::uniform_real_distribution<double>(0.0, kPi)(rng);
        QuantumChannel ch = k % 3 == 0 ? local_channel(rt::random_channel(2, 2, rng), k22, Party::A)
                            : k % 3 == 1 ? local_channel(rt::random_channel(2, 3, rng), k22, Party::B)
                                         : local_channel(rt::random_channel(2, 2, rng), rt::random_channel(2, 2, rng));
        const PovmClass cls = kAllClasses[k % std::size(kAllClasses)];
        const Family g = push_forward(f, ch);
        const ClassResult before = optimize_class(f, theta, k22, cls, cfg), after = optimize_class(g, theta, k22, cls, cfg);
        const bool closed = before.method == Method::ClosedForm;
        const double excess = after.value - before.value;
        (closed ? worst_closed : worst_opt) = std::max(closed ? worst_closed : worst_opt, excess);
        c.le(after.value, before.value + (closed ? 1e-8 : 1e-4),
             "triple " + std::to_string(k) + " " + std::string(report_key(cls)));
    }
    const double t = seconds_since(t0);
    c.le(t, 300.0, "runtime (s)");
    char buf[128];
    std::snprintf(buf, sizeof buf, "max increase closed-form %.2e, optimized %.2e, %.1fs", worst_closed, worst_opt, t);
    c.notes = buf;
}

void ac8(Check &c) {
    const OptimizerConfig cfg;
    double worst = 0.0;
    const std::pair<BuiltinName, double> cases[] = {{BuiltinName::BellPhase, kPi / 3.0},
                                                    {BuiltinName::CosSin, 1.1},
                                                    {BuiltinName::CcBernoulli, 0.5},
                                                    {BuiltinName::PlusPhaseTimesZero, kPi / 3.0}};
    for (const auto &[name, theta] : cases) {
        const Family f = make_builtin(name);
        const CMatrix rho = f.eval(theta).matrix(), drho = f.derivative(theta);
        const HierarchyReport r = hierarchy_report(f, theta, cfg);
        const std::pair<PovmClass, double> pairs[] = {{PovmClass::Product, oracle::product_grid(rho, drho)},
                                                      {PovmClass::AdaptiveAtoB, oracle::adaptive_ab_grid(rho, drho)},
                                                      {PovmClass::AdaptiveBtoA, oracle::adaptive_ba_grid(rho, drho)}};
        for (const auto &[cls, grid] : pairs) {
            worst = std::max(worst, std::abs(r.value(cls) - grid));
            c.near(r.value(cls), grid, 1e-3, std::string(to_string(name)) + " " + std::string(report_key(cls)));
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max |optimizer - grid| = %.2e", worst);
    c.notes = buf;
}

void ac9(Check &c) {
    double worst = 0.0, worst_ratio = 1e300;
    auto err = [](const Family &f, double theta, const CMatrix &exact, double step) {
        return max_abs_diff(f.derivative(theta, {DerivativeScheme::Central, step}), exact);
    };
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(5000 + seed);
        const std::size_t d = 2 + seed % 4;
        const Family f = rt::random_generator_family(d, rng);
        const double theta = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
        const CMatrix exact = f.derivative(theta, {DerivativeScheme::Analytic, 0.0});
        const std::string tag = "seed " + std::to_string(seed);
        const double e5 = err(f, theta, exact, 1e-5);
        worst = std::max(worst, e5);
        c.le(e5, 1e-7, tag + " error at step 1e-5");
        const double ratio = err(f, theta, exact, 1e-2) / err(f, theta, exact, 5e-3);
        worst_ratio = std::min(worst_ratio, ratio);
        c.expect(ratio >= 3.5, tag + " halving ratio " + std::to_string(ratio));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max error %.2e at 1e-5, min halving ratio %.3f", worst, worst_ratio);
    c.notes = buf;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char *, std::function<void(Check &)>>> criteria = {
        {"AC1 fully shared examples", ac1},      {"AC2 locally inaccessible example", ac2},
        {"AC3 transfer suite", ac3},             {"AC4 Braunstein-Caves bound", ac4},
        {"AC5 hierarchy chain", ac5},            {"AC6 adaptive route equality", ac6},
        {"AC7 monotonicity under local channels", ac7}, {"AC8 grid oracle cross-check", ac8},
        {"AC9 finite-difference hygiene", ac9}};
    int failed = 0;
    for (const auto &[name, fn] : criteria) {
        Check c;
        try {
            fn(c);
        } catch (const std::exception &e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        const bool pass = c.failures.empty();
        failed += !pass;
        std::printf("%s %s%s%s\n", pass ? "PASS" : "FAIL", name, c.notes.empty() ? "" : " | ", c.notes.c_str());
        for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) std::printf("    %s\n", c.failures[i].c_str());
        if (c.failures.size() > 10) std::printf("    ... %zu more\n", c.failures.size() - 10);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
