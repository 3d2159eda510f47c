#pragma once

// JSON encodings: family / POVM / chain / run-config specs in, reports out.
// Complex matrices are arrays of rows, each row an array of [re, im] pairs.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mifisher/channels.hpp"
#include "mifisher/fisher.hpp"
#include "mifisher/hierarchy.hpp"
#include "mifisher/presets.hpp"

namespace mifisher::io {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Malformed input document (exit code 2 at the CLI).
class SpecError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string &where, const std::string &what) {
    if (!ok) throw SpecError(where + ": " + what);
}

inline void check_keys(const json &j, const std::string &where, std::initializer_list<const char *> allowed) {
    require(j.is_object(), where, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[key, value] : j.items()) require(ok.count(key) > 0, where, "unknown key '" + key + "'");
    if (j.contains("version"))
        require(j["version"].is_number_integer() && j["version"].get<int>() == kSchemaVersion, where,
                "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
}

inline const json &field(const json &j, const std::string &where, const char *key) {
    require(j.contains(key), where, std::string("missing key '") + key + "'");
    return j[key];
}

inline double number(const json &j, const std::string &where) {
    require(j.is_number(), where, "expected a number");
    const double v = j.get<double>();
    require(std::isfinite(v), where, "non-finite number");
    return v;
}

inline std::size_t positive_int(const json &j, const std::string &where) {
    require(j.is_number_integer() && j.get<long long>() > 0, where, "expected a positive integer");
    return static_cast<std::size_t>(j.get<long long>());
}

}  // namespace detail

inline CMatrix parse_matrix(const json &j, const std::string &where = "matrix") {
    using detail::require;
    require(j.is_array() && !j.empty(), where, "expected a non-empty array of rows");
    const std::size_t rows = j.size();
    require(j[0].is_array() && !j[0].empty(), where, "row 0 must be a non-empty array");
    const std::size_t cols = j[0].size();
    CMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rw = where + "[" + std::to_string(r) + "]";
        require(j[r].is_array() && j[r].size() == cols, rw, "ragged row (expected " + std::to_string(cols) + " entries)");
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string cw = rw + "[" + std::to_string(c) + "]";
            const json &e = j[r][c];
            require(e.is_array() && e.size() == 2, cw, "expected a [re, im] pair");
            m(r, c) = cplx(detail::number(e[0], cw), detail::number(e[1], cw));
        }
    }
    return m;
}

inline json matrix_to_json(const CMatrix &m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::optional<BipartiteDims> parse_dims(const json &j, const std::string &where) {
    if (!j.contains("dims")) return std::nullopt;
    const json &d = j["dims"];
    detail::require(d.is_array() && d.size() == 2, where + ".dims", "expected [dim_a, dim_b]");
    return BipartiteDims{detail::positive_int(d[0], where + ".dims[0]"), detail::positive_int(d[1], where + ".dims[1]")};
}

inline Family parse_family(const json &j, const std::string &where = "family") {
    using detail::require;
    require(j.is_object(), where, "expected an object");
    const json &kind_j = detail::field(j, where, "kind");
    require(kind_j.is_string(), where + ".kind", "expected a string");
    const std::string kind = kind_j.get<std::string>();
    const auto dims = parse_dims(j, where);

    if (kind == "builtin") {
        detail::check_keys(j, where, {"version", "kind", "name", "dims", "factors"});
        const json &name_j = detail::field(j, where, "name");
        require(name_j.is_string(), where + ".name", "expected a string");
        const BuiltinName name = builtin_from_string(name_j.get<std::string>());
        const Family f = [&] {
            if (name != BuiltinName::ProductOf) {
                require(!j.contains("factors"), where, "'factors' only applies to product_of");
                return Family::builtin(name);
            }
            const json &factors = detail::field(j, where, "factors");
            require(factors.is_array() && factors.size() == 2, where + ".factors", "expected two factor families");
            return Family::product_of(parse_family(factors[0], where + ".factors[0]"),
                                      parse_family(factors[1], where + ".factors[1]"));
        }();
        if (dims) {
            require(f.dims().has_value() && f.dims()->dim_a == dims->dim_a && f.dims()->dim_b == dims->dim_b, where + ".dims",
                    "does not match the builtin family");
        }
        return f;
    }
    if (kind == "generator") {
        detail::check_keys(j, where, {"version", "kind", "dims", "rho0", "generator"});
        const CMatrix rho0 = parse_matrix(detail::field(j, where, "rho0"), where + ".rho0");
        const CMatrix g = parse_matrix(detail::field(j, where, "generator"), where + ".generator");
        if (dims) require(dims->total() == rho0.rows(), where + ".dims", "product does not match the matrix size");
        return Family::generator(DensityMatrix(rho0, dims), g);
    }
    if (kind == "grid") {
        detail::check_keys(j, where, {"version", "kind", "dims", "points"});
        const json &pts = detail::field(j, where, "points");
        require(pts.is_array(), where + ".points", "expected an array");
        std::vector<GridPoint> points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string pw = where + ".points[" + std::to_string(i) + "]";
            detail::check_keys(pts[i], pw, {"theta", "rho"});
            points.push_back({detail::number(detail::field(pts[i], pw, "theta"), pw + ".theta"),
                              parse_matrix(detail::field(pts[i], pw, "rho"), pw + ".rho")});
            if (dims) require(dims->total() == points.back().rho.rows(), pw + ".rho", "size does not match dims");
        }
        return Family::grid(std::move(points), dims);
    }
    throw SpecError(where + ".kind: unknown kind '" + kind + "' (builtin, generator, grid)");
}

inline Povm parse_povm(const json &j, const std::string &where = "povm") {
    const json *elements = &j;
    if (j.is_object()) {
        detail::check_keys(j, where, {"version", "elements"});
        elements = &detail::field(j, where, "elements");
    }
    detail::require(elements->is_array() && !elements->empty(), where, "expected a non-empty list of matrices");
    std::vector<CMatrix> els;
    for (std::size_t i = 0; i < elements->size(); ++i)
        els.push_back(parse_matrix((*elements)[i], where + "[" + std::to_string(i) + "]"));
    return Povm(std::move(els));
}

inline Party parse_party(const json &j, const std::string &where) {
    detail::require(j.is_string() && (j == "a" || j == "b"), where, "expected \"a\" or \"b\"");
    return j == "a" ? Party::A : Party::B;
}

// Local operations (depolarizing, kraus with "party") are embedded using the
// family's bipartite dims.
inline QuantumChannel parse_channel(const json &j, BipartiteDims dims, const std::string &where = "channel") {
    using detail::require;
    require(j.is_object(), where, "expected an object");
    const json &type_j = detail::field(j, where, "type");
    require(type_j.is_string(), where + ".type", "expected a string");
    const std::string type = type_j.get<std::string>();
    std::optional<std::string> label;
    if (j.contains("label")) {
        require(j["label"].is_string(), where + ".label", "expected a string");
        label = j["label"].get<std::string>();
    }
    auto relabel = [&](QuantumChannel ch) { return label ? QuantumChannel(ch.kraus(), *label) : ch; };

    if (type == "cnot") {
        detail::check_keys(j, where, {"type", "label"});
        require(dims.dim_a == 2 && dims.dim_b == 2, where, "cnot needs a two-qubit system");
        return relabel(cnot());
    }
    if (type == "depolarizing") {
        detail::check_keys(j, where, {"type", "label", "q", "party"});
        const double q = detail::number(detail::field(j, where, "q"), where + ".q");
        const Party party = parse_party(detail::field(j, where, "party"), where + ".party");
        require(dims.of(party) == 2, where, "depolarizing acts on a qubit party");
        QuantumChannel local = QuantumChannel::depolarizing(q);
        return QuantumChannel(local_channel(local, dims, party).kraus(),
                              label.value_or(local.label() + "_" + std::string(to_string(party))));
    }
    if (type == "conditional_unitary") {
        detail::check_keys(j, where, {"type", "label", "unitaries", "control_basis"});
        const json &us = detail::field(j, where, "unitaries");
        require(us.is_array() && !us.empty(), where + ".unitaries", "expected a non-empty list of matrices");
        std::vector<CMatrix> unitaries;
        for (std::size_t i = 0; i < us.size(); ++i)
            unitaries.push_back(parse_matrix(us[i], where + ".unitaries[" + std::to_string(i) + "]"));
        std::optional<CMatrix> basis;
        if (j.contains("control_basis")) basis = parse_matrix(j["control_basis"], where + ".control_basis");
        QuantumChannel ch = conditional_unitary(unitaries, basis);
        require(ch.dim_in() == dims.total(), where, "control/target sizes do not match the family dims");
        return relabel(ch);
    }
    if (type == "kraus") {
        detail::check_keys(j, where, {"type", "label", "operators", "party"});
        const json &ops = detail::field(j, where, "operators");
        require(ops.is_array() && !ops.empty(), where + ".operators", "expected a non-empty list of matrices");
        std::vector<CMatrix> ks;
        for (std::size_t i = 0; i < ops.size(); ++i)
            ks.push_back(parse_matrix(ops[i], where + ".operators[" + std::to_string(i) + "]"));
        QuantumChannel ch(std::move(ks), label.value_or("kraus"));
        if (j.contains("party")) {
            const Party party = parse_party(j["party"], where + ".party");
            return QuantumChannel(local_channel(ch, dims, party).kraus(), label.value_or("kraus_" + std::string(to_string(party))));
        }
        return ch;
    }
    throw SpecError(where + ".type: unknown channel type '" + type + "' (cnot, depolarizing, conditional_unitary, kraus)");
}

inline std::vector<QuantumChannel> parse_chain(const json &j, BipartiteDims dims, const std::string &where = "chain") {
    const json *list = &j;
    if (j.is_object()) {
        detail::check_keys(j, where, {"version", "chain"});
        list = &detail::field(j, where, "chain");
    }
    detail::require(list->is_array(), where, "expected a list of channels");
    std::vector<QuantumChannel> chain;
    for (std::size_t i = 0; i < list->size(); ++i)
        chain.push_back(parse_channel((*list)[i], dims, where + "[" + std::to_string(i) + "]"));
    return chain;
}

enum class OutputFormat { Json, Csv };

struct RunConfig {
    double fd_step = 1e-5;
    int starts = 16;
    std::uint64_t seed = 0;
    int threads = 1;
    OutputFormat format = OutputFormat::Json;
    double chain_slack = 1e-6;
    double p_tol = kProbabilityFloor;
    double classify_tol = 1e-6;

    OptimizerConfig optimizer() const {
        OptimizerConfig c;
        c.starts = starts;
        c.seed = seed;
        c.threads = threads;
        c.derivative.step = fd_step;
        c.p_tol = p_tol;
        c.chain_slack = chain_slack;
        return c;
    }
};

inline OutputFormat parse_format(const std::string &s, const std::string &where) {
    if (s == "json") return OutputFormat::Json;
    if (s == "csv") return OutputFormat::Csv;
    throw SpecError(where + ": format must be json or csv");
}

// Applies a config document on top of `base`. Every key is optional; unknown
// keys are rejected.
inline RunConfig parse_config(const json &j, RunConfig base = {}, const std::string &where = "config") {
    using detail::require;
    detail::check_keys(j, where, {"version", "fd_step", "starts", "seed", "threads", "format", "tolerances"});
    auto positive = [&](const char *key) {
        const double v = detail::number(j[key], where + "." + key);
        require(v > 0.0, where + "." + key, "must be positive");
        return v;
    };
    if (j.contains("fd_step")) base.fd_step = positive("fd_step");
    if (j.contains("starts")) base.starts = static_cast<int>(detail::positive_int(j["starts"], where + ".starts"));
    if (j.contains("threads")) base.threads = static_cast<int>(detail::positive_int(j["threads"], where + ".threads"));
    if (j.contains("seed")) {
        require(j["seed"].is_number_unsigned(), where + ".seed", "expected a non-negative integer");
        base.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("format")) {
        require(j["format"].is_string(), where + ".format", "expected a string");
        base.format = parse_format(j["format"].get<std::string>(), where + ".format");
    }
    if (j.contains("tolerances")) {
        const json &t = j["tolerances"];
        const std::string tw = where + ".tolerances";
        detail::check_keys(t, tw, {"chain_slack", "p_tol", "classify"});
        auto tpos = [&](const char *key) {
            const double v = detail::number(t[key], tw + "." + key);
            require(v > 0.0, tw + "." + key, "must be positive");
            return v;
        };
        if (t.contains("chain_slack")) base.chain_slack = tpos("chain_slack");
        if (t.contains("p_tol")) base.p_tol = tpos("p_tol");
        if (t.contains("classify")) base.classify_tol = tpos("classify");
    }
    return base;
}

inline json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SpecError(path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw SpecError(path + ": " + e.what());
    }
}

// ---- output ----

// Rounds to 12 significant digits; -0 and non-finite values are normalized.
inline ojson num(double v) {
    if (!std::isfinite(v)) return nullptr;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    const double r = std::strtod(buf, nullptr);
    return r == 0.0 ? 0.0 : r;
}

inline std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

inline ojson values_json(const HierarchyReport &r) {
    ojson o = ojson::object();
    for (auto c : kAllClasses) o[std::string(report_key(c))] = num(r.value(c));
    return o;
}

inline ojson report_json(const HierarchyReport &r, double classify_tol = 1e-6) {
    ojson o = ojson::object();
    o["theta"] = num(r.theta);
    o["dims"] = {r.dims.dim_a, r.dims.dim_b};
    o["values"] = values_json(r);

    ojson methods = ojson::object();
    for (auto c : kAllClasses) methods[std::string(report_key(c))] = std::string(to_string(r.at(c).method));
    o["methods"] = methods;

    ojson verdicts = ojson::array();
    for (const auto &v : r.verdicts) {
        ojson e = ojson::object();
        e["relation"] = v.relation;
        e["lhs"] = num(v.lhs);
        e["rhs"] = num(v.rhs);
        e["slack"] = num(v.slack);
        e["holds"] = v.holds;
        verdicts.push_back(std::move(e));
    }
    o["verdicts"] = verdicts;
    o["chain_holds"] = r.chain_holds();

    const Distribution d = classify(r, classify_tol);
    o["distribution"] = {{"type", std::string(to_string(d.type))}, {"additivity", std::string(to_string(d.additivity))}};

    ojson opt = ojson::object();
    for (auto c : kAllClasses) {
        const auto &diag = r.at(c).diagnostics;
        if (!diag) continue;
        ojson e = ojson::object();
        e["starts"] = diag->starts;
        e["best_start"] = diag->best_start;
        e["converged_starts"] = diag->converged_starts;
        e["best_converged"] = diag->best_converged;
        e["evaluations"] = diag->evaluations;
        e["singular_probes"] = diag->singular_probes;
        opt[std::string(report_key(c))] = std::move(e);
    }
    o["optimizer"] = opt;
    return o;
}

inline ojson flow_json(const FlowTrace &t, double classify_tol = 1e-6) {
    ojson steps = ojson::array();
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        ojson s = ojson::object();
        s["step"] = i;
        s["label"] = t.steps[i].label;
        s["report"] = report_json(t.steps[i].report, classify_tol);
        steps.push_back(std::move(s));
    }
    ojson o = ojson::object();
    o["theta"] = t.steps.empty() ? ojson(nullptr) : num(t.steps.front().report.theta);
    o["steps"] = steps;
    return o;
}

inline ojson example_json(const PaperExample &ex, const ExampleOutcome &out, double classify_tol = 1e-6) {
    ojson o = ojson::object();
    o["example"] = ex.id;
    o["description"] = ex.description;
    o["theta"] = num(ex.theta);
    o["flow"] = flow_json(out.trace, classify_tol)["steps"];
    o["classification"] = out.classification;
    o["expected_classification"] = ex.expected_classification;
    ojson checks = ojson::array();
    for (const auto &c : out.checks) {
        ojson e = ojson::object();
        e["check"] = c.description;
        e["expected"] = num(c.expected);
        e["actual"] = num(c.actual);
        e["tolerance"] = num(c.tolerance);
        e["pass"] = c.pass;
        checks.push_back(std::move(e));
    }
    o["checks"] = checks;
    o["pass"] = out.pass;
    return o;
}

inline std::string csv_header(std::string_view first = "theta") {
    std::string h(first);
    for (auto c : kAllClasses) h += "," + std::string(report_key(c));
    return h;
}

inline std::string csv_values(const HierarchyReport &r) {
    std::string s;
    for (auto c : kAllClasses) s += "," + fmt(r.value(c));
    return s;
}

}  // namespace mifisher::io
