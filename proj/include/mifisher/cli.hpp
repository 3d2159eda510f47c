#pragma once

// Command-line front end. Exit codes: 0 ok, 2 invalid input, 3 divergent
// Fisher information (SingularOutcome), 1 anything unexpected.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mifisher/io.hpp"

namespace mifisher::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSingular = 3;

struct Options {
    std::string family, povm, chain, config, out, format, example;
    std::optional<double> theta, theta_min, theta_max, fd_step;
    std::optional<int> steps, starts, threads;
    std::optional<std::uint64_t> seed;
};

// "builtin:NAME" or a path to a family document.
inline Family load_family(const std::string &spec) {
    constexpr std::string_view prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) {
        io::json j = {{"kind", "builtin"}, {"name", spec.substr(prefix.size())}};
        return io::parse_family(j, spec);
    }
    return io::parse_family(io::load_json_file(spec), spec);
}

inline io::RunConfig resolve_config(const Options &o) {
    io::RunConfig cfg;
    if (!o.config.empty()) cfg = io::parse_config(io::load_json_file(o.config), cfg, o.config);
    if (o.fd_step) {
        if (!(*o.fd_step > 0.0)) throw io::SpecError("--fd-step must be positive");
        cfg.fd_step = *o.fd_step;
    }
    if (o.starts) {
        if (*o.starts < 1) throw io::SpecError("--starts must be positive");
        cfg.starts = *o.starts;
    }
    if (o.threads) {
        if (*o.threads < 1) throw io::SpecError("--threads must be positive");
        cfg.threads = *o.threads;
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.format.empty()) cfg.format = io::parse_format(o.format, "--format");
    return cfg;
}

inline double need_theta(const Options &o) {
    if (!o.theta) throw io::SpecError("--theta is required");
    return *o.theta;
}

inline Family need_family(const Options &o) {
    if (o.family.empty()) throw io::SpecError("--family is required");
    return load_family(o.family);
}

inline BipartiteDims need_dims(const Family &f) {
    if (!f.dims()) throw io::SpecError("this command needs a bipartite family (give \"dims\")");
    return *f.dims();
}

inline std::string dump(const io::ojson &j) { return j.dump(2) + "\n"; }

inline std::string cmd_qfi(const Options &o, const io::RunConfig &cfg) {
    const Family f = need_family(o);
    const double theta = need_theta(o);
    DerivativeOptions d;
    d.step = cfg.fd_step;
    const SLDResult s = sld(f.eval(theta), f.derivative(theta, d));
    if (cfg.format == io::OutputFormat::Csv) return "theta,qfi,support_rank\n" + io::fmt(theta) + "," + io::fmt(s.qfi) + "," + std::to_string(s.support_rank) + "\n";
    io::ojson j = io::ojson::object();
    j["theta"] = io::num(theta);
    j["qfi"] = io::num(s.qfi);
    j["support_rank"] = s.support_rank;
    return dump(j);
}

inline std::string cmd_cfi(const Options &o, const io::RunConfig &cfg) {
    const Family f = need_family(o);
    const double theta = need_theta(o);
    if (o.povm.empty()) throw io::SpecError("--povm is required");
    const Povm m = io::parse_povm(io::load_json_file(o.povm), o.povm);
    if (m.dim() != f.dim()) throw io::SpecError(o.povm + ": POVM dimension does not match the family");
    const PovmValidation v = validate(m);
    if (!v.pass())
        throw io::SpecError(o.povm + ": not a POVM (hermiticity " + io::fmt(v.hermiticity_residual) + ", positivity " +
                            io::fmt(v.positivity_residual) + ", completeness " + io::fmt(v.completeness_residual) + ")");
    DerivativeOptions d;
    d.step = cfg.fd_step;
    const DensityMatrix rho = f.eval(theta);
    const CMatrix drho = f.derivative(theta, d);
    const double cf = classical_fi(rho, drho, m, cfg.p_tol);
    const double q = sld(rho, drho).qfi;
    if (cfg.format == io::OutputFormat::Csv) return "theta,classical_fi,qfi\n" + io::fmt(theta) + "," + io::fmt(cf) + "," + io::fmt(q) + "\n";
    io::ojson j = io::ojson::object();
    j["theta"] = io::num(theta);
    j["classical_fi"] = io::num(cf);
    j["qfi"] = io::num(q);
    j["outcomes"] = m.size();
    return dump(j);
}

inline std::string cmd_hierarchy(const Options &o, const io::RunConfig &cfg) {
    const Family f = need_family(o);
    const double theta = need_theta(o);
    const HierarchyReport r = hierarchy_report(f, theta, need_dims(f), cfg.optimizer());
    if (cfg.format == io::OutputFormat::Csv) return io::csv_header() + "\n" + io::fmt(theta) + io::csv_values(r) + "\n";
    return dump(io::report_json(r, cfg.classify_tol));
}

inline std::string cmd_sweep(const Options &o, const io::RunConfig &cfg) {
    const Family f = need_family(o);
    const BipartiteDims dims = need_dims(f);
    if (!o.theta_min || !o.theta_max || !o.steps) throw io::SpecError("--theta-min, --theta-max and --steps are required");
    if (*o.steps < 2) throw io::SpecError("--steps must be at least 2");
    if (!(*o.theta_min < *o.theta_max)) throw io::SpecError("--theta-min must be below --theta-max");
    const double lo = *o.theta_min, hi = *o.theta_max;
    const int n = *o.steps;

    std::ostringstream csv;
    csv << io::csv_header() << "\n";
    io::ojson rows = io::ojson::array();
    for (int k = 0; k < n; ++k) {
        const double theta = k == n - 1 ? hi : lo + (hi - lo) * k / (n - 1);
        io::ojson row = io::ojson::object();
        row["theta"] = io::num(theta);
        try {
            const HierarchyReport r = hierarchy_report(f, theta, dims, cfg.optimizer());
            csv << io::fmt(theta) << io::csv_values(r) << "\n";
            for (auto c : kAllClasses) row[std::string(report_key(c))] = io::num(r.value(c));
            row["chain_holds"] = r.chain_holds();
            row["status"] = "ok";
        } catch (const Error &e) {
            if (e.code() != ErrorCode::SingularOutcome) throw;
            csv << io::fmt(theta);
            for (std::size_t i = 0; i < std::size(kAllClasses); ++i) csv << ",singular";
            csv << "\n";
            for (auto c : kAllClasses) row[std::string(report_key(c))] = nullptr;
            row["chain_holds"] = nullptr;
            row["status"] = "singular";
        }
        rows.push_back(std::move(row));
    }
    if (cfg.format == io::OutputFormat::Csv) return csv.str();
    io::ojson j = io::ojson::object();
    j["theta_min"] = io::num(lo);
    j["theta_max"] = io::num(hi);
    j["steps"] = n;
    j["rows"] = rows;
    return dump(j);
}

inline std::string flow_csv(const FlowTrace &t) {
    std::string s = "step,label," + io::csv_header() + "\n";
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        std::string label = t.steps[i].label;
        std::replace(label.begin(), label.end(), ',', ';');
        s += std::to_string(i) + "," + label + "," + io::fmt(t.steps[i].report.theta) + io::csv_values(t.steps[i].report) + "\n";
    }
    return s;
}

inline std::string cmd_example(const Options &o, const io::RunConfig &cfg) {
    if (std::find(std::begin(kExampleIds), std::end(kExampleIds), o.example) == std::end(kExampleIds)) {
        std::string names;
        for (auto id : kExampleIds) names += (names.empty() ? "" : ", ") + std::string(id);
        throw io::SpecError("unknown example '" + o.example + "' (" + names + ")");
    }
    const PaperExample ex = make_example(o.example, o.theta);
    const ExampleOutcome out = run_example(ex, cfg.optimizer());
    if (cfg.format == io::OutputFormat::Csv) return flow_csv(out.trace);
    return dump(io::example_json(ex, out, cfg.classify_tol));
}

inline std::string cmd_flow(const Options &o, const io::RunConfig &cfg) {
    const Family f = need_family(o);
    const double theta = need_theta(o);
    const BipartiteDims dims = need_dims(f);
    std::vector<QuantumChannel> chain;
    if (!o.chain.empty()) chain = io::parse_chain(io::load_json_file(o.chain), dims, o.chain);
    const FlowTrace t = flow_trace(f, theta, chain, cfg.optimizer());
    if (cfg.format == io::OutputFormat::Csv) return flow_csv(t);
    return dump(io::flow_json(t, cfg.classify_tol));
}

// args excludes the program name.
inline int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Measurement-induced Fisher information for bipartite quantum states", "mifisher"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--config", o.config, "JSON run configuration");
        sub->add_option("--fd-step", o.fd_step, "finite-difference step (default 1e-5)");
        sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", o.out, "write the report to a file instead of stdout");
    };
    auto optimizer = [&](CLI::App *sub) {
        sub->add_option("--starts", o.starts, "optimizer starts per class (default 16)");
        sub->add_option("--seed", o.seed, "optimizer seed (default 0)");
        sub->add_option("--threads", o.threads, "worker threads for optimizer starts (default 1)");
    };
    auto family = [&](CLI::App *sub) {
        sub->add_option("--family", o.family, "family document path, or builtin:NAME");
    };

    auto *qfi_cmd = app.add_subcommand("qfi", "quantum Fisher information of a family at theta");
    family(qfi_cmd);
    qfi_cmd->add_option("--theta", o.theta);
    common(qfi_cmd);

    auto *cfi_cmd = app.add_subcommand("cfi", "classical Fisher information of a fixed POVM");
    family(cfi_cmd);
    cfi_cmd->add_option("--povm", o.povm, "POVM document path");
    cfi_cmd->add_option("--theta", o.theta);
    common(cfi_cmd);

    auto *hier_cmd = app.add_subcommand("hierarchy", "six-class Fisher-information report at theta");
    family(hier_cmd);
    hier_cmd->add_option("--theta", o.theta);
    common(hier_cmd);
    optimizer(hier_cmd);

    auto *sweep_cmd = app.add_subcommand("sweep", "hierarchy reports over an evenly spaced theta range");
    family(sweep_cmd);
    sweep_cmd->add_option("--theta-min", o.theta_min);
    sweep_cmd->add_option("--theta-max", o.theta_max);
    sweep_cmd->add_option("--steps", o.steps, "number of theta values, at least 2");
    common(sweep_cmd);
    optimizer(sweep_cmd);

    auto *example_cmd = app.add_subcommand("example", "run a named distribution or transfer example");
    example_cmd->add_option("name", o.example, "dist-inaccessible, dist-cc, dist-cossin, transfer-1, transfer-2, transfer-3")
        ->required();
    example_cmd->add_option("--theta", o.theta, "override the example's theta");
    common(example_cmd);
    optimizer(example_cmd);

    auto *flow_cmd = app.add_subcommand("flow", "hierarchy reports along a channel chain");
    family(flow_cmd);
    flow_cmd->add_option("--chain", o.chain, "chain document path (omit for an empty chain)");
    flow_cmd->add_option("--theta", o.theta);
    common(flow_cmd);
    optimizer(flow_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        const io::RunConfig cfg = resolve_config(o);
        std::string text;
        if (qfi_cmd->parsed()) text = cmd_qfi(o, cfg);
        else if (cfi_cmd->parsed()) text = cmd_cfi(o, cfg);
        else if (hier_cmd->parsed()) text = cmd_hierarchy(o, cfg);
        else if (sweep_cmd->parsed()) text = cmd_sweep(o, cfg);
        else if (example_cmd->parsed()) text = cmd_example(o, cfg);
        else text = cmd_flow(o, cfg);

        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream f(o.out, std::ios::binary);
            if (!f) throw io::SpecError(o.out + ": cannot write");
            f << text;
        }
        return kExitOk;
    } catch (const io::SpecError &e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const io::json::exception &e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::SingularOutcome ? kExitSingular : kExitValidation;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace mifisher::cli
