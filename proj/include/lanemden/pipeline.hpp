#pragma once

// Subcommand pipelines: each run writes field CSVs and a JSON manifest into one directory.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "lanemden/config.hpp"
#include "lanemden/io.hpp"

namespace lanemden {

inline constexpr int schema_version = 1;

enum class Subcommand { eigen, torsion, construct, verify, solve, uniqueness, boundedness, report };

inline const std::vector<std::pair<Subcommand, std::string>>& subcommand_names() {
    static const std::vector<std::pair<Subcommand, std::string>> names{
        {Subcommand::eigen, "eigen"},         {Subcommand::torsion, "torsion"},
        {Subcommand::construct, "construct"}, {Subcommand::verify, "verify"},
        {Subcommand::solve, "solve"},         {Subcommand::uniqueness, "uniqueness"},
        {Subcommand::boundedness, "boundedness"}, {Subcommand::report, "report"}};
    return names;
}

inline std::string to_string(Subcommand s) {
    for (const auto& [k, name] : subcommand_names())
        if (k == s) return name;
    throw InternalError("unknown subcommand");
}

inline Subcommand subcommand_from_string(const std::string& s) {
    for (const auto& [k, name] : subcommand_names())
        if (name == s) return k;
    throw ConfigError("unknown subcommand '" + s + "'");
}

namespace exit_status {
inline constexpr int ok = 0;
inline constexpr int config = 2;
inline constexpr int certificate = 3;
inline constexpr int convergence = 4;
}  // namespace exit_status

/// Every error maps to exactly one status; unknown failures count as non-convergence.
inline int exit_code_for(const std::exception& err) {
    if (dynamic_cast<const ConfigError*>(&err)) return exit_status::config;
    if (dynamic_cast<const PreconditionError*>(&err)) return exit_status::config;
    if (dynamic_cast<const CertificateError*>(&err)) return exit_status::certificate;
    return exit_status::convergence;
}

inline std::string error_kind(const std::exception& err) {
    if (dynamic_cast<const RecipeMismatchError*>(&err)) return "recipe_mismatch";
    if (dynamic_cast<const ConfigError*>(&err)) return "config";
    if (dynamic_cast<const PreconditionError*>(&err)) return "precondition";
    if (dynamic_cast<const CertificateError*>(&err)) return "certificate";
    if (dynamic_cast<const IterationLimitError*>(&err)) return "iteration_limit";
    if (dynamic_cast<const SingularityError*>(&err)) return "singularity";
    if (dynamic_cast<const EnclosureError*>(&err)) return "enclosure";
    return "internal";
}

/// LE_THREADS caps the worker count; unset means the hardware concurrency.
inline unsigned resolve_threads(const char* env) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (!env) return hw;
    const std::string s(env);
    unsigned v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || v == 0)
        throw ConfigError("LE_THREADS must be a positive integer, got '" + s + "'");
    return std::min(v, hw);
}

inline nlohmann::json to_json(const EigenPair& e) {
    nlohmann::json j{{"lambda", e.lambda}, {"p", e.p}, {"bc", to_string(e.bc)}, {"grid", grid_to_json(e.phi.grid())},
                     {"residual", e.residual}, {"iterations", e.iterations}, {"analytic", e.analytic}};
    if (e.bc == BoundaryCondition::dirichlet_zero) j["c0"] = e.c0;
    else j["mu"] = e.mu;
    return j;
}

inline nlohmann::json to_json(const TorsionResult& t) {
    return {{"p", t.p},
            {"bc", to_string(t.bc)},
            {"sup", t.field().sup_norm()},
            {"comparison_constant", t.comparison_constant},
            {"residual", t.solve.residual},
            {"iterations", t.solve.iterations},
            {"grid", grid_to_json(t.field().grid())}};
}

inline nlohmann::json to_json(const SingularTorsionResult& z) {
    return {{"p", z.p},
            {"gamma", z.gamma},
            {"sup", z.field().sup_norm()},
            {"c1", z.c1},
            {"residual", z.solve.residual},
            {"iterations", z.solve.iterations}};
}

inline nlohmann::json to_json(const BoundednessReport& r) {
    return {{"p", r.p},           {"gamma", r.gamma},         {"dimension", r.dimension},
            {"bounded_regime", r.bounded_regime},       {"verdict", r.verdict()},   {"spacings", r.spacings},
            {"sup_norms", r.sup_norms}, {"drift", r.drift}};
}

struct RunOptions {
    Subcommand command = Subcommand::solve;
    std::filesystem::path out = "run";
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

struct RunResult {
    nlohmann::json manifest;
    int exit_code = exit_status::ok;
};

namespace detail {

inline std::vector<std::string> split_names(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

/// Writes `<field>.csv` and `<field>.midline.csv` for the named fields ("all" selects every stored field).
inline std::vector<std::filesystem::path> emit_plot_data(const nlohmann::json& manifest,
                                                         const std::filesystem::path& dir, const std::string& which) {
    if (!manifest.contains("fields") || !manifest.contains("grid"))
        throw ConfigError("manifest carries no fields");
    const auto grid = grid_from_json(manifest.at("grid"));
    const auto& stored = manifest.at("fields");
    std::vector<std::string> names;
    if (which == "all") {
        for (const auto& [name, file] : stored.items()) names.push_back(name);
    } else {
        names = detail::split_names(which);
        for (const auto& n : names)
            if (!stored.contains(n)) {
                std::string avail;
                for (const auto& [name, file] : stored.items()) avail += (avail.empty() ? "" : ", ") + name;
                throw ConfigError("unknown field '" + n + "'; available: " + (avail.empty() ? "(none)" : avail));
            }
    }
    std::vector<std::filesystem::path> out;
    for (const auto& n : names) {
        const auto f = field_from_csv(grid, read_text(dir / stored.at(n).get<std::string>()));
        write_text(dir / (n + ".csv"), field_to_csv(f));
        write_text(dir / (n + ".midline.csv"), midline_to_csv(f));
        out.push_back(dir / (n + ".csv"));
        out.push_back(dir / (n + ".midline.csv"));
    }
    return out;
}

namespace detail {

class Runner {
public:
    Runner(RunConfig cfg, RunOptions opt) : cfg_(std::move(cfg)), opt_(std::move(opt)), grid_(cfg_.grid()) {}

    RunResult run() {
        m_["schema_version"] = schema_version;
        m_["subcommand"] = to_string(opt_.command);
        m_["config"] = serialize_config(cfg_);
        m_["grid"] = grid_to_json(*grid_);
        m_["seed"] = cfg_.seed;
        int code = exit_status::ok;
        try {
            code = dispatch();
        } catch (const std::exception& err) {
            code = exit_code_for(err);
            m_["error"] = {{"stage", stage_}, {"kind", error_kind(err)}, {"message", err.what()}};
        }
        finish(code);
        return {m_, code};
    }

private:
    int dispatch() {
        switch (opt_.command) {
            case Subcommand::eigen: return eigen();
            case Subcommand::torsion: return torsion_stage();
            case Subcommand::boundedness: return boundedness();
            case Subcommand::construct: build_pair(); return exit_status::ok;
            case Subcommand::verify: build_pair(); return verify();
            case Subcommand::solve:
            case Subcommand::uniqueness: {
                build_pair();
                if (int c = verify(); c != exit_status::ok) return c;
                if (int c = solve(); c != exit_status::ok) return c;
                if (opt_.command == Subcommand::uniqueness || cfg_.uniqueness) return uniqueness();
                return exit_status::ok;
            }
            case Subcommand::report: break;
        }
        throw InternalError("report runs through generate_report");
    }

    template <class F>
    auto timed(const std::string& stage, F&& f) {
        stage_ = stage;
        const auto t0 = std::chrono::steady_clock::now();
        auto out = f();
        seconds_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    static const char* slot(int i) { return i == 0 ? "u" : "v"; }

    int eigen() {
        bool pass = true;
        const auto p = powers(cfg_.exponents);
        std::mt19937_64 rng(cfg_.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < 2; ++i) {
            const auto d = timed(std::string("eigen_") + slot(i),
                                 [&] { return first_eigenpair_dirichlet(grid_, p[i], cfg_.inner); });
            const auto n = first_eigenpair_neumann(grid_, p[i]);
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < cfg_.restarts; ++k) {
                std::vector<double> w(grid_->size());
                for (double& x : w) x = unit(rng);
                for (auto b : grid_->boundary_nodes()) w[b] = 0.0;
                best = std::min(best, rayleigh_quotient(ScalarField(grid_, std::move(w)), p[i], cfg_.inner.eps_grad));
            }
            const bool restarts_ok = cfg_.restarts == 0 || best >= d.lambda * (1.0 - 1e-8);
            const bool dominates = d.lambda > n.lambda;
            pass = pass && restarts_ok && dominates;
            m_["eigen"][slot(i)] = {{"dirichlet", to_json(d)},
                                    {"neumann", to_json(n)},
                                    {"restarts", {{"count", cfg_.restarts}, {"pass", restarts_ok}}},
                                    {"dirichlet_dominates", dominates}};
            if (cfg_.restarts > 0) m_["eigen"][slot(i)]["restarts"]["min_quotient"] = best;
            fields_.insert_or_assign(std::string("phi_") + slot(i), d.phi);
        }
        return pass ? exit_status::ok : exit_status::certificate;
    }

    int torsion_stage() {
        const auto p = powers(cfg_.exponents);
        const std::array<double, 2> gammas{std::min(cfg_.exponents.beta1, 0.0), std::min(cfg_.exponents.alpha2, 0.0)};
        for (int i = 0; i < 2; ++i) {
            const std::string s = slot(i);
            const auto y = timed("torsion_dirichlet_" + s,
                                 [&] { return torsion(grid_, p[i], BoundaryCondition::dirichlet_zero, cfg_.inner); });
            const auto yh = timed("torsion_neumann_" + s,
                                  [&] { return torsion(grid_, p[i], BoundaryCondition::neumann_zero, cfg_.inner); });
            const auto z = timed("torsion_singular_" + s,
                                 [&] { return singular_torsion(grid_, p[i], gammas[i], cfg_.inner); });
            m_["torsion"][s] = {{"dirichlet", to_json(y)}, {"neumann", to_json(yh)}, {"singular", to_json(z)}};
            fields_.insert_or_assign("y_" + s, y.field());
            fields_.insert_or_assign("yhat_" + s, yh.field());
            fields_.insert_or_assign("z_" + s, z.field());
        }
        return exit_status::ok;
    }

    int boundedness() {
        const auto ladder = cfg_.ladder();
        const double gamma = cfg_.effective_gamma();
        const auto p = powers(cfg_.exponents);
        for (int i = 0; i < 2; ++i) {
            if (i == 1 && p[1] == p[0]) {
                m_["boundedness"]["v"] = m_["boundedness"]["u"];
                break;
            }
            const auto r = timed(std::string("boundedness_") + slot(i),
                                 [&] { return boundedness_check(ladder, p[i], gamma, cfg_.inner, opt_.threads); });
            m_["boundedness"][slot(i)] = to_json(r);
        }
        return exit_status::ok;
    }

    void build_pair() {
        const auto& e = cfg_.exponents;
        aux_ = timed("auxiliary", [&] { return build_auxiliary(grid_, e, cfg_.recipe, cfg_.inner); });
        nlohmann::json pair{{"recipe", to_string(cfg_.recipe)}};
        if (cfg_.lambda) {
            pair_ = timed("construct", [&] { return construct(grid_, e, cfg_.recipe, *cfg_.lambda, aux_); });
            pair["lambda_mode"] = "explicit";
        } else {
            auto search = timed("construct", [&] { return auto_lambda(grid_, e, cfg_.recipe, aux_, cfg_.inner.eps_grad); });
            pair_ = std::move(search.pair);
            certificate_ = std::move(search.certificate);
            pair["lambda_mode"] = "auto";
            pair["lambda_start"] = search.start;
            pair["doublings"] = search.doublings;
        }
        pair["lambda"] = pair_.lambda;
        pair["positivity"] = pair_.positivity;
        if (pair_.bounded_regime) pair["bounded_regime"] = *pair_.bounded_regime;
        m_["pair"] = pair;
        record_auxiliary();
        fields_.insert_or_assign("u_lower", pair_.u_lower);
        fields_.insert_or_assign("u_upper", pair_.u_upper);
        fields_.insert_or_assign("v_lower", pair_.v_lower);
        fields_.insert_or_assign("v_upper", pair_.v_upper);
    }

    void record_auxiliary() {
        nlohmann::json j = nlohmann::json::object();
        for (int i = 0; i < 2; ++i) {
            const std::string s = slot(i);
            if (aux_.neumann_eigen[i]) j["neumann_eigen"][s] = to_json(*aux_.neumann_eigen[i]);
            if (aux_.dirichlet_eigen[i]) j["dirichlet_eigen"][s] = to_json(*aux_.dirichlet_eigen[i]);
            if (aux_.neumann_torsion[i]) j["neumann_torsion"][s] = to_json(*aux_.neumann_torsion[i]);
            if (aux_.dirichlet_torsion[i]) j["dirichlet_torsion"][s] = to_json(*aux_.dirichlet_torsion[i]);
            if (aux_.singular_torsion[i]) j["singular_torsion"][s] = to_json(*aux_.singular_torsion[i]);
        }
        m_["auxiliary"] = j;
    }

    int verify() {
        if (!certificate_)
            certificate_ = timed("verify", [&] { return verify_pair(pair_, cfg_.exponents, grid_, cfg_.inner.eps_grad); });
        m_["certificate"] = to_json(*certificate_);
        return certificate_->pass ? exit_status::ok : exit_status::certificate;
    }

    int solve() {
        const auto fp = cfg_.fixed_point(opt_.threads);
        const auto s = timed("solve", [&] { return solve_system(grid_, cfg_.exponents, pair_, fp); });
        auto j = to_json(s);
        j["u_sup"] = s.u.sup_norm();
        j["v_sup"] = s.v.sup_norm();
        j["u_min"] = s.u.min();
        j["v_min"] = s.v.min();
        m_["solution"] = j;
        fields_.insert_or_assign("u", s.u);
        fields_.insert_or_assign("v", s.v);
        return s.converged ? exit_status::ok : exit_status::convergence;
    }

    int uniqueness() {
        auto fp = cfg_.fixed_point(opt_.threads);
        const auto r = timed("uniqueness", [&] { return uniqueness_experiment(grid_, cfg_.exponents, pair_, fp); });
        const bool converged = r.first.converged && r.second.converged;
        const bool agree = r.distance <= 1e-6 && std::abs(r.tau - 1.0) <= 1e-6 && r.scaling.pass;
        auto j = to_json(r);
        j["converged"] = converged;
        j["agree"] = agree;
        m_["uniqueness"] = j;
        if (!converged) return exit_status::convergence;
        // Disagreement only refutes something when the gate promises uniqueness.
        if (r.gate.verdict == GateVerdict::pass && !agree) return exit_status::certificate;
        return exit_status::ok;
    }

    void finish(int& code) {
        stage_ = "output";
        nlohmann::json files = nlohmann::json::object();
        try {
            std::filesystem::create_directories(opt_.out);
            for (const auto& [name, f] : fields_) {
                write_text(opt_.out / (name + ".csv"), field_to_csv(f));
                files[name] = name + ".csv";
            }
            m_["fields"] = files;
            nlohmann::json plots = nlohmann::json::array();
            if (cfg_.plot != "none" && !fields_.empty())
                for (const auto& path : emit_plot_data(m_, opt_.out, cfg_.plot))
                    plots.push_back(path.filename().string());
            m_["plots"] = plots;
        } catch (const std::exception& err) {
            if (code == exit_status::ok) code = exit_code_for(err);
            m_["error"] = {{"stage", stage_}, {"kind", error_kind(err)}, {"message", err.what()}};
        }
        m_["status"] = {{"exit_code", code}, {"pass", code == exit_status::ok}};
        m_["runtime"] = {{"threads", opt_.threads}, {"seconds", seconds_}};
        write_text(opt_.out / "manifest.json", m_.dump(2) + "\n");
    }

    RunConfig cfg_;
    RunOptions opt_;
    GridPtr grid_;
    nlohmann::json m_;
    std::map<std::string, ScalarField> fields_;
    std::map<std::string, double> seconds_;
    std::string stage_ = "setup";
    Auxiliary aux_;
    SubSupPair pair_;
    std::optional<HypothesisCertificate> certificate_;
};

}  // namespace detail

/// Re-emits plot data of an existing run directory and writes a plain-text summary.
inline RunResult generate_report(const RunConfig& cfg, const std::filesystem::path& dir) {
    const auto path = dir / "manifest.json";
    if (!std::filesystem::exists(path)) throw ConfigError("report: no manifest.json in " + dir.string());
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& err) {
        throw ConfigError(std::string("report: malformed manifest: ") + err.what());
    }
    if (m.value("schema_version", 0) != schema_version) throw ConfigError("report: unsupported schema version");
    const auto plots = cfg.plot == "none" ? std::vector<std::filesystem::path>{} : emit_plot_data(m, dir, cfg.plot);

    std::ostringstream o;
    o << "subcommand: " << m.value("subcommand", "?") << '\n';
    o << "exit_code: " << m["status"].value("exit_code", -1) << '\n';
    if (m.contains("pair"))
        o << "recipe: " << m["pair"].value("recipe", "?") << ", lambda: " << format_real(m["pair"].value("lambda", 0.0))
          << '\n';
    if (m.contains("certificate")) o << "certificate: " << (m["certificate"].value("pass", false) ? "pass" : "fail") << '\n';
    if (m.contains("solution")) {
        const auto& s = m["solution"];
        o << "solution: " << (s.value("converged", false) ? "converged" : "not converged") << " after "
          << s.value("outer_iterations", 0) << " outer iterations, enclosed: " << (s.value("enclosed", false) ? "yes" : "no")
          << ", u_sup " << format_real(s.value("u_sup", 0.0)) << ", v_sup " << format_real(s.value("v_sup", 0.0)) << '\n';
    }
    if (m.contains("uniqueness")) {
        const auto& u = m["uniqueness"];
        o << "uniqueness: gate " << u["gate"].value("verdict", "?") << ", distance "
          << format_real(u.value("distance", 0.0)) << ", tau " << format_real(u.value("tau", 0.0)) << '\n';
    }
    if (m.contains("boundedness"))
        for (const auto& [slot, b] : m["boundedness"].items())
            o << "boundedness " << slot << ": " << b.value("verdict", "?") << ", drift " << format_real(b.value("drift", 0.0))
              << '\n';
    if (m.contains("error")) o << "error: " << m["error"].value("message", "") << '\n';
    o << "plots: " << plots.size() << " files\n";
    write_text(dir / "summary.txt", o.str());

    nlohmann::json r{{"schema_version", schema_version}, {"subcommand", "report"}, {"source", m.value("subcommand", "")}};
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : plots) files.push_back(p.filename().string());
    r["plots"] = files;
    r["summary"] = "summary.txt";
    return {r, exit_status::ok};
}

/// Runs one subcommand on a parsed configuration, writing everything into opt.out.
inline RunResult run(RunConfig cfg, const RunOptions& opt) {
    if (opt.seed) cfg.seed = *opt.seed;
    cfg.output = opt.out.string();
    if (opt.command == Subcommand::report) return generate_report(cfg, opt.out);
    return detail::Runner(std::move(cfg), opt).run();
}

/// Parses and runs; configuration errors still leave a manifest describing the failure.
inline RunResult run_text(const std::string& text, const RunOptions& opt) {
    RunConfig cfg;
    try {
        cfg = parse_config(text);
    } catch (const std::exception& err) {
        const int code = exit_code_for(err);
        nlohmann::json m{{"schema_version", schema_version},
                         {"subcommand", to_string(opt.command)},
                         {"error", {{"stage", "config"}, {"kind", error_kind(err)}, {"message", err.what()}}},
                         {"fields", nlohmann::json::object()},
                         {"status", {{"exit_code", code}, {"pass", false}}}};
        std::error_code ec;
        std::filesystem::create_directories(opt.out, ec);
        if (!ec) write_text(opt.out / "manifest.json", m.dump(2) + "\n");
        return {m, code};
    }
    try {
        return run(std::move(cfg), opt);
    } catch (const std::exception& err) {
        const int code = exit_code_for(err);
        nlohmann::json m{{"schema_version", schema_version},
                         {"subcommand", to_string(opt.command)},
                         {"error", {{"stage", to_string(opt.command)}, {"kind", error_kind(err)}, {"message", err.what()}}},
                         {"status", {{"exit_code", code}, {"pass", false}}}};
        return {m, code};
    }
}

}  // namespace lanemden
