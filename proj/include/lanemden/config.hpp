#pragma once

// Line-oriented run configuration: `key = value`, `#` comments, no nesting.

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lanemden/bounds.hpp"
#include "lanemden/enclosure.hpp"

namespace lanemden {

struct RunConfig {
    DomainKind domain = DomainKind::interval;
    Extent x{0.0, 1.0};
    Extent y{0.0, 1.0};
    std::size_t nx = 65;
    std::size_t ny = 65;
    /// Refinement ladder depth for the boundedness check; level k has (n-1)2^k+1 nodes per axis.
    int levels = 3;

    ExponentSet exponents;
    Recipe recipe = Recipe::T1;
    /// Empty means auto.
    std::optional<double> lambda;
    /// Empty means auto: from_lower for T1/T3, from_upper for T5/T9.
    std::optional<StartKind> start;
    /// Singular exponent of the boundedness check; empty means the most negative coupling exponent.
    std::optional<double> gamma;
    bool uniqueness = false;

    ScalarSolveConfig inner;
    double tol_outer = 1e-8;
    int max_outer_iterations = 500;
    double theta = 1.0;

    int restarts = 5;
    std::uint64_t seed = 0;
    /// Comma-separated field names, or "all".
    std::string plot = "all";
    std::string output = "run";

    GridPtr grid() const {
        return domain == DomainKind::interval ? make_interval(x.lo, x.hi, nx) : make_rectangle(x, y, nx, ny);
    }

    std::vector<GridPtr> ladder() const {
        std::vector<GridPtr> out;
        for (int k = 0; k < levels; ++k) {
            const std::size_t mx = (nx - 1) * (std::size_t{1} << k) + 1;
            const std::size_t my = (ny - 1) * (std::size_t{1} << k) + 1;
            out.push_back(domain == DomainKind::interval ? make_interval(x.lo, x.hi, mx) : make_rectangle(x, y, mx, my));
        }
        return out;
    }

    StartKind effective_start() const {
        if (start) return *start;
        return recipe == Recipe::T5 || recipe == Recipe::T9 ? StartKind::from_upper : StartKind::from_lower;
    }

    double effective_gamma() const {
        if (gamma) return *gamma;
        return std::min({exponents.beta1, exponents.alpha2, 0.0});
    }

    FixedPointConfig fixed_point(unsigned threads = 1) const {
        FixedPointConfig c;
        c.tol_outer = tol_outer;
        c.max_outer_iterations = max_outer_iterations;
        c.start = effective_start();
        c.inner = inner;
        c.theta = theta;
        c.threads = threads;
        return c;
    }

    bool operator==(const RunConfig& o) const {
        return domain == o.domain && x == o.x && (domain == DomainKind::interval || (y == o.y && ny == o.ny)) &&
               nx == o.nx && levels == o.levels && exponents == o.exponents && recipe == o.recipe &&
               lambda == o.lambda && start == o.start && gamma == o.gamma && uniqueness == o.uniqueness &&
               inner.tol_res == o.inner.tol_res && inner.eps_grad == o.inner.eps_grad &&
               inner.max_inner_iterations == o.inner.max_inner_iterations && inner.damping == o.inner.damping &&
               tol_outer == o.tol_outer && max_outer_iterations == o.max_outer_iterations && theta == o.theta &&
               restarts == o.restarts && seed == o.seed && plot == o.plot && output == o.output;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Shortest decimal text that reads back to the same double.
inline std::string shortest(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

struct Entry {
    std::string value;
    int line = 0;
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::optional<std::string> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        current_ = it->second;
        current_key_ = key;
        std::string v = it->second.value;
        entries_.erase(it);
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("line " + std::to_string(current_.line) + ": " + current_key_ + ": " + msg);
    }

    double real(const std::string& key, double fallback) {
        auto v = take(key);
        return v ? to_real(*v) : fallback;
    }

    double required_real(const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError("missing required key '" + key + "'");
        return to_real(*v);
    }

    template <class Int>
    Int integer(const std::string& key, Int fallback) {
        auto v = take(key);
        if (!v) return fallback;
        Int out{};
        auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc{} || end != v->data() + v->size()) fail("expected an integer, got '" + *v + "'");
        return out;
    }

    double to_real(const std::string& v) const {
        double out = 0.0;
        auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || end != v.data() + v.size() || !std::isfinite(out))
            fail("expected a finite number, got '" + v + "'");
        return out;
    }

    std::optional<double> real_or_auto(const std::string& key) {
        auto v = take(key);
        if (!v || *v == "auto") return std::nullopt;
        return to_real(*v);
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = take(key);
        if (!v) return fallback;
        if (*v == "true") return true;
        if (*v == "false") return false;
        fail("expected true or false, got '" + *v + "'");
    }

private:
    std::map<std::string, Entry> entries_;
    Entry current_;
    std::string current_key_;
};

inline std::map<std::string, Entry> tokenize(const std::string& text) {
    std::map<std::string, Entry> out;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": empty key");
        if (value.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value for '" + key + "'");
        if (out.count(key))
            throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "' (first on line " +
                              std::to_string(out[key].line) + ")");
        out[key] = {value, line};
    }
    return out;
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "domain", "x_min", "x_max", "nx", "y_min", "y_max", "ny", "levels", "p1", "p2", "alpha1", "beta1",
        "alpha2", "beta2", "recipe", "lambda", "start", "gamma", "uniqueness", "tol_res", "eps_grad",
        "max_inner_iterations", "damping", "tol_outer", "max_outer_iterations", "theta", "restarts", "seed",
        "plot", "output"};
    return keys;
}

inline StartKind start_from_string(const std::string& s) {
    if (s == "from_lower") return StartKind::from_lower;
    if (s == "from_upper") return StartKind::from_upper;
    throw ConfigError("unknown start '" + s + "' (expected auto, from_lower or from_upper)");
}

}  // namespace detail

/// Parses and validates a configuration; unknown keys and exponents outside the regime are rejected.
inline RunConfig parse_config(const std::string& text) {
    auto entries = detail::tokenize(text);
    for (const auto& [key, entry] : entries)
        if (std::find(detail::known_keys().begin(), detail::known_keys().end(), key) == detail::known_keys().end())
            throw ConfigError("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
    std::map<std::string, int> lines;
    for (const auto& [key, entry] : entries) lines[key] = entry.line;
    detail::Reader r(std::move(entries));
    RunConfig c;

    const auto domain = r.take("domain");
    if (!domain) throw ConfigError("missing required key 'domain'");
    if (*domain == "interval") c.domain = DomainKind::interval;
    else if (*domain == "rectangle") c.domain = DomainKind::rectangle;
    else r.fail("expected interval or rectangle, got '" + *domain + "'");

    c.x.lo = r.real("x_min", 0.0);
    c.x.hi = r.real("x_max", 1.0);
    c.nx = r.integer<std::size_t>("nx", 65);
    if (c.domain == DomainKind::rectangle) {
        c.y.lo = r.real("y_min", 0.0);
        c.y.hi = r.real("y_max", 1.0);
        c.ny = r.integer<std::size_t>("ny", c.nx);
    } else {
        for (const char* k : {"y_min", "y_max", "ny"})
            if (r.has(k)) {
                r.take(k);
                r.fail("only valid for domain = rectangle");
            }
    }
    c.levels = r.integer<int>("levels", 3);
    if (c.levels < 3) r.fail("at least 3 refinement levels are required");

    auto& e = c.exponents;
    e.p1 = r.required_real("p1");
    e.p2 = r.required_real("p2");
    e.alpha1 = r.required_real("alpha1");
    e.beta1 = r.required_real("beta1");
    e.alpha2 = r.required_real("alpha2");
    e.beta2 = r.required_real("beta2");

    if (auto v = r.take("recipe")) {
        try {
            c.recipe = recipe_from_string(*v);
        } catch (const ConfigError& err) {
            r.fail(err.what());
        }
    }
    c.lambda = r.real_or_auto("lambda");
    if (c.lambda && !(*c.lambda > 1.0)) r.fail("must exceed 1 or be auto");
    if (auto v = r.take("start"); v && *v != "auto") {
        try {
            c.start = detail::start_from_string(*v);
        } catch (const ConfigError& err) {
            r.fail(err.what());
        }
    }
    c.gamma = r.real_or_auto("gamma");
    if (c.gamma && !(*c.gamma > -1.0 && *c.gamma <= 0.0)) r.fail("must lie in (-1, 0]");
    c.uniqueness = r.boolean("uniqueness", false);

    c.inner.tol_res = r.real("tol_res", c.inner.tol_res);
    c.inner.eps_grad = r.real("eps_grad", c.inner.eps_grad);
    c.inner.max_inner_iterations = r.integer<int>("max_inner_iterations", c.inner.max_inner_iterations);
    c.inner.damping = r.real("damping", c.inner.damping);
    c.tol_outer = r.real("tol_outer", c.tol_outer);
    c.max_outer_iterations = r.integer<int>("max_outer_iterations", c.max_outer_iterations);
    c.theta = r.real("theta", c.theta);
    c.restarts = r.integer<int>("restarts", c.restarts);
    if (c.restarts < 0) r.fail("must be nonnegative");
    c.seed = r.integer<std::uint64_t>("seed", c.seed);
    if (auto v = r.take("plot")) c.plot = *v;
    if (auto v = r.take("output")) c.output = *v;

    c.grid();
    const auto report = validate_exponents(e, c.domain == DomainKind::interval ? 1 : 2);
    for (const auto& check : report.checks)
        if (!check.pass)
            throw ConfigError("line " + std::to_string(lines[check.key]) + ": " + check.key + " = " + show(check.value) +
                              " violates the admissible regime " + check.label);
    c.fixed_point().validate();
    return c;
}

/// Canonical text: every key in a fixed order, reals in shortest round-trip form.
inline std::string serialize_config(const RunConfig& c) {
    using detail::shortest;
    std::ostringstream o;
    o << "domain = " << to_string(c.domain) << '\n';
    o << "x_min = " << shortest(c.x.lo) << '\n' << "x_max = " << shortest(c.x.hi) << '\n';
    o << "nx = " << c.nx << '\n';
    if (c.domain == DomainKind::rectangle) {
        o << "y_min = " << shortest(c.y.lo) << '\n' << "y_max = " << shortest(c.y.hi) << '\n';
        o << "ny = " << c.ny << '\n';
    }
    o << "levels = " << c.levels << '\n';
    const auto& e = c.exponents;
    o << "p1 = " << shortest(e.p1) << '\n' << "p2 = " << shortest(e.p2) << '\n';
    o << "alpha1 = " << shortest(e.alpha1) << '\n' << "beta1 = " << shortest(e.beta1) << '\n';
    o << "alpha2 = " << shortest(e.alpha2) << '\n' << "beta2 = " << shortest(e.beta2) << '\n';
    o << "recipe = " << to_string(c.recipe) << '\n';
    o << "lambda = " << (c.lambda ? shortest(*c.lambda) : "auto") << '\n';
    o << "start = " << (c.start ? to_string(*c.start) : "auto") << '\n';
    o << "gamma = " << (c.gamma ? shortest(*c.gamma) : "auto") << '\n';
    o << "uniqueness = " << (c.uniqueness ? "true" : "false") << '\n';
    o << "tol_res = " << shortest(c.inner.tol_res) << '\n';
    o << "eps_grad = " << shortest(c.inner.eps_grad) << '\n';
    o << "max_inner_iterations = " << c.inner.max_inner_iterations << '\n';
    o << "damping = " << shortest(c.inner.damping) << '\n';
    o << "tol_outer = " << shortest(c.tol_outer) << '\n';
    o << "max_outer_iterations = " << c.max_outer_iterations << '\n';
    o << "theta = " << shortest(c.theta) << '\n';
    o << "restarts = " << c.restarts << '\n';
    o << "seed = " << c.seed << '\n';
    o << "plot = " << c.plot << '\n';
    o << "output = " << c.output << '\n';
    return o.str();
}

}  // namespace lanemden
