#pragma once

// CSV serialization of nodal fields and the JSON grid descriptor.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lanemden/core.hpp"

namespace lanemden {

/// Shortest text that round-trips: 17 significant digits.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header `x,value` (1D) or `x,y,value` (2D), one row per node in grid order.
inline std::string field_to_csv(const ScalarField& f) {
    const Grid& g = f.grid();
    std::string out = g.dimension() == 1 ? "x,value\n" : "x,y,value\n";
    for (std::size_t n = 0; n < f.size(); ++n) {
        const Point x = g.point(n);
        out += format_real(x[0]);
        out += ',';
        if (g.dimension() == 2) {
            out += format_real(x[1]);
            out += ',';
        }
        out += format_real(f[n]);
        out += '\n';
    }
    return out;
}

/// Midline cross-section: the whole field in 1D, the row j = ny/2 in 2D.
inline std::string midline_to_csv(const ScalarField& f) {
    const Grid& g = f.grid();
    std::string out = "x,value\n";
    const std::size_t j = g.dimension() == 1 ? 0 : g.count(1) / 2;
    for (std::size_t i = 0; i < g.count(0); ++i) {
        const std::size_t n = g.index(i, j);
        out += format_real(g.point(n)[0]) + ',' + format_real(f[n]) + '\n';
    }
    return out;
}

/// Parses a field CSV written by field_to_csv; node coordinates are checked against the grid.
inline ScalarField field_from_csv(const GridPtr& grid, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("field csv: empty input");
    const std::string expected = grid->dimension() == 1 ? "x,value" : "x,y,value";
    if (line != expected) throw ConfigError("field csv: unexpected header '" + line + "'");

    std::vector<double> values;
    values.reserve(grid->size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cols;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
        if (cols.size() != static_cast<std::size_t>(grid->dimension()) + 1)
            throw ConfigError("field csv: wrong column count on row " + std::to_string(row + 1));
        if (row >= grid->size()) throw ConfigError("field csv: more rows than grid nodes");
        const Point x = grid->point(row);
        for (int a = 0; a < grid->dimension(); ++a)
            if (std::abs(cols[a] - x[a]) > 1e-12 * (1.0 + std::abs(x[a])))
                throw ConfigError("field csv: coordinate mismatch on row " + std::to_string(row + 1));
        values.push_back(cols.back());
        ++row;
    }
    if (values.size() != grid->size()) throw ConfigError("field csv: fewer rows than grid nodes");
    return ScalarField(grid, std::move(values));
}

inline nlohmann::json grid_to_json(const Grid& g) {
    nlohmann::json j;
    j["kind"] = to_string(g.kind());
    nlohmann::json ext = nlohmann::json::array();
    nlohmann::json cnt = nlohmann::json::array();
    for (int a = 0; a < g.dimension(); ++a) {
        ext.push_back({g.extent(a).lo, g.extent(a).hi});
        cnt.push_back(g.count(a));
    }
    j["extents"] = ext;
    j["counts"] = cnt;
    return j;
}

inline GridPtr grid_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    std::vector<Extent> ext;
    for (const auto& e : j.at("extents")) ext.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    std::vector<std::size_t> cnt = j.at("counts").get<std::vector<std::size_t>>();
    if (kind == "interval") return build_grid(DomainKind::interval, ext, cnt);
    if (kind == "rectangle") return build_grid(DomainKind::rectangle, ext, cnt);
    throw ConfigError("grid descriptor: unknown kind '" + kind + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lanemden
