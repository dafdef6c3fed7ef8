#pragma once

// CSV field serialization (columns x, re, im; scientific, 17 significant
// digits), generic CSV tables, and the per-run manifest JSON.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnls/grid.hpp"

namespace dnls {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline void write_field_csv(const std::string& path, const ComplexField& u) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "x,re,im\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        os << format_double(u.grid.x(i)) << ',' << format_double(u.v[i].real()) << ','
           << format_double(u.v[i].imag()) << '\n';
}

inline void write_field_csv(const std::string& path, const RealField& u) {
    write_field_csv(path, ComplexField(u));
}

inline ComplexField read_field_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty field csv: " + path);
    std::vector<double> xs, res, ims;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double x, re, im;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &re, &im) != 3)
            throw std::runtime_error("bad field csv row in " + path);
        xs.push_back(x);
        res.push_back(re);
        ims.push_back(im);
    }
    if (xs.size() < 3 || xs.size() % 2 == 0)
        throw std::runtime_error("field csv must hold an odd node count: " + path);
    const double L = -xs.front();
    SpatialGrid g(L, xs.size());
    ComplexField u(g);
    for (std::size_t i = 0; i < xs.size(); ++i) u.v[i] = complexd{res[i], ims[i]};
    return u;
}

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline void write_table_csv(const std::string& path, const CsvTable& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << t.columns[c] << (c + 1 < t.columns.size() ? ',' : '\n');
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << format_double(row[c]) << (c + 1 < row.size() ? ',' : '\n');
    }
}

inline CsvTable read_table_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) t.columns.push_back(col);
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Run manifests.
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot hash missing file: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= std::uint8_t(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

struct RunManifest {
    std::string subcommand;
    nlohmann::json parameters;
    nlohmann::json grid;
    std::string version = "dnls 0.1.0";
    double wall_time_s = 0.0;
    std::vector<std::string> outputs;
    nlohmann::json checks = nlohmann::json::array();

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["parameters"] = parameters;
        j["grid"] = grid;
        j["version"] = version;
        j["wall_time_s"] = wall_time_s;
        j["outputs"] = outputs;
        nlohmann::json hashes = nlohmann::json::object();
        for (const auto& p : outputs) hashes[p] = fnv1a_file(p);
        j["output_hash"] = hashes;
        if (!checks.empty()) j["checks"] = checks;
        return j;
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
        os << to_json().dump(2) << '\n';
    }
};

inline nlohmann::json grid_json(const SpatialGrid& g) {
    return nlohmann::json{{"half_width", g.half_width},
                          {"node_count", g.node_count},
                          {"spacing", g.spacing}};
}

}  // namespace dnls
