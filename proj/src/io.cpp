#include "fockpass/io.hpp"

#include "fockpass/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>

namespace fockpass::io {

using nlohmann::json;

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    if (res.ec != std::errc{}) throw NumericalError("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("cannot parse number '" + std::string(text) + "'");
    return v;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

// Reads the header and data rows, stripping a trailing '\r'.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_table(std::istream& is, const char* what) {
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ConfigError(std::string(what) + ": row has " + std::to_string(cells.size()) +
                              " cells, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    if (first) throw ConfigError(std::string(what) + ": missing header");
    return t;
}

void expect_header(const Table& t, const std::vector<std::string>& expected, const char* what) {
    if (t.header.size() < expected.size() ||
        !std::equal(expected.begin(), expected.end(), t.header.begin()))
        throw ConfigError(std::string(what) + ": unexpected header");
}

int parse_int(const std::string& text) {
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("cannot parse integer '" + text + "'");
    return v;
}

// Distinct values in order of first appearance.
std::vector<double> distinct(const std::vector<double>& values) {
    std::vector<double> out;
    for (double v : values)
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void write_surfaces_csv(std::ostream& os, const SurfaceGrid& grid, bool display_column) {
    const bool extra = display_column && !grid.display_offset_applied;
    os << "g,omega,sheet_index," << (grid.display_offset_applied ? "energy_plus_g" : "energy")
       << (extra ? ",energy_plus_g" : "") << '\n';
    for (std::size_t ig = 0; ig < grid.g_axis.size(); ++ig)
        for (std::size_t io = 0; io < grid.omega_axis.size(); ++io)
            for (int s = 0; s < grid.sheet_count; ++s) {
                const double e = grid.value(ig, io, s);
                os << format_double(grid.g_axis[ig]) << ',' << format_double(grid.omega_axis[io])
                   << ',' << s << ',' << format_double(e);
                if (extra) os << ',' << format_double(e + grid.g_axis[ig]);
                os << '\n';
            }
}

SurfaceGrid read_surfaces_csv(std::istream& is) {
    const Table t = read_table(is, "surfaces.csv");
    expect_header(t, {"g", "omega", "sheet_index"}, "surfaces.csv");
    if (t.header.size() < 4) throw ConfigError("surfaces.csv: missing energy column");

    SurfaceGrid grid;
    grid.display_offset_applied = t.header[3] == "energy_plus_g";
    if (!grid.display_offset_applied && t.header[3] != "energy")
        throw ConfigError("surfaces.csv: unexpected header");

    std::vector<double> gs, os;
    int max_sheet = -1;
    for (const auto& r : t.rows) {
        gs.push_back(parse_double(r[0]));
        os.push_back(parse_double(r[1]));
        max_sheet = std::max(max_sheet, parse_int(r[2]));
    }
    grid.g_axis = distinct(gs);
    grid.omega_axis = distinct(os);
    grid.sheet_count = max_sheet + 1;
    const std::size_t expected =
        grid.g_axis.size() * grid.omega_axis.size() * static_cast<std::size_t>(grid.sheet_count);
    if (t.rows.size() != expected) throw ConfigError("surfaces.csv: incomplete grid");
    grid.sheets.resize(expected);
    for (std::size_t k = 0; k < t.rows.size(); ++k) grid.sheets[k] = parse_double(t.rows[k][3]);
    return grid;
}

// ---------------------------------------------------------------------------

void write_intersections_csv(std::ostream& os, const std::vector<IntersectionRecord>& records) {
    os << "plane,field_value,sheet_lower,sheet_upper,residual_gap,energy\n";
    for (const auto& r : records)
        os << to_string(r.plane) << ',' << format_double(r.field_value) << ','
           << r.surface_pair.first << ',' << r.surface_pair.second << ','
           << format_double(r.residual_gap) << ',' << format_double(r.energy) << '\n';
}

std::vector<IntersectionRecord> read_intersections_csv(std::istream& is) {
    const Table t = read_table(is, "intersections.csv");
    expect_header(t, {"plane", "field_value", "sheet_lower", "sheet_upper", "residual_gap", "energy"},
                  "intersections.csv");
    std::vector<IntersectionRecord> out;
    for (const auto& r : t.rows) {
        IntersectionRecord rec;
        rec.plane = plane_from_string(r[0]);
        rec.field_value = parse_double(r[1]);
        rec.surface_pair = {parse_int(r[2]), parse_int(r[3])};
        rec.residual_gap = parse_double(r[4]);
        rec.energy = parse_double(r[5]);
        out.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& record) {
    const std::size_t dim = record.populations.empty() ? 0 : record.populations.front().size();
    os << 't';
    for (std::size_t i = 0; i < dim; ++i)
        os << ",P_" << BasisIndex::from_flat(static_cast<int>(i)).label();
    os << ",norm_drift\n";
    for (std::size_t k = 0; k < record.times.size(); ++k) {
        os << format_double(record.times[k]);
        for (double p : record.populations[k]) os << ',' << format_double(p);
        os << ',' << format_double(record.norm_drift[k]) << '\n';
    }
}

TrajectoryRecord read_trajectory_csv(std::istream& is) {
    const Table t = read_table(is, "trajectory.csv");
    if (t.header.size() < 3 || t.header.front() != "t" || t.header.back() != "norm_drift")
        throw ConfigError("trajectory.csv: unexpected header");
    const std::size_t dim = t.header.size() - 2;
    for (std::size_t i = 0; i < dim; ++i)
        if (t.header[i + 1] != "P_" + BasisIndex::from_flat(static_cast<int>(i)).label())
            throw ConfigError("trajectory.csv: unexpected column " + t.header[i + 1]);

    TrajectoryRecord rec;
    for (const auto& r : t.rows) {
        rec.times.push_back(parse_double(r[0]));
        std::vector<double> pops(dim);
        for (std::size_t i = 0; i < dim; ++i) pops[i] = parse_double(r[i + 1]);
        rec.populations.push_back(std::move(pops));
        rec.norm_drift.push_back(parse_double(r.back()));
    }
    return rec;
}

// ---------------------------------------------------------------------------

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
    os << "g_max,omega_max,population,predicted_n\n";
    for (std::size_t ig = 0; ig < scan.g_max_axis.size(); ++ig)
        for (std::size_t io = 0; io < scan.omega_max_axis.size(); ++io)
            os << format_double(scan.g_max_axis[ig]) << ',' << format_double(scan.omega_max_axis[io])
               << ',' << format_double(scan.population(ig, io)) << ',' << scan.predicted(ig, io)
               << '\n';
}

ScanResult read_scan_csv(std::istream& is, int target_n) {
    const Table t = read_table(is, "scan.csv");
    expect_header(t, {"g_max", "omega_max", "population", "predicted_n"}, "scan.csv");
    ScanResult scan;
    scan.target_n = target_n;
    std::vector<double> gs, os;
    for (const auto& r : t.rows) {
        gs.push_back(parse_double(r[0]));
        os.push_back(parse_double(r[1]));
        scan.population_map.push_back(parse_double(r[2]));
        scan.predictor_map.push_back(parse_int(r[3]));
    }
    scan.g_max_axis = distinct(gs);
    scan.omega_max_axis = distinct(os);
    if (scan.population_map.size() != scan.g_max_axis.size() * scan.omega_max_axis.size())
        throw ConfigError("scan.csv: incomplete grid");
    scan.plateau = extract_plateau(scan.g_max_axis, scan.omega_max_axis, scan.population_map);
    return scan;
}

// ---------------------------------------------------------------------------

json to_json(const Plateau& p) {
    json j;
    j["found"] = p.found;
    if (!p.found) return j;
    j["index"] = {{"g_lo", p.ig_lo}, {"g_hi", p.ig_hi}, {"omega_lo", p.io_lo}, {"omega_hi", p.io_hi}};
    j["g_lo"] = p.g_lo;
    j["g_hi"] = p.g_hi;
    j["omega_lo"] = p.omega_lo;
    j["omega_hi"] = p.omega_hi;
    j["g_extent"] = p.g_extent;
    j["omega_extent"] = p.omega_extent;
    j["center"] = {{"g_max", p.center_g}, {"omega_max", p.center_omega}};
    return j;
}

Plateau plateau_from_json(const json& j) {
    Plateau p;
    p.found = j.at("found").get<bool>();
    if (!p.found) return p;
    const auto& idx = j.at("index");
    p.ig_lo = idx.at("g_lo").get<std::size_t>();
    p.ig_hi = idx.at("g_hi").get<std::size_t>();
    p.io_lo = idx.at("omega_lo").get<std::size_t>();
    p.io_hi = idx.at("omega_hi").get<std::size_t>();
    p.g_lo = j.at("g_lo").get<double>();
    p.g_hi = j.at("g_hi").get<double>();
    p.omega_lo = j.at("omega_lo").get<double>();
    p.omega_hi = j.at("omega_hi").get<double>();
    p.g_extent = j.at("g_extent").get<double>();
    p.omega_extent = j.at("omega_extent").get<double>();
    p.center_g = j.at("center").at("g_max").get<double>();
    p.center_omega = j.at("center").at("omega_max").get<double>();
    return p;
}

json scan_summary(const ScanResult& scan) {
    json j;
    j["target_n"] = scan.target_n;
    j["plateau_level"] = kPlateauLevel;
    j["g_max_axis"] = scan.g_max_axis;
    j["omega_max_axis"] = scan.omega_max_axis;
    j["plateau"] = to_json(scan.plateau);
    if (scan.plateau.found)
        j["center_cell_population"] = scan.population(
            (scan.plateau.ig_lo + scan.plateau.ig_hi) / 2, (scan.plateau.io_lo + scan.plateau.io_hi) / 2);
    j["failures"] = json::array();
    for (const auto& f : scan.failures)
        j["failures"].push_back({{"ig", f.ig}, {"io", f.io}, {"message", f.message}});
    return j;
}

json to_json(const ModelParams& p) {
    return {{"delta", p.delta}, {"delta_M", p.delta_M}, {"delta_C", p.delta_C}, {"n_max", p.n_max}};
}

json to_json(const PulseSchedule& s) {
    return {{"g_max", s.g_max}, {"omega_max", s.omega_max}, {"t_int", s.t_int},
            {"tau", s.tau},     {"t_start", s.t_start},     {"t_end", s.t_end}};
}

json to_json(const AdiabaticityReport& r) {
    return {{"delta_m_t_int", r.delta_m_product},
            {"delta_c_t_int", r.delta_c_product},
            {"g_max_t_int", r.g_product},
            {"threshold", kAdiabaticityThreshold},
            {"pass", r.pass},
            {"warnings", r.warnings}};
}

json to_json(const TransferPrediction& p) {
    return {{"n", p.n},
            {"g_crossings", p.g_crossings},
            {"omega_crossings", p.omega_crossings},
            {"warnings", p.warnings}};
}

json to_json(const TruncationReport& r) {
    return {{"n_max", r.n_max},
            {"n_max_extended", r.n_max_extended},
            {"max_population_difference", r.max_population_difference},
            {"boundary_population", r.boundary_population},
            {"converged", r.converged},
            {"suggested_n_max", r.suggested_n_max},
            {"warnings", r.warnings}};
}

json to_json(const PulseDesign& d) {
    const auto& why = d.rationale;
    json r = {{"target_n", why.target_n},
              {"g_star_lower", why.g_star_lower},
              {"g_star_upper", why.g_star_upper},
              {"omega_star_target", why.omega_star_target},
              {"omega_factor", why.omega_factor},
              {"predicted_n", why.predicted_n},
              {"adiabaticity", to_json(why.adiabaticity)}};
    r["validation_population"] =
        why.validation_population ? json(*why.validation_population) : json(nullptr);
    return {{"schedule", to_json(d.schedule)}, {"rationale", r}};
}

}  // namespace fockpass::io
