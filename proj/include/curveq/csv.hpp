#pragma once

// Delimited-text interfaces: dataset files with header group,dose,response
// (UTF-8, dot decimal separator) and the band export with header
// dose,diff,lower,upper. Numbers are written with 17 significant digits so a
// write/read cycle reproduces doubles bit for bit.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curveq/band.hpp"
#include "curveq/data.hpp"
#include "curveq/error.hpp"

namespace curveq {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view cell, const std::string& context) {
    cell = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size())
        throw ParseError(context + ": non-numeric cell '" + std::string(cell) + "'");
    return value;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    size_t start = 0;
    for (size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return cells;
}

inline std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Reads a two-group dataset. Groups are returned in order of first
// appearance; rows are grouped by dose and dose-sorted. Errors cite the
// offending line.
inline std::pair<GroupDataset, GroupDataset> ingest_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++lineno;
    {
        const auto cells = detail::split_csv(line);
        if (cells.size() != 3 || detail::trim(cells[0]) != "group" ||
            detail::trim(cells[1]) != "dose" || detail::trim(cells[2]) != "response")
            throw ParseError(path + ":1: expected header 'group,dose,response'");
    }

    std::vector<GroupDataset> groups;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line);
        const std::string context = path + ":" + std::to_string(lineno);
        if (cells.size() != 3)
            throw ParseError(context + ": expected 3 columns, got " + std::to_string(cells.size()));
        const std::string label(detail::trim(cells[0]));
        if (label.empty()) throw ParseError(context + ": empty group label");
        const double dose = detail::parse_double(cells[1], context);
        const double response = detail::parse_double(cells[2], context);

        GroupDataset* g = nullptr;
        for (auto& existing : groups)
            if (existing.label == label) g = &existing;
        if (g == nullptr) {
            if (groups.size() == 2)
                throw ParseError(context + ": more than two group labels (third is '" + label + "')");
            groups.emplace_back();
            groups.back().label = label;
            g = &groups.back();
        }
        g->add_observation(dose, response);
    }

    if (groups.size() < 2)
        throw ParseError(path + ": need exactly two group labels, found " +
                         std::to_string(groups.size()));
    groups[0].validate();
    groups[1].validate();
    return {std::move(groups[0]), std::move(groups[1])};
}

inline std::string dataset_to_csv(const GroupDataset& g1, const GroupDataset& g2) {
    std::ostringstream out;
    out << "group,dose,response\n";
    for (const GroupDataset* g : {&g1, &g2})
        for (size_t i = 0; i < g->dose_levels.size(); ++i)
            for (double y : g->responses[i])
                out << g->label << ',' << detail::full_precision(g->dose_levels[i]) << ','
                    << detail::full_precision(y) << '\n';
    return out.str();
}

inline void write_dataset(const std::string& path, const GroupDataset& g1,
                          const GroupDataset& g2) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << dataset_to_csv(g1, g2);
}

// Band export for external plotting.
inline std::string band_to_csv(const BandResult& band) {
    std::ostringstream out;
    out << "dose,diff,lower,upper\n";
    for (size_t i = 0; i < band.grid.size(); ++i)
        out << detail::full_precision(band.grid[i]) << ',' << detail::full_precision(band.diff[i])
            << ',' << detail::full_precision(band.lower[i]) << ','
            << detail::full_precision(band.upper[i]) << '\n';
    return out.str();
}

} // namespace curveq
