#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "subflow/cloud.hpp"

namespace subflow {

enum class CloudFormat { csv, ply, by_extension };

namespace detail {

inline bool parse_row(const std::string& line, std::vector<double>& out) {
    out.clear();
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (i < n) {
        while (i < n && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= n) break;
        std::size_t j = i;
        while (j < n && line[j] != ',') ++j;
        std::size_t end = j;
        while (end > i && (line[end - 1] == ' ' || line[end - 1] == '\t' ||
                           line[end - 1] == '\r'))
            --end;
        if (end == i) return false;
        double value = 0.0;
        const char* first = line.data() + i;
        const char* last = line.data() + end;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) return false;
        out.push_back(value);
        i = j + 1;
        if (j >= n) break;
    }
    return !out.empty();
}

inline PointCloud load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    bool header_allowed = true;
    Eigen::Index cols = -1;
    while (std::getline(in, line)) {
        ++lineno;
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
        if (blank) continue;
        std::vector<double> row;
        if (!parse_row(line, row)) {
            if (header_allowed) {  // one non-numeric header line is fine
                header_allowed = false;
                continue;
            }
            throw IoError(path + ": cannot parse row at line " +
                          std::to_string(lineno));
        }
        header_allowed = false;
        if (cols < 0) cols = Eigen::Index(row.size());
        if (Eigen::Index(row.size()) != cols)
            throw IoError(path + ": inconsistent column count at line " +
                          std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(path + ": no data rows");
    Mat pts(Eigen::Index(rows.size()), cols);
    for (Eigen::Index r = 0; r < pts.rows(); ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            pts(r, c) = rows[std::size_t(r)][std::size_t(c)];
    return PointCloud(std::move(pts));
}

inline PointCloud load_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line))
            throw IoError(path + ": unexpected end of file at line " +
                          std::to_string(lineno));
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        return line;
    };

    if (next_line() != "ply") throw IoError(path + ": missing ply magic");
    long vertex_count = -1;
    int xi = -1, yi = -1, zi = -1;
    int prop_index = 0;
    bool in_vertex_element = false;
    bool ascii = false;
    for (;;) {
        std::istringstream ls(next_line());
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
        } else if (tok == "comment") {
            continue;
        } else if (tok == "element") {
            std::string name;
            long count = 0;
            ls >> name >> count;
            in_vertex_element = name == "vertex";
            if (in_vertex_element) vertex_count = count;
        } else if (tok == "property") {
            if (!in_vertex_element) continue;
            std::string type, name;
            ls >> type >> name;
            if (type == "list") continue;
            if (name == "x") xi = prop_index;
            if (name == "y") yi = prop_index;
            if (name == "z") zi = prop_index;
            ++prop_index;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii) throw IoError(path + ": only ascii PLY is supported");
    if (vertex_count < 0) throw IoError(path + ": no vertex element");
    if (xi < 0 || yi < 0 || zi < 0)
        throw IoError(path + ": vertex element lacks x/y/z properties");

    Mat pts(vertex_count, 3);
    std::vector<double> fields;
    fields.reserve(std::size_t(prop_index));
    for (long v = 0; v < vertex_count; ++v) {
        std::istringstream ls(next_line());
        fields.clear();
        double value;
        while (ls >> value) fields.push_back(value);
        if (int(fields.size()) < prop_index)
            throw IoError(path + ": short vertex row at line " +
                          std::to_string(lineno));
        pts(v, 0) = fields[std::size_t(xi)];
        pts(v, 1) = fields[std::size_t(yi)];
        pts(v, 2) = fields[std::size_t(zi)];
    }
    return PointCloud(std::move(pts));
}

}  // namespace detail

inline PointCloud load_cloud(const std::string& path,
                             CloudFormat format = CloudFormat::by_extension) {
    if (format == CloudFormat::by_extension) {
        const auto dot = path.rfind('.');
        const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
        format = (ext == ".ply" || ext == ".PLY") ? CloudFormat::ply
                                                  : CloudFormat::csv;
    }
    return format == CloudFormat::ply ? detail::load_ply(path)
                                      : detail::load_csv(path);
}

inline void save_cloud_csv(const std::string& path, const Mat& pts) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    char buf[32];
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
        for (Eigen::Index c = 0; c < pts.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", pts(r, c));
            if (c) out << ',';
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace subflow
