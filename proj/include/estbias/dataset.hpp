#pragma once

// Dataset files: CSV with header `id,estimated,actual[,estimate_type]`.

#include <array>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "estbias/errors.hpp"
#include "estbias/measures.hpp"
#include "estbias/text.hpp"

namespace estbias {

enum class InvalidRows { Reject, Skip };

struct Dataset {
    std::vector<EstimationRecord> records;
    std::size_t skipped = 0;
    bool has_type_column = false;
    std::vector<std::string> warnings;

    /// True when at least one record carries a type other than Unknown.
    bool has_types() const {
        for (const auto& r : records) {
            if (r.estimate_type != EstimateType::Unknown) return true;
        }
        return false;
    }
};

namespace detail {

inline std::string at_line(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

}  // namespace detail

inline Dataset parse_dataset(std::istream& in, std::string_view source, InvalidRows mode = InvalidRows::Reject) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;

    // Header
    std::string header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!text::trim(line).empty()) {
            header = line;
            break;
        }
    }
    if (header.empty()) throw ParseError(std::string(source) + ": empty file, header required");
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);

    char sep = ',';
    if (header.find(',') == std::string::npos && header.find(';') != std::string::npos) {
        sep = ';';
        ds.warnings.push_back(std::string(source) + ": semicolon-delimited file detected; expected commas");
    }

    constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
    std::array<std::size_t, 4> col{kMissing, kMissing, kMissing, kMissing};  // id, estimated, actual, type
    constexpr std::array<std::string_view, 4> names{"id", "estimated", "actual", "estimate_type"};
    const auto header_cells = text::split(header, sep);
    for (std::size_t i = 0; i < header_cells.size(); ++i) {
        const auto name = text::unquote(header_cells[i]);
        bool known = false;
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (detail::iequals(name, names[k])) {
                if (col[k] != kMissing) throw ParseError(detail::at_line(source, line_no) + "duplicate column '" + std::string(name) + "'");
                col[k] = i;
                known = true;
            }
        }
        if (!known) throw ParseError(detail::at_line(source, line_no) + "unknown column '" + std::string(name) + "'");
    }
    for (std::size_t k = 0; k < 3; ++k) {
        if (col[k] == kMissing) {
            throw ParseError(detail::at_line(source, line_no) + "header must contain id,estimated,actual[,estimate_type]");
        }
    }
    ds.has_type_column = col[3] != kMissing;

    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(line, sep);
        std::string problem;
        EstimationRecord r;
        if (cells.size() != header_cells.size()) {
            problem = "expected " + std::to_string(header_cells.size()) + " fields, found " + std::to_string(cells.size());
        } else {
            r.id = std::string(text::unquote(cells[col[0]]));
            const auto est = text::parse_double(text::unquote(cells[col[1]]));
            const auto act = text::parse_double(text::unquote(cells[col[2]]));
            if (!est || !act) {
                problem = "estimated/actual is not a number";
            } else {
                r.estimated = *est;
                r.actual = *act;
                if (!is_valid(r)) problem = "estimated and actual must be finite and > 0";
            }
            if (problem.empty() && ds.has_type_column) {
                const auto t = parse_estimate_type(text::unquote(cells[col[3]]));
                if (!t) problem = "estimate_type must be one of mean, median, mode, unknown";
                else r.estimate_type = *t;
            }
        }
        if (!problem.empty()) {
            if (mode == InvalidRows::Reject) {
                throw ParseError(detail::at_line(source, line_no) + problem + " (row: '" + std::string(text::trim(line)) + "')");
            }
            ++ds.skipped;
            continue;
        }
        ds.records.push_back(std::move(r));
    }
    if (ds.records.empty()) throw ParseError(std::string(source) + ": no valid records");
    return ds;
}

inline Dataset load_dataset(const std::string& path, InvalidRows mode = InvalidRows::Reject) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return parse_dataset(in, path, mode);
}

}  // namespace estbias
