#pragma once

// Report emission. Every analysis produces a ReportBundle holding
//   machine   flat key=value text, full precision, fixed key order
//   human     aligned table, 6 significant digits
//   band_csv  optional plot-ready band export
// The two text forms print the same underlying values.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace curveq {

struct ReportBundle {
    std::string machine;
    std::string human;
    std::string band_csv;  // empty unless the command produced a band
};

class ReportWriter {
public:
    explicit ReportWriter(std::string title) : title_(std::move(title)) {}

    void add(const std::string& key, const std::string& value) {
        rows_.push_back({key, value, value});
    }

    void add(const std::string& key, double value) {
        rows_.push_back({key, fmt(value, "%.17g"), fmt(value, "%.6g")});
    }

    void add(const std::string& key, long value) {
        rows_.push_back({key, std::to_string(value), std::to_string(value)});
    }

    void add(const std::string& key, int value) { add(key, static_cast<long>(value)); }

    void add(const std::string& key, bool value) {
        add(key, std::string(value ? "true" : "false"));
    }

    void add(const std::string& key, const std::vector<double>& values) {
        std::string machine, human;
        for (size_t i = 0; i < values.size(); ++i) {
            if (i) {
                machine += ',';
                human += ", ";
            }
            machine += fmt(values[i], "%.17g");
            human += fmt(values[i], "%.6g");
        }
        rows_.push_back({key, machine, human});
    }

    void section(const std::string& name) { rows_.push_back({"", "", name}); }

    std::string machine_text() const {
        std::ostringstream out;
        for (const auto& row : rows_)
            if (!row.key.empty()) out << row.key << '=' << row.machine << '\n';
        return out.str();
    }

    std::string human_text() const {
        size_t width = 0;
        for (const auto& row : rows_)
            if (!row.key.empty()) width = std::max(width, row.key.size());
        std::ostringstream out;
        out << "== " << title_ << " ==\n";
        for (const auto& row : rows_) {
            if (row.key.empty()) {
                out << "-- " << row.human << " --\n";
            } else {
                out << "  " << row.key << std::string(width - row.key.size() + 2, ' ')
                    << row.human << '\n';
            }
        }
        return out.str();
    }

private:
    struct Row {
        std::string key;
        std::string machine;
        std::string human;
    };

    static std::string fmt(double v, const char* spec) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), spec, v);
        return buf;
    }

    std::string title_;
    std::vector<Row> rows_;
};

} // namespace curveq
