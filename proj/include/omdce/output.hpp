#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "types.hpp"

namespace omdce {

// One rectangular result table. Doubles only; NaN marks "not tracked here"
// (masked g2 points and the like) and is written as "nan" / JSON null.
struct ResultTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_labels; // optional; must match rows when used
    std::vector<std::string> comments;

    void add_row(std::vector<double> r) {
        if (r.size() != columns.size())
            throw numeric_error("table " + name + ": row width " + std::to_string(r.size())
                                + " does not match " + std::to_string(columns.size())
                                + " columns");
        rows.push_back(std::move(r));
    }

    void add_row(const std::string& label, std::vector<double> r) {
        add_row(std::move(r));
        row_labels.push_back(label);
    }
};

namespace detail {

inline std::string format_cell(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace detail

// All files for one run live in <out>/<protocol>-<hash>/ where the hash is
// taken over the effective config minus the output location, so the same
// inputs keep the same directory name under any output root and re-runs
// produce byte-identical files. No timestamps anywhere.
class RunArchive {
  public:
    RunArchive(const ExperimentConfig& cfg) : echo_(serialize_config(cfg)) {
        ExperimentConfig id = cfg;
        id.effective.erase("output");
        dir_ = std::filesystem::path(cfg.out_dir)
               / (cfg.protocol + "-" + config_hash(serialize_config(id)));
        protocol_ = cfg.protocol;
    }

    const std::filesystem::path& dir() const { return dir_; }

    void add(ResultTable t) { tables_.push_back(std::move(t)); }

    void set_summary(const std::string& key, double value) {
        summary_.emplace_back(key, value);
    }

    void write() const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw io_error("cannot create output directory " + dir_.string()
                               + ": " + ec.message());
        write_file(dir_ / "config.cfg", echo_);
        for (const auto& t : tables_) {
            write_file(dir_ / (t.name + ".csv"), render_table(t, ','));
            write_file(dir_ / (t.name + ".dat"), render_table(t, ' '));
        }
        write_file(dir_ / "results.json", render_json());
    }

  private:
    static void write_file(const std::filesystem::path& p, const std::string& body) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw io_error("cannot open " + p.string() + " for writing");
        f << body;
        if (!f) throw io_error("write to " + p.string() + " failed");
    }

    static std::string render_table(const ResultTable& t, char sep) {
        const bool labeled = !t.row_labels.empty();
        if (labeled && t.row_labels.size() != t.rows.size())
            throw numeric_error("table " + t.name + ": row labels out of step with rows");
        std::string out = "# all quantities in units of omega_1 (hbar = omega_1 = 1)\n";
        for (const auto& c : t.comments) out += "# " + c + "\n";
        out += "#";
        if (labeled) out += " label" + std::string(1, sep);
        else out += " ";
        for (size_t i = 0; i < t.columns.size(); ++i)
            out += (i ? std::string(1, sep) : std::string()) + t.columns[i];
        out += "\n";
        for (size_t r = 0; r < t.rows.size(); ++r) {
            if (labeled) out += t.row_labels[r] + sep;
            for (size_t i = 0; i < t.rows[r].size(); ++i) {
                if (i) out += sep;
                out += detail::format_cell(t.rows[r][i]);
            }
            out += "\n";
        }
        return out;
    }

    std::string render_json() const {
        nlohmann::ordered_json j;
        j["protocol"] = protocol_;
        j["units"] = "omega_1";
        nlohmann::ordered_json summ = nlohmann::ordered_json::object();
        for (const auto& [k, v] : summary_)
            summ[k] = std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
        j["summary"] = summ;
        nlohmann::ordered_json tabs = nlohmann::ordered_json::object();
        for (const auto& t : tables_) {
            nlohmann::ordered_json jt;
            jt["columns"] = t.columns;
            if (!t.row_labels.empty()) jt["row_labels"] = t.row_labels;
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& row : t.rows) {
                nlohmann::ordered_json jr = nlohmann::ordered_json::array();
                for (double x : row)
                    jr.push_back(std::isnan(x) ? nlohmann::ordered_json() : nlohmann::ordered_json(x));
                rows.push_back(std::move(jr));
            }
            jt["rows"] = std::move(rows);
            tabs[t.name] = std::move(jt);
        }
        j["tables"] = std::move(tabs);
        return j.dump(2) + "\n";
    }

    std::filesystem::path dir_;
    std::string protocol_;
    std::string echo_;
    std::vector<ResultTable> tables_;
    std::vector<std::pair<std::string, double>> summary_;
};

} // namespace omdce
