#include "km2sls/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "km2sls/errors.hpp"
#include "km2sls/km.hpp"
#include "km2sls/stats.hpp"

namespace km2sls {

namespace {

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::size_t find_column(const CsvFile& csv, const std::string& name) {
    const auto it = std::find(csv.header.begin(), csv.header.end(), name);
    if (it == csv.header.end()) {
        throw InvalidDataError(csv.name + ": no column named '" + name + "'");
    }
    if (std::find(it + 1, csv.header.end(), name) != csv.header.end()) {
        throw InvalidDataError(csv.name + ": column '" + name +
                               "' appears more than once in the header");
    }
    return static_cast<std::size_t>(it - csv.header.begin());
}

double parse_cell(const CsvFile& csv, std::size_t row, std::size_t col) {
    const std::string cell = trimmed(csv.rows[row][col]);
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InvalidDataError(csv.name + ": cell in row " +
                               std::to_string(row + 1) + ", column '" +
                               csv.header[col] + "' is not numeric: '" +
                               csv.rows[row][col] + "'");
    }
    return value;
}

std::string fmt6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CsvFile read_csv(std::istream& in, const std::string& name) {
    CsvFile out;
    out.name = name;
    std::string line;
    bool seen_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!seen_header && line.size() >= 3 &&
            line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (!seen_header) {
            for (auto& c : cells) c = trimmed(c);
            out.header = std::move(cells);
            seen_header = true;
            continue;
        }
        if (cells.size() != out.header.size()) {
            throw InvalidDataError(
                name + ": line " + std::to_string(lineno) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(out.header.size()));
        }
        out.rows.push_back(std::move(cells));
    }
    if (!seen_header) {
        throw InvalidDataError(name + ": no header row");
    }
    if (out.rows.empty()) {
        throw InvalidDataError(name + ": no data rows");
    }
    return out;
}

CsvFile read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidDataError("cannot open '" + path + "' for reading");
    }
    return read_csv(in, path);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns) {
    if (header.size() != columns.size()) {
        throw InvalidDataError("write_csv: header/column count mismatch");
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << (c ? "," : "") << header[c];
    }
    out << "\n";
    const Eigen::Index rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != rows) {
            throw InvalidDataError("write_csv: ragged columns");
        }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            out << (c ? "," : "") << fmt17(columns[c][r]);
        }
        out << "\n";
    }
}

Sample assemble_sample(const CsvFile& csv, const FitRequest& req,
                       std::vector<std::string>* coef_names) {
    if (req.endog_cols.empty()) {
        throw InvalidDataError("no endogenous regressor columns given");
    }
    if (req.instrument_cols.empty()) {
        throw InvalidDataError("no instrument columns given");
    }
    // Every role must name a distinct column.
    std::vector<std::string> all{req.outcome_col, req.status_col};
    all.insert(all.end(), req.endog_cols.begin(), req.endog_cols.end());
    all.insert(all.end(), req.instrument_cols.begin(),
               req.instrument_cols.end());
    all.insert(all.end(), req.exog_cols.begin(), req.exog_cols.end());
    std::set<std::string> seen;
    for (const auto& name : all) {
        if (!seen.insert(name).second) {
            throw InvalidDataError("column '" + name +
                                   "' is used in more than one role");
        }
    }

    const std::size_t y_idx = find_column(csv, req.outcome_col);
    const std::size_t d_idx = find_column(csv, req.status_col);
    std::vector<std::size_t> endog_idx, inst_idx, exog_idx;
    for (const auto& c : req.endog_cols) endog_idx.push_back(find_column(csv, c));
    for (const auto& c : req.instrument_cols)
        inst_idx.push_back(find_column(csv, c));
    for (const auto& c : req.exog_cols) exog_idx.push_back(find_column(csv, c));

    const Eigen::Index icpt = req.intercept ? 1 : 0;
    const Eigen::Index k =
        icpt + static_cast<Eigen::Index>(endog_idx.size() + exog_idx.size());
    const Eigen::Index l =
        icpt + static_cast<Eigen::Index>(inst_idx.size() + exog_idx.size());
    if (l < k) {
        throw InvalidDataError(
            "model is under-identified: " + std::to_string(k) +
            " regressor columns but only " + std::to_string(l) +
            " instrument columns");
    }

    const Eigen::Index n = static_cast<Eigen::Index>(csv.rows.size());
    Eigen::VectorXd y(n);
    std::vector<std::uint8_t> delta(n);
    Eigen::MatrixXd x(n, k);
    Eigen::MatrixXd z(n, l);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = static_cast<std::size_t>(r);
        y[r] = parse_cell(csv, row, y_idx);
        const double d = parse_cell(csv, row, d_idx);
        if (d != 0.0 && d != 1.0) {
            throw InvalidDataError(csv.name + ": status in row " +
                                   std::to_string(row + 1) +
                                   " must be 0 or 1, got '" +
                                   csv.rows[row][d_idx] + "'");
        }
        delta[r] = d == 1.0 ? 1 : 0;
        Eigen::Index xc = 0;
        Eigen::Index zc = 0;
        if (req.intercept) {
            x(r, xc++) = 1.0;
            z(r, zc++) = 1.0;
        }
        for (const auto c : endog_idx) x(r, xc++) = parse_cell(csv, row, c);
        for (const auto c : inst_idx) z(r, zc++) = parse_cell(csv, row, c);
        for (const auto c : exog_idx) {
            const double v = parse_cell(csv, row, c);
            x(r, xc++) = v;
            z(r, zc++) = v;
        }
    }

    if (coef_names) {
        coef_names->clear();
        if (req.intercept) coef_names->push_back("intercept");
        for (const auto& c : req.endog_cols) coef_names->push_back(c);
        for (const auto& c : req.exog_cols) coef_names->push_back(c);
    }
    return Sample(std::move(y), std::move(delta), std::move(x), std::move(z));
}

FitReport cmd_fit(const FitRequest& req) {
    const CsvFile csv = read_csv(req.data_path);
    std::vector<std::string> names;
    const Sample sample = assemble_sample(csv, req, &names);
    const TwoSlsFit f = fit(sample, req.alpha);
    const double weight_sum = km_weights(sort_by_outcome(sample)).sum();

    FitReport report;
    report.n = sample.n();
    report.censored_fraction = sample.censored_fraction();
    report.weight_sum = weight_sum;
    report.alpha = req.alpha;
    for (Eigen::Index j = 0; j < f.beta.size(); ++j) {
        CoefficientRow row;
        row.name = names[static_cast<std::size_t>(j)];
        row.estimate = f.beta[j];
        row.std_error = f.se[j];
        if (f.se[j] > 0.0) {
            row.z_stat = f.beta[j] / f.se[j];
        } else {
            row.z_stat = f.beta[j] == 0.0
                             ? 0.0
                             : std::numeric_limits<double>::infinity() *
                                   (f.beta[j] > 0 ? 1.0 : -1.0);
        }
        row.p_value = two_sided_p_value(row.z_stat);
        row.ci_lower = f.ci_lower[j];
        row.ci_upper = f.ci_upper[j];
        report.coefficients.push_back(std::move(row));
    }
    return report;
}

McSummary cmd_simulate(const McConfig& cfg) { return run_monte_carlo(cfg); }

std::string format_report(const FitReport& report, OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j;
        j["n"] = report.n;
        j["censored_fraction"] = report.censored_fraction;
        j["weight_sum"] = report.weight_sum;
        j["alpha"] = report.alpha;
        j["coefficients"] = nlohmann::ordered_json::array();
        for (const auto& c : report.coefficients) {
            nlohmann::ordered_json row;
            row["term"] = c.name;
            row["estimate"] = c.estimate;
            row["std_error"] = c.std_error;
            row["z_value"] = c.z_stat;
            row["p_value"] = c.p_value;
            row["ci_lower"] = c.ci_lower;
            row["ci_upper"] = c.ci_upper;
            j["coefficients"].push_back(std::move(row));
        }
        return j.dump(2) + "\n";
    }

    std::size_t name_width = 4;
    for (const auto& c : report.coefficients) {
        name_width = std::max(name_width, c.name.size());
    }
    std::ostringstream os;
    os << "n = " << report.n
       << "   censored = " << fmt6(report.censored_fraction)
       << "   weight sum = " << fmt6(report.weight_sum)
       << "   alpha = " << fmt6(report.alpha) << "\n\n";
    os << std::left << std::setw(static_cast<int>(name_width) + 2) << "term"
       << std::right << std::setw(12) << "estimate" << std::setw(12)
       << "std error" << std::setw(12) << "z value" << std::setw(12)
       << "p value" << std::setw(12) << "ci lower" << std::setw(12)
       << "ci upper" << "\n";
    for (const auto& c : report.coefficients) {
        os << std::left << std::setw(static_cast<int>(name_width) + 2)
           << c.name << std::right << std::setw(12) << fmt6(c.estimate)
           << std::setw(12) << fmt6(c.std_error) << std::setw(12)
           << fmt6(c.z_stat) << std::setw(12) << fmt6(c.p_value)
           << std::setw(12) << fmt6(c.ci_lower) << std::setw(12)
           << fmt6(c.ci_upper) << "\n";
    }
    return os.str();
}

std::string format_summary(const McSummary& summary, const McConfig& cfg,
                           OutputFormat format) {
    if (format == OutputFormat::json) {
        nlohmann::ordered_json j;
        j["n"] = cfg.dgp.n;
        j["reps"] = summary.reps;
        j["seed"] = cfg.dgp.seed;
        if (cfg.dgp.rho) {
            j["rho"] = *cfg.dgp.rho;
        } else {
            j["rho"] = nullptr;
        }
        j["alpha"] = cfg.alpha;
        j["bias"] = summary.bias;
        j["variance"] = summary.variance;
        j["mse"] = summary.mse;
        j["coverage"] = summary.coverage;
        j["width"] = summary.mean_ci_width;
        j["pct_significant"] = summary.pct_significant;
        j["n_failed"] = summary.n_failed;
        return j.dump(2) + "\n";
    }

    std::ostringstream os;
    os << "n = " << cfg.dgp.n << "   reps = " << summary.reps
       << "   seed = " << cfg.dgp.seed << "   rho = "
       << (cfg.dgp.rho ? fmt6(*cfg.dgp.rho) : std::string("none"))
       << "   alpha = " << fmt6(cfg.alpha) << "\n\n";
    const auto line = [&os](const char* label, double v) {
        os << std::left << std::setw(18) << label << fmt6(v) << "\n";
    };
    line("bias", summary.bias);
    line("variance", summary.variance);
    line("mse", summary.mse);
    line("coverage", summary.coverage);
    line("width", summary.mean_ci_width);
    line("pct significant", summary.pct_significant);
    os << std::left << std::setw(18) << "n failed" << summary.n_failed << "\n";
    return os.str();
}

}  // namespace km2sls
