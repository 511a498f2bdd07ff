#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "km2sls/simulation.hpp"
#include "km2sls/tsls.hpp"

namespace km2sls {

enum class OutputFormat { table, json };

// A parsed CSV file: header row plus raw string cells. Cells are converted
// to numbers only for the columns a request actually references, so unused
// text columns are fine.
struct CsvFile {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads comma-separated UTF-8 text with a mandatory header row. Every data
// row must have as many cells as the header. Throws InvalidDataError.
CsvFile read_csv(const std::string& path);
CsvFile read_csv(std::istream& in, const std::string& name);

// Writes a numeric table with 17 significant digits so a read-back
// reproduces the doubles exactly.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);

struct FitRequest {
    std::string data_path;
    std::string outcome_col;
    std::string status_col;
    std::vector<std::string> endog_cols;
    std::vector<std::string> instrument_cols;
    std::vector<std::string> exog_cols;
    bool intercept = false;
    double alpha = 0.05;
    OutputFormat format = OutputFormat::table;
};

// Builds the estimation sample from named columns. The design matrices are
//   x = [intercept? | endog | exog],  z = [intercept? | instruments | exog].
// coef_names, if given, receives one label per x column in that order.
Sample assemble_sample(const CsvFile& csv, const FitRequest& req,
                       std::vector<std::string>* coef_names = nullptr);

struct CoefficientRow {
    std::string name;
    double estimate;
    double std_error;
    double z_stat;
    double p_value;
    double ci_lower;
    double ci_upper;
};

struct FitReport {
    std::vector<CoefficientRow> coefficients;
    Eigen::Index n = 0;
    double censored_fraction = 0;
    double weight_sum = 0;
    double alpha = 0.05;
};

FitReport cmd_fit(const FitRequest& req);
McSummary cmd_simulate(const McConfig& cfg);

// Human-readable table (6 significant digits) or machine-readable JSON
// (full precision). Both are byte-deterministic for identical inputs.
std::string format_report(const FitReport& report, OutputFormat format);
std::string format_summary(const McSummary& summary, const McConfig& cfg,
                           OutputFormat format);

}  // namespace km2sls
