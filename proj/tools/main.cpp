#include <cstdint>
#include <exception>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "km2sls/cli.hpp"
#include "km2sls/errors.hpp"

namespace {

km2sls::OutputFormat to_format(const std::string& s) {
    return s == "json" ? km2sls::OutputFormat::json
                       : km2sls::OutputFormat::table;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Two-stage least squares for right-censored outcomes, weighted by "
        "Kaplan-Meier censoring probabilities"};
    app.require_subcommand(1);

    const CLI::Validator open_unit_interval(
        [](std::string& s) -> std::string {
            double v = 0;
            try {
                v = std::stod(s);
            } catch (...) {
                return std::string("value '") + s + "' is not a number";
            }
            if (!(v > 0.0 && v < 1.0)) {
                return "value must lie strictly between 0 and 1";
            }
            return {};
        },
        "FLOAT in (0,1)", "open_unit_interval");

    km2sls::FitRequest req;
    std::string fit_format = "table";
    auto* fit_cmd =
        app.add_subcommand("fit", "Fit the model to a CSV dataset");
    fit_cmd->add_option("--data", req.data_path, "CSV file with a header row")
        ->required();
    fit_cmd
        ->add_option("--outcome", req.outcome_col,
                     "column with the observed follow-up time")
        ->required();
    fit_cmd
        ->add_option("--status", req.status_col,
                     "column with the event indicator (1 event, 0 censored)")
        ->required();
    fit_cmd
        ->add_option("--endog", req.endog_cols,
                     "endogenous regressor columns")
        ->required();
    fit_cmd
        ->add_option("--instruments", req.instrument_cols,
                     "excluded instrument columns")
        ->required();
    fit_cmd->add_option("--exog", req.exog_cols,
                        "exogenous regressor columns (added to both sides)");
    fit_cmd->add_flag("--intercept", req.intercept,
                      "prepend a constant to regressors and instruments");
    fit_cmd->add_option("--alpha", req.alpha, "confidence level is 1 - alpha")
        ->check(open_unit_interval)
        ->capture_default_str();
    fit_cmd->add_option("--format", fit_format, "table or json")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();

    km2sls::McConfig mc;
    std::int64_t sim_n = 1000;
    std::optional<double> sim_rho;
    std::string sim_format = "table";
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Run the Monte Carlo study of the estimator");
    sim_cmd->add_option("--n", sim_n, "sample size per replication")
        ->check(CLI::Range(std::int64_t{10},
                           std::numeric_limits<std::int64_t>::max()))
        ->capture_default_str();
    sim_cmd->add_option("--reps", mc.reps, "number of replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sim_cmd->add_option("--seed", mc.dgp.seed, "RNG seed")
        ->capture_default_str();
    sim_cmd->add_option("--rho", sim_rho,
                        "censoring shift; censoring time is rho + Exp(1)");
    sim_cmd->add_option("--alpha", mc.alpha, "confidence level is 1 - alpha")
        ->check(open_unit_interval)
        ->capture_default_str();
    sim_cmd->add_option("--threads", mc.threads,
                        "worker threads (0 = all cores)")
        ->capture_default_str();
    sim_cmd->add_option("--format", sim_format, "table or json")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) {
            req.format = to_format(fit_format);
            const km2sls::FitReport report = km2sls::cmd_fit(req);
            std::cout << km2sls::format_report(report, req.format);
        } else {
            mc.dgp.n = static_cast<Eigen::Index>(sim_n);
            mc.dgp.rho = sim_rho;
            const km2sls::McSummary summary = km2sls::cmd_simulate(mc);
            std::cout << km2sls::format_summary(summary, mc,
                                                to_format(sim_format));
        }
        return 0;
    } catch (const km2sls::InvalidDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const km2sls::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
