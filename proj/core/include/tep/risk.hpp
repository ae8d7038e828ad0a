#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tep/compensation.hpp"
#include "tep/welfare.hpp"

namespace tep {

/// L = max(0, -ntw) per scenario.
std::vector<double> loss(const std::vector<double>& ntw);

/// Rockafellar-Uryasev CVaR at level alpha of a discrete distribution.
double cvar(const std::vector<double>& values, const std::vector<double>& probabilities, double alpha);

double expectation(const std::vector<double>& values, const std::vector<double>& probabilities);
/// Probability-weighted population standard deviation.
double weighted_std(const std::vector<double>& values, const std::vector<double>& probabilities);
/// Probability-weighted Pearson coefficient; throws DegenerateInputError on zero variance.
double correlation(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& probabilities);

enum class CvarBasis {
    Loss,            // CVaR of max(0, -NTW)
    NegatedWelfare,  // CVaR of -NTW, gains included
};

struct RiskRow {
    std::string mechanism;
    std::string country;
    double std_c = 0.0;
    double std_ntw = 0.0;
    double p_loss = 0.0;
    double e_loss = 0.0;
    double cvar_loss = 0.0;
};

std::vector<RiskRow> summary(const DeltaWelfare& delta, const std::vector<CompensationSchedule>& schedules,
                             double alpha = 0.8, CvarBasis basis = CvarBasis::Loss);

struct CorrelationEntry {
    std::string table;
    std::string row;
    std::string column;
    double value = 0.0;
};

/// Country-by-country welfare correlations, welfare vs. end prices of the line,
/// and welfare vs. flow / flow value. Undefined coefficients are skipped.
std::vector<CorrelationEntry> correlation_tables(const DeltaWelfare& delta, const LineObservables& obs,
                                                 const std::vector<std::string>& countries);

struct QuantileRow {
    std::string quantity;  // "compensation" or "ntw"
    std::string mechanism;
    std::string country;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Probability-weighted five-number summary (lower quantile convention).
QuantileRow five_numbers(const std::vector<double>& values, const std::vector<double>& probabilities);

std::vector<QuantileRow> quantiles(const DeltaWelfare& delta, const std::vector<CompensationSchedule>& schedules);

void write_risk_csv(std::ostream& out, const std::vector<RiskRow>& rows);
void write_correlations_csv(std::ostream& out, const std::vector<CorrelationEntry>& rows);
void write_quantiles_csv(std::ostream& out, const std::vector<QuantileRow>& rows);

}  // namespace tep
