#pragma once

#include <string>
#include <vector>

#include "mpskit/extraction.hpp"

namespace mpskit {

struct Group {
    std::string label;
    std::vector<double> values;
};

// Independent samples, one group per label.
struct GroupedSample {
    std::vector<Group> groups;
    void validate() const;  // >= 2 groups, each nonempty, finite values
};

// Complete blocks-by-treatments matrix (rows = matched blocks).
struct BlockMatrix {
    int blocks = 0;
    int treatments = 0;
    std::vector<double> values;  // row-major, blocks * treatments

    double at(int block, int treatment) const {
        return values[static_cast<std::size_t>(block) * treatments +
                      static_cast<std::size_t>(treatment)];
    }
    void validate() const;  // n >= 2, k >= 2, complete, finite
};

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    bool tie_corrected = false;  // ties were present, correction != 1
};

struct EffectEstimate {
    double coefficient = 0.0;  // area-ratio units
    double std_error = 0.0;
    double p_value = 1.0;
};

// Ranks 1..n; tied values share the mean of the ranks they cover.
std::vector<double> rank_midtie(const std::vector<double>& values);

// Upper tail of the chi-square distribution via the regularized incomplete
// gamma function. Relative error <= 1e-10 for df <= 200, x <= 1e4.
double chi2_sf(double x, int df);

// H over pooled mid-tie ranks with tie correction 1 - sum(t^3-t)/(N^3-N).
// All values identical -> DataError "degenerate sample".
TestResult kruskal_wallis(const GroupedSample& sample);

// Within-block mid-tie ranks with tie correction. Every block fully tied
// carries no ordering signal and yields statistic 0, p = 1.
TestResult friedman(const BlockMatrix& matrix);

// p_i' = min(1, m * p_i).
std::vector<double> bonferroni(const std::vector<double>& p_values);

// Least squares of area_ratio on an intercept, per-model indicators, and an
// incorrect-classification indicator; returns the incorrect coefficient with
// its standard error and two-sided normal p-value. Degenerate records and
// records without a correctness flag are ignored. Every model must contribute both
// correct and incorrect records, else the offending model is named.
EffectEstimate fit_size_model(const std::vector<MpsRecord>& records);

}  // namespace mpskit
