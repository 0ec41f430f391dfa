#include "mpskit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "mpskit/errors.hpp"

namespace mpskit {

void GroupedSample::validate() const {
    if (groups.size() < 2) throw DataError("need at least two groups");
    for (const Group& g : groups) {
        if (g.values.empty()) throw DataError("group '" + g.label + "' is empty");
        for (double v : g.values) {
            if (!std::isfinite(v)) {
                throw DataError("group '" + g.label + "' has a non-finite value");
            }
        }
    }
}

void BlockMatrix::validate() const {
    if (blocks < 2 || treatments < 2) {
        throw DataError("block matrix needs >= 2 blocks and >= 2 treatments");
    }
    if (values.size() != static_cast<std::size_t>(blocks) * static_cast<std::size_t>(treatments)) {
        throw DataError("block matrix is incomplete");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("block matrix has a non-finite value");
    }
}

std::vector<double> rank_midtie(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j share the mean of ranks i+1..j+1.
        const double mean_rank = static_cast<double>(i + j + 2) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

// Sum of t^3 - t over runs of equal values, plus a flag for any tie at all.
std::pair<double, bool> tie_term(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    bool any = false;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1.0) {
            any = true;
            total += t * t * t - t;
        }
        i = j + 1;
    }
    return {total, any};
}

double lower_gamma_series(double a, double x) {
    // P(a, x) via the series; converges for x < a + 1.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 1000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double upper_gamma_cf(double a, double x) {
    // Q(a, x) via the modified Lentz continued fraction; for x >= a + 1.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_sf(double x, int df) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw DataError("chi2_sf needs x >= 0");
    if (df < 1) throw DataError("chi2_sf needs df >= 1");
    if (x == 0.0) return 1.0;
    const double a = static_cast<double>(df) / 2.0;
    const double half = x / 2.0;
    if (half < a + 1.0) return 1.0 - lower_gamma_series(a, half);
    return upper_gamma_cf(a, half);
}

TestResult kruskal_wallis(const GroupedSample& sample) {
    sample.validate();
    std::vector<double> pooled;
    for (const Group& g : sample.groups) {
        pooled.insert(pooled.end(), g.values.begin(), g.values.end());
    }
    const double n_total = static_cast<double>(pooled.size());
    const std::vector<double> ranks = rank_midtie(pooled);

    double h = 0.0;
    std::size_t offset = 0;
    for (const Group& g : sample.groups) {
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < g.values.size(); ++i) rank_sum += ranks[offset + i];
        offset += g.values.size();
        h += rank_sum * rank_sum / static_cast<double>(g.values.size());
    }
    h = 12.0 / (n_total * (n_total + 1.0)) * h - 3.0 * (n_total + 1.0);

    const auto [ties, any_tie] = tie_term(pooled);
    const double correction = 1.0 - ties / (n_total * n_total * n_total - n_total);
    if (correction <= 0.0) throw DataError("degenerate sample: all values identical");
    TestResult result;
    result.statistic = std::max(0.0, h / correction);
    result.df = static_cast<int>(sample.groups.size()) - 1;
    result.p_value = chi2_sf(result.statistic, result.df);
    result.tie_corrected = any_tie;
    return result;
}

TestResult friedman(const BlockMatrix& matrix) {
    matrix.validate();
    const int n = matrix.blocks;
    const int k = matrix.treatments;
    std::vector<double> column_rank_sums(static_cast<std::size_t>(k), 0.0);
    double ties = 0.0;
    bool any_tie = false;
    for (int block = 0; block < n; ++block) {
        std::vector<double> row(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] = matrix.at(block, j);
        const std::vector<double> ranks = rank_midtie(row);
        for (int j = 0; j < k; ++j) column_rank_sums[static_cast<std::size_t>(j)] += ranks[static_cast<std::size_t>(j)];
        const auto [block_ties, block_any] = tie_term(row);
        ties += block_ties;
        any_tie = any_tie || block_any;
    }

    double sum_sq = 0.0;
    for (double r : column_rank_sums) sum_sq += r * r;
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    const double raw = 12.0 / (dn * dk * (dk + 1.0)) * sum_sq - 3.0 * dn * (dk + 1.0);
    const double correction = 1.0 - ties / (dn * dk * (dk * dk - 1.0));

    TestResult result;
    result.df = k - 1;
    result.tie_corrected = any_tie;
    if (correction <= 0.0) {
        // Every block fully tied: no ordering signal anywhere.
        result.statistic = 0.0;
        result.p_value = 1.0;
        return result;
    }
    result.statistic = std::max(0.0, raw / correction);
    result.p_value = chi2_sf(result.statistic, result.df);
    return result;
}

std::vector<double> bonferroni(const std::vector<double>& p_values) {
    const double m = static_cast<double>(p_values.size());
    std::vector<double> corrected;
    corrected.reserve(p_values.size());
    for (double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("p-value outside [0, 1]");
        corrected.push_back(std::min(1.0, m * p));
    }
    return corrected;
}

EffectEstimate fit_size_model(const std::vector<MpsRecord>& records) {
    // model label -> (correct count, incorrect count); ascending model order
    // fixes the dummy-column layout.
    std::vector<const MpsRecord*> rows;
    std::map<std::string, std::pair<int, int>> tally;
    for (const MpsRecord& r : records) {
        if (r.degenerate || !r.correct.has_value()) continue;
        rows.push_back(&r);
        auto& [n_correct, n_incorrect] = tally[r.model_id];
        (*r.correct ? n_correct : n_incorrect) += 1;
    }
    if (tally.size() < 2) throw DataError("size model needs records from at least two models");
    for (const auto& [model, counts] : tally) {
        if (counts.first == 0) throw DataError("model '" + model + "' has only incorrect records");
        if (counts.second == 0) throw DataError("model '" + model + "' has only correct records");
    }

    std::vector<std::string> models;
    for (const auto& [model, counts] : tally) models.push_back(model);
    std::map<std::string, int> model_column;
    for (std::size_t i = 1; i < models.size(); ++i) {
        model_column[models[i]] = static_cast<int>(i);  // column 1..M-1; models[0] is baseline
    }

    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(models.size()) + 1;  // intercept + (M-1) dummies + incorrect
    if (n <= p) throw DataError("size model needs more records than parameters");
    const int incorrect_col = p - 1;

    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, p);
    Eigen::VectorXd response(n);
    for (int i = 0; i < n; ++i) {
        const MpsRecord& r = *rows[static_cast<std::size_t>(i)];
        design(i, 0) = 1.0;
        const auto it = model_column.find(r.model_id);
        if (it != model_column.end()) design(i, it->second) = 1.0;
        design(i, incorrect_col) = *r.correct ? 0.0 : 1.0;
        response(i) = r.area_ratio;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < p) throw DataError("size model design matrix is rank-deficient");
    const Eigen::VectorXd beta = qr.solve(response);
    const Eigen::VectorXd residuals = response - design * beta;
    const double rss = residuals.squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - p);
    const Eigen::MatrixXd xtx_inverse =
        (design.transpose() * design).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    EffectEstimate estimate;
    estimate.coefficient = beta(incorrect_col);
    estimate.std_error = std::sqrt(std::max(0.0, sigma2 * xtx_inverse(incorrect_col, incorrect_col)));
    if (estimate.std_error > 0.0) {
        const double z = estimate.coefficient / estimate.std_error;
        estimate.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
    } else {
        estimate.p_value = estimate.coefficient == 0.0 ? 1.0 : 0.0;
    }
    return estimate;
}

}  // namespace mpskit
