#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agburn/survey.hpp"

namespace agburn::econ {

// Stacked regression data after listwise deletion: outcome, named regressor
// columns (zero_tillage first by convention), and per-row fixed-effect and
// cluster identifiers.
struct DesignMatrix {
    std::vector<std::string> regressor_names;
    Eigen::MatrixXd X;  // n x k
    Eigen::VectorXd y;
    std::vector<std::string> fe_group;
    std::vector<std::string> cluster_group;

    void validate() const;
};

struct AbsorbedDesign {
    std::vector<std::string> regressor_names;
    Eigen::MatrixXd X;        // within-group demeaned
    Eigen::VectorXd y;        // within-group demeaned
    Eigen::VectorXd y_raw;    // retained rows, original scale
    std::vector<std::string> cluster_group;
    std::vector<Eigen::Index> retained_rows;
    int n_fe_groups = 0;
    int dropped_singletons = 0;
};

// Within-group demeaning of outcome and regressors; singleton groups are
// dropped (their count is recorded). The group intercepts are absorbed.
AbsorbedDesign fe_absorb(const DesignMatrix& design);

// Least-squares coefficients. Rank deficiency is an error naming a collinear
// column rather than a silent drop.
Eigen::VectorXd ols_coefficients(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const std::vector<std::string>& names);

struct VcovOptions {
    bool cr1_correction = true;  // G/(G-1) * (N-1)/(N-K)
    bool t_pvalues = true;       // t(G-1); false = standard normal
};

struct ClusterVcov {
    Eigen::MatrixXd vcov;
    Eigen::VectorXd se;
    Eigen::VectorXd p;
    double small_sample_factor = 1.0;
    int n_clusters = 0;
};

// Liang-Zeger sandwich over cluster score outer products. n_absorbed_params
// enters the N-K degrees-of-freedom term (0 when nothing was absorbed).
ClusterVcov cluster_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& coef,
                         const std::vector<std::string>& clusters,
                         int n_absorbed_params, const VcovOptions& opt = {});

double t_two_sided_p(double t, double df);

struct RegressionFit {
    std::vector<std::string> names;
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd p;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    bool r_squared_defined = true;  // false when the outcome has no variance
    int n_obs = 0;
    int n_clusters = 0;
    int n_fe_groups = 0;
    int dropped_singletons = 0;
    std::string fe_level;
    double dependent_mean = 0.0;
};

// Full FE + cluster pipeline on one design: absorb, solve, sandwich,
// R-squared on the raw outcome with the absorbed intercepts counted in K.
RegressionFit fit_fe_cluster(const DesignMatrix& design, const std::string& fe_level,
                             const VcovOptions& opt = {});

// The four Table-style specifications: bivariate, + household controls,
// + tractor, + plot controls.
struct LadderColumn {
    std::string label;
    std::vector<std::string> regressors;
};
const std::vector<LadderColumn>& regression_ladder();

struct RegressionTable {
    std::string outcome_label;
    std::vector<std::string> row_order;  // union of regressors, display order
    std::vector<RegressionFit> columns;
};

// Plot-level linear probability model of the survey burn indicator on zero
// tillage, village fixed effects, district clusters.
RegressionTable regress_eq1(const std::vector<survey::SurveyPlotRecord>& records,
                            const std::string& fe_level = "village",
                            const std::string& cluster_level = "district");

// Village-level remote-sensing burn fraction joined onto plot rows; district
// fixed effects by default. Rows from villages without a fraction are
// dropped (count reported through dropped_rows).
RegressionTable regress_eq2(const std::vector<survey::SurveyPlotRecord>& records,
                            const std::map<std::string, std::optional<double>>& village_fraction,
                            const std::string& fe_level = "district",
                            const std::string& cluster_level = "district",
                            int* dropped_rows = nullptr);

void write_regression_table_csv(const std::filesystem::path& path,
                                const RegressionTable& table);

struct CorrelationMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd r;  // NaN marks an undefined entry
};

// Pearson correlations with pairwise deletion; unit diagonal; zero-variance
// pairs come out NaN.
CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<std::optional<double>>>>& columns);

struct BivariateLine {
    double slope = 0.0;
    double intercept = 0.0;
};

// Least-squares line through (x, y); nullopt with fewer than two points or a
// constant x. Backs the fitted line in the scatter figure.
std::optional<BivariateLine> bivariate_line(const std::vector<double>& x,
                                            const std::vector<double>& y);

void write_correlation_csv(const std::filesystem::path& path, const CorrelationMatrix& m);

}  // namespace agburn::econ
