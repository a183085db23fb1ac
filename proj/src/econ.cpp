#include "agburn/econ.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include <boost/math/distributions/students_t.hpp>

namespace fs = std::filesystem;

namespace agburn::econ {

void DesignMatrix::validate() const {
    const Eigen::Index n = X.rows();
    if (y.size() != n || static_cast<Eigen::Index>(fe_group.size()) != n ||
        static_cast<Eigen::Index>(cluster_group.size()) != n)
        throw ValidationError("design: row counts disagree");
    if (static_cast<Eigen::Index>(regressor_names.size()) != X.cols())
        throw ValidationError("design: regressor names do not match the matrix");
    if (!X.allFinite() || !y.allFinite())
        throw ValidationError("design: missing cells must be deleted listwise upstream");
    std::set<std::string> fe(fe_group.begin(), fe_group.end());
    if (fe.size() < 2) throw ValidationError("design: need at least 2 fixed-effect groups");
    std::set<std::string> cl(cluster_group.begin(), cluster_group.end());
    if (cl.size() < 2) throw ValidationError("design: need at least 2 clusters");
}

AbsorbedDesign fe_absorb(const DesignMatrix& design) {
    const Eigen::Index n = design.X.rows();
    const Eigen::Index k = design.X.cols();
    if (design.y.size() != n || static_cast<Eigen::Index>(design.fe_group.size()) != n)
        throw ValidationError("fe_absorb: row counts disagree");

    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[design.fe_group[i]].push_back(i);

    AbsorbedDesign out;
    out.regressor_names = design.regressor_names;
    for (const auto& [id, rows] : groups) {
        if (rows.size() == 1) {
            ++out.dropped_singletons;
            continue;
        }
        for (Eigen::Index i : rows) out.retained_rows.push_back(i);
        ++out.n_fe_groups;
    }
    if (out.retained_rows.empty())
        throw ValidationError("fe_absorb: every fixed-effect group is a singleton");
    std::sort(out.retained_rows.begin(), out.retained_rows.end());

    const Eigen::Index m = static_cast<Eigen::Index>(out.retained_rows.size());
    out.X.resize(m, k);
    out.y.resize(m);
    out.y_raw.resize(m);
    out.cluster_group.reserve(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::Index i = out.retained_rows[j];
        out.X.row(j) = design.X.row(i);
        out.y(j) = design.y(i);
        out.y_raw(j) = design.y(i);
        out.cluster_group.push_back(design.cluster_group[i]);
    }

    // Demean within each retained group.
    std::map<std::string, std::vector<Eigen::Index>> retained_groups;
    for (Eigen::Index j = 0; j < m; ++j)
        retained_groups[design.fe_group[out.retained_rows[j]]].push_back(j);
    for (const auto& [id, rows] : retained_groups) {
        const double inv = 1.0 / static_cast<double>(rows.size());
        Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(k);
        double y_mean = 0.0;
        for (Eigen::Index j : rows) {
            x_mean += out.X.row(j);
            y_mean += out.y(j);
        }
        x_mean *= inv;
        y_mean *= inv;
        for (Eigen::Index j : rows) {
            out.X.row(j) -= x_mean;
            out.y(j) -= y_mean;
        }
    }
    return out;
}

Eigen::VectorXd ols_coefficients(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const std::vector<std::string>& names) {
    if (X.rows() < X.cols())
        throw ValidationError("ols: fewer rows (" + std::to_string(X.rows()) +
                              ") than regressors (" + std::to_string(X.cols()) + ")");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols()) {
        // The permutation puts the dependent columns last.
        Eigen::Index bad = qr.colsPermutation().indices()(X.cols() - 1);
        std::string name = bad < static_cast<Eigen::Index>(names.size())
                               ? names[bad]
                               : ("column " + std::to_string(bad));
        throw ValidationError("ols: regressor matrix is rank deficient; '" + name +
                              "' is collinear");
    }
    return qr.solve(y);
}

double t_two_sided_p(double t, double df) {
    if (std::isnan(t)) return std::nan("");
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

namespace {

double normal_two_sided_p(double z) {
    if (std::isinf(z)) return 0.0;
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}  // namespace

ClusterVcov cluster_vcov(const Eigen::MatrixXd& X, const Eigen::VectorXd& residuals,
                         const Eigen::VectorXd& coef,
                         const std::vector<std::string>& clusters,
                         int n_absorbed_params, const VcovOptions& opt) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (residuals.size() != n || static_cast<Eigen::Index>(clusters.size()) != n)
        throw ValidationError("cluster_vcov: row counts disagree");

    std::map<std::string, std::vector<Eigen::Index>> by_cluster;
    for (Eigen::Index i = 0; i < n; ++i) by_cluster[clusters[i]].push_back(i);
    const int g = static_cast<int>(by_cluster.size());
    if (g < 2) throw ValidationError("cluster_vcov: need at least 2 clusters");

    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k));

    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (const auto& [id, rows] : by_cluster) {
        Eigen::VectorXd score = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i : rows) score += X.row(i).transpose() * residuals(i);
        meat += score * score.transpose();
    }

    double c = 1.0;
    if (opt.cr1_correction) {
        double total_k = static_cast<double>(k + n_absorbed_params);
        c = (static_cast<double>(g) / (g - 1)) *
            ((static_cast<double>(n) - 1.0) / (static_cast<double>(n) - total_k));
    }

    ClusterVcov out;
    out.vcov = c * (bread * meat * bread);
    out.small_sample_factor = c;
    out.n_clusters = g;
    out.se.resize(k);
    out.p.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        double v = out.vcov(j, j);
        out.se(j) = v > 0.0 ? std::sqrt(v) : 0.0;
        if (out.se(j) == 0.0) {
            out.p(j) = coef(j) == 0.0 ? 1.0 : 0.0;
        } else {
            double t = coef(j) / out.se(j);
            out.p(j) = opt.t_pvalues ? t_two_sided_p(t, g - 1) : normal_two_sided_p(t);
        }
    }
    return out;
}

RegressionFit fit_fe_cluster(const DesignMatrix& design, const std::string& fe_level,
                             const VcovOptions& opt) {
    design.validate();
    AbsorbedDesign ad = fe_absorb(design);

    RegressionFit fit;
    fit.names = ad.regressor_names;
    fit.fe_level = fe_level;
    fit.n_obs = static_cast<int>(ad.X.rows());
    fit.n_fe_groups = ad.n_fe_groups;
    fit.dropped_singletons = ad.dropped_singletons;

    fit.coef = ols_coefficients(ad.X, ad.y, ad.regressor_names);
    Eigen::VectorXd residuals = ad.y - ad.X * fit.coef;

    ClusterVcov v = cluster_vcov(ad.X, residuals, fit.coef, ad.cluster_group,
                                 ad.n_fe_groups, opt);
    fit.se = v.se;
    fit.p = v.p;
    fit.n_clusters = v.n_clusters;

    const double n = static_cast<double>(fit.n_obs);
    fit.dependent_mean = ad.y_raw.mean();
    double sst = (ad.y_raw.array() - fit.dependent_mean).square().sum();
    double ssr = residuals.squaredNorm();
    if (sst > 0.0) {
        // The absorbed group intercepts count as explanatory, so R-squared is
        // taken against the raw outcome.
        fit.r_squared = 1.0 - ssr / sst;
        double total_k = static_cast<double>(ad.X.cols() + ad.n_fe_groups);
        fit.adj_r_squared = n > total_k
                                ? 1.0 - (1.0 - fit.r_squared) * (n - 1.0) / (n - total_k)
                                : std::nan("");
    } else {
        fit.r_squared = 0.0;
        fit.adj_r_squared = 0.0;
        fit.r_squared_defined = false;
    }
    return fit;
}

const std::vector<LadderColumn>& regression_ladder() {
    static const std::vector<LadderColumn> ladder = {
        {"(1)", {"zero_tillage"}},
        {"(2)",
         {"zero_tillage", "hh_size", "head_male", "head_age", "head_secondary_edu",
          "hindu", "scheduled_caste"}},
        {"(3)",
         {"zero_tillage", "hh_size", "head_male", "head_age", "head_secondary_edu",
          "hindu", "scheduled_caste", "tractor"}},
        {"(4)",
         {"zero_tillage", "hh_size", "head_male", "head_age", "head_secondary_edu",
          "hindu", "scheduled_caste", "tractor", "plot_area", "plot_distance", "esw",
          "plot_owned", "fertilizer", "outside_labor"}},
    };
    return ladder;
}

namespace {

using Getter = std::function<std::optional<double>(const survey::SurveyPlotRecord&)>;

const std::map<std::string, Getter>& regressor_getters() {
    auto opt_int = [](std::optional<int> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return static_cast<double>(*v);
    };
    static const std::map<std::string, Getter> getters = {
        {"zero_tillage",
         [opt_int](const auto& r) { return opt_int(survey::derive_zero_tillage(r)); }},
        {"hh_size", [opt_int](const auto& r) { return opt_int(r.hh_size); }},
        {"head_male", [opt_int](const auto& r) { return opt_int(r.head_male); }},
        {"head_age", [opt_int](const auto& r) { return opt_int(r.head_age); }},
        {"head_secondary_edu",
         [opt_int](const auto& r) { return opt_int(r.head_secondary_edu); }},
        {"hindu", [opt_int](const auto& r) { return opt_int(r.hindu); }},
        {"scheduled_caste", [opt_int](const auto& r) { return opt_int(r.scheduled_caste); }},
        {"tractor", [opt_int](const auto& r) { return opt_int(r.tractor); }},
        {"plot_area", [](const auto& r) { return r.plot_area; }},
        {"plot_distance", [](const auto& r) { return r.plot_distance; }},
        {"esw", [opt_int](const auto& r) { return opt_int(r.esw); }},
        {"plot_owned", [opt_int](const auto& r) { return opt_int(r.plot_owned); }},
        {"fertilizer", [opt_int](const auto& r) { return opt_int(r.fertilizer); }},
        {"outside_labor", [opt_int](const auto& r) { return opt_int(r.outside_labor); }},
    };
    return getters;
}

std::string group_id(const survey::SurveyPlotRecord& r, const std::string& level) {
    if (level == "village") return r.village_id;
    if (level == "district") return r.district_id;
    throw ValidationError("unknown grouping level '" + level + "'");
}

// Listwise deletion: a row enters only with outcome, every regressor, and
// both group ids present.
DesignMatrix build_design(const std::vector<survey::SurveyPlotRecord>& records,
                          const Getter& outcome,
                          const std::vector<std::string>& regressors,
                          const std::string& fe_level, const std::string& cluster_level) {
    const auto& getters = regressor_getters();
    std::vector<const survey::SurveyPlotRecord*> rows;
    std::vector<double> outcomes;
    for (const auto& r : records) {
        auto y = outcome(r);
        if (!y) continue;
        bool complete = true;
        for (const std::string& name : regressors) {
            if (!getters.at(name)(r)) {
                complete = false;
                break;
            }
        }
        if (!complete) continue;
        rows.push_back(&r);
        outcomes.push_back(*y);
    }

    DesignMatrix d;
    d.regressor_names = regressors;
    d.X.resize(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(regressors.size()));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.y(static_cast<Eigen::Index>(i)) = outcomes[i];
        for (std::size_t j = 0; j < regressors.size(); ++j)
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                *getters.at(regressors[j])(*rows[i]);
        d.fe_group.push_back(group_id(*rows[i], fe_level));
        d.cluster_group.push_back(group_id(*rows[i], cluster_level));
    }
    return d;
}

RegressionTable run_ladder(const std::vector<survey::SurveyPlotRecord>& records,
                           const Getter& outcome, const std::string& outcome_label,
                           const std::string& fe_level, const std::string& cluster_level) {
    RegressionTable table;
    table.outcome_label = outcome_label;
    table.row_order = regression_ladder().back().regressors;
    for (const LadderColumn& col : regression_ladder()) {
        DesignMatrix d =
            build_design(records, outcome, col.regressors, fe_level, cluster_level);
        table.columns.push_back(fit_fe_cluster(d, fe_level));
    }
    return table;
}

}  // namespace

RegressionTable regress_eq1(const std::vector<survey::SurveyPlotRecord>& records,
                            const std::string& fe_level, const std::string& cluster_level) {
    Getter outcome = [](const survey::SurveyPlotRecord& r) -> std::optional<double> {
        auto b = survey::derive_burn(r);
        if (!b) return std::nullopt;
        return static_cast<double>(*b);
    };
    return run_ladder(records, outcome, "residue_burning_survey", fe_level, cluster_level);
}

RegressionTable regress_eq2(const std::vector<survey::SurveyPlotRecord>& records,
                            const std::map<std::string, std::optional<double>>& village_fraction,
                            const std::string& fe_level, const std::string& cluster_level,
                            int* dropped_rows) {
    int dropped = 0;
    Getter outcome = [&village_fraction,
                      &dropped](const survey::SurveyPlotRecord& r) -> std::optional<double> {
        auto it = village_fraction.find(r.village_id);
        if (it == village_fraction.end() || !it->second) {
            ++dropped;
            return std::nullopt;
        }
        return *it->second;
    };
    RegressionTable t =
        run_ladder(records, outcome, "burn_fraction_remote", fe_level, cluster_level);
    // The outcome getter runs once per ladder column.
    if (dropped_rows)
        *dropped_rows = dropped / static_cast<int>(regression_ladder().size());
    return t;
}

void write_regression_table_csv(const fs::path& path, const RegressionTable& table) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "term";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        f << ",spec" << c + 1 << "_coef,spec" << c + 1 << "_p";
    f << '\n';

    for (const std::string& term : table.row_order) {
        f << term;
        for (const RegressionFit& fit : table.columns) {
            auto it = std::find(fit.names.begin(), fit.names.end(), term);
            if (it == fit.names.end()) {
                f << ",,";
            } else {
                Eigen::Index j = it - fit.names.begin();
                f << ',' << format_sig(fit.coef(j)) << ',' << format_sig(fit.p(j));
            }
        }
        f << '\n';
    }

    auto footer = [&](const std::string& label, auto value_of) {
        f << label;
        for (const RegressionFit& fit : table.columns) f << ',' << value_of(fit) << ',';
        f << '\n';
    };
    footer("fe", [](const RegressionFit& fit) { return fit.fe_level; });
    footer("observations",
           [](const RegressionFit& fit) { return std::to_string(fit.n_obs); });
    footer("clusters",
           [](const RegressionFit& fit) { return std::to_string(fit.n_clusters); });
    footer("r_squared", [](const RegressionFit& fit) {
        return fit.r_squared_defined ? format_sig(fit.r_squared) : "undefined";
    });
    footer("adj_r_squared", [](const RegressionFit& fit) {
        return fit.r_squared_defined ? format_sig(fit.adj_r_squared) : "undefined";
    });
    footer("dependent_mean",
           [](const RegressionFit& fit) { return format_sig(fit.dependent_mean); });
}

CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<std::optional<double>>>>& columns) {
    const std::size_t k = columns.size();
    std::size_t n = k ? columns[0].second.size() : 0;
    for (const auto& [name, col] : columns)
        if (col.size() != n)
            throw ValidationError("correlation_matrix: column lengths differ");

    CorrelationMatrix out;
    out.r = Eigen::MatrixXd::Constant(k, k, std::nan(""));
    for (const auto& [name, col] : columns) out.names.push_back(name);

    for (std::size_t a = 0; a < k; ++a) {
        out.r(a, a) = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            // Pairwise deletion.
            double sx = 0, sy = 0;
            int m = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!columns[a].second[i] || !columns[b].second[i]) continue;
                sx += *columns[a].second[i];
                sy += *columns[b].second[i];
                ++m;
            }
            if (m < 2) continue;
            double mx = sx / m, my = sy / m;
            double sxx = 0, syy = 0, sxy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (!columns[a].second[i] || !columns[b].second[i]) continue;
                double dx = *columns[a].second[i] - mx;
                double dy = *columns[b].second[i] - my;
                sxx += dx * dx;
                syy += dy * dy;
                sxy += dx * dy;
            }
            if (sxx <= 0.0 || syy <= 0.0) continue;
            double r = sxy / std::sqrt(sxx * syy);
            out.r(a, b) = r;
            out.r(b, a) = r;
        }
    }
    return out;
}

std::optional<BivariateLine> bivariate_line(const std::vector<double>& x,
                                            const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("bivariate_line: size mismatch");
    if (x.size() < 2) return std::nullopt;
    Eigen::MatrixXd X(x.size(), 2);
    Eigen::VectorXd Y(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = x[i];
        Y(static_cast<Eigen::Index>(i)) = y[i];
    }
    double mean = X.col(1).mean();
    if ((X.col(1).array() - mean).abs().maxCoeff() == 0.0) return std::nullopt;
    Eigen::VectorXd beta = ols_coefficients(X, Y, {"intercept", "slope"});
    return BivariateLine{beta(1), beta(0)};
}

void write_correlation_csv(const fs::path& path, const CorrelationMatrix& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << "indicator";
    for (const std::string& name : m.names) f << ',' << name;
    f << '\n';
    for (Eigen::Index i = 0; i < m.r.rows(); ++i) {
        f << m.names[i];
        for (Eigen::Index j = 0; j < m.r.cols(); ++j) {
            double v = m.r(i, j);
            f << ',' << (std::isnan(v) ? "" : format_sig(v));
        }
        f << '\n';
    }
}

}  // namespace agburn::econ
