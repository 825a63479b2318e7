#include "gfcpanel/gmm.hpp"

#include "gfcpanel/errors.hpp"
#include "gfcpanel/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace gfcpanel {

void GmmOptions::validate() const {
    if (instrument_lag_min < 2)
        throw EstimationError("instrument_lag_min must be >= 2");
    if (instrument_lag_max && *instrument_lag_max < instrument_lag_min)
        throw EstimationError("instrument_lag_max must be >= instrument_lag_min");
    if (ridge_tolerance <= 0.0 || ridge_tolerance >= 1.0)
        throw EstimationError("ridge_tolerance must be in (0, 1)");
}

namespace {

// Design row index by (entity, period); -1 where absent.
std::vector<std::vector<int>> design_row_lookup(const EquationDesign& d) {
    std::vector<std::vector<int>> lookup(d.n_entities, std::vector<int>(d.n_periods, -1));
    for (int i = 0; i < d.n_rows(); ++i)
        lookup[d.row_index[i].entity][d.row_index[i].period] = i;
    return lookup;
}

// First period with an observed dependent level, per entity; -1 when never observed.
std::vector<int> first_dependent_period(const EquationDesign& d) {
    std::vector<int> first(d.n_entities, -1);
    for (int e = 0; e < d.n_entities; ++e) {
        for (int t = 0; t < d.n_periods; ++t) {
            if (d.dep_levels[e][t]) {
                first[e] = t;
                break;
            }
        }
    }
    return first;
}

struct DiffRow {
    int entity;
    int period;    // period of t (the later observation)
    int row_t;     // design row at t
    int row_tm1;   // design row at t-1
};

// Difference rows: design rows whose immediate calendar predecessor is also a
// design row for the same entity.
std::vector<DiffRow> difference_rows(const EquationDesign& d,
                                     const std::vector<std::vector<int>>& lookup) {
    std::vector<DiffRow> out;
    for (int i = 0; i < d.n_rows(); ++i) {
        const RowKey& rk = d.row_index[i];
        if (rk.period == 0) continue;
        int prev = lookup[rk.entity][rk.period - 1];
        if (prev >= 0) out.push_back({rk.entity, rk.period, i, prev});
    }
    return out;
}

// Level rows: design rows far enough into the entity's observed span that the
// level instrument (lagged first difference of the dependent) is nominally
// available; gaps inside the span zero-fill the instrument cell instead of
// dropping the row.
std::vector<int> level_rows(const EquationDesign& d, const std::vector<int>& first_obs) {
    std::vector<int> out;
    for (int i = 0; i < d.n_rows(); ++i) {
        const RowKey& rk = d.row_index[i];
        if (first_obs[rk.entity] >= 0 && rk.period >= first_obs[rk.entity] + 2)
            out.push_back(i);
    }
    return out;
}

int effective_lag_max(const GmmOptions& opts, const std::vector<DiffRow>& diffs) {
    if (opts.instrument_lag_max) return *opts.instrument_lag_max;
    int max_t = 0;
    for (const auto& r : diffs) max_t = std::max(max_t, r.period);
    return std::max(opts.instrument_lag_min, max_t);
}

Cell dep_level(const EquationDesign& d, int entity, int period) {
    if (period < 0 || period >= d.n_periods) return std::nullopt;
    return d.dep_levels[entity][period];
}

Cell dep_diff(const EquationDesign& d, int entity, int period) {
    Cell a = dep_level(d, entity, period);
    Cell b = dep_level(d, entity, period - 1);
    if (a && b) return *a - *b;
    return std::nullopt;
}

std::vector<int> exogenous_columns(const EquationDesign& d) {
    std::vector<int> out;
    for (int j = 0; j < d.n_terms(); ++j)
        if (!d.terms[j].instrumented) out.push_back(j);
    return out;
}

} // namespace

InstrumentSet build_difference_instruments(const EquationDesign& design, const GmmOptions& opts) {
    opts.validate();
    auto lookup = design_row_lookup(design);
    auto diffs = difference_rows(design, lookup);
    if (diffs.empty()) throw EstimationError("no usable rows after differencing");

    const int n = static_cast<int>(diffs.size());
    const int lag_min = opts.instrument_lag_min;
    const int lag_max = effective_lag_max(opts, diffs);

    InstrumentSet block;
    block.rows.reserve(n);
    for (const auto& r : diffs) block.rows.push_back({BlockKind::difference, r.entity, r.period});

    std::vector<std::pair<std::string, Eigen::VectorXd>> cols;

    if (opts.collapse) {
        for (int l = lag_min; l <= lag_max; ++l) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i) {
                Cell v = dep_level(design, diffs[i].entity, diffs[i].period - l);
                if (v) col(i) = *v;
            }
            cols.emplace_back("gmm:diff:lag" + std::to_string(l), col);
        }
    } else {
        std::set<int> periods;
        for (const auto& r : diffs) periods.insert(r.period);
        for (int t : periods) {
            for (int l = lag_min; l <= std::min(lag_max, t); ++l) {
                Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
                for (int i = 0; i < n; ++i) {
                    if (diffs[i].period != t) continue;
                    Cell v = dep_level(design, diffs[i].entity, t - l);
                    if (v) col(i) = *v;
                }
                cols.emplace_back("gmm:diff:t" + std::to_string(t) + ":lag" + std::to_string(l),
                                  col);
            }
        }
    }
    block.n_gmm_columns = static_cast<int>(cols.size());

    for (int j : exogenous_columns(design)) {
        Eigen::VectorXd col(n);
        for (int i = 0; i < n; ++i)
            col(i) = design.regressors(diffs[i].row_t, j) -
                     design.regressors(diffs[i].row_tm1, j);
        cols.emplace_back("iv:diff:" + design.terms[j].tag, col);
    }
    block.n_iv_columns = static_cast<int>(cols.size()) - block.n_gmm_columns;

    block.matrix.resize(n, static_cast<int>(cols.size()));
    block.column_labels.reserve(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        block.matrix.col(static_cast<int>(c)) = cols[c].second;
        block.column_labels.push_back(cols[c].first);
    }
    return block;
}

InstrumentSet build_level_instruments(const EquationDesign& design, const GmmOptions& opts) {
    opts.validate();
    InstrumentSet block;
    if (opts.mode == GmmMode::difference_only) {
        block.matrix.resize(0, 0);
        return block;
    }
    auto first_obs = first_dependent_period(design);
    auto levels = level_rows(design, first_obs);
    const int n = static_cast<int>(levels.size());

    block.rows.reserve(n);
    for (int i : levels)
        block.rows.push_back({BlockKind::level, design.row_index[i].entity,
                              design.row_index[i].period});

    std::vector<std::pair<std::string, Eigen::VectorXd>> cols;

    if (opts.collapse) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            Cell v = dep_diff(design, block.rows[i].entity, block.rows[i].period - 1);
            if (v) col(i) = *v;
        }
        cols.emplace_back("gmm:level:d.lag1", col);
    } else {
        std::set<int> periods;
        for (const auto& r : block.rows) periods.insert(r.period);
        for (int t : periods) {
            Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i) {
                if (block.rows[i].period != t) continue;
                Cell v = dep_diff(design, block.rows[i].entity, t - 1);
                if (v) col(i) = *v;
            }
            cols.emplace_back("gmm:level:t" + std::to_string(t) + ":d.lag1", col);
        }
    }
    block.n_gmm_columns = static_cast<int>(cols.size());

    for (int j : exogenous_columns(design)) {
        Eigen::VectorXd col(n);
        for (int i = 0; i < n; ++i) col(i) = design.regressors(levels[i], j);
        cols.emplace_back("iv:level:" + design.terms[j].tag, col);
    }
    block.n_iv_columns = static_cast<int>(cols.size()) - block.n_gmm_columns;

    block.matrix.resize(n, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        block.matrix.col(static_cast<int>(c)) = cols[c].second;
        block.column_labels.push_back(cols[c].first);
    }
    return block;
}

GmmSystem build_gmm_system(const EquationDesign& design, const GmmOptions& opts) {
    opts.validate();
    auto lookup = design_row_lookup(design);
    auto diffs = difference_rows(design, lookup);
    if (diffs.empty()) throw EstimationError("no usable rows after differencing");

    InstrumentSet diff_block = build_difference_instruments(design, opts);
    InstrumentSet level_block = build_level_instruments(design, opts);

    const int nd = static_cast<int>(diff_block.rows.size());
    const int nl = static_cast<int>(level_block.rows.size());
    const int k = design.n_terms();

    GmmSystem sys;
    sys.n_diff_rows = nd;
    sys.n_level_rows = nl;
    sys.rows.reserve(nd + nl);
    sys.y.resize(nd + nl);
    sys.X.resize(nd + nl, k);

    for (int i = 0; i < nd; ++i) {
        sys.rows.push_back(diff_block.rows[i]);
        sys.y(i) = design.dependent(diffs[i].row_t) - design.dependent(diffs[i].row_tm1);
        sys.X.row(i) = design.regressors.row(diffs[i].row_t) -
                       design.regressors.row(diffs[i].row_tm1);
    }

    auto first_obs = first_dependent_period(design);
    auto levels = level_rows(design, first_obs);
    for (int i = 0; i < nl; ++i) {
        sys.rows.push_back(level_block.rows[i]);
        sys.y(nd + i) = design.dependent(levels[i]);
        sys.X.row(nd + i) = design.regressors.row(levels[i]);
    }

    const int zd = static_cast<int>(diff_block.matrix.cols());
    const int zl = static_cast<int>(level_block.matrix.cols());
    sys.Z = Eigen::MatrixXd::Zero(nd + nl, zd + zl);
    if (zd > 0) sys.Z.topLeftCorner(nd, zd) = diff_block.matrix;
    if (zl > 0 && nl > 0) sys.Z.bottomRightCorner(nl, zl) = level_block.matrix;
    sys.z_labels = diff_block.column_labels;
    sys.z_labels.insert(sys.z_labels.end(), level_block.column_labels.begin(),
                        level_block.column_labels.end());
    sys.n_gmm_columns = diff_block.n_gmm_columns + level_block.n_gmm_columns;
    sys.n_iv_columns = diff_block.n_iv_columns + level_block.n_iv_columns;

    sys.entity_rows.assign(design.n_entities, {});
    for (int i = 0; i < nd + nl; ++i) sys.entity_rows[sys.rows[i].entity].push_back(i);
    return sys;
}

Eigen::MatrixXd clustered_moment_covariance(const Eigen::MatrixXd& Z, const Eigen::VectorXd& u,
                                            const std::vector<std::vector<int>>& entity_rows) {
    const int nz = static_cast<int>(Z.cols());
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nz, nz);
    for (const auto& rows : entity_rows) {
        if (rows.empty()) continue;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
        for (int r : rows) g += Z.row(r).transpose() * u(r);
        S += g * g.transpose();
    }
    return S;
}

namespace {

// Initial System-GMM weight: sum over entities of Z_e' H_e Z_e with the
// difference block's 2/-1 tridiagonal pattern (adjacent quarters only),
// identity on the level block and zero across blocks.
Eigen::MatrixXd initial_weight_inner(const GmmSystem& sys) {
    const int nz = static_cast<int>(sys.Z.cols());
    Eigen::MatrixXd ZHZ = Eigen::MatrixXd::Zero(nz, nz);
    for (const auto& rows : sys.entity_rows) {
        if (rows.empty()) continue;
        const int m = static_cast<int>(rows.size());
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
        for (int a = 0; a < m; ++a) {
            const SystemRow& ra = sys.rows[rows[a]];
            H(a, a) = ra.block == BlockKind::difference ? 2.0 : 1.0;
            for (int b = a + 1; b < m; ++b) {
                const SystemRow& rb = sys.rows[rows[b]];
                if (ra.block == BlockKind::difference && rb.block == BlockKind::difference &&
                    std::abs(ra.period - rb.period) == 1) {
                    H(a, b) = -1.0;
                    H(b, a) = -1.0;
                }
            }
        }
        Eigen::MatrixXd Ze(m, nz);
        for (int a = 0; a < m; ++a) Ze.row(a) = sys.Z.row(rows[a]);
        ZHZ += Ze.transpose() * H * Ze;
    }
    return ZHZ;
}

std::vector<int> nonzero_columns(const Eigen::MatrixXd& Z) {
    std::vector<int> keep;
    for (int c = 0; c < Z.cols(); ++c)
        if (Z.col(c).cwiseAbs().maxCoeff() > 0.0) keep.push_back(c);
    return keep;
}

void check_regressor_rank(const Eigen::MatrixXd& X, const std::vector<TermDef>& terms) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    const int k = static_cast<int>(X.cols());
    if (rank >= k) return;
    // Pivots beyond the numerical rank identify the dependent columns.
    std::ostringstream msg;
    msg << "rank-deficient regressors; collinear columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (int i = rank; i < k; ++i) msg << " " << terms[perm(i)].tag;
    throw EstimationError(msg.str());
}

struct StepSolution {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd M;    // X'Z A Z'X
    Eigen::MatrixXd Minv;
};

StepSolution solve_step(const GmmSystem& sys, const Eigen::MatrixXd& ZtX,
                        const Eigen::VectorXd& Zty, const Eigen::MatrixXd& A) {
    StepSolution out;
    out.M = ZtX.transpose() * A * ZtX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.M);
    double max_ev = es.eigenvalues().maxCoeff();
    double min_ev = es.eigenvalues().minCoeff();
    if (max_ev <= 0.0 || min_ev <= 1e-12 * max_ev)
        throw EstimationError("coefficients are not identified by the instrument set");
    out.Minv = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
               es.eigenvectors().transpose();
    out.beta = out.Minv * (ZtX.transpose() * (A * Zty));
    out.residuals = sys.y - sys.X * out.beta;
    return out;
}

Eigen::MatrixXd windmeijer_correction(const GmmSystem& sys, const Eigen::MatrixXd& Z,
                                      const Eigen::MatrixXd& ZtX, const Eigen::MatrixXd& A2,
                                      const StepSolution& one, const StepSolution& two,
                                      const Eigen::MatrixXd& V1_robust) {
    const int k = static_cast<int>(ZtX.cols());
    const int nz = static_cast<int>(Z.cols());
    const int ne = static_cast<int>(sys.entity_rows.size());

    // Per-entity moment pieces at one-step residuals.
    std::vector<Eigen::VectorXd> g1(ne);
    std::vector<Eigen::MatrixXd> P(ne); // Z_e' X_e
    for (int e = 0; e < ne; ++e) {
        const auto& rows = sys.entity_rows[e];
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(nz, k);
        for (int r : rows) {
            g += Z.row(r).transpose() * one.residuals(r);
            p += Z.row(r).transpose() * sys.X.row(r);
        }
        g1[e] = g;
        P[e] = p;
    }

    Eigen::VectorXd Ztu2 = Z.transpose() * two.residuals;
    Eigen::VectorXd a = A2 * Ztu2;
    Eigen::MatrixXd C = two.Minv * ZtX.transpose() * A2; // k x nz

    Eigen::MatrixXd D(k, k);
    for (int j = 0; j < k; ++j) {
        Eigen::VectorXd Ta = Eigen::VectorXd::Zero(nz);
        for (int e = 0; e < ne; ++e) {
            if (sys.entity_rows[e].empty()) continue;
            double ga = g1[e].dot(a);
            double pa = P[e].col(j).dot(a);
            Ta += P[e].col(j) * ga + g1[e] * pa;
        }
        D.col(j) = C * Ta;
    }

    const Eigen::MatrixXd& V2 = two.Minv;
    Eigen::MatrixXd V = V2 + D * V2 + V2 * D.transpose() + D * V1_robust * D.transpose();
    return 0.5 * (V + V.transpose());
}

struct ArInputs {
    const GmmSystem& sys;
    const Eigen::MatrixXd& Z;
    const Eigen::MatrixXd& A;
    const Eigen::MatrixXd& Minv;
    const Eigen::MatrixXd& ZtX;
    const Eigen::MatrixXd& vce;
    const Eigen::VectorXd& residuals;
};

// Arellano-Bond AR(m) statistic on differenced residuals. The lagged-residual
// vector w is zero off the difference block and where the m-lagged difference
// row does not exist.
std::optional<ArResult> arellano_bond(const ArInputs& in, int m, std::string& note) {
    const int n = static_cast<int>(in.sys.rows.size());
    // (entity, period) -> system row, difference block only
    std::map<std::pair<int, int>, int> diff_row;
    for (int i = 0; i < n; ++i)
        if (in.sys.rows[i].block == BlockKind::difference)
            diff_row[{in.sys.rows[i].entity, in.sys.rows[i].period}] = i;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    int n_pairs = 0;
    for (int i = 0; i < n; ++i) {
        if (in.sys.rows[i].block != BlockKind::difference) continue;
        auto it = diff_row.find({in.sys.rows[i].entity, in.sys.rows[i].period - m});
        if (it != diff_row.end()) {
            w(i) = in.residuals(it->second);
            ++n_pairs;
        }
    }
    if (n_pairs == 0) {
        note = "no overlapping residual pairs at lag " + std::to_string(m);
        return std::nullopt;
    }

    double numerator = w.dot(in.residuals);

    const int nz = static_cast<int>(in.Z.cols());
    double term1 = 0.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(nz); // sum_e Z_e' e_e (e_e' w_e)
    for (const auto& rows : in.sys.entity_rows) {
        if (rows.empty()) continue;
        double we = 0.0;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
        for (int r : rows) {
            we += w(r) * in.residuals(r);
            g += in.Z.row(r).transpose() * in.residuals(r);
        }
        term1 += we * we;
        v += g * we;
    }

    Eigen::VectorXd q = in.sys.X.transpose() * w;
    double term2 = -2.0 * q.dot(in.Minv * (in.ZtX.transpose() * (in.A * v)));
    double term3 = q.dot(in.vce * q);

    double var = term1 + term2 + term3;
    if (!(var > 0.0)) {
        note = "degenerate variance in AR(" + std::to_string(m) + ") test";
        return std::nullopt;
    }
    ArResult out;
    out.z = numerator / std::sqrt(var);
    out.p_value = 2.0 * num::normal_sf(std::fabs(out.z));
    out.n_pairs = n_pairs;
    return out;
}

} // namespace

EstimationResult estimate(const EquationDesign& design, const GmmOptions& opts) {
    opts.validate();
    GmmSystem sys = build_gmm_system(design, opts);
    const int k = design.n_terms();

    check_regressor_rank(sys.X, design.terms);

    // Identically-zero instrument columns carry no moment and are removed;
    // the effective count feeds the Hansen degrees of freedom.
    auto keep = nonzero_columns(sys.Z);
    const int nz = static_cast<int>(keep.size());
    int dropped = static_cast<int>(sys.Z.cols()) - nz;
    if (nz < k)
        throw EstimationError("fewer effective instruments (" + std::to_string(nz) +
                              ") than coefficients (" + std::to_string(k) + ")");
    if (dropped > 0) {
        Eigen::MatrixXd Zk(sys.Z.rows(), nz);
        std::vector<std::string> labels;
        labels.reserve(nz);
        for (int c = 0; c < nz; ++c) {
            Zk.col(c) = sys.Z.col(keep[c]);
            labels.push_back(sys.z_labels[keep[c]]);
        }
        sys.Z = std::move(Zk);
        sys.z_labels = std::move(labels);
    }

    EstimationResult res;
    res.options = opts;
    res.dropped_zero_instruments = dropped;
    res.term_tags.reserve(k);
    for (const auto& t : design.terms) res.term_tags.push_back(t.tag);

    Eigen::MatrixXd ZtX = sys.Z.transpose() * sys.X;
    Eigen::VectorXd Zty = sys.Z.transpose() * sys.y;

    // One step: initial weight from the 2/-1 difference pattern.
    Eigen::MatrixXd ZHZ = initial_weight_inner(sys);
    num::PsdInverse A1p = num::pinv_psd(ZHZ, opts.ridge_tolerance);
    if (A1p.deficient) res.weight_pinv_used = true;
    const Eigen::MatrixXd& A1 = A1p.inverse;

    StepSolution one = solve_step(sys, ZtX, Zty, A1);
    Eigen::MatrixXd S1 = clustered_moment_covariance(sys.Z, one.residuals, sys.entity_rows);
    Eigen::MatrixXd G1 = A1 * ZtX; // nz x k
    Eigen::MatrixXd V1 = one.Minv * (G1.transpose() * S1 * G1) * one.Minv;
    V1 = 0.5 * (V1 + V1.transpose());

    // Efficient (two-step) weight; always computed, it backs the Hansen test.
    const bool two_step = opts.steps == GmmSteps::two;
    num::PsdInverse A2p = num::pinv_psd(S1, opts.ridge_tolerance);
    StepSolution two;
    bool efficient_ok = A2p.rank > 0;
    if (efficient_ok) {
        if (A2p.deficient) res.weight_pinv_used = true;
        try {
            two = solve_step(sys, ZtX, Zty, A2p.inverse);
        } catch (const EstimationError&) {
            if (two_step) throw; // the caller asked for two-step and it is unavailable
            efficient_ok = false;
        }
    }
    if (!efficient_ok) {
        // Perfect fit or too few clusters: fall back to the one-step solution.
        two = one;
        res.efficient_weight_failed = true;
    }

    Eigen::MatrixXd V2 = two.Minv;
    if (efficient_ok && two_step && opts.windmeijer)
        V2 = windmeijer_correction(sys, sys.Z, ZtX, A2p.inverse, one, two, V1);

    res.diagnostics.hansen.df = nz - k;
    if (res.diagnostics.hansen.df > 0 && efficient_ok) {
        Eigen::VectorXd Ztu2 = sys.Z.transpose() * two.residuals;
        res.diagnostics.hansen.statistic = Ztu2.dot(A2p.inverse * Ztu2);
        res.diagnostics.hansen.p_value =
            num::chi2_sf(res.diagnostics.hansen.statistic, res.diagnostics.hansen.df);
    } else {
        res.diagnostics.hansen.statistic = 0.0; // just identified or exact fit
        res.diagnostics.hansen.p_value = 1.0;
    }

    const StepSolution& reported = two_step ? two : one;
    res.coefficients = reported.beta;
    res.vce = two_step && efficient_ok ? V2 : V1;
    res.residuals = reported.residuals;
    res.rows = sys.rows;

    std::set<int> ents;
    for (const auto& r : sys.rows) ents.insert(r.entity);
    res.sample_meta.n_entities = static_cast<int>(ents.size());
    res.sample_meta.n_rows = static_cast<int>(sys.rows.size());
    res.sample_meta.n_instruments = nz;
    res.sample_meta.n_design_rows = design.n_rows();
    res.sample_meta.n_diff_rows = sys.n_diff_rows;
    res.sample_meta.n_level_rows = sys.n_level_rows;

    const Eigen::MatrixXd& A_rep = two_step && efficient_ok ? A2p.inverse : A1;
    ArInputs ar_in{sys, sys.Z, A_rep, reported.Minv, ZtX, res.vce, reported.residuals};
    res.diagnostics.ar1 = arellano_bond(ar_in, 1, res.diagnostics.ar1_note);
    res.diagnostics.ar2 = arellano_bond(ar_in, 2, res.diagnostics.ar2_note);

    return res;
}

HansenResult hansen_j(const EstimationResult& result) {
    return result.diagnostics.hansen;
}

ArResult ar_test(const EstimationResult& result, int m) {
    if (m != 1 && m != 2) throw EstimationError("ar_test: m must be 1 or 2");
    const auto& slot = m == 1 ? result.diagnostics.ar1 : result.diagnostics.ar2;
    const auto& note = m == 1 ? result.diagnostics.ar1_note : result.diagnostics.ar2_note;
    if (!slot) throw InsufficientDataError("ar_test: " + note);
    return *slot;
}

} // namespace gfcpanel
