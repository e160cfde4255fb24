#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "action.hpp"
#include "bounds.hpp"
#include "conjugate.hpp"
#include "diagnostics.hpp"
#include "kernel_io.hpp"
#include "minorant.hpp"
#include "simulate.hpp"

namespace wflab {

//! Shortest round-trip decimal form; "inf", "-inf" and "nan" otherwise.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{})
        throw Error{ErrorCode::io, "number formatting failed"};
    return std::string(buf, res.ptr);
}

//! JSON has no infinities; non-finite values are written as strings.
inline Json number_json(double v)
{
    if (std::isfinite(v))
        return v;
    return format_double(v);
}

inline Json number_json(ExtendedReal v)
{
    return number_json(v.value());
}

inline double number_from_json(Json const& j, char const* what)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string())
    {
        auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf")
            return kInfinity;
        if (s == "-inf")
            return -kInfinity;
    }
    throw ValidationError{std::string{what} + " must be a number"};
}

inline Json vector_json(Vector const& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(number_json(v[i]));
    return out;
}

//---------------------------------------------------------------------------//
//! Header plus string rows; rendered with '\n' line ends and no quoting.
class CsvTable
{
  public:
    explicit CsvTable(std::vector<std::string> header)
        : header_{std::move(header)}
    {
    }

    void add_row(std::vector<std::string> row)
    {
        if (row.size() != header_.size())
            throw Error{ErrorCode::io, "CSV row width mismatch"};
        rows_.push_back(std::move(row));
    }

    std::vector<std::string> const& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const
    {
        std::string out;
        append_line(out, header_);
        for (auto const& r : rows_)
            append_line(out, r);
        return out;
    }

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;

    static void append_line(std::string& out,
                            std::vector<std::string> const& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    }
};

namespace report_detail {

inline std::vector<std::string> indexed(std::string const& stem, int dim)
{
    std::vector<std::string> out;
    for (int k = 1; k <= dim; ++k)
        out.push_back(stem + std::to_string(k));
    return out;
}

inline void append(std::vector<std::string>& row, Vector const& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i)
        row.push_back(format_double(v[i]));
}

inline std::vector<std::string> concat(std::vector<std::string> a,
                                       std::vector<std::string> const& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace report_detail

//---------------------------------------------------------------------------//
// LDP report

//! Estimator tag; rows with p_hat == 0 carry the 3/n upper bound instead.
inline std::string estimator_tag(LdpRow const& r)
{
    auto tag = to_string(r.estimator);
    return r.unreachable ? tag + "-upper95" : tag;
}

inline CsvTable ldp_csv(LdpReport const& report)
{
    CsvTable t{{"h", "p_hat", "stderr", "h_log_p", "bound", "margin",
                "estimator"}};
    for (auto const& r : report.rows)
    {
        double hlp = r.h_log_p ? *r.h_log_p : r.h * std::log(r.p_upper);
        t.add_row({format_double(r.h), format_double(r.p_hat),
                   format_double(r.std_error), format_double(hlp),
                   format_double(report.variational_bound.value()),
                   format_double(report.margin(r)), estimator_tag(r)});
    }
    return t;
}

inline Json ldp_json(LdpReport const& report)
{
    Json j;
    j["model_id"] = report.model_id;
    j["x0"] = vector_json(report.x0);
    j["target"] = report.target.describe();
    j["horizon"] = report.horizon;
    j["variational_bound"] = number_json(report.variational_bound);
    j["argmin"] = report.argmin ? vector_json(*report.argmin) : Json(nullptr);
    j["tilt"] = vector_json(report.tilt);
    j["verdict"] = report.verdict;
    j["insufficient_samples"] = report.insufficient();
    Json rows = Json::array();
    for (auto const& r : report.rows)
    {
        Json row;
        row["h"] = r.h;
        row["p_hat"] = r.p_hat;
        row["stderr"] = r.std_error;
        row["n"] = r.n;
        row["n_aborted"] = r.n_aborted;
        row["h_log_p"] = r.h_log_p ? Json(*r.h_log_p) : Json(nullptr);
        row["p_upper"] = r.unreachable ? Json(r.p_upper) : Json(nullptr);
        row["estimator"] = to_string(r.estimator);
        row["tolerance"] = r.tolerance;
        row["margin"] = number_json(report.margin(r));
        Json flags = Json::array();
        if (r.unreachable)
            flags.push_back("unreachable");
        if (r.insufficient)
            flags.push_back("insufficient_samples");
        row["flags"] = std::move(flags);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

//---------------------------------------------------------------------------//
// Paths and trajectories

inline CsvTable path_csv(PolygonalPath const& path)
{
    CsvTable t{report_detail::concat({"t"},
                                     report_detail::indexed("x_", path.dim()))};
    for (std::size_t k = 0; k < path.knots.size(); ++k)
    {
        std::vector<std::string> row{format_double(path.time(k))};
        report_detail::append(row, path.knots[k]);
        t.add_row(std::move(row));
    }
    return t;
}

inline CsvTable trajectory_csv(std::vector<Trajectory> const& paths, int dim)
{
    auto header = report_detail::concat({"path_id", "event_time"},
                                        report_detail::indexed("x_", dim));
    header.push_back("event_atom");
    CsvTable t{std::move(header)};
    for (std::size_t p = 0; p < paths.size(); ++p)
    {
        auto const& tr = paths[p];
        for (std::size_t k = 0; k < tr.times.size(); ++k)
        {
            std::vector<std::string> row{std::to_string(p),
                                         format_double(tr.times[k])};
            report_detail::append(row, tr.states[k]);
            row.push_back(std::to_string(tr.atoms[k]));
            t.add_row(std::move(row));
        }
    }
    return t;
}

inline Json estimate_json(McEstimate const& e)
{
    Json j;
    j["mean"] = number_json(e.mean);
    j["stderr"] = number_json(e.std_error);
    j["n"] = e.n;
    j["n_aborted"] = e.n_aborted;
    j["seed"] = e.seed;
    return j;
}

inline CsvTable estimate_csv(std::vector<std::pair<std::string, McEstimate>> const& rows)
{
    CsvTable t{{"label", "mean", "stderr", "n", "n_aborted", "seed"}};
    for (auto const& [label, e] : rows)
        t.add_row({label, format_double(e.mean), format_double(e.std_error),
                   std::to_string(e.n), std::to_string(e.n_aborted),
                   std::to_string(e.seed)});
    return t;
}

//---------------------------------------------------------------------------//
// Rate function

inline Json rate_json(RateToSetResult const& r)
{
    Json j;
    j["value"] = number_json(r.value);
    j["argmin"] = vector_json(r.argmin);
    j["segments"] = r.detail.path.segments();
    j["restarts_used"] = r.detail.restarts_used;
    j["gradient_norm_at_exit"] = number_json(r.detail.gradient_norm_at_exit);
    j["straight_line_value"] = number_json(r.detail.straight_line_value);
    j["evaluations"] = r.evaluations;
    return j;
}

//---------------------------------------------------------------------------//
// Chernoff bound

inline CsvTable chernoff_csv(DirectionSet const& dirs,
                             ChernoffBound const& b,
                             double t,
                             double h)
{
    int dim = dirs.directions.empty()
                  ? 0
                  : static_cast<int>(dirs.directions.front().size());
    auto header = report_detail::concat({"t", "h", "radius"},
                                        report_detail::indexed("r_", dim));
    header.push_back("l1");
    header.push_back("term");
    CsvTable tab{std::move(header)};
    for (std::size_t i = 0; i < dirs.directions.size(); ++i)
    {
        std::vector<std::string> row{format_double(t), format_double(h),
                                     format_double(dirs.radius)};
        report_detail::append(row, dirs.directions[i]);
        row.push_back(format_double(b.rates[i].value()));
        row.push_back(format_double(b.terms[i]));
        tab.add_row(std::move(row));
    }
    return tab;
}

inline Json chernoff_json(DirectionSet const& dirs,
                          ChernoffBound const& b,
                          double t,
                          double h)
{
    Json j;
    j["t"] = t;
    j["h"] = h;
    j["radius"] = dirs.radius;
    j["total"] = number_json(b.total);
    Json rows = Json::array();
    for (std::size_t i = 0; i < dirs.directions.size(); ++i)
    {
        Json row;
        row["direction"] = vector_json(dirs.directions[i]);
        row["l1"] = number_json(b.rates[i]);
        row["term"] = number_json(b.terms[i]);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

//---------------------------------------------------------------------------//
// Minorant

inline CsvTable minorant_csv(PiecewiseMinorant const& m, int dim)
{
    auto header = report_detail::concat(report_detail::indexed("alpha_", dim),
                                        report_detail::indexed("beta_", dim));
    header.push_back("intercept");
    CsvTable t{std::move(header)};
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        std::vector<std::string> row;
        report_detail::append(row, m.support_points[i]);
        report_detail::append(row, m.slopes[i]);
        row.push_back(format_double(m.intercepts[i]));
        t.add_row(std::move(row));
    }
    return t;
}

inline Json minorant_json(PiecewiseMinorant const& m)
{
    Json j;
    j["radius"] = m.radius;
    j["gap_target"] = m.gap_target;
    j["support_points"] = m.size();
    j["verification_points"] = m.verification_points;
    j["max_verified_gap"] = number_json(m.max_verified_gap);
    j["min_verified_gap"] = number_json(m.min_verified_gap);
    return j;
}

//---------------------------------------------------------------------------//
// Conjugate table

struct ConjugateRow
{
    Vector x;
    Vector alpha;
    ExtendedReal value;
    //! Empty when alpha lies outside the effective domain.
    std::optional<Vector> maximizer;
    int iterations = 0;
};

inline CsvTable conjugate_csv(std::vector<ConjugateRow> const& rows, int dim)
{
    auto header = report_detail::concat(report_detail::indexed("x_", dim),
                                        report_detail::indexed("alpha_", dim));
    header.push_back("L");
    header = report_detail::concat(header, report_detail::indexed("xi_", dim));
    CsvTable t{std::move(header)};
    for (auto const& r : rows)
    {
        std::vector<std::string> row;
        report_detail::append(row, r.x);
        report_detail::append(row, r.alpha);
        row.push_back(format_double(r.value.value()));
        if (r.maximizer)
            report_detail::append(row, *r.maximizer);
        else
            row.insert(row.end(), static_cast<std::size_t>(dim), "nan");
        t.add_row(std::move(row));
    }
    return t;
}

//---------------------------------------------------------------------------//
// Hypothesis diagnostics

inline Json diagnostics_json(DiagnosticsReport const& r)
{
    Json j;
    j["ok"] = r.ok();
    j["radius"] = r.radius;
    j["h1_max_excess"] = number_json(r.h1_max_excess);
    j["min_rate"] = number_json(r.min_rate);
    j["max_rate"] = number_json(r.max_rate);
    j["h1_max_convexity_defect"] = number_json(r.h1_max_convexity_defect);
    j["bound_m_upper"] = number_json(r.bound_m_upper);
    j["curvature_m_lower"] = number_json(r.curvature_m_lower);
    j["alpha_probes"] = r.alpha_probes;
    j["boundary_nonsteep"] = r.boundary_nonsteep;
    Json cont = Json::array();
    for (auto const& s : r.continuity)
        cont.push_back({{"delta", s.delta}, {"modulus", number_json(s.modulus)}});
    j["continuity"] = std::move(cont);
    Json th = Json::array();
    for (auto const& s : r.thresholds)
        th.push_back({{"constant", s.constant},
                      {"threshold", s.threshold ? Json(*s.threshold)
                                                : Json(nullptr)}});
    j["superlinear_thresholds"] = std::move(th);
    Json fails = Json::array();
    for (auto const& f : r.failures)
        fails.push_back({{"hypothesis", f.hypothesis},
                         {"detail", f.detail},
                         {"x", vector_json(f.x)},
                         {"probe", vector_json(f.probe)}});
    j["failures"] = std::move(fails);
    return j;
}

inline CsvTable continuity_csv(DiagnosticsReport const& r)
{
    CsvTable t{{"delta", "modulus"}};
    for (auto const& s : r.continuity)
        t.add_row({format_double(s.delta), format_double(s.modulus)});
    return t;
}

inline CsvTable superlinearity_csv(DiagnosticsReport const& r, int dim)
{
    auto header = report_detail::indexed("u_", dim);
    header.push_back("radius");
    header.push_back("ratio");
    CsvTable t{std::move(header)};
    for (auto const& ray : r.superlinearity)
    {
        for (std::size_t i = 0; i < ray.radii.size(); ++i)
        {
            std::vector<std::string> row;
            report_detail::append(row, ray.direction);
            row.push_back(format_double(ray.radii[i]));
            row.push_back(format_double(ray.ratios[i]));
            t.add_row(std::move(row));
        }
    }
    return t;
}

inline CsvTable failures_csv(DiagnosticsReport const& r)
{
    CsvTable t{{"hypothesis", "detail"}};
    for (auto const& f : r.failures)
    {
        std::string detail = f.detail;
        for (auto& c : detail)
        {
            if (c == ',' || c == '\n')
                c = ';';
        }
        t.add_row({f.hypothesis, detail});
    }
    return t;
}

}  // namespace wflab
