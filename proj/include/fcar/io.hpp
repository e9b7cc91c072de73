#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fcar/errors.hpp"
#include "fcar/eval.hpp"
#include "fcar/forecast.hpp"
#include "fcar/grid.hpp"
#include "fcar/matrix.hpp"
#include "fcar/rkhs.hpp"
#include "fcar/series.hpp"
#include "fcar/simulate.hpp"

namespace fcar::io {

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view sv, const std::string& where) {
    double v = 0.0;
    const char* first = sv.data();
    const char* last = sv.data() + sv.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' || *(last - 1) == '\r')) --last;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw DataError(where + ": cannot parse number '" + std::string(sv) + "'");
    return v;
}

struct Curves {
    Grid grid;
    Matrix values;  // one row per curve
    bool had_header = false;
};

/// Dataset contract: an optional first row of grid abscissas (detected as
/// a strictly increasing row inside [0,1]) followed by one curve per row.
/// Without a header the grid is uniform on the column count.
inline Curves read_curves_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            row.push_back(parse_double(std::string_view(line).substr(pos, comma - pos),
                                       path + ":" + std::to_string(lineno)));
            pos = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (double v : rows[i])
            if (!std::isfinite(v))
                throw DataError(path + ": non-finite value in row " + std::to_string(i + 1));

    auto is_grid_row = [](const std::vector<double>& r) {
        if (r.size() < 2) return false;
        if (r.front() < 0.0 || r.back() > 1.0) return false;
        for (std::size_t i = 0; i + 1 < r.size(); ++i)
            if (!(r[i] < r[i + 1])) return false;
        return true;
    };

    Curves out{make_uniform_grid(static_cast<int>(rows.front().size())), Matrix(), false};
    std::size_t first_data = 0;
    if (rows.size() >= 2 && is_grid_row(rows.front())) {
        out.grid = Grid(rows.front());
        out.had_header = true;
        first_data = 1;
    }
    const int m = static_cast<int>(rows.size() - first_data);
    if (m < 1) throw DataError(path + ": no curve rows");
    const int g = static_cast<int>(rows.front().size());
    out.values = Matrix(m, g);
    for (int i = 0; i < m; ++i) {
        const auto& r = rows[first_data + static_cast<std::size_t>(i)];
        auto dst = out.values.row(i);
        std::copy(r.begin(), r.end(), dst.begin());
    }
    return out;
}

inline FunctionalSeries read_series_csv(const std::string& path) {
    Curves c = read_curves_csv(path);
    if (c.values.rows() < 2) throw DataError(path + ": need at least 2 curves");
    return FunctionalSeries(std::move(c.grid), std::move(c.values));
}

inline void write_curves_csv(const std::string& path, const Grid& grid, const Matrix& values,
                             bool with_header = true) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    if (with_header) {
        for (int j = 0; j < grid.size(); ++j) {
            if (j) out << ',';
            out << format_double(grid[j]);
        }
        out << '\n';
    }
    for (int i = 0; i < values.rows(); ++i) {
        auto row = values.row(i);
        for (int j = 0; j < values.cols(); ++j) {
            if (j) out << ',';
            out << format_double(row[static_cast<std::size_t>(j)]);
        }
        out << '\n';
    }
    if (!out) throw Error("failed while writing '" + path + "'");
}

inline void write_series_csv(const std::string& path, const FunctionalSeries& s,
                             bool with_header = true) {
    write_curves_csv(path, s.grid(), s.values(), with_header);
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const FCARModel& model) {
    nlohmann::json j;
    j["format"] = "fcar-model";
    j["version"] = 1;
    j["q"] = model.q;
    j["grid"] = model.grid.points();
    j["p_hat"] = model.p_hat;
    j["p_rule"] = p_rule_name(model.p_rule);
    j["mean_curve"] = model.mean_curve;
    nlohmann::json pts = nlohmann::json::array();
    for (const Candidate& c : model.points.candidates())
        pts.push_back({{"lag", c.lag}, {"index", c.index}, {"abscissa", c.abscissa}});
    j["points"] = pts;
    j["delta"] = model.points.delta();
    nlohmann::json alpha = nlohmann::json::array();
    for (int s = 0; s < model.alpha.rows(); ++s) {
        auto row = model.alpha.row(s);
        alpha.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["alpha"] = alpha;
    nlohmann::json trace;
    trace["gains"] = model.trace.gains;
    trace["skipped"] = model.trace.skipped;
    nlohmann::json chosen = nlohmann::json::array();
    for (const Candidate& c : model.trace.chosen)
        chosen.push_back({{"lag", c.lag}, {"index", c.index}, {"abscissa", c.abscissa}});
    trace["chosen"] = chosen;
    j["trace"] = trace;
    return j;
}

inline void save_model(const std::string& path, const FCARModel& model) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw Error("failed while writing '" + path + "'");
}

inline FCARModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("format", "") != "fcar-model")
        throw DataError("model file: not an fcar model document");
    FCARModel m;
    m.grid = Grid(j.at("grid").get<std::vector<double>>());
    m.q = j.at("q").get<int>();
    m.p_hat = j.at("p_hat").get<int>();
    const std::string rule = j.at("p_rule").get<std::string>();
    m.p_rule = rule == "cv" ? PRule::cv : rule == "fixed" ? PRule::fixed : PRule::kmeans;
    m.mean_curve = j.at("mean_curve").get<std::vector<double>>();
    if (static_cast<int>(m.mean_curve.size()) != m.grid.size())
        throw DataError("model file: mean curve length does not match the grid");
    std::vector<Candidate> pts;
    for (const auto& pj : j.at("points")) {
        Candidate c;
        c.lag = pj.at("lag").get<int>();
        c.index = pj.at("index").get<int>();
        c.abscissa = pj.at("abscissa").get<double>();
        if (c.index < 0 || c.index >= m.grid.size())
            throw DataError("model file: point index outside the grid");
        pts.push_back(c);
    }
    m.points = PointSet(pts, j.value("delta", 0.0));
    const auto& aj = j.at("alpha");
    if (static_cast<int>(aj.size()) != m.grid.size())
        throw DataError("model file: alpha row count does not match the grid");
    m.alpha = Matrix(m.grid.size(), static_cast<int>(pts.size()));
    for (int s = 0; s < m.alpha.rows(); ++s) {
        const auto row = aj.at(static_cast<std::size_t>(s)).get<std::vector<double>>();
        if (static_cast<int>(row.size()) != m.alpha.cols())
            throw DataError("model file: alpha column count does not match the points");
        for (int c = 0; c < m.alpha.cols(); ++c) m.alpha(s, c) = row[static_cast<std::size_t>(c)];
    }
    if (j.contains("trace")) {
        const auto& tj = j.at("trace");
        m.trace.gains = tj.at("gains").get<std::vector<double>>();
        m.trace.skipped = tj.at("skipped").get<std::vector<int>>();
        for (const auto& cj : tj.at("chosen")) {
            Candidate c;
            c.lag = cj.at("lag").get<int>();
            c.index = cj.at("index").get<int>();
            c.abscissa = cj.at("abscissa").get<double>();
            m.trace.chosen.push_back(c);
        }
    }
    return m;
}

inline FCARModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path + "': " + e.what());
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Kernel descriptors (sidecars of simulated data sets)
// ---------------------------------------------------------------------------

inline void save_kernel(const std::string& path, const TrueKernel& kernel) {
    nlohmann::json j;
    j["format"] = "fcar-kernel";
    j["family"] = family_name(kernel.family());
    if (kernel.family() == SimFamily::ou) j["theta"] = kernel.theta();
    j["t_star"] = kernel.points();
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

inline TrueKernel load_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("kernel file '" + path + "': " + e.what());
    }
    if (j.value("format", "") != "fcar-kernel")
        throw DataError("kernel file '" + path + "': not an fcar kernel document");
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "ou") return TrueKernel::ou(j.at("theta").get<double>());
    const auto t_star = j.at("t_star").get<std::vector<double>>();
    if (fam == "sparse-log") return TrueKernel::sparse_log(t_star);
    if (fam == "sparse-sin") return TrueKernel::sparse_sin(t_star);
    throw DataError("kernel file '" + path + "': family '" + fam + "' has no exact kernel");
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline void write_error_report_csv(const std::string& path, const ErrorReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "method,e1_l2,e2_l2,e1_sup,e2_sup\n";
    for (const MethodReport& r : report.rows)
        out << method_name(r.method) << ',' << format_double(r.e1_l2) << ','
            << format_double(r.e2_l2) << ',' << format_double(r.e1_sup) << ','
            << format_double(r.e2_sup) << '\n';
}

inline void write_timing_csv(const std::string& path, const ErrorReport& report) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "method,seconds_per_window\n";
    for (const MethodReport& r : report.rows)
        out << method_name(r.method) << ',' << format_double(r.seconds_per_window) << '\n';
}

inline std::string format_error_report(const ErrorReport& report) {
    std::ostringstream out;
    out << "method        e1-L2      e2-L2      e1-sup     e2-sup     sec/window\n";
    for (const MethodReport& r : report.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s  %-9.4f  %-9.4f  %-9.4f  %-9.4f  %.4f\n",
                      method_name(r.method), r.e1_l2, r.e2_l2, r.e1_sup, r.e2_sup,
                      r.seconds_per_window);
        out << line;
    }
    return out.str();
}

/// Distance-profile matrix as CSV: rows follow the s grid, one column per
/// design size.
inline void write_distance_profile_csv(const std::string& path,
                                       const rkhs::DistanceProfile& profile) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << "s";
    for (std::size_t p = 0; p < profile.distances.size(); ++p) out << ",p" << (p + 1);
    out << '\n';
    for (int i = 0; i < profile.s_grid.size(); ++i) {
        out << format_double(profile.s_grid[i]);
        for (const auto& col : profile.distances) out << ',' << format_double(col[static_cast<std::size_t>(i)]);
        out << '\n';
    }
}

}  // namespace fcar::io
