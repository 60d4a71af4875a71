#include "campus/io.hpp"

#include "campus/error.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace campus {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::ifstream open_for_read(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    return in;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_record(std::ostream& out, const TickRecord& r)
{
    out << r.tick << ',' << r.n_nd << ',' << r.n_d << ',' << r.n_fd;
    for (int c : r.context_drinkers) out << ',' << c;
    out << '\n';
}

} // namespace

std::string timeseries_header(std::span<const std::string> context_names, bool with_replicate)
{
    std::string header = with_replicate ? "replicate,tick,n_ND,n_D,n_FD" : "tick,n_ND,n_D,n_FD";
    for (const auto& name : context_names) header += ",drinkers_" + name;
    return header;
}

void write_timeseries(const TimeSeries& series, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << timeseries_header(series.context_names, false) << '\n';
    for (const auto& r : series.records) write_record(out, r);
    finish(out, path);
}

void write_timeseries(std::span<const TimeSeries> runs, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    const std::vector<std::string> names = runs.empty() ? std::vector<std::string>{} : runs.front().context_names;
    out << timeseries_header(names, true) << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (const auto& r : runs[i].records) {
            out << i << ',';
            write_record(out, r);
        }
    }
    finish(out, path);
}

TimeSeries read_timeseries(const std::filesystem::path& path)
{
    auto in = open_for_read(path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
    const auto header = split_csv(line);
    if (header.size() < 4 || header[0] != "tick" || header[1] != "n_ND" || header[2] != "n_D" || header[3] != "n_FD") {
        throw IoError("'" + path.string() + "' is not a single-replicate time series");
    }
    TimeSeries series;
    const std::string prefix = "drinkers_";
    for (std::size_t i = 4; i < header.size(); ++i) {
        if (!header[i].starts_with(prefix)) throw IoError("unexpected column '" + header[i] + "'");
        series.context_names.push_back(header[i].substr(prefix.size()));
    }
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw IoError("'" + path.string() + "' line " + std::to_string(line_no) + ": wrong column count");
        }
        try {
            TickRecord r;
            r.tick = std::stoi(cells[0]);
            r.n_nd = std::stoi(cells[1]);
            r.n_d = std::stoi(cells[2]);
            r.n_fd = std::stoi(cells[3]);
            for (std::size_t i = 4; i < cells.size(); ++i) r.context_drinkers.push_back(std::stoi(cells[i]));
            series.records.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw IoError("'" + path.string() + "' line " + std::to_string(line_no) + ": not an integer");
        }
    }
    return series;
}

void write_summary(const EnsembleSummary& s, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << "tick,mean_ND,mean_D,mean_FD,sd_ND,sd_D,sd_FD\n" << std::fixed << std::setprecision(6);
    for (std::size_t t = 0; t < s.ticks.size(); ++t) {
        out << s.ticks[t] << ',' << s.mean_nd[t] << ',' << s.mean_d[t] << ',' << s.mean_fd[t] << ',' << s.sd_nd[t]
            << ',' << s.sd_d[t] << ',' << s.sd_fd[t] << '\n';
    }
    finish(out, path);
}

void write_visit_matrix(const VisitMatrix& matrix, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << std::setprecision(17);
    for (const auto& row : matrix) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << row[c];
        out << '\n';
    }
    finish(out, path);
}

VisitMatrix read_visit_matrix(const std::filesystem::path& path, int expected_rows, int expected_cols)
{
    auto in = open_for_read(path);
    VisitMatrix matrix;
    std::string line;
    int line_no = 0;
    const auto fail = [&](const std::string& what) {
        throw ConfigError("matrix file '" + path.string() + "' line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream is(line);
        std::vector<double> row;
        std::string token;
        while (is >> token) {
            // strtod rather than stod: subnormal entries are valid, not range errors
            char* end = nullptr;
            const double v = std::strtod(token.c_str(), &end);
            if (end != token.c_str() + token.size() || !std::isfinite(v)) fail("malformed number '" + token + "'");
            if (v < 0.0) fail("negative probability");
            row.push_back(v);
        }
        if (expected_cols > 0 && static_cast<int>(row.size()) != expected_cols) {
            fail("expected " + std::to_string(expected_cols) + " columns");
        }
        if (!matrix.empty() && row.size() != matrix.front().size()) fail("ragged row");
        double total = 0.0;
        for (double v : row) total += v;
        if (std::abs(total - 1.0) > 1e-6) fail("row does not sum to 1");
        for (double& v : row) v /= total;
        matrix.push_back(std::move(row));
    }
    if (expected_rows > 0 && static_cast<int>(matrix.size()) != expected_rows) {
        throw ConfigError("matrix file '" + path.string() + "' has " + std::to_string(matrix.size()) +
                          " rows, population.size is " + std::to_string(expected_rows));
    }
    return matrix;
}

void write_calibration_report(const CalibrationResult& result, const ModelConfig& config,
                              const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << std::setprecision(10);
    out << "beta_tilde = " << result.beta_tilde << '\n';
    for (std::size_t c = 0; c < result.betas.size(); ++c) {
        out << "beta_" << config.population.context_names[c] << " = " << result.betas[c] << '\n';
    }
    out << "achieved_prevalence = " << result.achieved_prevalence << '\n';
    out << "objective = " << result.objective << '\n';
    out << "iterations = " << result.iterations << '\n';
    out << "evaluations = " << result.evaluations << '\n';
    out << "at_boundary = " << (result.at_boundary ? "true" : "false") << '\n';
    finish(out, path);
}

void write_design_csv(const ParameterSpace& space, const Matrix& design, const Vector& qoi,
                      const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << "sample_id";
    for (const auto& name : space.names) out << ",beta_tilde_" << name;
    out << ",qoi\n";
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        out << i << std::setprecision(10) << std::defaultfloat;
        for (Eigen::Index j = 0; j < design.cols(); ++j) out << ',' << design(i, j);
        out << ',' << std::fixed << std::setprecision(6) << qoi(i) << '\n';
    }
    finish(out, path);
}

void write_indices_csv(std::span<const IndexEstimate> indices, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << "parameter,method,estimate,ci_lo,ci_hi\n" << std::fixed << std::setprecision(6);
    for (const auto& e : indices) {
        out << e.parameter << ',' << e.method << ',' << e.estimate << ',' << e.ci_lo << ',' << e.ci_hi << '\n';
    }
    finish(out, path);
}

void write_oat_csv(const std::string& parameter, std::span<const OatPoint> sweep, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    out << "parameter,beta_tilde,qoi_mean,ci_lo,ci_hi\n";
    for (const auto& p : sweep) {
        out << parameter << ',' << std::defaultfloat << std::setprecision(10) << p.x << ',' << std::fixed
            << std::setprecision(6) << p.mean << ',' << p.ci_lo << ',' << p.ci_hi << '\n';
    }
    finish(out, path);
}

void write_manifest(const KeyValues& metadata, const std::string& config_text, const std::filesystem::path& path)
{
    auto out = open_for_write(path);
    for (const auto& [key, value] : metadata) out << "manifest." << key << " = " << value << '\n';
    out << config_text;
    finish(out, path);
}

KeyValues read_key_values(const std::filesystem::path& path)
{
    auto in = open_for_read(path);
    KeyValues kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string{};
            return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

} // namespace campus
