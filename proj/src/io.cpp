#include "sknr/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sknr::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

struct ParsedCsv {
    std::vector<std::string> header; // empty when the file starts with data
    std::vector<std::vector<double>> rows;
};

ParsedCsv read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError(path, 0, 0, "cannot open file");

    ParsedCsv parsed;
    std::string line;
    int line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        std::vector<double> row;
        row.reserve(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double value;
            if (!parse_double(cells[c], value)) {
                // A non-numeric first line is a header; anywhere else it is an error.
                if (parsed.rows.empty() && line_no == 1) {
                    parsed.header = cells;
                    numeric = false;
                    break;
                }
                throw CsvError(path, line_no, static_cast<int>(c + 1),
                               "not a number: '" + cells[c] + "'");
            }
            if (!std::isfinite(value))
                throw CsvError(path, line_no, static_cast<int>(c + 1),
                               "non-finite value rejected");
            row.push_back(value);
        }
        if (!numeric) continue;
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw CsvError(path, line_no, static_cast<int>(row.size()),
                           "inconsistent column count");
        parsed.rows.push_back(std::move(row));
    }
    if (parsed.rows.empty()) throw CsvError(path, line_no, 0, "no data rows");
    return parsed;
}

Matrix rows_to_matrix(const ParsedCsv& parsed) {
    const Index rows = static_cast<Index>(parsed.rows.size());
    const Index cols = static_cast<Index>(parsed.rows.front().size());
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = parsed.rows[i][j];
    return out;
}

} // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

Matrix read_csv_matrix(const std::string& path) {
    return rows_to_matrix(read_numeric_csv(path));
}

void write_csv_matrix(const std::string& path, const Matrix& matrix) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (Index i = 0; i < matrix.rows(); ++i) {
        for (Index j = 0; j < matrix.cols(); ++j) {
            if (j) out << ',';
            out << format_double(matrix(i, j));
        }
        out << '\n';
    }
}

harness::PointCloud read_point_cloud(const std::string& path, bool* renormalized) {
    if (renormalized) *renormalized = false;
    const ParsedCsv parsed = read_numeric_csv(path);
    const Matrix raw = rows_to_matrix(parsed);

    // A weight column must be announced by a header whose last field is
    // "weight"; headerless files are pure coordinates with uniform weights.
    const bool has_weights = !parsed.header.empty() && parsed.header.back() == "weight";
    if (raw.cols() < (has_weights ? 2 : 1))
        throw CsvError(path, 1, 1, "point cloud needs at least one coordinate column");

    Matrix points = has_weights ? raw.leftCols(raw.cols() - 1) : raw;
    Vector weights;
    if (has_weights) {
        weights = raw.col(raw.cols() - 1);
        for (Index i = 0; i < weights.size(); ++i)
            if (!(weights[i] > 0.0))
                throw CsvError(path, static_cast<int>(i + 2),
                               static_cast<int>(raw.cols()),
                               "weights must be strictly positive");
        const double total = weights.sum();
        if (std::abs(total - 1.0) > 1e-9) {
            weights /= total;
            if (renormalized) *renormalized = true;
        }
    } else {
        weights = Vector::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
    }
    return harness::PointCloud{std::move(points), DiscreteMeasure(std::move(weights))};
}

Vector read_csv_vector(const std::string& path) {
    const Matrix m = read_csv_matrix(path);
    if (m.cols() == 1) return m.col(0);
    if (m.rows() == 1) return m.row(0).transpose();
    throw CsvError(path, 1, 1, "expected a single row or column");
}

void write_csv_vector(const std::string& path, const Vector& v, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (!header.empty()) out << header << '\n';
    for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

void write_potentials_csv(const std::string& path, const Potentials& pots) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "which,index,value\n";
    for (Index i = 0; i < pots.f.size(); ++i)
        out << "f," << i << ',' << format_double(pots.f[i]) << '\n';
    for (Index j = 0; j < pots.g.size(); ++j)
        out << "g," << j << ',' << format_double(pots.g[j]) << '\n';
}

void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "iter,marginal_error,marginal_error_inf,semi_dual_value,"
           "newton_attempted,newton_accepted,time_ms\n";
    for (const IterationRecord& rec : trace) {
        out << rec.index << ',' << format_double(rec.marginal_error) << ','
            << format_double(rec.marginal_error_inf) << ','
            << format_double(rec.semi_dual_value) << ','
            << (rec.newton_attempted ? 1 : 0) << ',' << (rec.newton_accepted ? 1 : 0)
            << ',' << format_double(rec.wall_time_ms) << '\n';
    }
}

void write_anneal_csv(const std::string& path, const std::vector<double>& epsilons,
                      const std::vector<SolveResult>& stages) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "stage,epsilon,iter,marginal_error,semi_dual_value,newton_accepted,time_ms\n";
    for (std::size_t s = 0; s < stages.size(); ++s) {
        for (const IterationRecord& rec : stages[s].trace) {
            out << s << ',' << format_double(epsilons[s]) << ',' << rec.index << ','
                << format_double(rec.marginal_error) << ','
                << format_double(rec.semi_dual_value) << ','
                << (rec.newton_accepted ? 1 : 0) << ','
                << format_double(rec.wall_time_ms) << '\n';
        }
    }
}

void write_table_csv(const std::string& path, const harness::Table& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ',';
        out << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            out << row[c];
        }
        out << '\n';
    }
}

namespace {

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json matrix_cols_to_json(const Matrix& m) {
    json arr = json::array();
    for (Index c = 0; c < m.cols(); ++c) arr.push_back(vector_to_json(m.col(c)));
    return arr;
}

} // namespace

std::string spectrum_report_to_json(const SpectrumReport& report, Index k) {
    // Decimal serialization at 17 significant digits: floats are emitted as
    // preformatted strings and substituted into the final text so reloads
    // round-trip bitwise.
    std::ostringstream out;
    out << "{\n";
    out << "  \"epsilon\": " << format_double(report.epsilon) << ",\n";
    out << "  \"k\": " << k << ",\n";
    const auto emit_array = [&out](const char* name, const Vector& v, bool trailing) {
        out << "  \"" << name << "\": [";
        for (Index i = 0; i < v.size(); ++i) {
            if (i) out << ", ";
            out << format_double(v[i]);
        }
        out << "]" << (trailing ? "," : "") << "\n";
    };
    const bool with_vectors = report.vectors_f.size() > 0;
    emit_array("rho", report.rhos, true);
    emit_array("hessian_eigs_low", report.hessian_eigs_low, with_vectors);
    if (with_vectors) {
        const auto emit_matrix = [&out](const char* name, const Matrix& m,
                                        bool trailing) {
            out << "  \"" << name << "\": [";
            for (Index c = 0; c < m.cols(); ++c) {
                if (c) out << ", ";
                out << "[";
                for (Index i = 0; i < m.rows(); ++i) {
                    if (i) out << ", ";
                    out << format_double(m(i, c));
                }
                out << "]";
            }
            out << "]" << (trailing ? "," : "") << "\n";
        };
        emit_matrix("vectors_f", report.vectors_f, true);
        emit_matrix("vectors_g", report.vectors_g, false);
    }
    out << "}\n";
    return out.str();
}

void write_spectrum_json(const std::string& path, const SpectrumReport& report, Index k) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << spectrum_report_to_json(report, k);
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    std::string offenders;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            if (!offenders.empty()) offenders += ", ";
            offenders += it.key();
        }
    }
    if (!offenders.empty())
        throw std::invalid_argument("config: unknown key(s) in " + where + ": " +
                                    offenders);
}

} // namespace

harness::ExperimentSpec parse_experiment_config(const std::string& path,
                                                std::string* output_dir) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: invalid JSON: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");

    static const std::set<std::string> top_keys = {
        "experiment", "instance", "seeds",      "solver", "epsilon",
        "ells",       "basis_from", "schedule", "warm_modes", "ell",
        "refresh_basis", "epsilons", "k",       "output_dir"};
    reject_unknown_keys(doc, top_keys, "top level");

    harness::ExperimentSpec spec;
    const std::string kind = doc.value("experiment", std::string());
    if (kind == "ell_sweep")
        spec.kind = harness::ExperimentKind::ell_sweep;
    else if (kind == "anneal_compare")
        spec.kind = harness::ExperimentKind::anneal_compare;
    else if (kind == "spectrum_sweep")
        spec.kind = harness::ExperimentKind::spectrum_sweep;
    else
        throw std::invalid_argument(
            "config: 'experiment' must be one of ell_sweep, anneal_compare, "
            "spectrum_sweep");

    if (doc.contains("instance")) {
        const json& inst = doc["instance"];
        if (!inst.is_object())
            throw std::invalid_argument("config: 'instance' must be an object");
        static const std::set<std::string> inst_keys = {
            "family", "n", "m", "noise", "r_in", "r_out", "side"};
        reject_unknown_keys(inst, inst_keys, "instance");
        spec.instance.family = inst.value("family", spec.instance.family);
        spec.instance.n = inst.value("n", spec.instance.n);
        spec.instance.m = inst.value("m", spec.instance.m);
        spec.instance.noise = inst.value("noise", spec.instance.noise);
        spec.instance.r_in = inst.value("r_in", spec.instance.r_in);
        spec.instance.r_out = inst.value("r_out", spec.instance.r_out);
        spec.instance.side = inst.value("side", spec.instance.side);
    }

    if (!doc.contains("seeds") || !doc["seeds"].is_array() || doc["seeds"].empty())
        throw std::invalid_argument("config: no seeds");
    for (const json& s : doc["seeds"]) {
        if (!s.is_number_unsigned() && !s.is_number_integer())
            throw std::invalid_argument("config: seeds must be integers");
        spec.seeds.push_back(s.get<std::uint64_t>());
    }

    if (doc.contains("solver")) {
        const json& solver = doc["solver"];
        if (!solver.is_object())
            throw std::invalid_argument("config: 'solver' must be an object");
        static const std::set<std::string> solver_keys = {"tol_omega", "max_iter"};
        reject_unknown_keys(solver, solver_keys, "solver");
        spec.solver.tol_omega = solver.value("tol_omega", spec.solver.tol_omega);
        spec.solver.max_iter = solver.value("max_iter", spec.solver.max_iter);
    }

    spec.epsilon = doc.value("epsilon", spec.epsilon);
    if (doc.contains("ells"))
        for (const json& v : doc["ells"]) spec.ells.push_back(v.get<Index>());
    spec.basis_from = doc.value("basis_from", spec.basis_from);
    if (doc.contains("schedule"))
        for (const json& v : doc["schedule"]) spec.schedule.push_back(v.get<double>());
    if (doc.contains("warm_modes")) {
        for (const json& v : doc["warm_modes"]) {
            const std::string name = v.get<std::string>();
            if (name == "none")
                spec.warm_modes.push_back(WarmMode::none);
            else if (name == "potentials")
                spec.warm_modes.push_back(WarmMode::potentials);
            else if (name == "spectral")
                spec.warm_modes.push_back(WarmMode::spectral);
            else
                throw std::invalid_argument("config: unknown warm mode '" + name + "'");
        }
    }
    spec.ell = doc.value("ell", spec.ell);
    spec.refresh_basis = doc.value("refresh_basis", spec.refresh_basis);
    if (doc.contains("epsilons"))
        for (const json& v : doc["epsilons"]) spec.epsilons.push_back(v.get<double>());
    spec.k = doc.value("k", spec.k);
    if (output_dir) *output_dir = doc.value("output_dir", std::string("."));
    return spec;
}

} // namespace sknr::io
