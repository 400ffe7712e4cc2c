#ifndef SKNR_IO_HPP
#define SKNR_IO_HPP

#include <string>
#include <vector>

#include "sknr/harness/experiments.hpp"
#include "sknr/harness/generators.hpp"
#include "sknr/solver.hpp"
#include "sknr/spectral.hpp"

namespace sknr::io {

/// Parse failure with 1-based line/column position for diagnostics.
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& path, int line, int column, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ":" +
                             std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

/// %.17g: doubles round-trip bitwise through this format.
std::string format_double(double value);

/// Numeric CSV, one row per line, comma separated, all rows equal length.
/// A leading non-numeric header line is tolerated and skipped.
Matrix read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Matrix& matrix);

/// Point cloud: one point per row, optional final weight column (weights
/// renormalized when their sum is off by more than 1e-9; `renormalized` is
/// set so the CLI can warn). NaN/inf entries are rejected.
harness::PointCloud read_point_cloud(const std::string& path, bool* renormalized = nullptr);

Vector read_csv_vector(const std::string& path);
void write_csv_vector(const std::string& path, const Vector& v, const std::string& header);

void write_potentials_csv(const std::string& path, const Potentials& pots);
void write_trace_csv(const std::string& path, const std::vector<IterationRecord>& trace);

/// Combined anneal trace with the fixed header
/// stage,epsilon,iter,marginal_error,semi_dual_value,newton_accepted,time_ms.
void write_anneal_csv(const std::string& path, const std::vector<double>& epsilons,
                      const std::vector<SolveResult>& stages);

void write_table_csv(const std::string& path, const harness::Table& table);

std::string spectrum_report_to_json(const SpectrumReport& report, Index k);
void write_spectrum_json(const std::string& path, const SpectrumReport& report, Index k);

/// Strict RunConfigFile parser: schema-validated, unknown keys rejected with
/// their names in the exception message. `output_dir` receives the config's
/// output directory ("." when absent).
harness::ExperimentSpec parse_experiment_config(const std::string& path,
                                                std::string* output_dir = nullptr);

} // namespace sknr::io

#endif // SKNR_IO_HPP
