#pragma once

// File formats.
//
// Matrices are JSON arrays of rows; every entry is an [re, im] pair (a bare
// number is accepted on input as a real entry). GkslSpec:
//   {"dim": d, "hamiltonian": M, "kraus": [M, ...], "efficiencies": [eta, ...]}
// ThreeScaleModel: {"gamma": g, "level0": S, "level1": S, "level2": S}.
// CSV numbers are written in the shortest form that round-trips exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/homogenize.hpp"
#include "qtraj/jump.hpp"
#include "qtraj/qnd.hpp"

namespace qtraj {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
Json real_matrix_to_json(const RealMatrix& m);
RealMatrix real_matrix_from_json(const Json& j);

Json to_json(const GkslSpec& spec);
GkslSpec gksl_from_json(const Json& j);
Json to_json(const ThreeScaleModel& model);
ThreeScaleModel model_from_json(const Json& j);
Json to_json(const MarkovGenerator& t);
MarkovGenerator markov_from_json(const Json& j);
Json to_json(const AssumptionReport& r);
Json to_json(const HomogenizationResiduals& r);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);
ThreeScaleModel read_model_file(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly x.
std::string format_double(double x);

/// Buffered CSV writer; throws IoError on failure.
class CsvWriter {
 public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<double>& values);
    /// Flushes and closes; also called by the destructor (which swallows errors).
    void close();
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

 private:
    std::filesystem::path path_;
    std::string buffer_;
    std::size_t columns_;
    std::FILE* file_ = nullptr;
    void flush();
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    /// Column index by name; throws ValidationError if absent.
    std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

/// A set of equal-length series over a shared abscissa.
struct PlotSeries {
    std::string x_label = "t";
    std::vector<double> x;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> ys;
};

/// Writes <out_path> as CSV (x column, then one column per series) and, if
/// requested, <out_path with .svg extension> as a line plot. Throws
/// ValidationError before touching the disk when the series are empty or
/// ragged.
void emit_plot_data(const PlotSeries& series, const std::filesystem::path& out_path, bool svg = false,
                    const std::string& title = "");

/// Stand-alone SVG polyline plot; long series are decimated to at most
/// max_points per curve.
std::string render_svg(const PlotSeries& series, const std::string& title, std::size_t max_points = 4000);

}  // namespace qtraj
