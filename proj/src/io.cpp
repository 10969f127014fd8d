#include "qtraj/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

Complex entry_from_json(const Json& e) {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        return {e[0].get<double>(), e[1].get<double>()};
    }
    throw ValidationError("schema", "matrix entries must be [re, im] pairs or numbers");
}

const Json& field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) {
        throw ValidationError("schema", std::string("missing field '") + name + "'");
    }
    return j.at(name);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void check_series(const PlotSeries& s) {
    if (s.x.empty() || s.ys.empty()) throw ValidationError("empty_series", "nothing to plot");
    if (s.labels.size() != s.ys.size()) throw ValidationError("series", "one label per series is required");
    for (const auto& y : s.ys) {
        if (y.size() != s.x.size()) throw ValidationError("series", "series lengths differ");
    }
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("schema", "matrix must be a non-empty array of rows");
    const auto rows = static_cast<Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) throw ValidationError("schema", "matrix rows must be non-empty arrays");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
            throw ValidationError("schema", "matrix rows differ in length");
        }
        for (Index c = 0; c < cols; ++c) m(i, c) = entry_from_json(row[static_cast<std::size_t>(c)]);
    }
    if (!m.allFinite()) throw ValidationError("non_finite", "matrix has non-finite entries");
    return m;
}

Json real_matrix_to_json(const RealMatrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

RealMatrix real_matrix_from_json(const Json& j) {
    const Matrix m = matrix_from_json(j);
    if (m.imag().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("schema", "expected a real matrix");
    return m.real();
}

Json to_json(const GkslSpec& spec) {
    Json j;
    j["dim"] = spec.dim;
    j["hamiltonian"] = matrix_to_json(spec.hamiltonian);
    j["kraus"] = Json::array();
    for (const auto& l : spec.kraus) j["kraus"].push_back(matrix_to_json(l));
    j["efficiencies"] = spec.efficiencies;
    return j;
}

GkslSpec gksl_from_json(const Json& j) {
    const Json& dim = field(j, "dim");
    if (!dim.is_number_integer() || dim.get<long long>() < 1) {
        throw ValidationError("schema", "dim must be a positive integer");
    }
    GkslSpec spec = GkslSpec::zero(dim.get<Index>());
    if (j.contains("hamiltonian")) spec.hamiltonian = matrix_from_json(j.at("hamiltonian"));
    if (j.contains("kraus")) {
        if (!j.at("kraus").is_array()) throw ValidationError("schema", "kraus must be an array of matrices");
        for (const auto& l : j.at("kraus")) spec.kraus.push_back(matrix_from_json(l));
    }
    if (j.contains("efficiencies")) {
        for (const auto& e : j.at("efficiencies")) {
            if (!e.is_number()) throw ValidationError("schema", "efficiencies must be numbers");
            spec.efficiencies.push_back(e.get<double>());
        }
    } else {
        spec.efficiencies.assign(spec.kraus.size(), 0.0);
    }
    spec.validate();
    return spec;
}

Json to_json(const ThreeScaleModel& model) {
    Json j;
    j["gamma"] = model.gamma;
    j["level0"] = to_json(model.level0);
    j["level1"] = to_json(model.level1);
    j["level2"] = to_json(model.level2);
    return j;
}

ThreeScaleModel model_from_json(const Json& j) {
    ThreeScaleModel m;
    const Json& g = field(j, "gamma");
    if (!g.is_number()) throw ValidationError("schema", "gamma must be a number");
    m.gamma = g.get<double>();
    m.level0 = gksl_from_json(field(j, "level0"));
    m.level1 = gksl_from_json(field(j, "level1"));
    m.level2 = gksl_from_json(field(j, "level2"));
    m.validate();
    return m;
}

Json to_json(const MarkovGenerator& t) {
    Json j;
    j["dim"] = t.dim();
    j["rates"] = real_matrix_to_json(t.rates);
    return j;
}

MarkovGenerator markov_from_json(const Json& j) {
    MarkovGenerator t;
    t.rates = real_matrix_from_json(j.is_object() ? field(j, "rates") : j);
    if (t.rates.rows() != t.rates.cols()) throw ValidationError("schema", "rate matrix must be square");
    t.validate(1e-9);
    return t;
}

Json to_json(const AssumptionReport& r) {
    Json j;
    j["qnd_ok"] = r.qnd_ok;
    j["identifiability_ok"] = r.identifiability_ok;
    j["decoherence_ok"] = r.decoherence_ok;
    j["max_offdiagonal"] = r.max_offdiagonal;
    j["offending"] = Json::array();
    for (const auto& w : r.offending) {
        // 1-based indices in reports.
        Json o{{"source", w.source}, {"i", w.i + 1}, {"j", w.j + 1}};
        if (w.k >= 0) o["k"] = w.k + 1;
        j["offending"].push_back(std::move(o));
    }
    return j;
}

Json to_json(const HomogenizationResiduals& r) {
    return Json{{"idempotence", r.idempotence},       {"kernel_left", r.kernel_left},
                {"kernel_right", r.kernel_right},     {"pinv_projector", r.pinv_projector},
                {"pinv_inverse", r.pinv_inverse},     {"centering", r.centering},
                {"max", r.max()}};
}

// ---------------------------------------------------------------------------

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("json", path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

ThreeScaleModel read_model_file(const std::filesystem::path& path) {
    try {
        return model_from_json(read_json_file(path));
    } catch (const Json::exception& e) {
        throw ValidationError("schema", path.string() + ": " + e.what());
    }
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), columns_(header.size()) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    file_ = std::fopen(path.c_str(), "wb");
    if (file_ == nullptr) throw IoError("cannot write " + path.string());
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k > 0) buffer_ += ',';
        buffer_ += header[k];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
    if (values.size() != columns_) throw ValidationError("csv", "row length differs from header");
    char buf[32];
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) buffer_ += ',';
        const double x = values[k];
        if (std::isfinite(x)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, x);
            buffer_.append(buf, res.ptr);
        } else {
            buffer_ += format_double(x);
        }
    }
    buffer_ += '\n';
    if (buffer_.size() > (1u << 20)) flush();
}

void CsvWriter::flush() {
    if (file_ == nullptr) return;
    if (!buffer_.empty() && std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size()) {
        throw IoError("write failed for " + path_.string());
    }
    buffer_.clear();
}

void CsvWriter::close() {
    if (file_ == nullptr) return;
    flush();
    const int rc = std::fclose(file_);
    file_ = nullptr;
    if (rc != 0) throw IoError("close failed for " + path_.string());
}

CsvWriter::~CsvWriter() {
    try {
        close();
    } catch (...) {
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ValidationError("csv", "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv", path.string() + ": empty file");
    t.header = split_csv_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) {
            throw ValidationError("csv", path.string() + ":" + std::to_string(lineno) + ": wrong number of cells");
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw ValidationError("csv", path.string() + ":" + std::to_string(lineno) + ": not a number: " + c);
            }
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------

std::string render_svg(const PlotSeries& series, const std::string& title, std::size_t max_points) {
    check_series(series);
    constexpr double kW = 800.0;
    constexpr double kH = 450.0;
    constexpr double kMargin = 60.0;
    double xmin = *std::min_element(series.x.begin(), series.x.end());
    double xmax = *std::max_element(series.x.begin(), series.x.end());
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -ymin;
    for (const auto& y : series.ys) {
        for (double v : y) {
            if (!std::isfinite(v)) continue;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!std::isfinite(ymin)) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const auto px = [&](double x) { return kMargin + (x - xmin) / (xmax - xmin) * (kW - 2 * kMargin); };
    const auto py = [&](double y) { return kH - kMargin - (y - ymin) / (ymax - ymin) * (kH - 2 * kMargin); };
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">"
       << xml_escape(title) << "</text>\n"
       << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin << "\" height=\""
       << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<text x=\"" << kMargin << "\" y=\"" << kH - kMargin + 16 << "\">" << format_double(xmin) << "</text>\n"
       << "<text x=\"" << kW - kMargin << "\" y=\"" << kH - kMargin + 16 << "\" text-anchor=\"end\">"
       << format_double(xmax) << "</text>\n"
       << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 20 << "\" text-anchor=\"middle\">" << xml_escape(series.x_label)
       << "</text>\n"
       << "<text x=\"" << kMargin - 6 << "\" y=\"" << kH - kMargin << "\" text-anchor=\"end\">" << format_double(ymin)
       << "</text>\n"
       << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + 4 << "\" text-anchor=\"end\">" << format_double(ymax)
       << "</text>\n</g>\n";
    const std::size_t n = series.x.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
    for (std::size_t s = 0; s < series.ys.size(); ++s) {
        const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
        os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << color << "\" points=\"";
        for (std::size_t k = 0; k < n; k += stride) {
            const double y = series.ys[s][k];
            if (!std::isfinite(y)) continue;
            os << px(series.x[k]) << ',' << py(y) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << kW - kMargin - 4 << "\" y=\"" << kMargin + 16 + 14 * static_cast<double>(s)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
           << xml_escape(series.labels[s]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void emit_plot_data(const PlotSeries& series, const std::filesystem::path& out_path, bool svg,
                    const std::string& title) {
    check_series(series);
    std::vector<std::string> header{series.x_label};
    header.insert(header.end(), series.labels.begin(), series.labels.end());
    {
        CsvWriter csv(out_path, header);
        std::vector<double> row(header.size());
        for (std::size_t k = 0; k < series.x.size(); ++k) {
            row[0] = series.x[k];
            for (std::size_t s = 0; s < series.ys.size(); ++s) row[s + 1] = series.ys[s][k];
            csv.row(row);
        }
        csv.close();
    }
    if (svg) {
        std::filesystem::path svg_path = out_path;
        svg_path.replace_extension(".svg");
        write_text_file(svg_path, render_svg(series, title));
    }
}

}  // namespace qtraj
