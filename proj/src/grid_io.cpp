#include "pdeforge/errors.hpp"
#include "pdeforge/grid.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pdeforge {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

// Line-oriented reader that skips comments and tracks line numbers.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            line = t;
            return true;
        }
        return false;
    }

    int lineno() const { return lineno_; }

private:
    std::istream& in_;
    int lineno_ = 0;
};

[[noreturn]] void format_fail(int lineno, const std::string& what) {
    throw FormatError("EPDE-GRID parse error at line " + std::to_string(lineno) + ": " + what);
}

std::string expect_prefixed(LineReader& r, const std::string& prefix) {
    std::string line;
    if (!r.next(line)) format_fail(r.lineno(), "unexpected end of file, expected '" + prefix + "'");
    if (line.rfind(prefix, 0) != 0) format_fail(r.lineno(), "expected '" + prefix + "', got '" + line + "'");
    return trim(line.substr(prefix.size()));
}

void format_value(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

} // namespace

Dataset dataset_from_string(const std::string& text) {
    std::istringstream in(text);
    LineReader r(in);

    std::string line;
    if (!r.next(line)) format_fail(r.lineno(), "empty file");
    if (line != "EPDE-GRID v1") format_fail(r.lineno(), "bad magic, expected 'EPDE-GRID v1'");

    const auto vars = split(expect_prefixed(r, "vars:"), ',');
    if (vars.empty() || vars[0].empty()) format_fail(r.lineno(), "no variables declared");

    const auto dims = split(expect_prefixed(r, "dims:"), ',');
    if (dims.empty() || dims[0].empty()) format_fail(r.lineno(), "no dims declared");

    Grid grid;
    grid.dim_names = dims;

    {
        std::istringstream ss(expect_prefixed(r, "shape:"));
        std::size_t v;
        while (ss >> v) grid.shape.push_back(v);
        if (grid.shape.size() != dims.size())
            format_fail(r.lineno(), "shape has " + std::to_string(grid.shape.size()) +
                                        " entries for " + std::to_string(dims.size()) + " dims");
    }

    for (const auto& d : dims) {
        const std::string rest = expect_prefixed(r, "axis " + d + ":");
        std::istringstream ss(rest);
        double origin, step;
        if (!(ss >> origin >> step)) format_fail(r.lineno(), "axis line needs '<origin> <step>'");
        grid.origins.push_back(origin);
        grid.steps.push_back(step);
    }
    grid.validate();

    const std::size_t m = grid.size();
    Dataset ds;
    ds.grid = grid;

    for (const auto& var : vars) {
        const std::string name = expect_prefixed(r, "field:");
        if (name != var)
            format_fail(r.lineno(), "field '" + name + "' out of order, expected '" + var + "'");
        DataField field;
        field.name = name;
        field.values.reserve(m);
        while (field.values.size() < m) {
            if (!r.next(line))
                throw DataError("field '" + name + "': got " + std::to_string(field.values.size()) +
                                " values, grid needs " + std::to_string(m));
            std::istringstream ss(line);
            std::string tok;
            while (ss >> tok) {
                double v = 0.0;
                const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                    format_fail(r.lineno(), "bad numeric token '" + tok + "'");
                if (!std::isfinite(v))
                    throw DataError("field '" + name + "': non-finite value at flat index " +
                                    std::to_string(field.values.size()));
                field.values.push_back(v);
            }
            if (field.values.size() > m)
                throw DataError("field '" + name + "': more than " + std::to_string(m) + " values");
        }
        ds.fields.push_back(std::move(field));
    }
    ds.validate();
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_string(buf.str());
}

std::string dataset_to_string(const Dataset& dataset, const std::vector<std::string>& header_comments) {
    dataset.validate();
    std::ostringstream out;
    for (const auto& c : header_comments) out << "# " << c << "\n";
    out << "EPDE-GRID v1\n";
    out << "vars: ";
    for (std::size_t i = 0; i < dataset.fields.size(); ++i)
        out << (i ? "," : "") << dataset.fields[i].name;
    out << "\n";
    out << "dims: ";
    for (std::size_t a = 0; a < dataset.grid.rank(); ++a)
        out << (a ? "," : "") << dataset.grid.dim_names[a];
    out << "\n";
    out << "shape:";
    for (std::size_t s : dataset.grid.shape) out << " " << s;
    out << "\n";
    char buf[64];
    for (std::size_t a = 0; a < dataset.grid.rank(); ++a) {
        out << "axis " << dataset.grid.dim_names[a] << ": ";
        format_value(buf, sizeof buf, dataset.grid.origins[a]);
        out << buf << " ";
        format_value(buf, sizeof buf, dataset.grid.steps[a]);
        out << buf << "\n";
    }
    for (const auto& f : dataset.fields) {
        out << "field: " << f.name << "\n";
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            format_value(buf, sizeof buf, f.values[i]);
            out << buf << ((i % 6 == 5 || i + 1 == f.values.size()) ? "\n" : " ");
        }
    }
    return out.str();
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path,
                  const std::vector<std::string>& header_comments) {
    const std::string text = dataset_to_string(dataset, header_comments);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dataset file: " + path.string());
    out << text;
    if (!out) throw DataError("I/O failure while writing: " + path.string());
}

} // namespace pdeforge
