#include "nlest/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nlest/checksum.hpp"
#include "nlest/error.hpp"

namespace nlest {

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::map<std::string, std::string> parse_header_pairs(const std::string& line)
{
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot open '" + path + "'");
    return is;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key)
{
    auto it = kv.find(key);
    if (it == kv.end()) throw InvalidArgument("file header lacks '" + key + "'");
    return it->second;
}

double to_double(const std::string& s)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("malformed number '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument("malformed number '" + s + "'");
    return v;
}

int to_int(const std::string& s)
{
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("malformed integer '" + s + "'");
    }
    if (pos != s.size()) throw InvalidArgument("malformed integer '" + s + "'");
    return v;
}

GridSpec spec_from_header(const std::map<std::string, std::string>& kv)
{
    return make_grid(to_int(require(kv, "dim")), to_int(require(kv, "n_cells")),
                     to_double(require(kv, "half_width")), to_double(require(kv, "exterior_radius")));
}

std::string spec_header(const GridSpec& s)
{
    return "dim=" + std::to_string(s.dim) + " n_cells=" + std::to_string(s.n_cells) +
           " half_width=" + format_double(s.half_width) +
           " exterior_radius=" + format_double(s.exterior_radius) + " h=" + format_double(s.h);
}

std::vector<double> split_csv_numbers(const std::string& line)
{
    std::vector<double> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(to_double(cell));
    return out;
}

// Reads the first line, checks its leading word, returns the header pairs.
std::map<std::string, std::string> read_header(std::istream& is, const std::string& word)
{
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("empty file");
    std::istringstream ls(line);
    std::string hash;
    std::string w;
    ls >> hash >> w;
    if (hash != "#" || w != word) throw InvalidArgument("expected a '" + word + "' header");
    return parse_header_pairs(line);
}

// Skips comment lines and the column header; returns data lines.
template <class Fn>
void for_data_lines(std::istream& is, const Fn& fn)
{
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        fn(line);
    }
}

int node_from_coord(double x, double h, const char* what)
{
    const double r = x / h;
    const double k = std::round(r);
    if (std::abs(r - k) > 1e-6) throw InvalidArgument(std::string(what) + " coordinate off the grid");
    return static_cast<int>(k);
}

}  // namespace

// ---------------------------------------------------------------------------

void write_grid_function(std::ostream& os, const GridFunction& u, const std::string& tag)
{
    const GridSpec& s = u.spec();
    os << "# nlest-grid-function " << spec_header(s) << " exterior=" << format_double(u.exterior())
       << "\n";
    if (!tag.empty()) os << "# " << tag << "\n";
    os << (s.dim == 2 ? "x,y,value\n" : "x,value\n");
    for (std::size_t k = 0; k < s.node_count(); ++k) {
        const auto [i, j] = s.unflat(k);
        const Point x = s.node_point(i, j);
        os << format_double(x[0]) << ',';
        if (s.dim == 2) os << format_double(x[1]) << ',';
        os << format_double(u[k]) << '\n';
    }
}

GridFunction read_grid_function(std::istream& is)
{
    const auto kv = read_header(is, "nlest-grid-function");
    const GridSpec s = spec_from_header(kv);
    const double exterior = to_double(require(kv, "exterior"));
    std::vector<double> values(s.node_count(), 0.0);
    std::vector<std::uint8_t> seen(s.node_count(), 0);
    for_data_lines(is, [&](const std::string& line) {
        const auto v = split_csv_numbers(line);
        if (v.size() != static_cast<std::size_t>(s.dim + 1)) throw InvalidArgument("malformed grid row");
        const int i = node_from_coord(v[0], s.h, "node");
        const int j = s.dim == 2 ? node_from_coord(v[1], s.h, "node") : 0;
        if (!s.in_extended(i, j)) throw InvalidArgument("grid row outside the extended box");
        values[s.flat(i, j)] = v.back();
        seen[s.flat(i, j)] = 1;
    });
    for (auto b : seen)
        if (!b) throw InvalidArgument("grid function file misses nodes");
    return {s, std::move(values), exterior};
}

void save_grid_function(const std::string& path, const GridFunction& u, const std::string& tag)
{
    auto os = open_out(path);
    write_grid_function(os, u, tag);
}

GridFunction load_grid_function(const std::string& path)
{
    auto is = open_in(path);
    return read_grid_function(is);
}

// ---------------------------------------------------------------------------

void write_set_indicator(std::ostream& os, const SetIndicator& e, const std::string& tag)
{
    const GridSpec& s = e.spec();
    os << "# nlest-set " << spec_header(s) << "\n";
    if (!tag.empty()) os << "# " << tag << "\n";
    os << (s.dim == 2 ? "x,y,value\n" : "x,value\n");
    const int ny = s.dim == 2 ? s.n_cells : 1;
    for (int cj = 0; cj < ny; ++cj)
        for (int ci = 0; ci < s.n_cells; ++ci) {
            const Point c = s.cell_center(ci, cj);
            os << format_double(c[0]) << ',';
            if (s.dim == 2) os << format_double(c[1]) << ',';
            os << (e.contains(ci, cj) ? 1 : 0) << '\n';
        }
}

SetIndicator read_set_indicator(std::istream& is)
{
    const auto kv = read_header(is, "nlest-set");
    const GridSpec s = spec_from_header(kv);
    SetIndicator e(s);
    auto cell_of = [&](double x) {
        const double r = (x + s.half_width) / s.h - 0.5;
        const double k = std::round(r);
        if (std::abs(r - k) > 1e-6 || k < 0 || k >= s.n_cells)
            throw InvalidArgument("set row is not a cell centre of the box");
        return static_cast<int>(k);
    };
    for_data_lines(is, [&](const std::string& line) {
        const auto v = split_csv_numbers(line);
        if (v.size() != static_cast<std::size_t>(s.dim + 1)) throw InvalidArgument("malformed set row");
        const int ci = cell_of(v[0]);
        const int cj = s.dim == 2 ? cell_of(v[1]) : 0;
        if (v.back() != 0.0 && v.back() != 1.0) throw InvalidArgument("set values must be 0 or 1");
        e.set(ci, cj, v.back() != 0.0);
    });
    return e;
}

SetIndicator load_set_indicator(const std::string& path)
{
    auto is = open_in(path);
    return read_set_indicator(is);
}

void write_scalar_field(std::ostream& os, const ScalarField& v, const std::string& column,
                        const std::string& tag)
{
    const GridSpec& s = v.spec();
    os << "# nlest-box-field " << spec_header(s) << "\n";
    if (!tag.empty()) os << "# " << tag << "\n";
    os << (s.dim == 2 ? "x,y," : "x,") << column << "\n";
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Point x = v.point(k);
        os << format_double(x[0]) << ',';
        if (s.dim == 2) os << format_double(x[1]) << ',';
        os << format_double(v[k]) << '\n';
    }
}

void write_cz_result(std::ostream& os, const CZResult& r, const GridSpec& spec, const std::string& tag)
{
    os << "# nlest-cz " << spec_header(spec) << " alpha=" << format_double(r.alpha)
       << " e_cells=" << r.e_cells << " union_predecessor_cells=" << r.union_predecessor_cells
       << "\n";
    if (!tag.empty()) os << "# " << tag << "\n";
    os << (spec.dim == 2 ? "role,center_x,center_y,half_side,level,density\n"
                         : "role,center_x,half_side,level,density\n");
    auto row = [&](const char* role, const DyadicCube& q, double density) {
        const Point c = q.center(spec);
        os << role << ',' << format_double(c[0]) << ',';
        if (spec.dim == 2) os << format_double(c[1]) << ',';
        os << format_double(q.half_side(spec)) << ',' << q.level << ',' << format_double(density)
           << '\n';
    };
    for (std::size_t k = 0; k < r.kept.size(); ++k) row("kept", r.kept[k], r.kept_density[k]);
    for (std::size_t k = 0; k < r.predecessors.size(); ++k) {
        const double d = static_cast<double>(r.predecessor_e_cells[k]) /
                         static_cast<double>(r.predecessors[k].cell_count(spec.dim));
        row("predecessor", r.predecessors[k], d);
    }
}

// ---------------------------------------------------------------------------

void write_weights(std::ostream& os, const KernelWeights& w)
{
    const GridSpec& s = w.spec;
    os << "nlest-weights version=" << kWeightsFormatVersion << " dim=" << s.dim
       << " n_cells=" << s.n_cells << " half_width=" << format_double(s.half_width)
       << " exterior_radius=" << format_double(s.exterior_radius)
       << " sigma=" << format_double(w.sigma) << " scheme=" << to_string(w.scheme)
       << " h=" << format_double(s.h)
       << " offsets=" << w.offsets.size() << " checksum=" << hex64(w.checksum()) << " tail=";
    if (s.dim == 1)
        os << format_double(w.tail.xx);
    else
        os << format_double(w.tail.xx) << ',' << format_double(w.tail.xy) << ','
           << format_double(w.tail.yy);
    os << " tail_warning=" << (w.tail_warning ? 1 : 0) << "\n";
    for (std::size_t q = 0; q < w.offsets.size(); ++q) {
        const auto& k = w.offsets[q];
        const auto& m = w.weights[q];
        if (s.dim == 1)
            os << k[0] << ' ' << format_double(m.xx) << '\n';
        else
            os << k[0] << ' ' << k[1] << ' ' << format_double(m.xx) << ' ' << format_double(m.xy)
               << ' ' << format_double(m.yy) << '\n';
    }
}

KernelWeights read_weights(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("nlest-weights", 0) != 0)
        throw InvalidArgument("not a weights cache file");
    const auto kv = parse_header_pairs(line);
    if (to_int(require(kv, "version")) != kWeightsFormatVersion)
        throw InvalidArgument("weights cache format version mismatch");
    KernelWeights w;
    w.spec = spec_from_header(kv);
    w.sigma = to_double(require(kv, "sigma"));
    w.scheme = parse_weight_scheme(require(kv, "scheme"));
    const auto count = static_cast<std::size_t>(std::stoull(require(kv, "offsets")));
    const auto tail = split_csv_numbers(require(kv, "tail"));
    if (tail.size() != (w.spec.dim == 2 ? 3u : 1u)) throw InvalidArgument("malformed tail tensor");
    w.tail = w.spec.dim == 2 ? SymMatrix{2, tail[0], tail[1], tail[2]} : SymMatrix{1, tail[0], 0, 0};
    auto tw = kv.find("tail_warning");
    w.tail_warning = tw != kv.end() && tw->second == "1";
    w.offsets.reserve(count);
    w.weights.reserve(count);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::array<int, 2> k{0, 0};
        SymMatrix m = SymMatrix::zero(w.spec.dim);
        std::string a;
        std::string b;
        std::string c;
        if (w.spec.dim == 1) {
            if (!(ls >> k[0] >> a)) throw InvalidArgument("malformed weights row");
            m.xx = to_double(a);
        } else {
            if (!(ls >> k[0] >> k[1] >> a >> b >> c)) throw InvalidArgument("malformed weights row");
            m.xx = to_double(a);
            m.xy = to_double(b);
            m.yy = to_double(c);
        }
        w.offsets.push_back(k);
        w.weights.push_back(m);
    }
    if (w.offsets.size() != count) throw InvalidArgument("weights cache truncated");
    if (hex64(w.checksum()) != require(kv, "checksum"))
        throw InvalidArgument("weights cache checksum mismatch");
    return w;
}

void save_weights(const std::string& path, const KernelWeights& w)
{
    auto os = open_out(path);
    write_weights(os, w);
}

KernelWeights load_weights(const std::string& path)
{
    auto is = open_in(path);
    return read_weights(is);
}

}  // namespace nlest
