#include "rfsurface/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rfs {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("binary read: truncated stream");
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    const auto n = read_pod<std::uint32_t>(is);
    if (n > (1u << 20)) throw std::runtime_error("binary read: implausible string length");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw std::runtime_error("binary read: truncated stream");
    return s;
}

constexpr char kFieldMagic[4] = {'R', 'F', 'S', 'F'};
constexpr char kEnvMagic[4] = {'R', 'F', 'S', 'E'};

}  // namespace

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad numeric token: " + s);
    return v;
}

std::string scaling_table_csv(const ScalingTable& table) {
    table.validate();
    std::string out = "d,L,lambda,beta,observable,estimate,stderr,n,seed\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.d);
        out += ',';
        out += std::to_string(r.L);
        out += ',';
        out += format_double(r.lambda);
        out += ',';
        out += format_double(r.beta);
        out += ',';
        out += to_string(r.observable);
        out += ',';
        out += format_double(r.estimate);
        out += ',';
        out += format_double(r.std_error);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

void write_scaling_csv(const std::filesystem::path& path, const ScalingTable& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os << scaling_table_csv(table);
    if (!os) fail(path, "write failed");
}

ScalingTable read_scaling_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail(path, "cannot open");
    std::string line;
    if (!std::getline(is, line)) fail(path, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "d,L,lambda,beta,observable,estimate,stderr,n,seed")
        fail(path, "unexpected CSV header: " + line);

    ScalingTable table;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) fail(path, "malformed row: " + line);
        ScalingRow r;
        r.d = std::stoi(cells[0]);
        r.L = std::stoi(cells[1]);
        r.lambda = parse_double(cells[2]);
        r.beta = parse_double(cells[3]);
        r.observable = observable_from_string(cells[4]);
        r.estimate = parse_double(cells[5]);
        r.std_error = parse_double(cells[6]);
        r.n = std::stol(cells[7]);
        r.seed = std::stoull(cells[8]);
        table.rows.push_back(r);
    }
    table.validate();
    return table;
}

std::string exponent_fit_json(const ExponentFit& fit) {
    std::string out = "{\"exponent\": ";
    out += format_double(fit.exponent);
    out += ", \"stderr\": ";
    out += format_double(fit.std_error);
    out += ", \"r2\": ";
    out += format_double(fit.r_squared);
    out += ", \"model\": \"";
    out += to_string(fit.model);
    out += "\"}\n";
    return out;
}

void write_field_csv(const std::filesystem::path& path, const Field& f, const FieldMeta& meta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os << "# d=" << meta.d << " L=" << meta.L << " distribution=" << meta.distribution
       << " base_seed=" << meta.base_seed << "\n";
    os << "index,value\n";
    for (std::int32_t i = 0; i < f.size(); ++i)
        os << i << ',' << format_double(f[i]) << '\n';
    if (!os) fail(path, "write failed");
}

void write_field_binary(const std::filesystem::path& path, const Field& f,
                        const FieldMeta& meta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os.write(kFieldMagic, 4);
    write_pod<std::int32_t>(os, meta.d);
    write_pod<std::int32_t>(os, meta.L);
    write_string(os, meta.distribution);
    write_pod<std::uint64_t>(os, meta.base_seed);
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(f.size()));
    for (std::int32_t i = 0; i < f.size(); ++i) write_pod<double>(os, f[i]);
    if (!os) fail(path, "write failed");
}

StoredField read_field_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail(path, "cannot open");
    StoredField sf;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) fail(path, "missing header line");
    std::istringstream hs(line.substr(2));
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) fail(path, "bad header token: " + token);
        const std::string key = token.substr(0, eq);
        const std::string val = token.substr(eq + 1);
        if (key == "d") sf.meta.d = std::stoi(val);
        else if (key == "L") sf.meta.L = std::stoi(val);
        else if (key == "distribution") sf.meta.distribution = val;
        else if (key == "base_seed") sf.meta.base_seed = std::stoull(val);
        else fail(path, "unknown header key: " + key);
    }
    if (!std::getline(is, line)) fail(path, "missing column row");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) fail(path, "malformed row: " + line);
        const auto idx = std::stol(cells[0]);
        if (idx != static_cast<long>(sf.values.size())) fail(path, "indices out of order");
        sf.values.push_back(parse_double(cells[1]));
    }
    return sf;
}

StoredField read_field_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(path, "cannot open");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kFieldMagic, 4) != 0) fail(path, "not a field file");
    StoredField sf;
    sf.meta.d = read_pod<std::int32_t>(is);
    sf.meta.L = read_pod<std::int32_t>(is);
    sf.meta.distribution = read_string(is);
    sf.meta.base_seed = read_pod<std::uint64_t>(is);
    const auto n = read_pod<std::uint64_t>(is);
    if (n > (1ull << 32)) fail(path, "implausible site count");
    sf.values.resize(n);
    for (auto& v : sf.values) v = read_pod<double>(is);
    return sf;
}

Field restore_field(const StoredField& stored, const Lattice& lat) {
    if (stored.meta.d != lat.dim() || stored.meta.L != lat.side())
        throw std::invalid_argument("restore_field: stored geometry does not match lattice");
    if (stored.values.size() != static_cast<std::size_t>(lat.n_sites()))
        throw std::invalid_argument("restore_field: value count mismatch");
    Field f(lat);
    for (std::int32_t i = 0; i < f.size(); ++i) f[i] = stored.values[i];
    return f;
}

void write_environment_binary(const std::filesystem::path& path, const TimeEnvironment& env) {
    if (env.times.size() * static_cast<std::size_t>(env.n_edges) != env.a.size())
        throw std::invalid_argument("environment record: times/edges shape mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(path, "cannot open for writing");
    os.write(kEnvMagic, 4);
    write_pod<std::uint64_t>(os, env.times.size());
    write_pod<std::int64_t>(os, env.n_edges);
    write_pod<double>(os, env.c_minus);
    write_pod<double>(os, env.c_plus);
    for (double t : env.times) write_pod<double>(os, t);
    for (double v : env.a) write_pod<double>(os, v);
    if (!os) fail(path, "write failed");
}

TimeEnvironment read_environment_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(path, "cannot open");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kEnvMagic, 4) != 0) fail(path, "not an environment file");
    TimeEnvironment env;
    const auto n_times = read_pod<std::uint64_t>(is);
    env.n_edges = read_pod<std::int64_t>(is);
    env.c_minus = read_pod<double>(is);
    env.c_plus = read_pod<double>(is);
    if (n_times > (1ull << 24) || env.n_edges < 0 || env.n_edges > (1ll << 32))
        fail(path, "implausible environment shape");
    env.times.resize(n_times);
    for (auto& t : env.times) t = read_pod<double>(is);
    env.a.resize(n_times * static_cast<std::size_t>(env.n_edges));
    for (auto& v : env.a) v = read_pod<double>(is);
    return env;
}

}  // namespace rfs
