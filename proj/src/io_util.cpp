#include "delaunay/io_util.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace delaunay {

std::string fmt_g17(double x) {
    if (x == 0.0) x = 0.0;  // normalize -0: "-0" parses as integer zero in JSON
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// JSON has no literals for non-finite numbers; they only arise in reports on
// degenerate inputs (e.g. a straddle certificate with no extrema at all), so
// clamp infinities to the double range edge and map NaN to null to keep the
// artifact parseable.
std::string fmt_json_number(double x) {
    if (std::isnan(x)) return "null";
    if (std::isinf(x)) return x > 0 ? "1e308" : "-1e308";
    return fmt_g17(x);
}

void append_array(std::string& out, const std::vector<double>& xs) {
    out += '[';
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += fmt_json_number(xs[i]);
    }
    out += ']';
}

double get_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing field \"") + key + '"');
    const auto& v = j.at(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) throw SchemaError(std::string("field \"") + key + "\" is not a number");
    return v.get<double>();
}

std::vector<double> get_array(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw SchemaError(std::string("missing array \"") + key + '"');
    const auto& v = j.at(key);
    if (!v.is_array()) throw SchemaError(std::string("field \"") + key + "\" is not an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) throw SchemaError(std::string("array \"") + key + "\" has a non-numeric entry");
        out.push_back(e.get<double>());
    }
    return out;
}

nlohmann::json parse_checked(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("not valid JSON: ") + e.what());
    }
}

} // namespace

std::string constants_to_json(const ModelConstants& c) {
    std::string out;
    out.reserve(256);
    out += "{\"n\":" + std::to_string(c.n);
    out += ",\"p\":" + fmt_g17(c.p);
    out += ",\"K2\":" + fmt_g17(c.K2);
    out += ",\"K0\":" + fmt_g17(c.K0);
    out += ",\"l\":" + fmt_g17(c.l);
    out += ",\"L\":" + fmt_g17(c.L);
    out += ",\"cn\":" + fmt_g17(c.cn);
    out += ",\"C2\":" + fmt_g17(c.C2);
    out += ",\"C3\":" + fmt_g17(c.C3);
    out += ",\"C4\":" + fmt_g17(c.C4);
    out += ",\"Gl\":" + fmt_g17(c.Gl);
    out += '}';
    return out;
}

namespace {

std::string linearization_to_json(const Linearization& lin) {
    std::string out;
    out += "{\"matrix\":[";
    for (int r = 0; r < 4; ++r) {
        if (r) out += ',';
        out += '[';
        for (int cidx = 0; cidx < 4; ++cidx) {
            if (cidx) out += ',';
            out += fmt_json_number(lin.matrix[r][cidx]);
        }
        out += ']';
    }
    out += "],\"char_poly\":[";
    for (int i = 0; i < 5; ++i) {
        if (i) out += ',';
        out += fmt_json_number(lin.char_poly_coeffs[i]);
    }
    out += "],\"eigenvalues\":[";
    for (int i = 0; i < 4; ++i) {
        if (i) out += ',';
        out += '[';
        out += fmt_json_number(lin.eigenvalues[i].real());
        out += ',';
        out += fmt_json_number(lin.eigenvalues[i].imag());
        out += ']';
    }
    out += "]}";
    return out;
}

} // namespace

std::string linearizations_to_json(const ModelConstants& c, const Linearization& at_O,
                                   const Linearization& at_P) {
    std::string out;
    out.reserve(1024);
    out += "{\"n\":" + std::to_string(c.n);
    out += ",\"at_O\":" + linearization_to_json(at_O);
    out += ",\"at_P\":" + linearization_to_json(at_P);
    out += ",\"omega\":" + fmt_g17(center_frequency(c));
    out += '}';
    return out;
}

std::string orbit_to_json(const OrbitSolution& orbit) {
    std::string out;
    out.reserve(64 + orbit.grid_t.size() * 5 * 26);
    out += "{\"n\":" + std::to_string(orbit.c.n);
    out += ",\"T\":" + fmt_g17(orbit.T);
    out += ",\"a\":" + fmt_g17(orbit.a);
    out += ",\"b\":" + fmt_g17(orbit.b);
    out += ",\"residual\":" + fmt_json_number(orbit.residual);
    out += ",\"closure_gap\":" + fmt_json_number(orbit.closure_gap);
    out += ",\"amplitude\":" + fmt_g17(orbit.amplitude);
    out += ",\"energy_level\":" + fmt_g17(orbit.energy_level);
    out += ",\"grid\":{\"t\":";
    append_array(out, orbit.grid_t);
    out += ",\"v\":";
    append_array(out, orbit.grid_v);
    out += ",\"v1\":";
    append_array(out, orbit.grid_v1);
    out += ",\"v2\":";
    append_array(out, orbit.grid_v2);
    out += ",\"v3\":";
    append_array(out, orbit.grid_v3);
    out += "}}";
    return out;
}

OrbitSolution orbit_from_json(const std::string& text) {
    const nlohmann::json j = parse_checked(text);
    if (!j.is_object()) throw SchemaError("orbit artifact must be a JSON object");
    if (!j.contains("n") || !j.at("n").is_number_integer())
        throw SchemaError("missing integer field \"n\"");
    const int n = j.at("n").get<int>();
    if (n < 5) throw SchemaError("dimension n must be >= 5");

    OrbitSolution orbit;
    orbit.c = make_constants(n);
    orbit.T = get_number(j, "T");
    orbit.a = get_number(j, "a");
    orbit.b = get_number(j, "b");
    orbit.residual = get_number(j, "residual");
    orbit.closure_gap = get_number(j, "closure_gap");
    orbit.amplitude = get_number(j, "amplitude");
    orbit.energy_level = get_number(j, "energy_level");
    if (!(orbit.T > 0)) throw SchemaError("field \"T\" must be positive");

    if (!j.contains("grid") || !j.at("grid").is_object())
        throw SchemaError("missing object field \"grid\"");
    const auto& g = j.at("grid");
    orbit.grid_t = get_array(g, "t");
    orbit.grid_v = get_array(g, "v");
    orbit.grid_v1 = get_array(g, "v1");
    orbit.grid_v2 = get_array(g, "v2");
    orbit.grid_v3 = get_array(g, "v3");
    const std::size_t m = orbit.grid_t.size();
    if (m < 3) throw SchemaError("grid needs at least 3 samples");
    if (orbit.grid_v.size() != m || orbit.grid_v1.size() != m ||
        orbit.grid_v2.size() != m || orbit.grid_v3.size() != m)
        throw SchemaError("grid arrays have mismatched lengths");
    for (std::size_t i = 1; i < m; ++i)
        if (!(orbit.grid_t[i] > orbit.grid_t[i - 1]))
            throw SchemaError("grid times must be strictly increasing");
    return orbit;
}

std::string certificates_to_json(const std::vector<Certificate>& certs) {
    std::string out;
    out.reserve(64 + certs.size() * 160);
    out += '[';
    for (std::size_t i = 0; i < certs.size(); ++i) {
        if (i) out += ',';
        const auto& ct = certs[i];
        out += "{\"name\":\"" + ct.name + '"';
        out += ",\"passed\":";
        out += ct.passed ? "true" : "false";
        out += ",\"worst_margin\":" + fmt_json_number(ct.worst_margin);
        out += ",\"worst_location\":" + fmt_json_number(ct.worst_location);
        out += ",\"tolerance\":" + fmt_json_number(ct.tolerance);
        out += '}';
    }
    out += ']';
    return out;
}

std::vector<Certificate> certificates_from_json(const std::string& text) {
    const nlohmann::json j = parse_checked(text);
    if (!j.is_array()) throw SchemaError("certificate report must be a JSON array");
    std::vector<Certificate> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_object()) throw SchemaError("certificate entries must be objects");
        if (!e.contains("name") || !e.at("name").is_string())
            throw SchemaError("certificate missing string field \"name\"");
        if (!e.contains("passed") || !e.at("passed").is_boolean())
            throw SchemaError("certificate missing boolean field \"passed\"");
        Certificate ct;
        ct.name = e.at("name").get<std::string>();
        ct.passed = e.at("passed").get<bool>();
        ct.worst_margin = get_number(e, "worst_margin");
        ct.worst_location = get_number(e, "worst_location");
        ct.tolerance = get_number(e, "tolerance");
        out.push_back(std::move(ct));
    }
    return out;
}

std::string traj_to_csv(const Trajectory& traj) {
    std::string out = "t,v,v1,v2,v3,energy\n";
    out.reserve(out.size() + traj.samples.size() * 6 * 26);
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        out += fmt_g17(s.t);
        out += ',';
        out += fmt_g17(s.v);
        out += ',';
        out += fmt_g17(s.v1);
        out += ',';
        out += fmt_g17(s.v2);
        out += ',';
        out += fmt_g17(s.v3);
        out += ',';
        out += fmt_g17(traj.energy[i]);
        out += '\n';
    }
    return out;
}

std::string sweep_to_csv(const std::vector<FamilyMember>& family) {
    std::string out = "T,a,b,amplitude,energy_level,residual,converged\n";
    out.reserve(out.size() + family.size() * 7 * 26);
    for (const auto& row : family) {
        out += fmt_g17(row.T);
        out += ',';
        out += fmt_g17(row.a);
        out += ',';
        out += fmt_g17(row.b);
        out += ',';
        out += fmt_g17(row.amplitude);
        out += ',';
        out += fmt_g17(row.energy_level);
        out += ',';
        out += fmt_g17(row.residual);
        out += ',';
        out += row.converged ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string bubble_to_csv(int n, double t_from, double t_to, std::size_t points) {
    if (points < 2) throw std::invalid_argument("bubble sampling needs at least 2 points");
    if (!(t_to > t_from)) throw std::invalid_argument("bubble sampling needs t_to > t_from");
    std::string out = "t,v,v1,v2,v3\n";
    out.reserve(out.size() + points * 5 * 26);
    for (std::size_t i = 0; i < points; ++i) {
        const double t =
            t_from + (t_to - t_from) * static_cast<double>(i) / static_cast<double>(points - 1);
        const BubblePoint b = bubble_state(t, n);
        out += fmt_g17(t);
        out += ',';
        out += fmt_g17(b.v);
        out += ',';
        out += fmt_g17(b.v1);
        out += ',';
        out += fmt_g17(b.v2);
        out += ',';
        out += fmt_g17(b.v3);
        out += '\n';
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace delaunay
