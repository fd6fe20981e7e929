#include "delaunay/io_util.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <string>

// Exit code convention, kept stable for scripting:
//   0  success (certify: all certificates passed)
//   1  certify ran cleanly but at least one certificate failed
//   2  usage errors (unknown flags, missing required options)
//   3  validation errors (parameter domains, malformed artifacts)
//   4  file I/O errors
//   5  solver/integrator failures (escape, divergence, branch end)
// Machine-readable diagnostics go to stderr as one JSON object per line;
// stdout carries only the requested artifact when no --out file is given.

namespace delaunay {

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

void diag(const std::string& error, const std::string& detail_key,
          const std::string& detail_val, const std::string& message) {
    std::string line = "{\"error\":\"" + error + '"';
    if (!detail_key.empty())
        line += ",\"" + detail_key + "\":\"" + json_escape(detail_val) + '"';
    line += ",\"message\":\"" + json_escape(message) + "\"}";
    std::fputs(line.c_str(), stderr);
    std::fputc('\n', stderr);
}

// Stable machine-readable token; to_string(IntegrationStatus) is prose.
const char* status_token(IntegrationStatus s) {
    switch (s) {
        case IntegrationStatus::ok: return "ok";
        case IntegrationStatus::blow_up: return "blow_up";
        case IntegrationStatus::negative_v: return "negative_v";
        case IntegrationStatus::step_underflow: return "step_underflow";
    }
    return "unknown";
}

const char* kind_str(SolverError::Kind k) {
    switch (k) {
        case SolverError::Kind::trivial_root: return "trivial_root";
        case SolverError::Kind::divergence: return "divergence";
        case SolverError::Kind::positivity: return "positivity";
        case SolverError::Kind::seed_failure: return "seed_failure";
        case SolverError::Kind::below_bifurcation: return "below_bifurcation";
        case SolverError::Kind::branch_end: return "branch_end";
    }
    return "unknown";
}

// Writes to the --out file when given, otherwise to stdout (with a trailing
// newline for terminal friendliness; file contents are byte-exact).
void deliver(const std::string& content, const std::string& out_path) {
    if (!out_path.empty()) {
        write_file(out_path, content);
        return;
    }
    std::fwrite(content.data(), 1, content.size(), stdout);
    if (content.empty() || content.back() != '\n') std::fputc('\n', stdout);
}

void echo_line(const std::string& body) {
    std::fputs(body.c_str(), stderr);
    std::fputc('\n', stderr);
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        diag("validation", "", "", e.what());
        return 3;
    } catch (const IoError& e) {
        diag("io", "", "", e.what());
        return 4;
    } catch (const SolverError& e) {
        diag("solver", "kind", kind_str(e.kind), e.what());
        return 5;
    } catch (const IntegrationError& e) {
        diag("integration", "status", status_token(e.status), e.what());
        return 5;
    } catch (const std::invalid_argument& e) {
        diag("validation", "", "", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        diag("validation", "", "", e.what());
        return 3;
    } catch (const std::exception& e) {
        diag("internal", "", "", e.what());
        return 5;
    }
}

std::string fmt_complex(const std::complex<double>& z) {
    if (z.imag() == 0.0) return fmt_g17(z.real());
    if (z.real() == 0.0) return fmt_g17(z.imag()) + "i";
    return fmt_g17(z.real()) + (z.imag() >= 0 ? "+" : "") + fmt_g17(z.imag()) + "i";
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Periodic-solution laboratory for the critical biharmonic radial equation"};
    app.require_subcommand(1);

    // ---- constants ----
    auto* sc_constants = app.add_subcommand("constants", "Print the model constants for a dimension");
    int co_n = 5;
    bool co_json = false, co_echo = false;
    sc_constants->add_option("--n", co_n, "space dimension (>= 5)")->required();
    sc_constants->add_flag("--json", co_json, "emit JSON instead of the readable table");
    sc_constants->add_flag("--echo-config", co_echo, "echo the resolved configuration to stderr");

    // ---- integrate ----
    auto* sc_int = app.add_subcommand("integrate", "Integrate the equation from a symmetric-style start");
    int in_n = 5;
    double in_v0 = 0, in_v1 = 0, in_v2 = 0, in_v3 = 0;
    double in_tfrom = 0, in_tend = 0, in_rtol = 1e-10, in_atol = 1e-14;
    std::string in_out;
    bool in_echo = false;
    sc_int->add_option("--n", in_n, "space dimension (>= 5)")->required();
    sc_int->add_option("--v0", in_v0, "initial v")->required();
    sc_int->add_option("--v1", in_v1, "initial v' (default 0)");
    sc_int->add_option("--v2", in_v2, "initial v'' (default 0)");
    sc_int->add_option("--v3", in_v3, "initial v''' (default 0)");
    sc_int->add_option("--t-from", in_tfrom, "start time (default 0)");
    sc_int->add_option("--t-end", in_tend, "end time")->required();
    sc_int->add_option("--rtol", in_rtol, "relative tolerance (default 1e-10)");
    sc_int->add_option("--atol", in_atol, "absolute tolerance (default 1e-14)");
    sc_int->add_option("--out", in_out, "CSV output path (stdout when omitted)");
    sc_int->add_flag("--echo-config", in_echo, "echo the resolved configuration to stderr");

    // ---- eigen ----
    auto* sc_eigen = app.add_subcommand("eigen", "Linearizations and eigenvalues at both equilibria");
    int ei_n = 5;
    bool ei_json = false, ei_echo = false;
    sc_eigen->add_option("--n", ei_n, "space dimension (>= 5)")->required();
    sc_eigen->add_flag("--json", ei_json, "emit JSON instead of the readable summary");
    sc_eigen->add_flag("--echo-config", ei_echo, "echo the resolved configuration to stderr");

    // ---- find-periodic ----
    auto* sc_find = app.add_subcommand("find-periodic", "Solve for a symmetric periodic orbit at a half-period");
    int fp_n = 5;
    double fp_T = 0, fp_rtol = 1e-10;
    std::size_t fp_grid = 512;
    std::string fp_mode = "linear", fp_out;
    bool fp_nopolish = false, fp_echo = false;
    sc_find->add_option("--n", fp_n, "space dimension (>= 5)")->required();
    sc_find->add_option("--T", fp_T, "half-period of the orbit")->required();
    sc_find->add_option("--seed-mode", fp_mode, "seeding strategy (default linear)")
        ->transform(CLI::IsMember({"linear", "mountain-pass"}));
    sc_find->add_option("--rtol", fp_rtol, "shooting residual target (default 1e-10)");
    sc_find->add_option("--grid", fp_grid, "output grid intervals per period (even, default 512)");
    sc_find->add_flag("--no-polish", fp_nopolish,
                      "skip the extended-precision polish (faster, larger closure gap)");
    sc_find->add_option("--out", fp_out, "orbit JSON output path (stdout when omitted)");
    sc_find->add_flag("--echo-config", fp_echo, "echo the resolved configuration to stderr");

    // ---- sweep ----
    auto* sc_sweep = app.add_subcommand("sweep", "Continue the orbit family across a half-period range");
    int sw_n = 5;
    double sw_from = 0, sw_to = 0;
    int sw_steps = 0;
    std::string sw_out;
    bool sw_echo = false;
    sc_sweep->add_option("--n", sw_n, "space dimension (>= 5)")->required();
    sc_sweep->add_option("--T-from", sw_from, "first half-period")->required();
    sc_sweep->add_option("--T-to", sw_to, "last half-period")->required();
    sc_sweep->add_option("--steps", sw_steps, "number of rows (>= 1)")->required();
    sc_sweep->add_option("--out", sw_out, "family CSV output path (stdout when omitted)");
    sc_sweep->add_flag("--echo-config", sw_echo, "echo the resolved configuration to stderr");

    // ---- certify ----
    auto* sc_cert = app.add_subcommand("certify", "Run all certificates on a stored orbit");
    std::string ce_input, ce_report;
    bool ce_echo = false;
    sc_cert->add_option("--input", ce_input, "orbit JSON artifact")->required();
    sc_cert->add_option("--report", ce_report, "report JSON output path (stdout when omitted)");
    sc_cert->add_flag("--echo-config", ce_echo, "echo the resolved configuration to stderr");

    // ---- bubble ----
    auto* sc_bub = app.add_subcommand("bubble", "Sample the explicit homoclinic profile");
    int bu_n = 5;
    double bu_from = -10, bu_to = 10;
    std::size_t bu_points = 1001;
    std::string bu_out;
    bool bu_echo = false;
    sc_bub->add_option("--n", bu_n, "space dimension (>= 5)")->required();
    sc_bub->add_option("--t-from", bu_from, "first sample time (default -10)");
    sc_bub->add_option("--t-to", bu_to, "last sample time (default 10)");
    sc_bub->add_option("--points", bu_points, "number of samples (default 1001)");
    sc_bub->add_option("--out", bu_out, "CSV output path (stdout when omitted)");
    sc_bub->add_flag("--echo-config", bu_echo, "echo the resolved configuration to stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sc_constants->parsed()) {
        return guarded([&] {
            if (co_echo)
                echo_line("{\"command\":\"constants\",\"n\":" + std::to_string(co_n) +
                          ",\"json\":" + (co_json ? "true" : "false") + "}");
            const ModelConstants c = make_constants(co_n);
            if (co_json) {
                deliver(constants_to_json(c), "");
                return 0;
            }
            std::string out;
            out += "n  = " + std::to_string(c.n) + "\n";
            out += "p  = " + fmt_g17(c.p) + "\n";
            out += "K2 = " + fmt_g17(c.K2) + "\n";
            out += "K0 = " + fmt_g17(c.K0) + "\n";
            out += "l  = " + fmt_g17(c.l) + "\n";
            out += "L  = " + fmt_g17(c.L) + "\n";
            out += "cn = " + fmt_g17(c.cn) + "\n";
            out += "C2 = " + fmt_g17(c.C2) + "\n";
            out += "C3 = " + fmt_g17(c.C3) + "\n";
            out += "C4 = " + fmt_g17(c.C4) + "\n";
            out += "Gl = " + fmt_g17(c.Gl) + "\n";
            deliver(out, "");
            return 0;
        });
    }

    if (sc_int->parsed()) {
        return guarded([&] {
            if (in_echo)
                echo_line("{\"command\":\"integrate\",\"n\":" + std::to_string(in_n) +
                          ",\"v0\":" + fmt_g17(in_v0) + ",\"v1\":" + fmt_g17(in_v1) +
                          ",\"v2\":" + fmt_g17(in_v2) + ",\"v3\":" + fmt_g17(in_v3) +
                          ",\"t_from\":" + fmt_g17(in_tfrom) + ",\"t_end\":" + fmt_g17(in_tend) +
                          ",\"rtol\":" + fmt_g17(in_rtol) + ",\"atol\":" + fmt_g17(in_atol) +
                          ",\"out\":\"" + json_escape(in_out) + "\"}");
            const ModelConstants c = make_constants(in_n);
            const Trajectory traj =
                integrate({in_tfrom, in_v0, in_v1, in_v2, in_v3}, in_tend, in_rtol, in_atol, c);
            deliver(traj_to_csv(traj), in_out);
            return 0;
        });
    }

    if (sc_eigen->parsed()) {
        return guarded([&] {
            if (ei_echo)
                echo_line("{\"command\":\"eigen\",\"n\":" + std::to_string(ei_n) +
                          ",\"json\":" + (ei_json ? "true" : "false") + "}");
            const ModelConstants c = make_constants(ei_n);
            const Linearization at_O = linearize_at_O(c);
            const Linearization at_P = linearize_at_P(c);
            if (ei_json) {
                deliver(linearizations_to_json(c, at_O, at_P), "");
                return 0;
            }
            std::string out = "n = " + std::to_string(c.n) + "\n";
            out += "O eigenvalues: ";
            for (int i = 0; i < 4; ++i)
                out += (i ? ", " : "") + fmt_complex(at_O.eigenvalues[i]);
            out += "\nP eigenvalues: ";
            for (int i = 0; i < 4; ++i)
                out += (i ? ", " : "") + fmt_complex(at_P.eigenvalues[i]);
            out += "\nomega = " + fmt_g17(center_frequency(c)) + "\n";
            deliver(out, "");
            return 0;
        });
    }

    if (sc_find->parsed()) {
        return guarded([&] {
            if (fp_echo)
                echo_line("{\"command\":\"find-periodic\",\"n\":" + std::to_string(fp_n) +
                          ",\"T\":" + fmt_g17(fp_T) + ",\"seed_mode\":\"" + fp_mode +
                          "\",\"rtol\":" + fmt_g17(fp_rtol) +
                          ",\"grid\":" + std::to_string(fp_grid) +
                          ",\"quad_polish\":" + (fp_nopolish ? "false" : "true") +
                          ",\"out\":\"" + json_escape(fp_out) + "\"}");
            const ModelConstants c = make_constants(fp_n);
            SolverOptions opts;
            opts.residual_tol = fp_rtol;
            opts.grid_points = fp_grid;
            opts.quad_polish = !fp_nopolish;
            const SeedMode mode =
                fp_mode == "linear" ? SeedMode::linear : SeedMode::mountain_pass;
            const OrbitSolution orbit = find_periodic(c, fp_T, mode, opts);
            deliver(orbit_to_json(orbit), fp_out);
            return 0;
        });
    }

    if (sc_sweep->parsed()) {
        return guarded([&] {
            if (sw_echo)
                echo_line("{\"command\":\"sweep\",\"n\":" + std::to_string(sw_n) +
                          ",\"T_from\":" + fmt_g17(sw_from) + ",\"T_to\":" + fmt_g17(sw_to) +
                          ",\"steps\":" + std::to_string(sw_steps) + ",\"out\":\"" +
                          json_escape(sw_out) + "\"}");
            const ModelConstants c = make_constants(sw_n);
            const auto family = continue_in_T(c, sw_from, sw_to, sw_steps);
            deliver(sweep_to_csv(family), sw_out);
            return 0;
        });
    }

    if (sc_cert->parsed()) {
        return guarded([&] {
            if (ce_echo)
                echo_line("{\"command\":\"certify\",\"input\":\"" + json_escape(ce_input) +
                          "\",\"report\":\"" + json_escape(ce_report) + "\"}");
            const OrbitSolution orbit = orbit_from_json(read_file(ce_input));
            const Trajectory traj = make_trajectory(orbit_states(orbit), orbit.c);
            const auto report = certify_trajectory(traj, orbit.c, /*periodic=*/true);
            deliver(certificates_to_json(report), ce_report);
            for (const auto& cert : report)
                if (!cert.passed) return 1;
            return 0;
        });
    }

    if (sc_bub->parsed()) {
        return guarded([&] {
            if (bu_echo)
                echo_line("{\"command\":\"bubble\",\"n\":" + std::to_string(bu_n) +
                          ",\"t_from\":" + fmt_g17(bu_from) + ",\"t_to\":" + fmt_g17(bu_to) +
                          ",\"points\":" + std::to_string(bu_points) + ",\"out\":\"" +
                          json_escape(bu_out) + "\"}");
            deliver(bubble_to_csv(bu_n, bu_from, bu_to, bu_points), bu_out);
            return 0;
        });
    }

    return 2;
}

} // namespace delaunay
