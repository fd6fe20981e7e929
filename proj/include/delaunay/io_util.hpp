#pragma once

// Deterministic artifact serialization.  All emitters are hand-rolled with a
// fixed field order and %.17g floats, so identical inputs produce
// byte-identical files; parsing goes through nlohmann::json (order
// insensitive).  Round-tripping any artifact through load + re-serialize is
// byte-identical, which the test suite asserts.

#include "delaunay/certify.hpp"
#include "delaunay/constants.hpp"
#include "delaunay/periodic.hpp"
#include "delaunay/spectra.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace delaunay {

// Shortest-not-required, diffable fixed formatting: 17 significant digits.
std::string fmt_g17(double x);

std::string constants_to_json(const ModelConstants& c);
std::string linearizations_to_json(const ModelConstants& c, const Linearization& at_O,
                                   const Linearization& at_P);
std::string orbit_to_json(const OrbitSolution& orbit);
OrbitSolution orbit_from_json(const std::string& text);

// The certification report is a top-level JSON array of certificate objects
// with fields name, passed, worst_margin, worst_location, tolerance.
std::string certificates_to_json(const std::vector<Certificate>& certs);
std::vector<Certificate> certificates_from_json(const std::string& text);

std::string traj_to_csv(const Trajectory& traj);
std::string sweep_to_csv(const std::vector<FamilyMember>& family);
std::string bubble_to_csv(int n, double t_from, double t_to, std::size_t points);

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);        // throws IoError
void write_file(const std::string& path, const std::string& content);  // throws IoError

// Command-line front end (argv-level entry point used by the binary).
int run_cli(int argc, char** argv);

} // namespace delaunay
