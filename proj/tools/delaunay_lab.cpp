#include "delaunay/io_util.hpp"

int main(int argc, char** argv) { return delaunay::run_cli(argc, argv); }
