#include "emesh/harness.hpp"

int main(int argc, char** argv) { return emesh::run_cli(argc, argv); }
