#include "hdg/run_config.hpp"

int main(int argc, char** argv) { return hdg::main_entry(argc, argv); }
