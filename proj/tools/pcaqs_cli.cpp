#include "pcaqs/cli.hpp"

int main(int argc, char** argv) { return pcaqs::run_cli(argc, argv); }
