#include "tutorweb/cli.hpp"

int main(int argc, char** argv) { return tutorweb::cli::run(argc, argv); }
