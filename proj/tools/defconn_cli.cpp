#include "defconn/cli_app.hpp"

int main(int argc, char** argv) { return defconn::cli::run(argc, argv); }
