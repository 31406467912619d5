#include "snr_sentry/cli.hpp"

int main(int argc, char** argv) { return snr_sentry::cli::parse_and_dispatch(argc, argv); }
