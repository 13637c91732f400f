#pragma once

namespace floorlab {

/// Entry point for the floorlab command. Exit codes: 0 success, 2 usage
/// error, 3 library error (a JSON error object is written to stderr).
int cli_main(int argc, char** argv);

}  // namespace floorlab
