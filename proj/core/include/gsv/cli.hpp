#pragma once

namespace gsv {

// Entry point of the `gsv` command line tool. Returns the process exit code:
// 0 on success, 1 when a check or run fails, 2 on usage or input errors.
int cli_main(int argc, char** argv);

} // namespace gsv
