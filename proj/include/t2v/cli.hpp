#pragma once

namespace t2v::cli {

/// Entry point of the `t2v` tool. Returns 0 on success, 2 on usage errors
/// and 1 on runtime errors.
int run(int argc, char** argv);

}  // namespace t2v::cli
