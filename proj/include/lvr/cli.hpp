#pragma once

#include <iosfwd>

namespace lvr {

/// Command-line front end. Returns 0 on success, 1 on usage errors and 2
/// when the command itself fails.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Raises the allocator's mmap and trim thresholds so large activation
/// buffers are reused instead of returned to the kernel after every step.
void tune_allocator();

} // namespace lvr
