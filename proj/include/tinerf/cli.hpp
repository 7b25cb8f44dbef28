#pragma once

// Single-binary batch surface: `tinerf train|render|eval|synth`. Exposed as a
// function so tests can drive the exact command paths in-process.

namespace tinerf {

int cli_main(int argc, const char* const* argv);

}  // namespace tinerf
