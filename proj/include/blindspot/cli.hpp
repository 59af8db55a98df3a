#pragma once

namespace blindspot {

/// CLI entry point: subcommands flow, detect, stereo, ttc, synth.
/// Returns 0 on success, 1 on usage errors, 2 on data errors.
int cli_main(int argc, const char* const* argv);

}  // namespace blindspot
