#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace itemseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the itemseg command. Subcommands: fetch, convert,
/// train-crf, train-lstm, segment, eval, stats, synth.
int run(int argc, const char* const* argv);

/// Same, with arguments after the program name; output goes to the streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itemseg::cli
