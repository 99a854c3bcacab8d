#ifndef RELKIT_TOOLS_COMMANDS_H_
#define RELKIT_TOOLS_COMMANDS_H_

#include <ostream>
#include <string_view>

#include "relkit/config.h"

namespace relkit::cli {

// Resolved configuration of a subcommand with every key at its default.
Json default_config(std::string_view command);

// Each command reads a resolved configuration, writes its files under
// config["out"] (created if missing) including manifest.json, prints a short
// summary and returns the manifest.
Json cmd_synth(const Json &config, std::ostream &log);
Json cmd_train(const Json &config, std::ostream &log);
Json cmd_eval(const Json &config, std::ostream &log);
Json cmd_retrieve(const Json &config, std::ostream &log);
Json cmd_gradcheck(const Json &config, std::ostream &log);

// Full command line: defaults, then --config, then explicit flags. Returns
// the process exit code: 0 on success, 1 when any Error was raised, 2 on a
// usage error.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace relkit::cli

#endif  // RELKIT_TOOLS_COMMANDS_H_
