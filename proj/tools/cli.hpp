#pragma once

#include "bilrip/json_io.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace bilrip::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Invalid configuration. `field` names the offending entry, e.g.
/// "parameters.cone_x.indices".
class UsageError : public std::runtime_error {
public:
    UsageError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

using Cell = std::variant<double, std::int64_t, std::uint64_t, std::string, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

/// Everything one command produces.
struct Outcome {
    Json config;   ///< normalized config, every default filled in
    Json result;   ///< JSON payload
    Table table;   ///< CSV payload
    Table plot;    ///< flat plotting table
};

/// The commands run() understands.
const std::vector<std::string>& commands();

/// Reads a config file. Accepts a plain config, or a previous JSON or CSV
/// output of this tool (its echoed config is used).
Json load_config(const std::string& path);

/// Validates `config` ({"schema": 1, "command": ..., "seed": ..., "parameters": {...}})
/// and runs the command. Throws UsageError before any computation if a
/// parameter is invalid.
Outcome execute(const Json& config);

/// Full JSON document: artifact header, echoed config, result.
Json render_json(const Outcome& outcome);

/// CSV with a '#'-prefixed header block echoing artifact and config.
std::string render_csv(const Outcome& outcome, const Table& table);

/// Writes outcome.plot as CSV to `path`. Throws std::runtime_error if the
/// path is not writable.
void emit_plot_data(const Outcome& outcome, const std::string& path);

/// Command-line entry point. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bilrip::cli
