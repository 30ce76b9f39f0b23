#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "penaflow/harness.hpp"

namespace penaflow {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct SweepRequest {
    std::string parameter;
    std::vector<double> values;
};

/// Parsed configuration file: a scenario plus an optional sweep block.
struct ConfigFile {
    ScenarioConfig scenario;
    std::optional<SweepRequest> sweep;
};

/// One problem found while reading a configuration, located by JSON pointer.
struct ConfigIssue {
    std::string pointer;
    std::string message;
};

/// Thrown with every issue found in one pass; what() lists them one per line.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    [[nodiscard]] const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// Builds a configuration from JSON. An optional "base" names a library scenario whose values
/// are used for every omitted key. Unknown keys are rejected.
ConfigFile parse_config(const json& doc);
ConfigFile parse_config_file(const std::filesystem::path& path);

json to_json(const ScenarioConfig& cfg);
json to_json(const ConfigFile& cfg);
/// Default configuration as written by dump-defaults.
json default_config();

json to_json(const VelocityFieldSpec& v);
json to_json(const Shape& s);

/// CSV with the fixed diagnostics header.
std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);
void write_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

/// Legacy VTK STRUCTURED_POINTS (ASCII): rho, momentum, level set and mu_omega.
void write_vtk(const std::filesystem::path& path, const FlowState& s, const LevelSetField& d, const FluidParams& fp,
               const RegularizationParams& rp);

json to_json(const SweepReport& rep);
SweepReport sweep_report_from_json(const json& j);
json to_json(const OrderReport& rep);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// Output directory: $PENAFLOW_OUT when set, else the given directory.
std::filesystem::path resolve_output_dir(const std::filesystem::path& requested);

/// Single background thread draining a bounded queue of write jobs. Jobs own their data.
class OutputWriter {
public:
    explicit OutputWriter(std::size_t capacity = 8);
    ~OutputWriter();
    OutputWriter(const OutputWriter&) = delete;
    OutputWriter& operator=(const OutputWriter&) = delete;

    /// Blocks while the queue is full.
    void submit(std::function<void()> job);
    /// Waits for all jobs; rethrows the first job failure.
    void finish();

private:
    void loop();

    std::size_t capacity_;
    std::deque<std::function<void()>> queue_;
    std::mutex mutex_;
    std::condition_variable changed_;
    bool closing_ = false;
    bool busy_ = false;
    std::exception_ptr failure_;
    std::thread worker_;
};

} // namespace penaflow
