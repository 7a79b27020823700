#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lexd/pipeline.hpp"

namespace lexd {

/// Append-only store of pipeline runs, one directory per run id holding
/// `config.txt`, `result.json` and the CSV exports. Runs execute on
/// background threads; completed results are never modified.
class RunStore {
public:
    enum class Status { running, done, failed };

    struct Entry {
        Status status = Status::running;
        std::string error;
        std::shared_ptr<const RunResult> result;
        std::map<std::string, std::string> config;
    };

    struct Submission {
        std::string run_id;
        bool existing = false;
    };

    explicit RunStore(std::filesystem::path state_dir);
    ~RunStore();
    RunStore(const RunStore&) = delete;
    RunStore& operator=(const RunStore&) = delete;

    /// Validates the config (ConfigError) and hashes the input (InputError).
    /// An id already known to the store is returned without re-running.
    Submission submit(const PipelineConfig& cfg);

    std::optional<Entry> get(const std::string& run_id) const;
    std::vector<std::pair<std::string, Entry>> list() const;
    /// Blocks until no run is executing.
    void wait_idle();

    const std::filesystem::path& state_dir() const { return dir_; }

private:
    void execute(std::string run_id, PipelineConfig cfg);

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> entries_;
    std::vector<std::thread> workers_;
};

std::string to_string(RunStore::Status status);

/// HTTP API over a RunStore:
///   GET  /api/health
///   GET  /api/runs
///   POST /api/runs
///   GET  /api/runs/{id}
///   GET  /api/runs/{id}/subgroups?lag=L
///   GET  /api/runs/{id}/radar?lag=L
class Service {
public:
    explicit Service(std::filesystem::path state_dir);
    ~Service();

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Throws std::runtime_error on bind failure.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();
    RunStore& store() { return *store_; }

private:
    struct Impl;
    std::unique_ptr<RunStore> store_;
    std::unique_ptr<Impl> impl_;
};

/// Blocking entry point used by `lexd serve`.
void serve(const std::filesystem::path& state_dir, int port, const std::string& host = "127.0.0.1");

/// Builds a config from a JSON object of key -> value. Unknown keys and bad
/// values raise ConfigError naming the key.
PipelineConfig config_from_json(const std::string& body);

}  // namespace lexd
