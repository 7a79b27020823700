#include "lexd/service.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "lexd/csv.hpp"

namespace lexd {

using json = nlohmann::json;

std::string to_string(RunStore::Status status) {
    switch (status) {
        case RunStore::Status::running: return "running";
        case RunStore::Status::done: return "done";
        case RunStore::Status::failed: return "failed";
    }
    return "failed";
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace

RunStore::RunStore(std::filesystem::path state_dir) : dir_(std::move(state_dir)) {
    std::filesystem::create_directories(dir_);
    for (const auto& item : std::filesystem::directory_iterator(dir_)) {
        const auto doc = item.path() / "result.json";
        if (!item.is_directory() || !std::filesystem::exists(doc)) continue;
        try {
            auto result = std::make_shared<const RunResult>(parse_document(read_file(doc)));
            Entry e;
            e.status = Status::done;
            e.config = result->config;
            e.result = result;
            entries_.emplace(item.path().filename().string(), std::move(e));
        } catch (const std::exception&) {
            // unreadable leftovers are ignored; the directory stays untouched
        }
    }
}

RunStore::~RunStore() { wait_idle(); }

RunStore::Submission RunStore::submit(const PipelineConfig& cfg) {
    validate_config(cfg);
    const std::string id = compute_run_id(cfg, file_digest(cfg.input));
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(id); it != entries_.end() && it->second.status != Status::failed) {
        return {id, true};
    }
    Entry e;
    e.status = Status::running;
    e.config = config_entries(cfg, false);
    entries_[id] = std::move(e);
    workers_.emplace_back(&RunStore::execute, this, id, cfg);
    return {id, false};
}

void RunStore::execute(std::string run_id, PipelineConfig cfg) {
    try {
        auto result = std::make_shared<const RunResult>(run_pipeline(cfg));
        const auto staging = dir_ / ("." + run_id + ".tmp");
        std::filesystem::remove_all(staging);
        std::filesystem::create_directories(staging);
        write_file(staging / "config.txt", render_config(cfg, true));
        export_run(*result, ExportFormat::document, staging);
        export_run(*result, ExportFormat::csv, staging);
        std::filesystem::remove_all(dir_ / run_id);
        std::filesystem::rename(staging, dir_ / run_id);
        std::lock_guard lock(mutex_);
        auto& e = entries_[run_id];
        e.result = std::move(result);
        e.status = Status::done;
    } catch (const std::exception& ex) {
        std::lock_guard lock(mutex_);
        auto& e = entries_[run_id];
        e.status = Status::failed;
        e.error = ex.what();
    }
}

std::optional<RunStore::Entry> RunStore::get(const std::string& run_id) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(run_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<std::string, RunStore::Entry>> RunStore::list() const {
    std::lock_guard lock(mutex_);
    return {entries_.begin(), entries_.end()};
}

void RunStore::wait_idle() {
    std::vector<std::thread> pending;
    {
        std::lock_guard lock(mutex_);
        pending.swap(workers_);
    }
    for (auto& t : pending) t.join();
}

PipelineConfig config_from_json(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON body: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config body must be a JSON object");
    PipelineConfig cfg;
    for (const auto& [key, value] : doc.items()) {
        std::string text;
        if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_array()) {
            text = "[";
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i) text += ", ";
                text += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
            }
            text += "]";
        } else {
            text = value.dump();
        }
        set_config_value(cfg, key, text);
    }
    return cfg;
}

struct Service::Impl {
    httplib::Server server;
    std::thread thread;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

json summary(const std::string& id, const RunStore::Entry& e) {
    json j{{"run_id", id}, {"status", to_string(e.status)}, {"config", e.config}};
    if (e.result) {
        json lags = json::array();
        for (const auto& l : e.result->lags) {
            lags.push_back({{"lag", l.lag}, {"instance_count", l.population.instance_count}, {"subgroups", l.subgroups.size()}});
        }
        j["lags"] = std::move(lags);
    }
    if (!e.error.empty()) j["error"] = e.error;
    return j;
}

/// Resolves the completed run and requested lag, or writes an error response.
const LagResult* resolve_lag(const RunStore& store, const httplib::Request& req, httplib::Response& res,
                             std::optional<RunStore::Entry>& entry) {
    const std::string id = req.matches[1];
    entry = store.get(id);
    if (!entry) {
        send_error(res, 404, "unknown run '" + id + "'");
        return nullptr;
    }
    if (entry->status != RunStore::Status::done) {
        send_json(res, entry->status == RunStore::Status::running ? 202 : 409, summary(id, *entry));
        return nullptr;
    }
    const RunResult& r = *entry->result;
    if (!req.has_param("lag")) {
        if (r.lags.empty()) {
            send_error(res, 404, "run has no lag results");
            return nullptr;
        }
        return &r.lags.front();
    }
    const auto lag = csv::parse_int(req.get_param_value("lag"));
    if (!lag || *lag < 0) {
        send_error(res, 400, "invalid lag '" + req.get_param_value("lag") + "'");
        return nullptr;
    }
    const LagResult* l = r.find_lag(static_cast<std::size_t>(*lag));
    if (!l) send_error(res, 404, "run has no results for lag " + std::to_string(*lag));
    return l;
}

json subgroup_json(const SubgroupResult& sg) {
    return json{{"pattern", sg.pattern.render()},
                {"size", sg.size},
                {"subgroup_mean", sg.subgroup_mean},
                {"population_mean", sg.population_mean},
                {"quality", sg.quality}};
}

void install_routes(httplib::Server& server, RunStore& store) {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });

    server.Get("/api/runs", [&store](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& [id, e] : store.list()) out.push_back(summary(id, e));
        send_json(res, 200, out);
    });

    server.Post("/api/runs", [&store](const httplib::Request& req, httplib::Response& res) {
        try {
            const auto cfg = config_from_json(req.body);
            const auto sub = store.submit(cfg);
            const auto entry = store.get(sub.run_id);
            send_json(res, sub.existing ? 200 : 202,
                      json{{"run_id", sub.run_id},
                           {"existing", sub.existing},
                           {"status", entry ? to_string(entry->status) : "running"}});
        } catch (const ConfigError& e) {
            send_error(res, 400, e.what());
        } catch (const InputError& e) {
            send_error(res, 400, e.what());
        }
    });

    server.Get(R"(/api/runs/([A-Za-z0-9]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto entry = store.get(id);
        if (!entry) return send_error(res, 404, "unknown run '" + id + "'");
        if (entry->status == RunStore::Status::done) {
            res.status = 200;
            res.set_content(to_document(*entry->result), "application/json");
        } else {
            send_json(res, entry->status == RunStore::Status::running ? 202 : 200, summary(id, *entry));
        }
    });

    server.Get(R"(/api/runs/([A-Za-z0-9]+)/subgroups)", [&store](const httplib::Request& req, httplib::Response& res) {
        std::optional<RunStore::Entry> entry;
        const LagResult* l = resolve_lag(store, req, res, entry);
        if (!l) return;
        json list = json::array();
        for (const auto& sg : l->subgroups) list.push_back(subgroup_json(sg));
        send_json(res, 200,
                  json{{"run_id", entry->result->run_id},
                       {"lag", l->lag},
                       {"population",
                        {{"instance_count", l->population.instance_count},
                         {"mean", l->population.mean},
                         {"std", l->population.std}}},
                       {"subgroups", std::move(list)}});
    });

    server.Get(R"(/api/runs/([A-Za-z0-9]+)/radar)", [&store](const httplib::Request& req, httplib::Response& res) {
        std::optional<RunStore::Entry> entry;
        const LagResult* l = resolve_lag(store, req, res, entry);
        if (!l) return;
        json items = json::array();
        for (std::size_t i = 0; i < l->subgroups.size(); ++i) {
            const auto& sg = l->subgroups[i];
            json selectors = json::array();
            for (const auto& sel : sg.pattern.selectors()) {
                selectors.push_back({{"attribute", sel.attribute},
                                     {"label", to_string(sel.label)},
                                     {"ordinal", static_cast<int>(sel.label)}});
            }
            json values = json::object();
            for (std::size_t a = 0; a < l->selector_attributes.size(); ++a) {
                values[l->selector_attributes[a]] = l->selector_profiles[i][a];
            }
            items.push_back({{"pattern", sg.pattern.render()},
                             {"quality", sg.quality},
                             {"size", sg.size},
                             {"subgroup_mean", sg.subgroup_mean},
                             {"selectors", std::move(selectors)},
                             {"attribute_values", std::move(values)}});
        }
        send_json(res, 200,
                  json{{"run_id", entry->result->run_id},
                       {"lag", l->lag},
                       {"axes", {"quality", "size", "subgroup_mean"}},
                       {"selector_attributes", l->selector_attributes},
                       {"subgroups", std::move(items)}});
    });
}

}  // namespace

Service::Service(std::filesystem::path state_dir)
    : store_(std::make_unique<RunStore>(std::move(state_dir))), impl_(std::make_unique<Impl>()) {
    install_routes(impl_->server, *store_);
}

Service::~Service() {
    stop();
    store_->wait_idle();
}

int Service::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Service::run(const std::string& host, int port) {
    if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->server.listen_after_bind();
}

void Service::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void serve(const std::filesystem::path& state_dir, int port, const std::string& host) {
    Service service(state_dir);
    service.run(host, port);
}

}  // namespace lexd
