// Command-line front end; talks to the engine only through the C API.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htapsim.h"

namespace {

struct EngineDeleter {
    void operator()(htapsim_engine* e) const { htapsim_destroy(e); }
};
using Engine = std::unique_ptr<htapsim_engine, EngineDeleter>;

int check(htapsim_engine* e, int rc, const char* what) {
    if (rc != HTAPSIM_OK) {
        std::fprintf(stderr, "error: %s: %s\n", what, htapsim_last_error(e));
        return rc;
    }
    return HTAPSIM_OK;
}

std::string get_string(htapsim_engine* e,
                       int (*getter)(htapsim_engine*, char*, size_t, size_t*),
                       const char* what, int& rc) {
    size_t needed = 0;
    rc = getter(e, nullptr, 0, &needed);
    if (check(e, rc, what) != HTAPSIM_OK) return {};
    std::string buf(needed, '\0');
    rc = getter(e, buf.data(), buf.size(), &needed);
    if (check(e, rc, what) != HTAPSIM_OK) return {};
    buf.resize(needed > 0 ? needed - 1 : 0);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"In-memory HTAP engine + PIM hardware cost simulator"};

    std::string system = "polynesia";
    std::string placement = "hybrid";
    std::string scheduler = "optimized";
    std::string config_file, out_file, plot_figure;
    bool dump_config = false;
    bool append = false;
    std::map<std::string, std::string> values;  // option key -> raw value

    app.add_option("--system", system, "polynesia | si-ss | si-mvcc | mi-sw");
    app.add_option("--placement", placement, "local | distributed | hybrid");
    app.add_option("--scheduler", scheduler, "basic | optimized");
    for (const char* key :
         {"txn-threads", "txn-queries", "update-ratio", "anl-threads",
          "anl-queries", "ops-per-query", "tables", "rows", "cols",
          "max-distinct", "seed", "vaults", "group_size"}) {
        std::string flag = std::string("--") + key;
        app.add_option(flag, values[key]);
    }
    app.add_option("--config", config_file, "hardware config file (key=value)");
    app.add_option("--out", out_file, "write the metrics CSV row to this file");
    app.add_flag("--append", append, "append to --out instead of truncating");
    app.add_flag("--dump-config", dump_config,
                 "print the effective hardware config and exit");
    app.add_option("--plot-data", plot_figure,
                   "emit a trend series CSV: placement | snapshot-cost | mvcc "
                   "| propagation");
    CLI11_PARSE(app, argc, argv);

    Engine engine(htapsim_create());
    if (!engine) {
        std::fprintf(stderr, "error: out of memory\n");
        return 1;
    }
    htapsim_engine* e = engine.get();

    int rc = HTAPSIM_OK;
    if (!config_file.empty() &&
        check(e, htapsim_load_config(e, config_file.c_str()), "--config"))
        return 1;
    if (check(e, htapsim_set_option(e, "system", system.c_str()), "--system") ||
        check(e, htapsim_set_option(e, "placement", placement.c_str()),
              "--placement") ||
        check(e, htapsim_set_option(e, "scheduler", scheduler.c_str()),
              "--scheduler"))
        return 1;
    for (const auto& [key, value] : values) {
        if (value.empty()) continue;
        if (check(e, htapsim_set_option(e, key.c_str(), value.c_str()),
                  key.c_str()))
            return 1;
    }

    if (dump_config) {
        std::string text = get_string(e, htapsim_dump_config, "--dump-config", rc);
        if (rc != HTAPSIM_OK) return 1;
        std::fputs(text.c_str(), stdout);
        return 0;
    }

    if (!plot_figure.empty()) {
        size_t needed = 0;
        rc = htapsim_plot_data(e, plot_figure.c_str(), nullptr, 0, &needed);
        if (check(e, rc, "--plot-data")) return 1;
        std::string buf(needed, '\0');
        rc = htapsim_plot_data(e, plot_figure.c_str(), buf.data(), buf.size(),
                               &needed);
        if (check(e, rc, "--plot-data")) return 1;
        buf.resize(needed > 0 ? needed - 1 : 0);
        if (!out_file.empty()) {
            std::FILE* f = std::fopen(out_file.c_str(), "w");
            if (!f) {
                std::fprintf(stderr, "error: cannot open %s\n", out_file.c_str());
                return 1;
            }
            std::fputs(buf.c_str(), f);
            std::fclose(f);
        } else {
            std::fputs(buf.c_str(), stdout);
        }
        return 0;
    }

    if (check(e, htapsim_run(e), "run")) return 1;
    std::string csv = get_string(e, htapsim_metrics_csv, "metrics", rc);
    if (rc != HTAPSIM_OK) return 1;
    std::fputs(csv.c_str(), stdout);
    if (!out_file.empty() &&
        check(e, htapsim_write_metrics_csv(e, out_file.c_str(), append ? 1 : 0),
              "--out"))
        return 1;
    return 0;
}
