#include "htapsim.h"

#include <cstring>
#include <optional>
#include <string>

#include "htapsim/harness.hpp"

struct htapsim_engine {
    htap::WorkloadSpec spec;
    htap::SystemConfig config;
    std::optional<htap::MetricsReport> report;
    std::string last_error;
};

namespace {

int fail(htapsim_engine* e, int code, const std::string& msg) {
    if (e) e->last_error = msg;
    return code;
}

int from_exception(htapsim_engine* e, const htap::Error& err) {
    int code = err.code() == htap::Errc::IoFailure ? HTAPSIM_ERR_IO
                                                  : HTAPSIM_ERR_DOMAIN;
    return fail(e, code, err.what());
}

int fill_buffer(const std::string& text, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = text.size() + 1;
    if (buf && cap > 0) {
        size_t n = std::min(cap - 1, text.size());
        std::memcpy(buf, text.data(), n);
        buf[n] = '\0';
    }
    return HTAPSIM_OK;
}

bool parse_u32(const std::string& s, uint32_t& out) {
    try {
        size_t pos = 0;
        unsigned long v = std::stoul(s, &pos);
        if (pos != s.size() || v > UINT32_MAX) return false;
        out = static_cast<uint32_t>(v);
        return true;
    } catch (...) {
        return false;
    }
}

bool parse_u64(const std::string& s, uint64_t& out) {
    try {
        size_t pos = 0;
        out = std::stoull(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

bool parse_f(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

}  // namespace

extern "C" {

htapsim_engine* htapsim_create(void) { return new (std::nothrow) htapsim_engine; }

void htapsim_destroy(htapsim_engine* e) { delete e; }

int htapsim_set_option(htapsim_engine* e, const char* key, const char* value) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    if (!key || !value) return fail(e, HTAPSIM_ERR_INVALID_ARG, "null key or value");
    std::string k = key, v = value;
    try {
        uint32_t u = 0;
        uint64_t u64 = 0;
        double f = 0;
        bool ok = true;
        if (k == "system") e->config.system = htap::system_from_name(v);
        else if (k == "placement") e->config.placement = htap::placement_from_name(v);
        else if (k == "scheduler") e->config.scheduler = htap::scheduler_from_name(v);
        else if (k == "txn-threads") { if ((ok = parse_u32(v, u))) e->spec.txn_threads = u; }
        else if (k == "txn-queries") { if ((ok = parse_u32(v, u))) e->spec.txn_queries_per_thread = u; }
        else if (k == "anl-threads") { if ((ok = parse_u32(v, u))) e->spec.anl_threads = u; }
        else if (k == "anl-queries") { if ((ok = parse_u32(v, u))) e->spec.anl_queries_per_thread = u; }
        else if (k == "ops-per-query") { if ((ok = parse_u32(v, u))) e->spec.ops_per_query = u; }
        else if (k == "tables") { if ((ok = parse_u32(v, u))) e->spec.n_tables = u; }
        else if (k == "rows") { if ((ok = parse_u32(v, u))) e->spec.rows_per_table = u; }
        else if (k == "cols") { if ((ok = parse_u32(v, u))) e->spec.cols_per_table = u; }
        else if (k == "max-distinct") { if ((ok = parse_u32(v, u))) e->spec.max_distinct = u; }
        else if (k == "seed") { if ((ok = parse_u64(v, u64))) e->spec.seed = u64; }
        else if (k == "update-ratio") { if ((ok = parse_f(v, f))) e->spec.update_ratio = f; }
        else e->config.topo.apply_option(k, v);  // hardware keys; throws on typos
        if (!ok)
            return fail(e, HTAPSIM_ERR_INVALID_ARG, "bad value for " + k);
        return HTAPSIM_OK;
    } catch (const htap::Error& err) {
        return from_exception(e, err);
    } catch (const std::exception& err) {
        return fail(e, HTAPSIM_ERR_INVALID_ARG, err.what());
    }
}

int htapsim_load_config(htapsim_engine* e, const char* path) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    if (!path) return fail(e, HTAPSIM_ERR_INVALID_ARG, "null path");
    try {
        e->config.topo = htap::VaultTopology::from_config_file(path);
        return HTAPSIM_OK;
    } catch (const htap::Error& err) {
        return from_exception(e, err);
    } catch (const std::exception& err) {
        return fail(e, HTAPSIM_ERR_DOMAIN, err.what());
    }
}

int htapsim_run(htapsim_engine* e) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    try {
        e->spec.validate();
        e->config.topo.validate();
        htap::Workload w = htap::generate_workload(e->spec);
        e->report = htap::run(e->config, w).report;
        return HTAPSIM_OK;
    } catch (const htap::Error& err) {
        return from_exception(e, err);
    } catch (const std::exception& err) {
        return fail(e, HTAPSIM_ERR_DOMAIN, err.what());
    }
}

int htapsim_metrics_csv(htapsim_engine* e, char* buf, size_t cap, size_t* needed) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    if (!e->report)
        return fail(e, HTAPSIM_ERR_NO_RESULT, "no run has completed yet");
    return fill_buffer(htap::metrics_csv_header() + "\n" +
                           htap::metrics_csv_row(*e->report) + "\n",
                       buf, cap, needed);
}

int htapsim_dump_config(htapsim_engine* e, char* buf, size_t cap, size_t* needed) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    return fill_buffer(e->config.topo.dump(), buf, cap, needed);
}

int htapsim_plot_data(htapsim_engine* e, const char* figure, char* buf,
                      size_t cap, size_t* needed) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    if (!figure) return fail(e, HTAPSIM_ERR_INVALID_ARG, "null figure");
    try {
        return fill_buffer(
            htap::plot_data_csv(figure, e->config.topo, e->spec.seed), buf, cap,
            needed);
    } catch (const htap::Error& err) {
        return from_exception(e, err);
    } catch (const std::exception& err) {
        return fail(e, HTAPSIM_ERR_DOMAIN, err.what());
    }
}

int htapsim_write_metrics_csv(htapsim_engine* e, const char* path, int append) {
    if (!e) return HTAPSIM_ERR_INVALID_ARG;
    if (!path) return fail(e, HTAPSIM_ERR_INVALID_ARG, "null path");
    if (!e->report)
        return fail(e, HTAPSIM_ERR_NO_RESULT, "no run has completed yet");
    try {
        htap::emit_csv(*e->report, path, append != 0);
        return HTAPSIM_OK;
    } catch (const htap::Error& err) {
        return from_exception(e, err);
    }
}

const char* htapsim_last_error(const htapsim_engine* e) {
    return e ? e->last_error.c_str() : "";
}

}  // extern "C"
