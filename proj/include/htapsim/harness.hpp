#pragma once

#include <string>

#include "htapsim/analytics.hpp"
#include "htapsim/consistency.hpp"
#include "htapsim/replica.hpp"
#include "htapsim/txn.hpp"
#include "htapsim/vaultsim.hpp"

namespace htap {

// Deterministic splitmix64 stream; identical across platforms for a seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}
    uint64_t next();
    uint64_t below(uint64_t n);  // uniform in [0, n)
    double unit();               // uniform in [0, 1)

private:
    uint64_t state_;
};

struct WorkloadSpec {
    uint32_t txn_threads = 4;
    uint32_t txn_queries_per_thread = 500;
    double update_ratio = 0.5;
    uint32_t anl_threads = 4;
    uint32_t anl_queries_per_thread = 4;
    uint32_t n_tables = 2;
    uint32_t rows_per_table = 4000;
    uint32_t cols_per_table = 4;
    uint32_t max_distinct = 32;  // per-column distinct-value cap (median regime)
    uint32_t ops_per_query = 4;
    uint64_t seed = 1;

    void validate() const;
};

struct Workload {
    WorkloadSpec spec;
    std::vector<NsmTable> tables;
    // txn_queries[thread][i]: the i-th batch of that thread. The driver
    // executes round-robin across threads, which matches the key-liveness
    // assumptions baked in at generation time.
    std::vector<std::vector<std::vector<TxnOp>>> txn_queries;
    std::vector<std::vector<std::string>> anl_queries;  // plan text

    uint64_t total_txn_queries() const;
    uint64_t total_anl_queries() const;
    uint64_t expected_log_entries() const;
};

Workload generate_workload(const WorkloadSpec& spec);

enum class SystemKind { Polynesia, SiSs, SiMvcc, MiSw };
const char* system_name(SystemKind s);
SystemKind system_from_name(const std::string& name);

struct SystemConfig {
    SystemKind system = SystemKind::Polynesia;
    Placement placement = Placement::Hybrid;
    SchedulerMode scheduler = SchedulerMode::Optimized;
    VaultTopology topo;
    // normalization switches for the trend experiments: the work still
    // happens functionally, its time charge is suppressed
    bool zero_cost_snapshots = false;
    bool zero_cost_propagation = false;
    bool unit_cost_chains = false;
};

struct MetricsReport {
    std::string system;
    std::string placement;
    std::string scheduler;
    uint64_t seed = 0;
    uint64_t txn_queries = 0;
    uint64_t anl_queries = 0;
    double txn_throughput_qps = 0;
    double anl_throughput_qps = 0;
    double update_app_latency_ns = 0;  // mean per propagation round
    uint64_t propagation_rounds = 0;
    uint64_t snapshot_count = 0;
    double mean_mvcc_chain_length = 0;
    uint64_t onchip_bytes = 0;
    uint64_t offchip_bytes = 0;
    uint64_t host_bytes = 0;
    double makespan_ns = 0;  // end of the last completed query
    double txn_elapsed_ns = 0;
    double anl_elapsed_ns = 0;  // issue-to-completion span
    double anl_busy_ns = 0;     // summed per-query service time
};

struct RunOutput {
    MetricsReport report;
    // answers[thread][query]: final-freshness answers (after full flush)
    std::vector<std::vector<std::vector<Value>>> answers;
    std::vector<NsmTable> final_nsm;
};

RunOutput run(const SystemConfig& config, const Workload& workload);

// offline oracle: evaluate a plan against row-store tables directly
std::vector<Value> evaluate_plan_nsm(const PlanNode& plan,
                                     const std::vector<NsmTable>& tables);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& r);
void emit_csv(const MetricsReport& r, const std::string& path, bool append);

// ---- trend sweeps (the CLI's --plot-data series; also the acceptance
// experiments) ----

struct PlacementTrendPoint {
    Placement placement;
    SchedulerMode scheduler;
    double anl_throughput_qps = 0;
    double update_app_latency_ns = 0;
};
std::vector<PlacementTrendPoint> sweep_placement(const VaultTopology& topo,
                                                 uint64_t seed);

struct SnapshotTrendPoint {
    uint32_t anl_queries = 0;
    double normalized_txn_throughput = 0;  // vs. zero-cost-snapshot run
};
std::vector<SnapshotTrendPoint> sweep_snapshot_cost(const VaultTopology& topo,
                                                    uint64_t seed);

struct MvccTrendPoint {
    uint64_t txn_updates = 0;
    double normalized_anl_throughput = 0;  // vs. unit-cost-chain run
    double mean_chain_length = 0;
};
std::vector<MvccTrendPoint> sweep_mvcc(const VaultTopology& topo, uint64_t seed);

struct PropagationTrendPoint {
    double update_ratio = 0;
    double mi_sw_normalized_txn_throughput = 0;
    double polynesia_normalized_txn_throughput = 0;
};
std::vector<PropagationTrendPoint> sweep_propagation(const VaultTopology& topo,
                                                     uint64_t seed);

std::string plot_data_csv(const std::string& figure, const VaultTopology& topo,
                          uint64_t seed);

}  // namespace htap
