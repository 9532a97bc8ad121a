#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "htapsim/error.hpp"

namespace htap {

// All bandwidths are bytes/ns (numerically GB/s); latencies are ns.
struct VaultTopology {
    uint32_t n_vaults = 16;
    uint32_t group_size = 4;
    double per_vault_bw = 16.0;   // 256 GB/s stack / 16 vaults; 8.0 preset exists
    double offchip_bw = 32.0;     // host <-> stack channel
    double host_mem_bw = 64.0;    // host-side DRAM channel (baselines)
    double local_latency = 50.0;
    double remote_hop_latency = 25.0;
    double host_latency = 100.0;
    uint32_t pim_threads_per_vault = 4;
    double pim_ns_per_tuple = 1.0;
    double host_ns_per_tuple = 0.5;
    uint64_t copy_tracking_buffer = 4096;  // bytes in flight per copy chunk
    uint32_t segment_rows = 1000;
    uint32_t final_log_capacity = 1024;
    uint32_t dict_replication_threshold = 32;

    uint32_t n_groups() const { return n_vaults / group_size; }
    uint32_t group_of(uint32_t vault) const { return vault / group_size; }
    uint32_t total_pim_threads() const { return n_vaults * pim_threads_per_vault; }

    // 0 within a vault, 1 within a group, 2 across groups
    uint32_t hops(uint32_t from_vault, uint32_t to_vault) const;

    void validate() const;

    static VaultTopology from_config_file(const std::string& path);
    void apply_option(const std::string& key, const std::string& value);
    std::string dump() const;  // key=value lines, fixed order
};

using ResourceId = uint32_t;

struct Reservation {
    double start = 0;
    double end = 0;
};

// Discrete virtual time: per-resource busy-until plus a global cursor.
// Reservations are FIFO in issue order, which keeps every run deterministic.
class VirtualClock {
public:
    explicit VirtualClock(size_t n_resources);

    Reservation reserve(ResourceId r, double earliest, double duration);
    void advance_to(double t);  // TimeRegression if t < now

    double now() const { return now_; }
    double busy_until(ResourceId r) const;
    uint64_t bytes_served(ResourceId r) const;
    void account_bytes(ResourceId r, uint64_t bytes);
    size_t n_resources() const { return busy_.size(); }

private:
    double now_ = 0;
    std::vector<double> busy_;
    std::vector<uint64_t> bytes_;
};

enum class Origin : uint32_t { Host = UINT32_MAX };

// Resource layout: [0, n_vaults) vault ports, then offchip, then host memory
// channel, then host compute.
struct VaultModel {
    explicit VaultModel(const VaultTopology& topo);

    ResourceId vault_port(uint32_t vault) const;
    ResourceId offchip() const { return topo.n_vaults; }
    ResourceId host_mem() const { return topo.n_vaults + 1; }
    ResourceId host_cpu() const { return topo.n_vaults + 2; }

    // Access `bytes` resident in `vault`, issued from `origin_vault`
    // (or from the host when origin_is_host). Returns completion time.
    double charge_access(uint32_t vault, uint64_t bytes, uint32_t origin_vault,
                         bool origin_is_host, double earliest);

    // Host-side DRAM traffic (baseline systems).
    double charge_host_mem(uint64_t bytes, double earliest);

    // Copy-unit transfer: pipelined chunks bounded by the tracking buffer.
    double charge_copy(uint32_t src_vault, uint32_t dst_vault, uint64_t bytes,
                       double earliest);

    VaultTopology topo;
    VirtualClock clock;
};

}  // namespace htap
