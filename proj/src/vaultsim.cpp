#include "htapsim/vaultsim.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace htap {

uint32_t VaultTopology::hops(uint32_t from_vault, uint32_t to_vault) const {
    if (from_vault == to_vault) return 0;
    return group_of(from_vault) == group_of(to_vault) ? 1 : 2;
}

void VaultTopology::validate() const {
    if (group_size == 0 || n_vaults == 0 || n_vaults % group_size != 0)
        raise(Errc::InvalidSpec, "n_vaults must be a positive multiple of group_size");
    if (per_vault_bw <= 0 || offchip_bw <= 0 || host_mem_bw <= 0)
        raise(Errc::InvalidSpec, "bandwidths must be positive");
    if (pim_threads_per_vault == 0 || segment_rows == 0 || final_log_capacity == 0)
        raise(Errc::InvalidSpec, "counts must be positive");
}

void VaultTopology::apply_option(const std::string& key, const std::string& value) {
    auto as_u32 = [&] { return static_cast<uint32_t>(std::stoul(value)); };
    auto as_u64 = [&] { return std::stoull(value); };
    auto as_f = [&] { return std::stod(value); };
    if (key == "vaults") n_vaults = as_u32();
    else if (key == "group_size") group_size = as_u32();
    else if (key == "per_vault_bw") per_vault_bw = as_f();
    else if (key == "offchip_bw") offchip_bw = as_f();
    else if (key == "host_mem_bw") host_mem_bw = as_f();
    else if (key == "local_latency") local_latency = as_f();
    else if (key == "remote_hop_latency") remote_hop_latency = as_f();
    else if (key == "host_latency") host_latency = as_f();
    else if (key == "pim_threads_per_vault") pim_threads_per_vault = as_u32();
    else if (key == "pim_ns_per_tuple") pim_ns_per_tuple = as_f();
    else if (key == "host_ns_per_tuple") host_ns_per_tuple = as_f();
    else if (key == "copy_tracking_buffer") copy_tracking_buffer = as_u64();
    else if (key == "segment_rows") segment_rows = as_u32();
    else if (key == "final_log_capacity") final_log_capacity = as_u32();
    else if (key == "dict_replication_threshold") dict_replication_threshold = as_u32();
    else raise(Errc::InvalidSpec, "unknown config key: " + key);
}

VaultTopology VaultTopology::from_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::IoFailure, "cannot open config file " + path);
    VaultTopology topo;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto last = s.find_last_not_of(" \t\r");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) topo.apply_option(key, value);
    }
    topo.validate();
    return topo;
}

std::string VaultTopology::dump() const {
    std::ostringstream os;
    os << "vaults=" << n_vaults << "\n"
       << "group_size=" << group_size << "\n"
       << "per_vault_bw=" << per_vault_bw << "\n"
       << "offchip_bw=" << offchip_bw << "\n"
       << "host_mem_bw=" << host_mem_bw << "\n"
       << "local_latency=" << local_latency << "\n"
       << "remote_hop_latency=" << remote_hop_latency << "\n"
       << "host_latency=" << host_latency << "\n"
       << "pim_threads_per_vault=" << pim_threads_per_vault << "\n"
       << "pim_ns_per_tuple=" << pim_ns_per_tuple << "\n"
       << "host_ns_per_tuple=" << host_ns_per_tuple << "\n"
       << "copy_tracking_buffer=" << copy_tracking_buffer << "\n"
       << "segment_rows=" << segment_rows << "\n"
       << "final_log_capacity=" << final_log_capacity << "\n"
       << "dict_replication_threshold=" << dict_replication_threshold << "\n";
    return os.str();
}

VirtualClock::VirtualClock(size_t n_resources)
    : busy_(n_resources, 0.0), bytes_(n_resources, 0) {}

Reservation VirtualClock::reserve(ResourceId r, double earliest, double duration) {
    if (r >= busy_.size()) raise(Errc::UnknownVault, "resource out of range");
    double start = std::max(earliest, busy_[r]);
    busy_[r] = start + duration;
    return {start, busy_[r]};
}

void VirtualClock::advance_to(double t) {
    if (t < now_) raise(Errc::TimeRegression, "clock cannot move backwards");
    now_ = t;
}

double VirtualClock::busy_until(ResourceId r) const {
    if (r >= busy_.size()) raise(Errc::UnknownVault, "resource out of range");
    return busy_[r];
}

uint64_t VirtualClock::bytes_served(ResourceId r) const {
    if (r >= bytes_.size()) raise(Errc::UnknownVault, "resource out of range");
    return bytes_[r];
}

void VirtualClock::account_bytes(ResourceId r, uint64_t bytes) {
    if (r >= bytes_.size()) raise(Errc::UnknownVault, "resource out of range");
    bytes_[r] += bytes;
}

VaultModel::VaultModel(const VaultTopology& t)
    : topo(t), clock(t.n_vaults + 3) {
    topo.validate();
}

ResourceId VaultModel::vault_port(uint32_t vault) const {
    if (vault >= topo.n_vaults) raise(Errc::UnknownVault, "vault out of range");
    return vault;
}

double VaultModel::charge_access(uint32_t vault, uint64_t bytes,
                                 uint32_t origin_vault, bool origin_is_host,
                                 double earliest) {
    ResourceId port = vault_port(vault);
    if (origin_is_host) {
        auto link = clock.reserve(offchip(), earliest,
                                  static_cast<double>(bytes) / topo.offchip_bw);
        clock.account_bytes(offchip(), bytes);
        auto r = clock.reserve(port, link.end,
                               static_cast<double>(bytes) / topo.per_vault_bw);
        clock.account_bytes(port, bytes);
        return r.end + topo.host_latency;
    }
    if (origin_vault >= topo.n_vaults) raise(Errc::UnknownVault, "origin out of range");
    double latency = topo.local_latency +
                     topo.hops(origin_vault, vault) * topo.remote_hop_latency;
    auto r = clock.reserve(port, earliest + latency,
                           static_cast<double>(bytes) / topo.per_vault_bw);
    clock.account_bytes(port, bytes);
    return r.end;
}

double VaultModel::charge_host_mem(uint64_t bytes, double earliest) {
    auto r = clock.reserve(host_mem(), earliest,
                           static_cast<double>(bytes) / topo.host_mem_bw);
    clock.account_bytes(host_mem(), bytes);
    return r.end + topo.host_latency;
}

double VaultModel::charge_copy(uint32_t src_vault, uint32_t dst_vault,
                               uint64_t bytes, double earliest) {
    ResourceId src = vault_port(src_vault);
    ResourceId dst = vault_port(dst_vault);
    if (bytes == 0) return earliest;
    double hop = topo.hops(src_vault, dst_vault) * topo.remote_hop_latency;
    double done = earliest;
    uint64_t left = bytes;
    while (left > 0) {
        uint64_t chunk = std::min(left, topo.copy_tracking_buffer);
        double dt = static_cast<double>(chunk) / topo.per_vault_bw;
        auto rd = clock.reserve(src, done, dt);
        clock.account_bytes(src, chunk);
        auto wr = clock.reserve(dst, rd.end + hop, dt);
        clock.account_bytes(dst, chunk);
        done = wr.end;
        left -= chunk;
    }
    return done;
}

}  // namespace htap
