#include "htapsim/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "htapsim/application.hpp"
#include "htapsim/propagation.hpp"

namespace htap {

namespace {
constexpr uint64_t kTxnOpBytes = 24;
constexpr uint64_t kVersionNodeBytes = 24;
}  // namespace

uint64_t Rng::next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t Rng::below(uint64_t n) { return n == 0 ? 0 : next() % n; }

double Rng::unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

void WorkloadSpec::validate() const {
    if (update_ratio < 0.0 || update_ratio > 1.0)
        raise(Errc::InvalidSpec, "update_ratio must be in [0,1]");
    if (n_tables == 0 || rows_per_table == 0 || cols_per_table == 0)
        raise(Errc::InvalidSpec, "tables must be non-empty");
    if (txn_threads == 0)
        raise(Errc::InvalidSpec, "txn_threads must be > 0");
    if (ops_per_query == 0) raise(Errc::InvalidSpec, "ops_per_query must be > 0");
    if (max_distinct == 0) raise(Errc::InvalidSpec, "max_distinct must be > 0");
}

uint64_t Workload::total_txn_queries() const {
    uint64_t n = 0;
    for (const auto& t : txn_queries) n += t.size();
    return n;
}

uint64_t Workload::total_anl_queries() const {
    uint64_t n = 0;
    for (const auto& t : anl_queries) n += t.size();
    return n;
}

uint64_t Workload::expected_log_entries() const {
    uint64_t n = 0;
    uint16_t cols = spec.cols_per_table;
    for (const auto& t : txn_queries)
        for (const auto& q : t)
            for (const auto& op : q) {
                if (op.action == TxnOp::Action::Modify) n += 1;
                else if (op.action != TxnOp::Action::Read) n += cols;
            }
    return n;
}

Workload generate_workload(const WorkloadSpec& spec) {
    spec.validate();
    Rng rng(spec.seed * 0x5851f42d4c957f2dULL + 0x14057b7ef767814fULL);

    Workload w;
    w.spec = spec;

    // per-column value domains; median column stays in the <=32-distinct regime
    std::vector<std::vector<std::vector<Value>>> domains(spec.n_tables);
    for (uint16_t t = 0; t < spec.n_tables; ++t) {
        NsmTable table;
        table.table_id = t;
        table.n_columns = static_cast<uint16_t>(spec.cols_per_table);
        domains[t].resize(spec.cols_per_table);
        for (uint16_t c = 0; c < spec.cols_per_table; ++c) {
            uint64_t d = 2 + rng.below(spec.max_distinct - 1);
            if (rng.below(8) == 0) d = spec.max_distinct + rng.below(3 * spec.max_distinct);
            Value base = static_cast<Value>(rng.below(1000)) * 100;
            auto& dom = domains[t][c];
            for (uint64_t i = 0; i < d; ++i)
                dom.push_back(base + static_cast<Value>(rng.below(10 * d)));
            std::sort(dom.begin(), dom.end());
            dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
        }
        for (uint32_t r = 0; r < spec.rows_per_table; ++r) {
            std::vector<Value> row(spec.cols_per_table);
            for (uint16_t c = 0; c < spec.cols_per_table; ++c)
                row[c] = domains[t][c][rng.below(domains[t][c].size())];
            table.append_row(std::move(row));
        }
        w.tables.push_back(std::move(table));
    }

    // shadow liveness in driver (round-robin) order, so Delete targets stay valid
    std::vector<std::vector<bool>> live(spec.n_tables);
    std::vector<uint64_t> row_count(spec.n_tables);
    std::vector<uint64_t> live_count(spec.n_tables);
    for (uint16_t t = 0; t < spec.n_tables; ++t) {
        live[t].assign(spec.rows_per_table, true);
        row_count[t] = spec.rows_per_table;
        live_count[t] = spec.rows_per_table;
    }
    // rows inserted within a query are not addressable until it commits
    // (the island validates the whole batch first), so picks are bounded
    // by the per-query row-count snapshot
    std::vector<uint64_t> rows_at_start;
    auto pick_live_row = [&](uint16_t t) -> uint64_t {
        while (true) {
            uint64_t r = rng.below(rows_at_start[t]);
            if (live[t][r]) return r;
        }
    };

    w.txn_queries.assign(spec.txn_threads, {});
    for (uint32_t round = 0; round < spec.txn_queries_per_thread; ++round) {
        for (uint32_t th = 0; th < spec.txn_threads; ++th) {
            rows_at_start = row_count;
            std::vector<TxnOp> q;
            for (uint32_t i = 0; i < spec.ops_per_query; ++i) {
                uint16_t t = static_cast<uint16_t>(rng.below(spec.n_tables));
                TxnOp op;
                if (rng.unit() < spec.update_ratio) {
                    uint64_t kind = rng.below(20);
                    if (kind == 0) {  // insert
                        op.action = TxnOp::Action::Insert;
                        op.key = {t, 0, 0};
                        for (uint16_t c = 0; c < spec.cols_per_table; ++c)
                            op.row.push_back(
                                domains[t][c][rng.below(domains[t][c].size())]);
                        live[t].push_back(true);
                        row_count[t]++;
                        live_count[t]++;
                    } else if (kind == 1 && live_count[t] > spec.rows_per_table / 2) {
                        uint64_t r = pick_live_row(t);
                        op.action = TxnOp::Action::Delete;
                        op.key = {t, r, 0};
                        live[t][r] = false;
                        live_count[t]--;
                    } else {
                        uint16_t c = static_cast<uint16_t>(rng.below(spec.cols_per_table));
                        op.action = TxnOp::Action::Modify;
                        op.key = {t, pick_live_row(t), c};
                        op.value = domains[t][c][rng.below(domains[t][c].size())];
                    }
                } else {
                    uint16_t c = static_cast<uint16_t>(rng.below(spec.cols_per_table));
                    op.action = TxnOp::Action::Read;
                    op.key = {t, pick_live_row(t), c};
                }
                q.push_back(std::move(op));
            }
            w.txn_queries[th].push_back(std::move(q));
        }
    }

    auto col_ref = [](uint16_t t, uint16_t c) {
        return "T" + std::to_string(t) + ".C" + std::to_string(c);
    };
    static const char* kAggs[] = {"sum", "count", "min", "max"};
    static const char* kCmps[] = {"lt", "le", "gt", "ge"};
    w.anl_queries.assign(spec.anl_threads, {});
    for (uint32_t th = 0; th < spec.anl_threads; ++th) {
        for (uint32_t i = 0; i < spec.anl_queries_per_thread; ++i) {
            uint16_t t = static_cast<uint16_t>(rng.below(spec.n_tables));
            uint16_t c = static_cast<uint16_t>(rng.below(spec.cols_per_table));
            const auto& dom = domains[t][c];
            uint64_t shape = rng.below(10);
            std::string plan;
            if (shape < 7) {
                Value lit = dom[rng.below(dom.size())];
                plan = std::string("AGG ") + kAggs[rng.below(4)] + " (FILTER col=" +
                       col_ref(t, c) + " " + kCmps[rng.below(4)] + " " +
                       std::to_string(lit) + " (SCAN " + col_ref(t, c) + "))";
            } else if (shape < 9 || spec.n_tables * spec.cols_per_table < 2) {
                plan = std::string("AGG ") + kAggs[rng.below(4)] + " (SCAN " +
                       col_ref(t, c) + ")";
            } else {
                uint16_t t2 = t, c2 = c;
                while (t2 == t && c2 == c) {
                    t2 = static_cast<uint16_t>(rng.below(spec.n_tables));
                    c2 = static_cast<uint16_t>(rng.below(spec.cols_per_table));
                }
                plan = "AGG count (JOIN " + col_ref(t, c) + " " + col_ref(t2, c2) +
                       " (SCAN " + col_ref(t, c) + ") (SCAN " + col_ref(t2, c2) + "))";
            }
            w.anl_queries[th].push_back(std::move(plan));
        }
    }
    return w;
}

const char* system_name(SystemKind s) {
    switch (s) {
        case SystemKind::Polynesia: return "polynesia";
        case SystemKind::SiSs: return "si-ss";
        case SystemKind::SiMvcc: return "si-mvcc";
        case SystemKind::MiSw: return "mi-sw";
    }
    return "?";
}

SystemKind system_from_name(const std::string& name) {
    if (name == "polynesia") return SystemKind::Polynesia;
    if (name == "si-ss") return SystemKind::SiSs;
    if (name == "si-mvcc") return SystemKind::SiMvcc;
    if (name == "mi-sw") return SystemKind::MiSw;
    raise(Errc::InvalidSpec, "unknown system: " + name);
}

// ---- offline oracle ----

namespace {

std::vector<Value> eval_nsm(const PlanNode& n, const std::vector<NsmTable>& tables) {
    switch (n.kind) {
        case PlanNode::Kind::Scan: {
            std::vector<Value> out;
            for (const auto& t : tables) {
                if (t.table_id != n.column.table_id) continue;
                if (n.column.column_id >= t.n_columns)
                    raise(Errc::UnknownColumn, "scan of unknown column");
                for (uint64_t r = 0; r < t.row_count(); ++r)
                    if (t.live[r]) out.push_back(t.rows[r][n.column.column_id]);
                return out;
            }
            raise(Errc::UnknownColumn, "scan of unknown table");
        }
        case PlanNode::Kind::Filter: {
            auto in = eval_nsm(*n.children[0], tables);
            std::vector<Value> out;
            for (Value v : in)
                if (cmp_eval(n.cmp, v, n.literal)) out.push_back(v);
            return out;
        }
        case PlanNode::Kind::Select:
            return eval_nsm(*n.children[0], tables);
        case PlanNode::Kind::Agg: {
            auto in = eval_nsm(*n.children[0], tables);
            switch (n.agg) {
                case AggFn::Count: return {static_cast<Value>(in.size())};
                case AggFn::Sum: {
                    Value s = 0;
                    for (Value v : in) s += v;
                    return {s};
                }
                case AggFn::Min:
                    return {in.empty() ? 0 : *std::min_element(in.begin(), in.end())};
                case AggFn::Max:
                    return {in.empty() ? 0 : *std::max_element(in.begin(), in.end())};
            }
            return {0};
        }
        case PlanNode::Kind::Join: {
            auto left = eval_nsm(*n.children[0], tables);
            auto right = eval_nsm(*n.children[1], tables);
            std::unordered_map<Value, uint64_t> build;
            for (Value v : right) build[v]++;
            std::vector<Value> out;
            for (Value v : left) {
                auto it = build.find(v);
                if (it != build.end()) out.insert(out.end(), it->second, v);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

std::vector<Value> evaluate_plan_nsm(const PlanNode& plan,
                                     const std::vector<NsmTable>& tables) {
    auto out = eval_nsm(plan, tables);
    if (plan.kind != PlanNode::Kind::Agg) std::sort(out.begin(), out.end());
    return out;
}

// ---- run driver ----

namespace {

struct ParsedPlans {
    std::vector<std::vector<std::unique_ptr<PlanNode>>> by_thread;
};

ParsedPlans parse_all(const Workload& w) {
    ParsedPlans p;
    p.by_thread.resize(w.anl_queries.size());
    for (size_t th = 0; th < w.anl_queries.size(); ++th)
        for (const auto& text : w.anl_queries[th])
            p.by_thread[th].push_back(parse_plan(text));
    return p;
}

std::vector<ColumnShape> column_shapes(const std::vector<NsmTable>& tables) {
    std::vector<ColumnShape> shapes;
    for (const auto& t : tables) {
        for (uint16_t c = 0; c < t.n_columns; ++c) {
            std::vector<Value> vals;
            for (uint64_t r = 0; r < t.row_count(); ++r)
                if (t.live[r]) vals.push_back(t.rows[r][c]);
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
            shapes.push_back({{t.table_id, c}, t.row_count(), vals.size()});
        }
    }
    return shapes;
}

uint64_t scanned_rows(const PlanNode& plan, const std::vector<NsmTable>& tables) {
    uint64_t n = 0;
    for (ColumnId col : plan.scanned_columns())
        for (const auto& t : tables)
            if (t.table_id == col.table_id) n += t.row_count();
    return n;
}

}  // namespace

RunOutput run(const SystemConfig& config, const Workload& w) {
    const auto& spec = w.spec;
    VaultModel model(config.topo);
    const auto& topo = model.topo;
    TxnIsland txn(w.tables, spec.txn_threads);
    ParsedPlans plans = parse_all(w);

    const bool dual_replica = config.system == SystemKind::Polynesia ||
                              config.system == SystemKind::MiSw;

    std::unique_ptr<AnalyticalReplica> replica;
    std::unique_ptr<SnapshotManager> snaps;
    if (dual_replica) {
        Placement strat = config.system == SystemKind::Polynesia
                              ? config.placement
                              : Placement::Local;
        auto plan = place(column_shapes(w.tables), strat, topo);
        replica = std::make_unique<AnalyticalReplica>(w.tables, plan, topo);
        snaps = std::make_unique<SnapshotManager>([&r = *replica](ColumnId c) {
            return r.column_parts(c);
        });
        for (ColumnId col : replica->column_ids()) snaps->register_column(col);
    }
    std::unique_ptr<MvccStore> mvcc;
    if (config.system == SystemKind::SiMvcc)
        mvcc = std::make_unique<MvccStore>(w.tables);

    double txn_clock = 0;
    std::vector<double> anl_clock(spec.anl_threads, 0.0);
    double anl_span_start = std::numeric_limits<double>::infinity();
    double anl_span_end = 0;
    double app_publish_time = 0;
    double app_latency_sum = 0;
    uint64_t rounds = 0;
    uint64_t si_snapshots = 0;
    bool si_dirty = false;
    uint64_t mvcc_reads = 0, mvcc_nodes = 0;
    uint64_t mvcc_issue_ts = 0;
    double anl_busy = 0;
    uint64_t next_query_id = 1;

    auto host_compute = [&](double earliest, double ns) {
        auto r = model.clock.reserve(model.host_cpu(), earliest, ns);
        return r.end;
    };

    // ---- transactional query ----
    auto exec_txn = [&](uint32_t th, const std::vector<TxnOp>& ops) {
        auto res = txn.execute(th, ops);
        double c = host_compute(txn_clock, static_cast<double>(ops.size()) *
                                               topo.host_ns_per_tuple);
        double m = model.charge_host_mem(ops.size() * kTxnOpBytes, txn_clock);
        txn_clock = std::max(c, m);
        if (res.commit) {
            if (config.system == SystemKind::SiSs) si_dirty = true;
            if (mvcc) {
                // mirror written cells into the version chains; last writer
                // wins within one commit (a chain holds one version per ts)
                const auto& log = txn.logs()[th].entries;
                size_t n = res.log_entries_added;
                std::vector<std::pair<RecordKey, std::pair<Value, bool>>> batch;
                for (size_t i = log.size() - n; i < log.size(); ++i) {
                    const auto& e = log[i];
                    std::pair<Value, bool> vv{e.data, e.kind != UpdateKind::Delete};
                    auto it = std::find_if(batch.begin(), batch.end(),
                                           [&](const auto& b) {
                                               return b.first == e.key;
                                           });
                    if (it == batch.end()) batch.emplace_back(e.key, vv);
                    else it->second = vv;
                }
                for (const auto& [key, vv] : batch)
                    mvcc->write(key, *res.commit, vv.first, vv.second);
                txn_clock = model.charge_host_mem(n * kVersionNodeBytes, txn_clock);
            }
        }
    };

    // ---- propagation + application round (Polynesia / MI-SW) ----
    auto propagation_round = [&]() -> bool {
        PropagationStats ps;
        FinalLog fl = merge_logs(txn.logs(), topo.final_log_capacity, &ps);
        if (fl.entries.empty()) return false;
        auto buffers = ship(
            fl, replica->indexes(),
            [&](const UpdateLogEntry& e) { return replica->place_new_row(e); },
            &ps);

        ApplyStats as;
        // touched columns, first-appearance order
        std::vector<ColumnId> cols;
        for (const auto& b : buffers) {
            ColumnId c{b.table_id, b.column_id};
            if (std::find(cols.begin(), cols.end(), c) == cols.end())
                cols.push_back(c);
        }
        struct ColRound {
            ColumnId col;
            std::vector<const ColumnBuffer*> bufs;
            uint64_t update_entries = 0;
        };
        std::vector<ColRound> per_col;
        for (ColumnId c : cols) {
            ColRound cr{c, {}, 0};
            for (const auto& b : buffers)
                if (b.table_id == c.table_id && b.column_id == c.column_id) {
                    cr.bufs.push_back(&b);
                    cr.update_entries += b.updates.size();
                }
            per_col.push_back(std::move(cr));
        }

        // functional application + publish + dirty marking
        for (const auto& cr : per_col) {
            for (const ColumnBuffer* b : cr.bufs) {
                auto cur = replica->partition(cr.col, b->partition);
                auto next = apply_optimized(*cur, b->updates, &as);
                replica->publish(cr.col, b->partition,
                                 std::make_shared<EncodedColumn>(std::move(next)));
            }
            snaps->mark_dirty(cr.col);
        }

        // cost accounting
        if (config.system == SystemKind::Polynesia) {
            if (!config.zero_cost_propagation) {
                // the txn side pays only the final-log transfer into the stack
                auto link = model.clock.reserve(
                    model.offchip(), txn_clock,
                    static_cast<double>(fl.entries.size() * kLogEntryBytes) /
                        topo.offchip_bw);
                model.clock.account_bytes(model.offchip(),
                                          fl.entries.size() * kLogEntryBytes);
                txn_clock = link.end + topo.host_latency;
            }
            double round_start = std::max(app_publish_time, txn_clock);
            double done = round_start;
            for (const auto& cr : per_col) {
                const auto& cp = replica->placement(cr.col);
                uint32_t home = cp.home_vault;
                uint64_t new_dict_bytes =
                    replica->partition(cr.col, 0)->dict->dict_bytes();
                for (uint32_t p = 0; p < cp.parts.size(); ++p) {
                    uint32_t v = cp.parts[p].vault;
                    auto part = replica->partition(cr.col, p);
                    uint64_t codes_bytes = part->dict->code_bytes(part->codes.size());
                    // scatter this partition's updates from the shipping buffer
                    uint64_t m_p = 0;
                    for (const ColumnBuffer* b : cr.bufs)
                        if (b->partition == p) m_p = b->updates.size();
                    double t0 = round_start;
                    if (m_p > 0)
                        t0 = model.charge_copy(home, v, m_p * kLogEntryBytes, t0);
                    // in-place recode pass (read + write every code)
                    double t1 = model.charge_access(v, 2 * codes_bytes, v, false, t0);
                    done = std::max(done, t1);
                    switch (config.placement) {
                        case Placement::Local:
                            break;  // dictionary and recode map stay local
                        case Placement::Hybrid:
                            // install the merged dictionary in each group vault
                            done = std::max(done, model.charge_copy(
                                                      home, v, new_dict_bytes,
                                                      round_start));
                            break;
                        case Placement::Distributed: {
                            // every recode lookup reaches the home vault's
                            // single dictionary copy (batched 2 B fetches)
                            uint64_t lookups_bytes = 2ull * part->codes.size();
                            done = std::max(
                                done, model.charge_access(home, lookups_bytes, v,
                                                          false, round_start));
                            break;
                        }
                    }
                }
            }
            app_latency_sum += done - round_start;
            app_publish_time = done;
        } else {  // MI-SW: the whole pipeline runs on the txn host
            double round_start = txn_clock;
            uint64_t work_items =
                ps.merge_comparisons + ps.chain_nodes + as.random_accesses;
            uint64_t bytes = ps.shipped_bytes + as.bytes_read + as.bytes_written;
            if (!config.zero_cost_propagation) {
                double c = host_compute(txn_clock, static_cast<double>(work_items) *
                                                       topo.host_ns_per_tuple);
                double m = model.charge_host_mem(bytes, txn_clock);
                txn_clock = std::max(c, m);
                app_latency_sum += txn_clock - round_start;
            }
            app_publish_time = txn_clock;
        }
        ++rounds;
        return true;
    };

    auto propagate_if_due = [&]() {
        if (!dual_replica) return;
        while (txn.pending_update_count() >= topo.final_log_capacity)
            if (!propagation_round()) break;
    };

    // ---- analytical query ----
    auto exec_anl = [&](uint32_t th, const PlanNode& plan) {
        double issue = std::max(anl_clock[th], txn_clock);
        anl_span_start = std::min(anl_span_start, issue);
        switch (config.system) {
            case SystemKind::Polynesia: {
                // reads the latest published snapshot; never waits for an
                // in-flight application round
                double arrival = issue;
                auto cols = plan.scanned_columns();
                // materialize-on-dirty snapshot copies, charged to the copy
                // unit; per-partition copies overlap across vault ports
                std::vector<ColumnId> was_dirty;
                for (ColumnId c : cols)
                    if (snaps->chain(c).dirty) was_dirty.push_back(c);
                uint64_t qid = next_query_id++;
                auto versions = snaps->acquire_snapshot(qid, cols);
                if (!config.zero_cost_snapshots) {
                    double copy_from = arrival;
                    for (ColumnId c : was_dirty) {
                        const auto& cp = replica->placement(c);
                        for (uint32_t p = 0; p < cp.parts.size(); ++p) {
                            auto part = replica->partition(c, p);
                            arrival = std::max(
                                arrival, model.charge_copy(cp.parts[p].vault,
                                                           cp.parts[p].vault,
                                                           part->payload_bytes(),
                                                           copy_from));
                        }
                    }
                }
                Snapshot snap;
                for (size_t i = 0; i < cols.size(); ++i) snap[cols[i]] = versions[i];
                auto graph = decompose(plan, *replica, snap, topo);
                auto trace = schedule(graph, config.scheduler, model, arrival);
                (void)execute_tasks(graph, snap);
                snaps->release_snapshot(qid);
                anl_clock[th] = arrival + trace.makespan;
                break;
            }
            case SystemKind::SiSs: {
                if (si_dirty) {
                    ++si_snapshots;
                    si_dirty = false;
                    if (!config.zero_cost_snapshots) {
                        uint64_t bytes = replica_bytes(txn.tables());
                        // the memcpy rides the same channel as the txn engine
                        issue = model.charge_host_mem(bytes, issue);
                    }
                }
                uint64_t rows = scanned_rows(plan, txn.tables());
                double m = model.charge_host_mem(rows * sizeof(Value), issue);
                anl_clock[th] =
                    std::max(m, issue) + static_cast<double>(rows) *
                                             topo.host_ns_per_tuple;
                break;
            }
            case SystemKind::SiMvcc: {
                // read as of the previous slot's watermark: versions written
                // by transactions running alongside the query pile up on top
                // of its visible snapshot and must be traversed past
                uint64_t ts = mvcc_issue_ts;
                uint64_t nodes = 0, reads = 0;
                for (ColumnId col : plan.scanned_columns()) {
                    const auto& t = txn.table(col.table_id);
                    for (uint64_t r = 0; r < t.row_count(); ++r) {
                        // rows born after the watermark are simply invisible
                        auto res = mvcc->try_read({col.table_id, r, col.column_id}, ts);
                        if (res) nodes += res->nodes_traversed;
                        ++reads;
                    }
                }
                mvcc_reads += reads;
                mvcc_nodes += nodes;
                uint64_t charged = config.unit_cost_chains ? reads : nodes;
                double m = model.charge_host_mem(charged * kVersionNodeBytes, issue);
                anl_clock[th] =
                    std::max(m, issue) + static_cast<double>(reads) *
                                             topo.host_ns_per_tuple;
                break;
            }
            case SystemKind::MiSw: {
                // separate instance: private compute and memory
                uint64_t rows = scanned_rows(plan, txn.tables());
                anl_clock[th] = std::max(issue, app_publish_time) +
                                static_cast<double>(rows) * topo.host_ns_per_tuple +
                                static_cast<double>(rows * sizeof(Value)) /
                                    topo.host_mem_bw;
                break;
            }
        }
        anl_span_end = std::max(anl_span_end, anl_clock[th]);
        anl_busy += anl_clock[th] - issue;
    };

    // ---- interleaved driver loop ----
    uint32_t txn_rounds = spec.txn_queries_per_thread;
    uint32_t anl_issued = 0;
    auto issue_anl_slot = [&]() {
        for (uint32_t th = 0; th < spec.anl_threads; ++th)
            if (anl_issued < plans.by_thread[th].size())
                exec_anl(th, *plans.by_thread[th][anl_issued]);
        ++anl_issued;
        mvcc_issue_ts = txn.last_commit();
    };

    for (uint32_t r = 0; r < txn_rounds; ++r) {
        for (uint32_t th = 0; th < spec.txn_threads; ++th)
            exec_txn(th, w.txn_queries[th][r]);
        propagate_if_due();
        uint32_t want = static_cast<uint32_t>(
            (static_cast<uint64_t>(r + 1) * spec.anl_queries_per_thread) /
            std::max<uint32_t>(1, txn_rounds));
        while (anl_issued < want) issue_anl_slot();
    }
    while (anl_issued < spec.anl_queries_per_thread) issue_anl_slot();

    // flush every pending update so the final pass sees full freshness
    if (dual_replica)
        while (txn.pending_update_count() > 0)
            if (!propagation_round()) break;

    // ---- final answers at equivalent freshness ----
    RunOutput out;
    out.answers.resize(spec.anl_threads);
    for (uint32_t th = 0; th < spec.anl_threads; ++th) {
        for (const auto& plan : plans.by_thread[th]) {
            std::vector<Value> ans;
            if (dual_replica) {
                Snapshot snap;
                for (ColumnId c : plan->scanned_columns()) {
                    auto v = std::make_shared<ColumnVersion>();
                    v->parts = replica->column_parts(c);
                    snap[c] = v;
                }
                ans = evaluate_plan(*plan, snap);
            } else {
                ans = evaluate_plan_nsm(*plan, txn.tables());
            }
            out.answers[th].push_back(std::move(ans));
        }
    }
    out.final_nsm = txn.tables();

    // ---- metrics ----
    MetricsReport& rep = out.report;
    rep.system = system_name(config.system);
    rep.placement = placement_name(config.placement);
    rep.scheduler =
        config.scheduler == SchedulerMode::Basic ? "basic" : "optimized";
    rep.seed = spec.seed;
    rep.txn_queries = w.total_txn_queries();
    rep.anl_queries = w.total_anl_queries();
    rep.txn_elapsed_ns = txn_clock;
    rep.anl_elapsed_ns =
        anl_span_end > anl_span_start ? anl_span_end - anl_span_start : 0;
    rep.txn_throughput_qps =
        txn_clock > 0 ? static_cast<double>(rep.txn_queries) / txn_clock * 1e9 : 0;
    rep.anl_busy_ns = anl_busy;
    // service-rate throughput: interleave gaps with the txn driver don't count
    rep.anl_throughput_qps =
        rep.anl_busy_ns > 0
            ? static_cast<double>(rep.anl_queries) / rep.anl_busy_ns * 1e9
            : 0;
    rep.update_app_latency_ns =
        rounds > 0 ? app_latency_sum / static_cast<double>(rounds) : 0;
    rep.propagation_rounds = rounds;
    rep.snapshot_count =
        config.system == SystemKind::SiSs
            ? si_snapshots
            : (snaps ? snaps->stats().snapshots_created : 0);
    rep.mean_mvcc_chain_length =
        mvcc_reads > 0
            ? static_cast<double>(mvcc_nodes) / static_cast<double>(mvcc_reads)
            : 0;
    for (uint32_t v = 0; v < topo.n_vaults; ++v)
        rep.onchip_bytes += model.clock.bytes_served(v);
    rep.offchip_bytes = model.clock.bytes_served(model.offchip());
    rep.host_bytes = model.clock.bytes_served(model.host_mem());
    rep.makespan_ns = std::max(txn_clock, anl_span_end);
    return out;
}

// ---- CSV ----

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string metrics_csv_header() {
    return "system,placement,scheduler,seed,txn_queries,anl_queries,"
           "txn_throughput_qps,anl_throughput_qps,update_app_latency_ns,"
           "propagation_rounds,snapshot_count,mean_mvcc_chain_length,"
           "onchip_bytes,offchip_bytes,host_bytes,makespan_ns,"
           "txn_elapsed_ns,anl_elapsed_ns,anl_busy_ns";
}

std::string metrics_csv_row(const MetricsReport& r) {
    std::ostringstream os;
    os << r.system << ',' << r.placement << ',' << r.scheduler << ',' << r.seed
       << ',' << r.txn_queries << ',' << r.anl_queries << ','
       << fmt_double(r.txn_throughput_qps) << ','
       << fmt_double(r.anl_throughput_qps) << ','
       << fmt_double(r.update_app_latency_ns) << ',' << r.propagation_rounds
       << ',' << r.snapshot_count << ',' << fmt_double(r.mean_mvcc_chain_length)
       << ',' << r.onchip_bytes << ',' << r.offchip_bytes << ',' << r.host_bytes
       << ',' << fmt_double(r.makespan_ns) << ',' << fmt_double(r.txn_elapsed_ns)
       << ',' << fmt_double(r.anl_elapsed_ns) << ',' << fmt_double(r.anl_busy_ns);
    return os.str();
}

void emit_csv(const MetricsReport& r, const std::string& path, bool append) {
    bool write_header = true;
    if (append) {
        std::ifstream probe(path);
        write_header = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) raise(Errc::IoFailure, "cannot open " + path + " for writing");
    if (write_header) out << metrics_csv_header() << "\n";
    out << metrics_csv_row(r) << "\n";
    if (!out) raise(Errc::IoFailure, "write to " + path + " failed");
}

// ---- trend sweeps ----

namespace {

// Isolation workloads for the placement trend. Throughput: read-only txn
// side, single-column scan queries (placement changes only where data and
// dictionaries live). Latency: update-only txn side driving propagation
// rounds, no analytical queries. Every column stays in the <=32-distinct
// regime so Hybrid replicates its dictionaries.
NsmTable placement_table(uint64_t seed, uint32_t rows) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 17);
    NsmTable t;
    t.table_id = 0;
    t.n_columns = 8;
    for (uint32_t r = 0; r < rows; ++r) {
        std::vector<Value> row(8);
        for (uint16_t c = 0; c < 8; ++c)
            row[c] = static_cast<Value>(c) * 1000 +
                     static_cast<Value>(rng.below(32)) * 7;
        t.append_row(std::move(row));
    }
    return t;
}

Workload placement_throughput_workload(uint64_t seed) {
    Workload w;
    w.spec.n_tables = 1;
    w.spec.rows_per_table = 512000;
    w.spec.cols_per_table = 8;
    w.spec.txn_threads = 2;
    w.spec.txn_queries_per_thread = 8;
    w.spec.update_ratio = 0.0;
    w.spec.anl_threads = 1;
    w.spec.anl_queries_per_thread = 8;
    w.spec.seed = seed;
    w.tables = {placement_table(seed, w.spec.rows_per_table)};

    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 29);
    w.txn_queries.assign(w.spec.txn_threads, {});
    for (uint32_t r = 0; r < w.spec.txn_queries_per_thread; ++r) {
        for (uint32_t th = 0; th < w.spec.txn_threads; ++th) {
            std::vector<TxnOp> q;
            for (uint32_t i = 0; i < 4; ++i) {
                TxnOp op;
                op.action = TxnOp::Action::Read;
                op.key = {0, rng.below(w.spec.rows_per_table),
                          static_cast<uint16_t>(rng.below(8))};
                q.push_back(op);
            }
            w.txn_queries[th].push_back(std::move(q));
        }
    }
    // one sequential full scan per column: per-query makespan isolates the
    // placement's port serialization without cross-query interference
    w.anl_queries.assign(w.spec.anl_threads, {});
    for (uint32_t i = 0; i < w.spec.anl_queries_per_thread; ++i)
        w.anl_queries[0].push_back("AGG sum (SCAN T0.C" + std::to_string(i % 8) +
                                   ")");
    return w;
}

Workload placement_latency_workload(uint64_t seed) {
    Workload w;
    w.spec.n_tables = 1;
    w.spec.rows_per_table = 16000;
    w.spec.cols_per_table = 8;
    w.spec.txn_threads = 2;
    w.spec.txn_queries_per_thread = 400;
    w.spec.update_ratio = 1.0;
    w.spec.anl_threads = 0;
    w.spec.anl_queries_per_thread = 0;
    w.spec.seed = seed;
    w.tables = {placement_table(seed, w.spec.rows_per_table)};

    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 43);
    w.txn_queries.assign(w.spec.txn_threads, {});
    for (uint32_t r = 0; r < w.spec.txn_queries_per_thread; ++r) {
        for (uint32_t th = 0; th < w.spec.txn_threads; ++th) {
            std::vector<TxnOp> q;
            for (uint32_t i = 0; i < 4; ++i) {
                TxnOp op;
                op.action = TxnOp::Action::Modify;
                uint16_t c = static_cast<uint16_t>(rng.below(8));
                op.key = {0, rng.below(w.spec.rows_per_table), c};
                op.value = static_cast<Value>(c) * 1000 +
                           static_cast<Value>(rng.below(24)) * 7;
                q.push_back(op);
            }
            w.txn_queries[th].push_back(std::move(q));
        }
    }
    return w;
}

}  // namespace

std::vector<PlacementTrendPoint> sweep_placement(const VaultTopology& topo,
                                                 uint64_t seed) {
    Workload tp = placement_throughput_workload(seed);
    Workload lat = placement_latency_workload(seed);
    std::vector<PlacementTrendPoint> out;
    for (Placement p :
         {Placement::Local, Placement::Distributed, Placement::Hybrid}) {
        SystemConfig cfg;
        cfg.system = SystemKind::Polynesia;
        cfg.placement = p;
        cfg.topo = topo;
        cfg.scheduler = SchedulerMode::Optimized;
        double latency = run(cfg, lat).report.update_app_latency_ns;
        for (SchedulerMode m : {SchedulerMode::Basic, SchedulerMode::Optimized}) {
            cfg.scheduler = m;
            auto res = run(cfg, tp);
            out.push_back({p, m, res.report.anl_throughput_qps, latency});
        }
    }
    return out;
}

std::vector<SnapshotTrendPoint> sweep_snapshot_cost(const VaultTopology& topo,
                                                    uint64_t seed) {
    std::vector<SnapshotTrendPoint> out;
    for (uint32_t anl : {8u, 16u, 32u}) {
        WorkloadSpec s;
        s.txn_threads = 4;
        s.txn_queries_per_thread = 400;
        s.update_ratio = 0.5;
        s.anl_threads = 1;
        s.anl_queries_per_thread = anl;
        s.n_tables = 2;
        s.rows_per_table = 4000;
        s.cols_per_table = 4;
        s.seed = seed;
        Workload w = generate_workload(s);
        SystemConfig cfg;
        cfg.system = SystemKind::SiSs;
        cfg.topo = topo;
        auto costed = run(cfg, w);
        cfg.zero_cost_snapshots = true;
        auto free_run = run(cfg, w);
        out.push_back({anl, costed.report.txn_throughput_qps /
                                free_run.report.txn_throughput_qps});
    }
    return out;
}

std::vector<MvccTrendPoint> sweep_mvcc(const VaultTopology& topo, uint64_t seed) {
    std::vector<MvccTrendPoint> out;
    for (uint32_t step = 0; step < 3; ++step) {
        WorkloadSpec s;
        s.txn_threads = 2;
        s.txn_queries_per_thread = 125u << (2 * step);  // 4x per step
        s.update_ratio = 0.8;
        s.anl_threads = 1;
        s.anl_queries_per_thread = 8;
        s.n_tables = 1;
        s.rows_per_table = 500;
        s.cols_per_table = 2;
        s.seed = seed;
        Workload w = generate_workload(s);
        SystemConfig cfg;
        cfg.system = SystemKind::SiMvcc;
        cfg.topo = topo;
        auto costed = run(cfg, w);
        cfg.unit_cost_chains = true;
        auto unit = run(cfg, w);
        out.push_back({w.expected_log_entries(),
                       costed.report.anl_throughput_qps /
                           unit.report.anl_throughput_qps,
                       costed.report.mean_mvcc_chain_length});
    }
    return out;
}

std::vector<PropagationTrendPoint> sweep_propagation(const VaultTopology& topo,
                                                     uint64_t seed) {
    std::vector<PropagationTrendPoint> out;
    for (double ratio : {0.5, 0.8, 1.0}) {
        WorkloadSpec s;
        s.txn_threads = 4;
        s.txn_queries_per_thread = 400;
        s.update_ratio = ratio;
        s.anl_threads = 2;
        s.anl_queries_per_thread = 4;
        s.n_tables = 2;
        s.rows_per_table = 4000;
        s.cols_per_table = 4;
        s.seed = seed;
        Workload w = generate_workload(s);
        PropagationTrendPoint pt;
        pt.update_ratio = ratio;
        for (SystemKind sys : {SystemKind::MiSw, SystemKind::Polynesia}) {
            SystemConfig cfg;
            cfg.system = sys;
            cfg.topo = topo;
            auto costed = run(cfg, w);
            cfg.zero_cost_propagation = true;
            auto free_run = run(cfg, w);
            double norm = costed.report.txn_throughput_qps /
                          free_run.report.txn_throughput_qps;
            if (sys == SystemKind::MiSw)
                pt.mi_sw_normalized_txn_throughput = norm;
            else
                pt.polynesia_normalized_txn_throughput = norm;
        }
        out.push_back(pt);
    }
    return out;
}

std::string plot_data_csv(const std::string& figure, const VaultTopology& topo,
                          uint64_t seed) {
    std::ostringstream os;
    if (figure == "placement") {
        os << "placement,scheduler,anl_throughput_qps,update_app_latency_ns\n";
        for (const auto& p : sweep_placement(topo, seed))
            os << placement_name(p.placement) << ','
               << (p.scheduler == SchedulerMode::Basic ? "basic" : "optimized")
               << ',' << fmt_double(p.anl_throughput_qps) << ','
               << fmt_double(p.update_app_latency_ns) << "\n";
    } else if (figure == "snapshot-cost") {
        os << "anl_queries,normalized_txn_throughput\n";
        for (const auto& p : sweep_snapshot_cost(topo, seed))
            os << p.anl_queries << ',' << fmt_double(p.normalized_txn_throughput)
               << "\n";
    } else if (figure == "mvcc") {
        os << "txn_updates,normalized_anl_throughput,mean_chain_length\n";
        for (const auto& p : sweep_mvcc(topo, seed))
            os << p.txn_updates << ',' << fmt_double(p.normalized_anl_throughput)
               << ',' << fmt_double(p.mean_chain_length) << "\n";
    } else if (figure == "propagation") {
        os << "update_ratio,mi_sw_normalized,polynesia_normalized\n";
        for (const auto& p : sweep_propagation(topo, seed))
            os << fmt_double(p.update_ratio) << ','
               << fmt_double(p.mi_sw_normalized_txn_throughput) << ','
               << fmt_double(p.polynesia_normalized_txn_throughput) << "\n";
    } else {
        raise(Errc::InvalidSpec,
              "unknown figure (expected placement, snapshot-cost, mvcc, "
              "propagation): " + figure);
    }
    return os.str();
}

}  // namespace htap
