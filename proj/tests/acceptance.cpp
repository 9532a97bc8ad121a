// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each check builds its own oracle rather than trusting the code
// under test.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "htapsim/application.hpp"
#include "htapsim/harness.hpp"
#include "htapsim/propagation.hpp"

using namespace htap;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    if (!pass) ++failures;
    std::fflush(stdout);
}

std::vector<std::optional<Value>> decoded(const EncodedColumn& col) {
    std::vector<std::optional<Value>> out;
    out.reserve(col.codes.size());
    for (size_t r = 0; r < col.codes.size(); ++r) {
        if (col.tombstoned(r)) out.push_back(std::nullopt);
        else out.push_back(col.decode_at(r));
    }
    return out;
}

// ---- 1: application oracle equivalence ----

void criterion1() {
    Rng rng(101);
    size_t checked = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        size_t n = 1 + rng.below(10000);
        uint64_t domain = 1 + rng.below(512);
        EncodedColumn col;
        std::vector<Value> vals;
        vals.reserve(n);
        for (size_t i = 0; i < n; ++i)
            vals.push_back(static_cast<Value>(rng.below(domain)));
        col.dict = std::make_shared<Dictionary>(Dictionary::from_values(vals));
        for (Value v : vals) col.codes.push_back(col.dict->encode(v));

        size_t m = rng.below(1025);
        std::vector<ColumnBufferUpdate> ups;
        ups.reserve(m);
        for (size_t i = 0; i < m; ++i) {
            ColumnBufferUpdate u;
            u.offset = static_cast<uint32_t>(rng.below(n));
            u.kind = rng.below(8) == 0 ? UpdateKind::Delete : UpdateKind::Modify;
            u.value = static_cast<Value>(rng.below(2 * domain));
            u.commit = static_cast<CommitId>(i + 1);
            u.row_id = u.offset;
            ups.push_back(u);
        }
        auto naive = apply_naive(col, ups);
        auto opt = apply_optimized(col, ups);
        if (decoded(naive) != decoded(opt)) {
            report(1, false,
                   "decode mismatch at instance " + std::to_string(iter));
            return;
        }
        ++checked;
    }
    report(1, true,
           std::to_string(checked) +
               " randomized instances decode-identical (naive vs optimized)");
}

// ---- 2: propagation round trip ----

void criterion2() {
    Rng rng(202);
    for (int iter = 0; iter < 500; ++iter) {
        size_t n_logs = 1 + rng.below(12);
        std::vector<ThreadUpdateLog> logs(n_logs);
        CommitId c = 1;
        size_t total = rng.below(600);
        std::vector<UpdateLogEntry> all;
        for (size_t i = 0; i < total; ++i) {
            UpdateLogEntry e;
            e.commit = c++;
            e.kind = UpdateKind::Modify;
            e.data = static_cast<Value>(rng.below(1000));
            e.key = {0, rng.below(64), static_cast<uint16_t>(rng.below(4))};
            logs[rng.below(n_logs)].entries.push_back(e);
            all.push_back(e);
        }
        auto fl = merge_logs(logs, SIZE_MAX, nullptr);

        std::sort(all.begin(), all.end(),
                  [](const auto& a, const auto& b) { return a.commit < b.commit; });
        if (fl.entries.size() != all.size()) {
            report(2, false, "merge dropped entries at iteration " +
                                 std::to_string(iter));
            return;
        }
        for (size_t i = 0; i < all.size(); ++i)
            if (fl.entries[i].commit != all[i].commit ||
                !(fl.entries[i].key == all[i].key)) {
                report(2, false, "merge order differs from sort oracle");
                return;
            }

        std::vector<HashIndex> indexes;
        indexes.emplace_back(index_bucket_count(64));
        for (uint64_t r = 0; r < 64; ++r)
            for (uint16_t col = 0; col < 4; ++col)
                indexes[0].insert(col, r,
                                  {0, col, static_cast<uint32_t>(r % 4),
                                   static_cast<uint32_t>(r / 4)});
        auto buffers = ship(fl, indexes, nullptr, nullptr);
        std::vector<CommitId> flat;
        for (const auto& b : buffers)
            for (size_t i = 0; i < b.updates.size(); ++i) {
                if (i > 0 && b.updates[i - 1].commit > b.updates[i].commit) {
                    report(2, false, "column buffer not commit-ordered");
                    return;
                }
                flat.push_back(b.updates[i].commit);
            }
        std::sort(flat.begin(), flat.end());
        std::vector<CommitId> want;
        for (const auto& e : fl.entries) want.push_back(e.commit);
        if (flat != want) {
            report(2, false, "ship lost or duplicated entries");
            return;
        }
    }
    report(2, true, "500 merge + ship round trips equal the sort oracle");
}

// ---- 3: freshness after every propagation round ----

void criterion3() {
    WorkloadSpec spec;
    spec.txn_threads = 4;
    spec.txn_queries_per_thread = 7000;  // ~4 updates/query -> >100k updates
    spec.update_ratio = 1.0;
    spec.anl_threads = 1;
    spec.anl_queries_per_thread = 1;
    spec.n_tables = 2;
    spec.rows_per_table = 3000;
    spec.cols_per_table = 4;
    spec.seed = 303;
    auto w = generate_workload(spec);

    VaultTopology topo;
    TxnIsland txn(w.tables, spec.txn_threads);
    std::vector<ColumnShape> shapes;
    for (const auto& t : w.tables)
        for (uint16_t c = 0; c < t.n_columns; ++c)
            shapes.push_back({{t.table_id, c}, t.row_count(), spec.max_distinct});
    AnalyticalReplica replica(w.tables,
                              place(shapes, Placement::Hybrid, topo), topo);

    // shadow NSM replayed exactly to each round's shipping watermark
    std::vector<NsmTable> shadow = w.tables;
    auto apply_to_shadow = [&](const UpdateLogEntry& e) {
        NsmTable& t = shadow[e.key.table_id];
        switch (e.kind) {
            case UpdateKind::Insert:
                while (t.row_count() <= e.key.row_id)
                    t.append_row(std::vector<Value>(t.n_columns, 0));
                t.rows[e.key.row_id][e.key.column_id] = e.data;
                t.live[e.key.row_id] = true;
                break;
            case UpdateKind::Delete:
                t.live[e.key.row_id] = false;
                break;
            case UpdateKind::Modify:
                t.rows[e.key.row_id][e.key.column_id] = e.data;
                break;
        }
    };

    uint64_t rounds = 0, updates = 0;
    auto run_round = [&]() -> bool {
        FinalLog fl = merge_logs(txn.logs(), topo.final_log_capacity, nullptr);
        if (fl.entries.empty()) return true;
        updates += fl.entries.size();
        auto buffers = ship(
            fl, replica.indexes(),
            [&](const UpdateLogEntry& e) { return replica.place_new_row(e); },
            nullptr);
        for (const auto& b : buffers) {
            ColumnId col{b.table_id, b.column_id};
            auto next = apply_optimized(*replica.partition(col, b.partition),
                                        b.updates);
            replica.publish(col, b.partition,
                            std::make_shared<EncodedColumn>(std::move(next)));
        }
        for (const auto& e : fl.entries) apply_to_shadow(e);
        ++rounds;

        // cell-exact comparison against the watermark projection
        for (const auto& t : shadow)
            for (uint64_t r = 0; r < t.row_count(); ++r)
                for (uint16_t c = 0; c < t.n_columns; ++c) {
                    auto got = replica.cell(t.table_id, r, c);
                    if (!t.live[r]) {
                        if (got.has_value()) return false;
                    } else if (!got || *got != t.rows[r][c]) {
                        return false;
                    }
                }
        return true;
    };

    for (uint32_t r = 0; r < spec.txn_queries_per_thread; ++r) {
        for (uint32_t th = 0; th < spec.txn_threads; ++th)
            txn.execute(th, w.txn_queries[th][r]);
        while (txn.pending_update_count() >= topo.final_log_capacity)
            if (!run_round()) {
                report(3, false, "replica diverged from the NSM watermark "
                                 "projection at round " + std::to_string(rounds));
                return;
            }
    }
    while (txn.pending_update_count() > 0)
        if (!run_round()) {
            report(3, false, "replica diverged in the flush rounds");
            return;
        }
    bool enough = updates >= 100000;
    report(3, enough,
           std::to_string(updates) + " updates over " + std::to_string(rounds) +
               " rounds, replica cell-exact at every watermark");
}

// ---- 4: snapshot isolation under interleaved updates ----

void criterion4() {
    Rng rng(404);
    for (int iter = 0; iter < 200; ++iter) {
        std::vector<Value> current;
        for (size_t i = 0, n = 10 + rng.below(200); i < n; ++i)
            current.push_back(static_cast<Value>(rng.below(64)));

        auto make_part = [&]() {
            auto col = std::make_shared<EncodedColumn>();
            col->dict =
                std::make_shared<Dictionary>(Dictionary::from_values(current));
            for (Value v : current) col->codes.push_back(col->dict->encode(v));
            return std::vector<std::shared_ptr<const EncodedColumn>>{col};
        };
        SnapshotManager mgr([&](ColumnId) { return make_part(); });
        ColumnId col{0, 0};
        mgr.register_column(col);
        mgr.mark_dirty(col);

        auto versions = mgr.acquire_snapshot(1, {col});
        std::vector<Value> frozen;  // frozen-copy oracle taken at acquire
        for (const auto& p : versions[0]->parts)
            for (size_t r = 0; r < p->codes.size(); ++r)
                frozen.push_back(p->decode_at(r));

        // updates hit the main replica while the query "runs"
        for (int u = 0, k = 1 + static_cast<int>(rng.below(8)); u < k; ++u) {
            current[rng.below(current.size())] = static_cast<Value>(rng.below(64));
            mgr.mark_dirty(col);
            if (rng.below(2) == 0) {
                // a second query may snapshot the newer state concurrently
                auto other = mgr.acquire_snapshot(100 + u, {col});
                mgr.release_snapshot(100 + u);
            }
        }

        std::vector<Value> after;
        for (const auto& p : versions[0]->parts)
            for (size_t r = 0; r < p->codes.size(); ++r)
                after.push_back(p->decode_at(r));
        if (after != frozen) {
            report(4, false, "query observed concurrent updates");
            return;
        }
        mgr.release_snapshot(1);
        if (mgr.chain(col).versions.size() != 1) {
            report(4, false, "chain length " +
                                 std::to_string(mgr.chain(col).versions.size()) +
                                 " after release");
            return;
        }
    }
    report(4, true,
           "200 interleavings isolation-exact; chains collapse to the head");
}

// ---- 5: scheduler exactly-once + dependency safety on random DAGs ----

void criterion5() {
    Rng rng(505);
    VaultTopology topo;
    uint64_t stolen_total = 0;
    for (int iter = 0; iter < 500; ++iter) {
        TaskGraph g;
        size_t n = 1 + rng.below(60);
        for (size_t i = 0; i < n; ++i) {
            Task t;
            t.id = static_cast<uint32_t>(i);
            t.kind = Task::Kind::Leaf;
            t.home_group = static_cast<uint32_t>(rng.below(topo.n_groups()));
            t.data_vault = t.home_group * topo.group_size +
                           static_cast<uint32_t>(rng.below(topo.group_size));
            t.data_bytes = rng.below(4000);
            t.seg_begin = 0;
            t.seg_end = static_cast<uint32_t>(1 + rng.below(500));
            // forward edges only: acyclic by construction
            for (size_t d = 0; d < i; ++d)
                if (rng.below(10) == 0) t.deps.push_back(static_cast<uint32_t>(d));
            g.tasks.push_back(std::move(t));
        }
        for (SchedulerMode mode :
             {SchedulerMode::Basic, SchedulerMode::Optimized}) {
            VaultModel model(topo);
            auto trace = schedule(g, mode, model, 0.0);
            stolen_total += trace.tasks_stolen;
            std::map<uint32_t, std::pair<double, double>> times;
            for (const auto& e : trace.entries) {
                if (times.count(e.task)) {
                    report(5, false, "task executed twice");
                    return;
                }
                times[e.task] = {e.start, e.end};
            }
            if (times.size() != g.tasks.size()) {
                report(5, false, "task skipped (" +
                                     std::to_string(times.size()) + "/" +
                                     std::to_string(g.tasks.size()) + ")");
                return;
            }
            for (const auto& t : g.tasks)
                for (uint32_t d : t.deps)
                    if (times.at(d).second > times.at(t.id).first + 1e-9) {
                        report(5, false, "dependency violated in trace");
                        return;
                    }
        }
    }
    report(5, true, "500 random DAGs exactly-once and dependency-safe in "
                    "both modes (" + std::to_string(stolen_total) +
                        " steals observed)");
}

// ---- 6: placement trend, robust to latency perturbation ----

void criterion6() {
    std::ostringstream detail;
    for (double scale : {0.5, 1.0, 2.0}) {
        VaultTopology topo;
        topo.local_latency *= scale;
        topo.remote_hop_latency *= scale;
        topo.host_latency *= scale;
        auto points = sweep_placement(topo, 1);

        auto find = [&](Placement p, SchedulerMode m) -> const PlacementTrendPoint& {
            for (const auto& pt : points)
                if (pt.placement == p && pt.scheduler == m) return pt;
            raise(Errc::InvalidSpec, "missing sweep point");
        };
        const auto& local = find(Placement::Local, SchedulerMode::Optimized);
        const auto& dist = find(Placement::Distributed, SchedulerMode::Optimized);
        const auto& hyb = find(Placement::Hybrid, SchedulerMode::Optimized);

        double dist_vs_local = dist.anl_throughput_qps / local.anl_throughput_qps;
        double hyb_vs_dist = hyb.anl_throughput_qps / dist.anl_throughput_qps;
        double hyb_lat = hyb.update_app_latency_ns / local.update_app_latency_ns;
        double dist_lat = dist.update_app_latency_ns / local.update_app_latency_ns;

        bool ok = dist_vs_local >= 2.0 && hyb_vs_dist >= 0.85 &&
                  hyb_vs_dist <= 1.15 && hyb_lat <= 1.2 && dist_lat >= 1.3;
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "[x%.1f lat: dist/local=%.2f hyb/dist=%.3f "
                      "lat hyb=%.2fx dist=%.2fx] ",
                      scale, dist_vs_local, hyb_vs_dist, hyb_lat, dist_lat);
        detail << buf;
        if (!ok) {
            report(6, false, detail.str());
            return;
        }
    }
    report(6, true, detail.str());
}

// ---- 7: snapshotting cost trend ----

void criterion7() {
    VaultTopology topo;
    auto points = sweep_snapshot_cost(topo, 1);
    std::ostringstream detail;
    bool ok = points.size() == 3;
    for (size_t i = 0; i < points.size(); ++i) {
        detail << points[i].anl_queries << "->"
               << points[i].normalized_txn_throughput << " ";
        if (points[i].normalized_txn_throughput >= 1.0) ok = false;
        if (i > 0 && points[i].normalized_txn_throughput >=
                         points[i - 1].normalized_txn_throughput)
            ok = false;
    }
    report(7, ok, "si-ss normalized txn throughput: " + detail.str());
}

// ---- 8: MVCC chain trend ----

void criterion8() {
    VaultTopology topo;
    auto points = sweep_mvcc(topo, 1);
    std::ostringstream detail;
    bool ok = points.size() == 3;
    for (size_t i = 0; i < points.size(); ++i) {
        detail << points[i].txn_updates << "->"
               << points[i].normalized_anl_throughput << " (chain "
               << points[i].mean_chain_length << ") ";
        if (i > 0) {
            if (points[i].normalized_anl_throughput >
                points[i - 1].normalized_anl_throughput)
                ok = false;
            if (points[i].mean_chain_length <= points[i - 1].mean_chain_length)
                ok = false;
        }
    }
    report(8, ok, "si-mvcc normalized anl throughput: " + detail.str());
}

// ---- 9: update propagation trend ----

void criterion9() {
    VaultTopology topo;
    auto points = sweep_propagation(topo, 1);
    std::ostringstream detail;
    bool ok = points.size() == 3;
    for (size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        detail << p.update_ratio << "-> mi-sw "
               << p.mi_sw_normalized_txn_throughput << " vs "
               << p.polynesia_normalized_txn_throughput << " ";
        // Polynesia's loss must be strictly smaller at every point
        if (p.polynesia_normalized_txn_throughput <=
            p.mi_sw_normalized_txn_throughput)
            ok = false;
        if (i > 0 && p.mi_sw_normalized_txn_throughput >
                         points[i - 1].mi_sw_normalized_txn_throughput)
            ok = false;
    }
    report(9, ok, "normalized txn throughput by update ratio: " + detail.str());
}

// ---- 10: determinism ----

void criterion10() {
    WorkloadSpec spec;  // defaults
    spec.txn_queries_per_thread = 100;
    SystemConfig config;
    std::string rows[2];
    for (int i = 0; i < 2; ++i) {
        auto out = run(config, generate_workload(spec));
        rows[i] = metrics_csv_header() + "\n" + metrics_csv_row(out.report);
    }
    bool ok = rows[0] == rows[1] && !rows[0].empty();

    VaultTopology topo;
    ok = ok && plot_data_csv("mvcc", topo, 9) == plot_data_csv("mvcc", topo, 9);
    report(10, ok, ok ? "repeated runs byte-identical (metrics and plot data)"
                      : "reruns differ");
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
