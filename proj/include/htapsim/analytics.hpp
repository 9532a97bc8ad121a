#pragma once

#include <memory>
#include <string>

#include "htapsim/replica.hpp"

namespace htap {

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class AggFn { Sum, Count, Min, Max };

bool cmp_eval(CmpOp op, Value lhs, Value rhs);

// Volcano-style operator tree. Leaves are scans; data flows leaf -> root.
// Text form, one node per parenthesized group:
//   SCAN T<t>.C<c>
//   FILTER col=T<t>.C<c> {lt|le|gt|ge|eq|ne} <int> (<child>)
//   AGG {sum|count|min|max} (<child>)
//   JOIN T<t>.C<c> T<t>.C<c> (<left>) (<right>)
//   SELECT (<child>)
struct PlanNode {
    enum class Kind { Scan, Filter, Agg, Join, Select };
    Kind kind = Kind::Scan;
    ColumnId column;        // Scan target / Filter predicate / Join left key
    ColumnId right_column;  // Join right key
    CmpOp cmp = CmpOp::Lt;
    Value literal = 0;
    AggFn agg = AggFn::Sum;
    std::vector<std::unique_ptr<PlanNode>> children;

    std::vector<ColumnId> scanned_columns() const;
};

std::unique_ptr<PlanNode> parse_plan(const std::string& text);
std::string print_plan(const PlanNode& plan);

// snapshot the plan runs against: one ColumnVersion per scanned column
using Snapshot = std::map<ColumnId, std::shared_ptr<const ColumnVersion>>;

// Whole-plan reference evaluation (the answer oracle for the task engine).
// Non-aggregate roots return set semantics: output sorted ascending.
std::vector<Value> evaluate_plan(const PlanNode& plan, const Snapshot& snap);

// ---- task decomposition ----

struct Task {
    enum class Kind { Leaf, Build, Probe, Combine };
    uint32_t id = 0;
    Kind kind = Kind::Leaf;
    const PlanNode* node = nullptr;  // operator this task instantiates
    ColumnId col;
    uint32_t partition = 0;
    uint32_t seg_begin = 0, seg_end = 0;  // rows within the partition
    uint32_t data_vault = 0;
    uint32_t home_group = 0;
    uint64_t data_bytes = 0;
    uint64_t dict_bytes = 0;
    std::vector<uint32_t> dict_vaults;  // candidate dictionary locations
    std::vector<uint32_t> deps;
};

struct TaskGraph {
    std::vector<Task> tasks;
    const PlanNode* root = nullptr;
};

// One task per (operator, <=segment_rows slice); tasks homed where their
// segment lives; reduction/build-probe edges follow the operator tree.
TaskGraph decompose(const PlanNode& plan, const AnalyticalReplica& replica,
                    const Snapshot& snap, const VaultTopology& topo);

// ---- scheduling ----

enum class SchedulerMode { Basic, Optimized };
SchedulerMode scheduler_from_name(const std::string& name);

struct TraceEntry {
    uint32_t task = 0;
    uint32_t thread = 0;
    bool stolen = false;
    double start = 0;
    double end = 0;
};

struct ExecutionTrace {
    std::vector<TraceEntry> entries;
    double makespan = 0;  // relative to arrival
    uint64_t tasks_stolen = 0;
};

// Virtual-time simulation of the PIM threads working the task DAG.
// Basic: static per-group queues, no stealing, one thread per group reserved
// for the runtime monitor. Optimized: pull from the group queue, steal
// within the group's queue first, then from remote groups (back of queue,
// round-robin victims).
ExecutionTrace schedule(const TaskGraph& graph, SchedulerMode mode,
                        VaultModel& model, double arrival);

// Functional execution of the decomposed task DAG against the snapshot;
// independent of scheduling order by construction.
std::vector<Value> execute_tasks(const TaskGraph& graph, const Snapshot& snap);

}  // namespace htap
