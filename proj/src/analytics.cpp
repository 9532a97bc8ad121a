#include "htapsim/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace htap {

bool cmp_eval(CmpOp op, Value lhs, Value rhs) {
    switch (op) {
        case CmpOp::Lt: return lhs < rhs;
        case CmpOp::Le: return lhs <= rhs;
        case CmpOp::Gt: return lhs > rhs;
        case CmpOp::Ge: return lhs >= rhs;
        case CmpOp::Eq: return lhs == rhs;
        case CmpOp::Ne: return lhs != rhs;
    }
    return false;
}

std::vector<ColumnId> PlanNode::scanned_columns() const {
    std::vector<ColumnId> out;
    if (kind == Kind::Scan) out.push_back(column);
    for (const auto& c : children)
        for (ColumnId col : c->scanned_columns())
            if (std::find(out.begin(), out.end(), col) == out.end())
                out.push_back(col);
    return out;
}

// ---- plan text ----

namespace {

struct Tokenizer {
    std::vector<std::string> toks;
    size_t at = 0;

    explicit Tokenizer(const std::string& text) {
        std::string cur;
        for (char ch : text) {
            if (ch == '(' || ch == ')') {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
                toks.push_back(std::string(1, ch));
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!cur.empty()) toks.push_back(std::exchange(cur, {}));
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) toks.push_back(cur);
    }

    bool done() const { return at == toks.size(); }
    const std::string& peek() const {
        if (done()) raise(Errc::PlanParse, "unexpected end of plan");
        return toks[at];
    }
    std::string next() {
        auto t = peek();
        ++at;
        return t;
    }
    void expect(const std::string& t) {
        if (next() != t) raise(Errc::PlanParse, "expected '" + t + "' in plan");
    }
};

ColumnId parse_column_ref(const std::string& tok) {
    // T<t>.C<c>
    auto dot = tok.find('.');
    if (tok.size() < 4 || tok[0] != 'T' || dot == std::string::npos ||
        dot + 1 >= tok.size() || tok[dot + 1] != 'C')
        raise(Errc::PlanParse, "bad column ref: " + tok);
    try {
        uint16_t t = static_cast<uint16_t>(std::stoul(tok.substr(1, dot - 1)));
        uint16_t c = static_cast<uint16_t>(std::stoul(tok.substr(dot + 2)));
        return {t, c};
    } catch (const std::exception&) {
        raise(Errc::PlanParse, "bad column ref: " + tok);
    }
}

CmpOp parse_cmp(const std::string& tok) {
    if (tok == "lt") return CmpOp::Lt;
    if (tok == "le") return CmpOp::Le;
    if (tok == "gt") return CmpOp::Gt;
    if (tok == "ge") return CmpOp::Ge;
    if (tok == "eq") return CmpOp::Eq;
    if (tok == "ne") return CmpOp::Ne;
    raise(Errc::PlanParse, "bad comparison: " + tok);
}

const char* cmp_name(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "lt";
        case CmpOp::Le: return "le";
        case CmpOp::Gt: return "gt";
        case CmpOp::Ge: return "ge";
        case CmpOp::Eq: return "eq";
        case CmpOp::Ne: return "ne";
    }
    return "?";
}

AggFn parse_agg(const std::string& tok) {
    if (tok == "sum") return AggFn::Sum;
    if (tok == "count") return AggFn::Count;
    if (tok == "min") return AggFn::Min;
    if (tok == "max") return AggFn::Max;
    raise(Errc::PlanParse, "bad aggregate: " + tok);
}

const char* agg_name(AggFn f) {
    switch (f) {
        case AggFn::Sum: return "sum";
        case AggFn::Count: return "count";
        case AggFn::Min: return "min";
        case AggFn::Max: return "max";
    }
    return "?";
}

std::unique_ptr<PlanNode> parse_node(Tokenizer& tz) {
    auto node = std::make_unique<PlanNode>();
    std::string op = tz.next();
    auto child = [&] {
        tz.expect("(");
        auto c = parse_node(tz);
        tz.expect(")");
        return c;
    };
    if (op == "SCAN") {
        node->kind = PlanNode::Kind::Scan;
        node->column = parse_column_ref(tz.next());
    } else if (op == "FILTER") {
        node->kind = PlanNode::Kind::Filter;
        std::string colspec = tz.next();
        if (colspec.rfind("col=", 0) != 0)
            raise(Errc::PlanParse, "FILTER expects col=T<t>.C<c>");
        node->column = parse_column_ref(colspec.substr(4));
        node->cmp = parse_cmp(tz.next());
        try {
            node->literal = std::stoll(tz.next());
        } catch (const std::exception&) {
            raise(Errc::PlanParse, "bad filter literal");
        }
        node->children.push_back(child());
    } else if (op == "AGG") {
        node->kind = PlanNode::Kind::Agg;
        node->agg = parse_agg(tz.next());
        node->children.push_back(child());
    } else if (op == "JOIN") {
        node->kind = PlanNode::Kind::Join;
        node->column = parse_column_ref(tz.next());
        node->right_column = parse_column_ref(tz.next());
        node->children.push_back(child());
        node->children.push_back(child());
    } else if (op == "SELECT") {
        node->kind = PlanNode::Kind::Select;
        node->children.push_back(child());
    } else {
        raise(Errc::PlanParse, "unknown operator: " + op);
    }
    return node;
}

}  // namespace

std::unique_ptr<PlanNode> parse_plan(const std::string& text) {
    Tokenizer tz(text);
    auto plan = parse_node(tz);
    if (!tz.done()) raise(Errc::PlanParse, "trailing tokens after plan");
    return plan;
}

std::string print_plan(const PlanNode& n) {
    std::ostringstream os;
    auto ref = [](ColumnId c) {
        return "T" + std::to_string(c.table_id) + ".C" + std::to_string(c.column_id);
    };
    switch (n.kind) {
        case PlanNode::Kind::Scan:
            os << "SCAN " << ref(n.column);
            break;
        case PlanNode::Kind::Filter:
            os << "FILTER col=" << ref(n.column) << " " << cmp_name(n.cmp) << " "
               << n.literal << " (" << print_plan(*n.children[0]) << ")";
            break;
        case PlanNode::Kind::Agg:
            os << "AGG " << agg_name(n.agg) << " (" << print_plan(*n.children[0])
               << ")";
            break;
        case PlanNode::Kind::Join:
            os << "JOIN " << ref(n.column) << " " << ref(n.right_column) << " ("
               << print_plan(*n.children[0]) << ") (" << print_plan(*n.children[1])
               << ")";
            break;
        case PlanNode::Kind::Select:
            os << "SELECT (" << print_plan(*n.children[0]) << ")";
            break;
    }
    return os.str();
}

// ---- reference evaluation ----

namespace {

Value fold_agg(AggFn f, const std::vector<Value>& vals) {
    switch (f) {
        case AggFn::Count:
            return static_cast<Value>(vals.size());
        case AggFn::Sum: {
            Value s = 0;
            for (Value v : vals) s += v;
            return s;
        }
        case AggFn::Min:
            return vals.empty() ? 0 : *std::min_element(vals.begin(), vals.end());
        case AggFn::Max:
            return vals.empty() ? 0 : *std::max_element(vals.begin(), vals.end());
    }
    return 0;
}

std::vector<Value> eval_node(const PlanNode& n, const Snapshot& snap) {
    switch (n.kind) {
        case PlanNode::Kind::Scan: {
            auto it = snap.find(n.column);
            if (it == snap.end()) raise(Errc::UnknownColumn, "scan outside snapshot");
            std::vector<Value> out;
            for (const auto& part : it->second->parts)
                for (size_t i = 0; i < part->codes.size(); ++i)
                    if (!part->tombstoned(i)) out.push_back(part->decode_at(i));
            return out;
        }
        case PlanNode::Kind::Filter: {
            auto in = eval_node(*n.children[0], snap);
            std::vector<Value> out;
            for (Value v : in)
                if (cmp_eval(n.cmp, v, n.literal)) out.push_back(v);
            return out;
        }
        case PlanNode::Kind::Select:
            return eval_node(*n.children[0], snap);
        case PlanNode::Kind::Agg:
            return {fold_agg(n.agg, eval_node(*n.children[0], snap))};
        case PlanNode::Kind::Join: {
            auto left = eval_node(*n.children[0], snap);
            auto right = eval_node(*n.children[1], snap);
            std::unordered_map<Value, uint64_t> build;
            for (Value v : right) build[v]++;
            std::vector<Value> out;
            for (Value v : left) {
                auto it = build.find(v);
                if (it != build.end())
                    out.insert(out.end(), it->second, v);
            }
            return out;
        }
    }
    return {};
}

}  // namespace

std::vector<Value> evaluate_plan(const PlanNode& plan, const Snapshot& snap) {
    auto out = eval_node(plan, snap);
    if (plan.kind != PlanNode::Kind::Agg) std::sort(out.begin(), out.end());
    return out;
}

// ---- decomposition ----

namespace {

// A pipeline is a Scan with any stack of Filter/Select above it; it can run
// per segment without materialization.
struct Pipeline {
    const PlanNode* scan = nullptr;
    std::vector<const PlanNode*> filters;
};

bool extract_pipeline(const PlanNode& n, Pipeline& out) {
    const PlanNode* cur = &n;
    while (true) {
        switch (cur->kind) {
            case PlanNode::Kind::Scan:
                out.scan = cur;
                return true;
            case PlanNode::Kind::Filter:
                out.filters.push_back(cur);
                cur = cur->children[0].get();
                break;
            case PlanNode::Kind::Select:
                cur = cur->children[0].get();
                break;
            default:
                return false;
        }
    }
}

// Evaluate a pipeline over one partition slice. Range predicates run on
// codes (the dictionary is order-preserving); equality too.
std::vector<Value> run_pipeline(const Pipeline& pl, const EncodedColumn& part,
                                uint32_t begin, uint32_t end) {
    struct CodePred {
        CmpOp op;
        uint32_t bound;
        bool pass_all = false, pass_none = false;
    };
    std::vector<CodePred> preds;
    for (const PlanNode* f : pl.filters) {
        // translate the value predicate into a code predicate
        const auto& vals = part.dict->values();
        auto lb = std::lower_bound(vals.begin(), vals.end(), f->literal);
        uint32_t rank = static_cast<uint32_t>(lb - vals.begin());
        bool present = lb != vals.end() && *lb == f->literal;
        CodePred p{f->cmp, rank};
        switch (f->cmp) {
            case CmpOp::Lt: p.op = CmpOp::Lt; p.bound = rank; break;
            case CmpOp::Ge: p.op = CmpOp::Ge; p.bound = rank; break;
            case CmpOp::Le: p.op = CmpOp::Lt; p.bound = rank + (present ? 1 : 0); break;
            case CmpOp::Gt: p.op = CmpOp::Ge; p.bound = rank + (present ? 1 : 0); break;
            case CmpOp::Eq:
                if (!present) p.pass_none = true;
                p.op = CmpOp::Eq;
                p.bound = rank;
                break;
            case CmpOp::Ne:
                if (!present) p.pass_all = true;
                p.op = CmpOp::Ne;
                p.bound = rank;
                break;
        }
        preds.push_back(p);
    }

    std::vector<Value> out;
    for (uint32_t i = begin; i < end && i < part.codes.size(); ++i) {
        uint32_t code = part.codes[i];
        if (code == kTombstone) continue;
        bool keep = true;
        for (const auto& p : preds) {
            if (p.pass_all) continue;
            if (p.pass_none || !cmp_eval(p.op, code, p.bound)) {
                keep = false;
                break;
            }
        }
        if (keep) out.push_back(part.dict->decode(code));
    }
    return out;
}

void add_pipeline_tasks(TaskGraph& g, const Pipeline& pl,
                        const AnalyticalReplica& replica, const Snapshot& snap,
                        const VaultTopology& topo, Task::Kind kind,
                        std::vector<uint32_t>& out_ids) {
    ColumnId col = pl.scan->column;
    auto sit = snap.find(col);
    if (sit == snap.end()) raise(Errc::UnknownColumn, "plan scans unsnapshotted column");
    const auto& cp = replica.placement(col);
    const auto& parts = sit->second->parts;
    // stripe-major emission: consecutive queue entries live in different
    // vaults, so threads draining either queue end spread across ports
    uint32_t max_stripes = 1;
    for (const auto& part : parts) {
        uint32_t n = static_cast<uint32_t>(part->codes.size());
        max_stripes = std::max(
            max_stripes, (n + topo.segment_rows - 1) / topo.segment_rows);
    }
    for (uint32_t s = 0; s < max_stripes; ++s) {
        for (uint32_t p = 0; p < parts.size(); ++p) {
            uint32_t vault = cp.parts[p % cp.parts.size()].vault;
            uint32_t n = static_cast<uint32_t>(parts[p]->codes.size());
            uint32_t lo = s * topo.segment_rows;
            if (lo >= n && !(lo == 0 && n == 0)) continue;
            uint32_t hi = std::min(n, lo + topo.segment_rows);
            Task t;
            t.id = static_cast<uint32_t>(g.tasks.size());
            t.kind = kind;
            t.node = pl.scan;
            t.col = col;
            t.partition = p;
            t.seg_begin = lo;
            t.seg_end = hi;
            t.data_vault = vault;
            t.home_group = topo.group_of(vault);
            t.data_bytes = parts[p]->dict->code_bytes(hi - lo);
            t.dict_bytes = parts[p]->dict->dict_bytes();
            t.dict_vaults = cp.dict_vaults;
            out_ids.push_back(t.id);
            g.tasks.push_back(std::move(t));
        }
    }
}

}  // namespace

TaskGraph decompose(const PlanNode& plan, const AnalyticalReplica& replica,
                    const Snapshot& snap, const VaultTopology& topo) {
    TaskGraph g;
    g.root = &plan;

    const PlanNode* top = &plan;
    const PlanNode* agg = nullptr;
    if (top->kind == PlanNode::Kind::Agg) {
        agg = top;
        top = top->children[0].get();
    }

    std::vector<uint32_t> feeder_ids;
    Pipeline pl;
    if (extract_pipeline(*top, pl)) {
        add_pipeline_tasks(g, pl, replica, snap, topo, Task::Kind::Leaf, feeder_ids);
    } else if (top->kind == PlanNode::Kind::Join) {
        Pipeline left, right;
        if (!extract_pipeline(*top->children[0], left) ||
            !extract_pipeline(*top->children[1], right))
            raise(Errc::PlanParse, "join inputs must be scan pipelines");
        std::vector<uint32_t> build_ids;
        add_pipeline_tasks(g, right, replica, snap, topo, Task::Kind::Build, build_ids);
        std::vector<uint32_t> probe_ids;
        add_pipeline_tasks(g, left, replica, snap, topo, Task::Kind::Probe, probe_ids);
        // build side completes before any probe begins
        for (uint32_t pid : probe_ids) g.tasks[pid].deps = build_ids;
        feeder_ids = probe_ids;
    } else {
        raise(Errc::PlanParse, "unsupported plan shape for decomposition");
    }

    Task combine;
    combine.id = static_cast<uint32_t>(g.tasks.size());
    combine.kind = Task::Kind::Combine;
    combine.node = agg ? agg : top;
    combine.deps = feeder_ids;
    // the combine runs where the first feeder lives
    if (!feeder_ids.empty()) {
        combine.data_vault = g.tasks[feeder_ids[0]].data_vault;
        combine.home_group = g.tasks[feeder_ids[0]].home_group;
    }
    g.tasks.push_back(std::move(combine));
    return g;
}

// ---- functional task execution ----

std::vector<Value> execute_tasks(const TaskGraph& graph, const Snapshot& snap) {
    std::vector<std::vector<Value>> partial(graph.tasks.size());
    std::vector<Value> build_values;

    auto pipeline_of = [](const Task& t, const PlanNode& root) {
        // rediscover the filter stack above this task's scan
        Pipeline pl;
        std::vector<const PlanNode*> stack{&root};
        while (!stack.empty()) {
            const PlanNode* n = stack.back();
            stack.pop_back();
            Pipeline cand;
            if (extract_pipeline(*n, cand) && cand.scan == t.node) return cand;
            for (const auto& c : n->children) stack.push_back(c.get());
        }
        return pl;
    };

    // two passes: builds first, then everything else (matches dep order)
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& t : graph.tasks) {
            bool is_build = t.kind == Task::Kind::Build;
            if ((pass == 0) != is_build) continue;
            switch (t.kind) {
                case Task::Kind::Build:
                case Task::Kind::Leaf: {
                    auto pl = pipeline_of(t, *graph.root);
                    auto part = snap.at(t.col)->parts.at(t.partition);
                    partial[t.id] = run_pipeline(pl, *part, t.seg_begin, t.seg_end);
                    if (is_build)
                        build_values.insert(build_values.end(),
                                            partial[t.id].begin(),
                                            partial[t.id].end());
                    break;
                }
                case Task::Kind::Probe:
                    break;  // handled after all builds, below
                case Task::Kind::Combine:
                    break;
            }
        }
    }

    std::unordered_map<Value, uint64_t> build;
    for (Value v : build_values) build[v]++;

    for (const auto& t : graph.tasks) {
        if (t.kind != Task::Kind::Probe) continue;
        auto pl = pipeline_of(t, *graph.root);
        auto part = snap.at(t.col)->parts.at(t.partition);
        auto left = run_pipeline(pl, *part, t.seg_begin, t.seg_end);
        std::vector<Value> out;
        for (Value v : left) {
            auto it = build.find(v);
            if (it != build.end()) out.insert(out.end(), it->second, v);
        }
        partial[t.id] = std::move(out);
    }

    // combine
    const Task& combine = graph.tasks.back();
    std::vector<Value> all;
    for (uint32_t d : combine.deps)
        all.insert(all.end(), partial[d].begin(), partial[d].end());
    if (combine.node->kind == PlanNode::Kind::Agg)
        return {fold_agg(combine.node->agg, all)};
    std::sort(all.begin(), all.end());
    return all;
}

// ---- scheduling ----

SchedulerMode scheduler_from_name(const std::string& name) {
    if (name == "basic") return SchedulerMode::Basic;
    if (name == "optimized") return SchedulerMode::Optimized;
    raise(Errc::InvalidSpec, "unknown scheduler: " + name);
}

ExecutionTrace schedule(const TaskGraph& graph, SchedulerMode mode,
                        VaultModel& model, double arrival) {
    const auto& topo = model.topo;
    const size_t n_tasks = graph.tasks.size();

    std::vector<uint32_t> indeg(n_tasks, 0);
    std::vector<std::vector<uint32_t>> dependents(n_tasks);
    for (const auto& t : graph.tasks) {
        for (uint32_t d : t.deps) {
            if (d >= n_tasks) raise(Errc::CyclicDependency, "dangling dependency");
            dependents[d].push_back(t.id);
            indeg[t.id]++;
        }
    }
    {  // Kahn check
        std::vector<uint32_t> deg = indeg;
        std::deque<uint32_t> q;
        for (uint32_t i = 0; i < n_tasks; ++i)
            if (deg[i] == 0) q.push_back(i);
        size_t seen = 0;
        while (!q.empty()) {
            uint32_t u = q.front();
            q.pop_front();
            ++seen;
            for (uint32_t v : dependents[u])
                if (--deg[v] == 0) q.push_back(v);
        }
        if (seen != n_tasks) raise(Errc::CyclicDependency, "task graph has a cycle");
    }

    const uint32_t ppv = topo.pim_threads_per_vault;
    const uint32_t n_threads = topo.total_pim_threads();
    const uint32_t threads_per_group = topo.group_size * ppv;
    auto vault_of = [&](uint32_t t) { return t / ppv; };
    auto group_of_thread = [&](uint32_t t) { return topo.group_of(vault_of(t)); };
    auto is_monitor = [&](uint32_t t) {
        // basic mode reserves the first thread of each group for the monitor
        return mode == SchedulerMode::Basic && threads_per_group >= 2 &&
               t % threads_per_group == 0;
    };

    std::vector<std::deque<uint32_t>> queues(topo.n_groups());
    for (const auto& t : graph.tasks)
        if (t.deps.empty()) queues[t.home_group].push_back(t.id);

    enum EvKind { Complete = 0, Free = 1 };
    struct Event {
        double time;
        int kind;
        uint32_t id;
        uint64_t seq;
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            if (kind != o.kind) return kind > o.kind;
            if (id != o.id) return id > o.id;
            return seq > o.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
    uint64_t seq = 0;
    for (uint32_t t = 0; t < n_threads; ++t)
        events.push({arrival, Free, t, seq++});

    ExecutionTrace trace;
    std::vector<bool> sleeping(n_threads, false);
    // dictionaries are small; a core fetches one once and keeps it cached
    std::set<std::pair<uint32_t, uint32_t>> dict_cached;  // (thread, column key)
    size_t executed = 0;
    double last_end = arrival;

    while (!events.empty() && executed < n_tasks) {
        Event ev = events.top();
        events.pop();

        if (ev.kind == Complete) {
            for (uint32_t d : dependents[ev.id]) {
                if (--indeg[d] == 0)
                    queues[graph.tasks[d].home_group].push_back(d);
            }
            for (uint32_t t = 0; t < n_threads; ++t) {
                if (sleeping[t]) {
                    sleeping[t] = false;
                    events.push({ev.time, Free, t, seq++});
                }
            }
            continue;
        }

        uint32_t th = ev.id;
        if (is_monitor(th)) continue;
        uint32_t g = group_of_thread(th);

        uint32_t task_id = UINT32_MAX;
        bool stolen = false;
        if (!queues[g].empty()) {
            task_id = queues[g].front();
            queues[g].pop_front();
        } else if (mode == SchedulerMode::Optimized) {
            for (uint32_t i = 1; i < topo.n_groups(); ++i) {
                uint32_t vg = (g + i) % topo.n_groups();
                if (!queues[vg].empty()) {
                    task_id = queues[vg].back();  // opposite end of the victim
                    queues[vg].pop_back();
                    stolen = true;
                    break;
                }
            }
        }
        if (task_id == UINT32_MAX) {
            sleeping[th] = true;
            continue;
        }

        const Task& task = graph.tasks[task_id];
        uint32_t tv = vault_of(th);
        double start = ev.time;
        double mem_done = start;
        if (task.data_bytes > 0)
            mem_done = model.charge_access(task.data_vault, task.data_bytes, tv,
                                           false, start);
        uint32_t col_key = (uint32_t(task.col.table_id) << 16) | task.col.column_id;
        if (task.dict_bytes > 0 && !task.dict_vaults.empty() &&
            dict_cached.insert({th, col_key}).second) {
            // nearest dictionary replica: own vault, then own group, then a
            // replica picked round-robin so remote readers spread their load
            uint32_t dv = task.dict_vaults[tv % task.dict_vaults.size()];
            for (uint32_t cand : task.dict_vaults) {
                if (cand == tv) {
                    dv = cand;
                    break;
                }
                if (topo.group_of(cand) == topo.group_of(tv) &&
                    topo.group_of(dv) != topo.group_of(tv))
                    dv = cand;
            }
            double d = model.charge_access(dv, task.dict_bytes, tv, false, start);
            mem_done = std::max(mem_done, d);
        }
        uint64_t rows = task.kind == Task::Kind::Combine
                            ? task.deps.size()
                            : task.seg_end - task.seg_begin;
        // in-order cores stream segments: transfer and compute overlap
        double end = std::max(mem_done,
                              start + static_cast<double>(rows) * topo.pim_ns_per_tuple);

        trace.entries.push_back({task_id, th, stolen, start, end});
        if (stolen) trace.tasks_stolen++;
        ++executed;
        last_end = std::max(last_end, end);
        events.push({end, Complete, task_id, seq++});
        events.push({end, Free, th, seq++});
    }

    if (executed != n_tasks)
        raise(Errc::CyclicDependency, "scheduler could not run every task");
    trace.makespan = last_end - arrival;
    if (last_end > model.clock.now()) model.clock.advance_to(last_end);
    return trace;
}

}  // namespace htap
