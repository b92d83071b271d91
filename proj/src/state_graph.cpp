#include "mofh6/state_graph.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <set>
#include <thread>
#include <unordered_map>

#include "mofh6/error.hpp"

namespace mofh6 {

namespace {

template <typename T>
void append(std::vector<T>& into, std::vector<T>&& from) {
  into.insert(into.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

enum class NodeStatus { Pending, Ok, Failed, Skipped };

}  // namespace

void merge_delta(PipelineState& state, PipelineState&& delta) {
  append(state.synthesis_paragraphs, std::move(delta.synthesis_paragraphs));
  append(state.table_entries, std::move(delta.table_entries));
  append(state.match_results, std::move(delta.match_results));
  append(state.abbreviations, std::move(delta.abbreviations));
  append(state.unresolved_abbreviations, std::move(delta.unresolved_abbreviations));
  append(state.dossiers, std::move(delta.dossiers));
  append(state.structured, std::move(delta.structured));
  append(state.output_paths, std::move(delta.output_paths));
  append(state.errors, std::move(delta.errors));
  append(state.warnings, std::move(delta.warnings));
  append(state.trace, std::move(delta.trace));
  append(state.skipped, std::move(delta.skipped));
  for (auto& [k, v] : delta.timings) state.timings[k] = v;
}

bool ProcessingGraph::contains(const std::string& name) const {
  return std::any_of(nodes_.begin(), nodes_.end(), [&](const NodeSpec& n) { return n.name == name; });
}

ProcessingGraph build_graph(std::vector<NodeSpec> specs) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].stage < 1 || specs[i].stage > 3)
      throw Error(ErrorKind::StageOrder, "node '" + specs[i].name + "' has stage outside 1..3");
    if (!index.emplace(specs[i].name, i).second)
      throw Error(ErrorKind::DuplicateNode, "duplicate node '" + specs[i].name + "'");
  }
  std::vector<std::vector<std::size_t>> deps(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& d : specs[i].dependencies) {
      auto it = index.find(d);
      if (it == index.end())
        throw Error(ErrorKind::UnknownDependency, "node '" + specs[i].name + "' depends on unknown '" + d + "'");
      deps[i].push_back(it->second);
    }
  }

  // Kahn's algorithm; the ready set is ordered by (stage, declaration index).
  std::vector<int> indegree(specs.size(), 0);
  std::vector<std::vector<std::size_t>> dependents(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t d : deps[i]) {
      ++indegree[i];
      dependents[d].push_back(i);
    }
  }
  auto key = [&](std::size_t i) { return std::make_pair(specs[i].stage, i); };
  std::set<std::pair<int, std::size_t>> ready;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (indegree[i] == 0) ready.insert(key(i));
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t i = ready.begin()->second;
    ready.erase(ready.begin());
    order.push_back(i);
    for (std::size_t j : dependents[i])
      if (--indegree[j] == 0) ready.insert(key(j));
  }
  if (order.size() != specs.size()) {
    std::string stuck;
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (indegree[i] > 0) stuck += (stuck.empty() ? "" : ", ") + specs[i].name;
    throw Error(ErrorKind::CycleDetected, "dependency cycle among: " + stuck);
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (std::size_t d : deps[i]) {
      if (specs[d].stage > specs[i].stage)
        throw Error(ErrorKind::StageOrder, "stage-" + std::to_string(specs[i].stage) + " node '" + specs[i].name +
                                               "' depends on stage-" + std::to_string(specs[d].stage) + " node '" +
                                               specs[d].name + "'");
    }
  }

  ProcessingGraph g;
  std::vector<std::size_t> position(specs.size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;
  for (std::size_t p = 0; p < order.size(); ++p) {
    std::vector<std::size_t> d;
    for (std::size_t old : deps[order[p]]) d.push_back(position[old]);
    std::sort(d.begin(), d.end());
    g.deps_.push_back(std::move(d));
  }
  for (std::size_t i : order) g.nodes_.push_back(std::move(specs[i]));
  return g;
}

PipelineState execute(const ProcessingGraph& graph, PipelineState initial, ExecuteOptions options) {
  const auto& nodes = graph.nodes();
  const auto& deps = graph.dependency_indices();
  std::vector<NodeStatus> status(nodes.size(), NodeStatus::Pending);
  PipelineState state = std::move(initial);

  auto run_node = [&](std::size_t i, const PipelineState& snapshot) {
    PipelineState delta;
    delta.doc_id = snapshot.doc_id;
    auto start = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      if (nodes[i].handler) nodes[i].handler(snapshot, delta);
    } catch (const Error& e) {
      ok = false;
      delta = PipelineState{};
      delta.errors.push_back({nodes[i].name, std::string(e.kind_name()), e.what()});
    } catch (const std::exception& e) {
      ok = false;
      delta = PipelineState{};
      delta.errors.push_back({nodes[i].name, "Exception", e.what()});
    }
    auto end = std::chrono::steady_clock::now();
    delta.trace.push_back({nodes[i].name, start, end});
    delta.timings[nodes[i].name] = std::chrono::duration<double, std::milli>(end - start).count();
    return std::make_pair(ok, std::move(delta));
  };

  while (true) {
    std::vector<std::size_t> wave;
    bool progressed = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (status[i] != NodeStatus::Pending) continue;
      bool blocked = false, waiting = false;
      for (std::size_t d : deps[i]) {
        if (status[d] == NodeStatus::Failed || status[d] == NodeStatus::Skipped) blocked = true;
        else if (status[d] == NodeStatus::Pending) waiting = true;
      }
      if (blocked) {
        status[i] = NodeStatus::Skipped;
        state.skipped.push_back(nodes[i].name);
        progressed = true;
      } else if (!waiting) {
        wave.push_back(i);
      }
    }
    if (wave.empty()) {
      if (progressed) continue;
      break;
    }

    std::vector<std::pair<bool, PipelineState>> results(wave.size());
    if (options.concurrent_nodes && wave.size() > 1) {
      std::vector<std::future<std::pair<bool, PipelineState>>> futures;
      for (std::size_t w = 0; w < wave.size(); ++w)
        futures.push_back(std::async(std::launch::async, run_node, wave[w], std::cref(state)));
      for (std::size_t w = 0; w < wave.size(); ++w) results[w] = futures[w].get();
    } else {
      for (std::size_t w = 0; w < wave.size(); ++w) results[w] = run_node(wave[w], state);
    }
    for (std::size_t w = 0; w < wave.size(); ++w) {
      status[wave[w]] = results[w].first ? NodeStatus::Ok : NodeStatus::Failed;
      merge_delta(state, std::move(results[w].second));
    }
  }

  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (status[i] == NodeStatus::Pending)
      throw Error(ErrorKind::ExecutorPanic, "node '" + nodes[i].name + "' never became runnable");
  for (const auto& e : state.errors)
    if (!graph.contains(e.node))
      throw Error(ErrorKind::ExecutorPanic, "error attributed to unknown node '" + e.node + "'");
  return state;
}

json RunReport::to_json() const {
  json doc;
  doc["doc_count"] = doc_count;
  doc["succeeded"] = succeeded;
  doc["failed"] = failed;
  doc["generated_at"] = generated_at;
  doc["per_doc"] = json::object();
  for (const auto& [id, r] : per_doc) {
    json errors = json::array();
    for (const auto& e : r.errors) errors.push_back({{"node", e.node}, {"kind", e.kind}, {"message", e.message}});
    doc["per_doc"][id] = {{"status", r.status},
                          {"timings_ms", r.timings},
                          {"errors", errors},
                          {"skipped", r.skipped},
                          {"started_at", r.started_at},
                          {"finished_at", r.finished_at}};
  }
  return doc;
}

CorpusResult run_corpus(const ProcessingGraph& graph, std::vector<PipelineState> docs, int parallelism,
                        ExecuteOptions options) {
  if (parallelism < 1) throw Error(ErrorKind::InvalidRequest, "parallelism must be positive");
  std::set<std::string> ids;
  for (const auto& d : docs) {
    if (d.doc_id.empty()) throw Error(ErrorKind::InvalidRequest, "empty doc_id");
    if (!ids.insert(d.doc_id).second) throw Error(ErrorKind::InvalidRequest, "duplicate doc_id '" + d.doc_id + "'");
  }

  struct Slot {
    PipelineState state;
    std::string started_at, finished_at;
  };
  std::vector<Slot> slots(docs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= docs.size()) return;
      slots[i].started_at = text::rfc3339(std::chrono::system_clock::now());
      slots[i].state = execute(graph, std::move(docs[i]), options);
      slots[i].finished_at = text::rfc3339(std::chrono::system_clock::now());
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), docs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  CorpusResult out;
  out.report.doc_count = static_cast<int>(slots.size());
  out.report.generated_at = text::rfc3339(std::chrono::system_clock::now());
  for (auto& slot : slots) {
    DocReport r;
    r.status = slot.state.errors.empty() ? "succeeded" : "failed";
    r.timings = slot.state.timings;
    r.errors = slot.state.errors;
    r.skipped = slot.state.skipped;
    r.started_at = slot.started_at;
    r.finished_at = slot.finished_at;
    (slot.state.errors.empty() ? out.report.succeeded : out.report.failed) += 1;
    out.report.per_doc[slot.state.doc_id] = std::move(r);
    out.states.push_back(std::move(slot.state));
  }
  return out;
}

CorpusResult run_corpus(const ProcessingGraph& graph,
                        const std::vector<std::pair<std::string, std::string>>& docs, int parallelism,
                        ExecuteOptions options) {
  std::vector<PipelineState> states;
  for (const auto& [id, body] : docs) {
    PipelineState s;
    s.doc_id = id;
    s.source_text = body;
    states.push_back(std::move(s));
  }
  return run_corpus(graph, std::move(states), parallelism, options);
}

}  // namespace mofh6
