#include "tempoq/shs.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <stdexcept>

namespace tempoq::shs {

TypeGraph default_type_graph() {
  std::vector<VertexTypeDecl> vertices = {
      {"Service", {{"patientID", AttrKind::String}}, {}},
      {"SHSService", {}, {"Service"}},
      {"PMonitoringService", {}, {"Service"}},
      {"DrugService", {}, {"Service"}},
      {"Probe", {{"status", AttrKind::String}}, {}},
      {"Issue", {}, {}},
      {"Effector", {}, {}},
      {"AdaptationAction", {}, {}},
  };
  std::vector<EdgeTypeDecl> edges = {
      {"invokes", "SHSService", "Service"},
      {"attached", "Service", "Probe"},
      {"hasIssue", "Service", "Issue"},
      {"hasEffector", "Service", "Effector"},
      {"handles", "AdaptationAction", "Issue"},
  };
  return TypeGraph(std::move(vertices), std::move(edges));
}

std::string variant_name(Variant variant) {
  return variant == Variant::Intempo ? "intempo" : "intempo-plus";
}

Variant variant_from_name(const std::string& name) {
  if (name == "intempo") {
    return Variant::Intempo;
  }
  if (name == "intempo-plus") {
    return Variant::IntempoPlus;
  }
  throw std::invalid_argument("unknown variant '" + name +
                              "' (expected intempo or intempo-plus)");
}

AdaptationLoop::AdaptationLoop(LoopConfig config)
    : config_(std::move(config)), graph_(default_type_graph()) {
  if (config_.period <= 0) {
    throw std::invalid_argument("loop: period must be positive");
  }
  if (config_.queries.empty()) {
    throw std::invalid_argument("loop: at least one query is required");
  }
  for (const Query& q : config_.queries) {
    networks_.emplace_back(q, graph_.types());
  }
  cutoff_ = cutoff(config_.queries);
  horizon_ = future_horizon(config_.queries);
  root_ = graph_.create_vertex("SHSService", {{"patientID", std::string()}},
                               TimePoint(0));
  // Setup pass: one full execution seeds every node's markings (universal
  // aggregates included), so the loop can run purely incrementally after.
  graph_.drain_journal();
  for (GdnNetwork& network : networks_) {
    network.execute_full(graph_);
  }
}

void AdaptationLoop::monitor(const ShsEvent& event) {
  TimePoint t(event.timestamp);
  auto it = patients_.find(event.patient);
  switch (event.kind) {
    case ShsEventKind::ER: {
      if (it != patients_.end()) {
        warnings_.push_back("duplicate ER for patient " + event.patient +
                            " skipped");
        return;
      }
      PatientState state;
      state.service = graph_.create_vertex(
          "PMonitoringService", {{"patientID", event.patient}}, t);
      ElementId invoke = graph_.create_edge("invokes", root_, state.service, t);
      ElementId probe = graph_.create_vertex(
          "Probe", {{"status", std::string("sepsis")}}, t);
      ElementId attach = graph_.create_edge("attached", state.service, probe, t);
      state.elements = {state.service, invoke, probe, attach};
      patients_.emplace(event.patient, std::move(state));
      return;
    }
    case ShsEventKind::IV: {
      if (it == patients_.end()) {
        warnings_.push_back("IV for unknown patient " + event.patient +
                            " skipped");
        return;
      }
      PatientState& state = it->second;
      ElementId drug = graph_.create_vertex(
          "DrugService", {{"patientID", event.patient}}, t);
      ElementId invoke = graph_.create_edge("invokes", root_, drug, t);
      ElementId probe = graph_.create_vertex(
          "Probe", {{"status", std::string("antibiotics")}}, t);
      ElementId attach = graph_.create_edge("attached", drug, probe, t);
      state.elements.insert(state.elements.end(),
                            {drug, invoke, probe, attach});
      // Antibiotics end the sepsis episode; a fragment arriving after the
      // episode closed is kept as a point in history.
      resolve_episode(state, t);
      return;
    }
    case ShsEventKind::RE: {
      if (it == patients_.end()) {
        warnings_.push_back("RE for unknown patient " + event.patient +
                            " skipped");
        return;
      }
      PatientState& state = it->second;
      if (state.resolved) {
        warnings_.push_back("RE for closed episode of patient " +
                            event.patient + " skipped");
        return;
      }
      ElementId probe = graph_.create_vertex(
          "Probe", {{"status", std::string("release")}}, t);
      ElementId attach = graph_.create_edge("attached", state.service, probe, t);
      state.elements.insert(state.elements.end(), {probe, attach});
      resolve_episode(state, t);
      return;
    }
  }
}

void AdaptationLoop::resolve_episode(PatientState& state, TimePoint now) {
  // Deleting the vertices cascades to live incident edges.
  for (ElementId id : state.elements) {
    if (graph_.contains(id) && graph_.element(id).dts.is_infinite()) {
      graph_.delete_element(id, now);
    }
  }
  state.resolved = true;
}

std::string AdaptationLoop::patient_of(const Binding& binding) const {
  for (const auto& [name, id] : binding) {
    if (!graph_.contains(id)) {
      continue;
    }
    const Element& e = graph_.element(id);
    if (!e.is_vertex || e.id == root_) {
      continue;
    }
    auto attr = e.attrs.find("patientID");
    if (attr != e.attrs.end()) {
      if (const auto* s = std::get_if<std::string>(&attr->second)) {
        if (!s->empty()) {
          return *s;
        }
      }
    }
  }
  return "";
}

std::vector<ViolationRecord> AdaptationLoop::analyze(TimePoint now) {
  std::vector<ChangeRecord> journal = graph_.drain_journal();
  std::vector<ViolationRecord> fresh;
  last_pending_ = 0;
  for (std::size_t i = 0; i < networks_.size(); ++i) {
    GdnNetwork& network = networks_[i];
    const Query& query = config_.queries[i];
    network.execute_incremental(graph_, journal);
    MatchReport report = network.report();
    ClassifiedMatches classified =
        classify_matches(report, *query.condition, now);
    last_pending_ += static_cast<int>(classified.pending.size());
    for (const ReportEntry& entry : classified.definite) {
      std::vector<ElementId> elements;
      for (const auto& [name, id] : entry.binding) {
        elements.push_back(id);
      }
      auto key = std::make_pair(query.name, elements);
      if (!reported_.insert(key).second) {
        continue;
      }
      ViolationRecord record;
      record.query = query.name;
      record.patient = patient_of(entry.binding);
      record.detected_at = now.ticks();
      record.match_start = entry.lambda.min_lower().ticks();
      record.elements = elements;
      ledger_.push_back(record);
      fresh.push_back(record);

      // Annotate the monitoring service so the violation is not re-matched.
      // A released patient's services are gone from the running system; the
      // violation stays on the ledger but cannot be adapted.
      auto patient_it = patients_.find(record.patient);
      if (patient_it == patients_.end()) {
        continue;
      }
      PatientState& state = patient_it->second;
      if (!graph_.contains(state.service) ||
          !graph_.element(state.service).dts.is_infinite()) {
        continue;
      }
      bool issued = false;
      for (ElementId eid : graph_.out_edges(state.service)) {
        if (graph_.element(eid).type == "hasIssue") {
          issued = true;
          break;
        }
      }
      if (issued) {
        continue;
      }
      ElementId issue = graph_.create_vertex("Issue", {}, now);
      ElementId link = graph_.create_edge("hasIssue", state.service, issue, now);
      state.elements.insert(state.elements.end(), {issue, link});
      planned_.push_back(
          {record.patient, state.service, issue, kNoElement});
    }
  }
  return fresh;
}

void AdaptationLoop::plan(TimePoint now) {
  for (PlannedAdaptation& p : planned_) {
    if (p.effector != kNoElement) {
      continue;
    }
    p.effector = graph_.create_vertex("Effector", {}, now);
    ElementId link = graph_.create_edge("hasEffector", p.service, p.effector, now);
    patients_.at(p.patient).elements.insert(
        patients_.at(p.patient).elements.end(), {p.effector, link});
  }
}

void AdaptationLoop::execute(TimePoint now) {
  std::vector<PlannedAdaptation> todo;
  todo.swap(planned_);
  for (const PlannedAdaptation& p : todo) {
    if (p.effector == kNoElement) {
      continue;
    }
    PatientState& state = patients_.at(p.patient);
    ElementId drug = graph_.create_vertex("DrugService",
                                          {{"patientID", p.patient}}, now);
    ElementId invoke = graph_.create_edge("invokes", root_, drug, now);
    ElementId probe = graph_.create_vertex(
        "Probe", {{"status", std::string("antibiotics")}}, now);
    ElementId attach = graph_.create_edge("attached", drug, probe, now);
    ElementId action = graph_.create_vertex("AdaptationAction", {}, now);
    ElementId handles = graph_.create_edge("handles", action, p.issue, now);
    state.elements.insert(state.elements.end(),
                          {drug, invoke, probe, attach, action, handles});
    graph_.delete_element(p.effector, now);  // consumed
    resolve_episode(state, now);
  }
}

void AdaptationLoop::maintain(TimePoint now) {
  std::vector<ElementId> prunable_edges;
  std::vector<ElementId> prunable_vertices;
  for (ElementId id : graph_.all_ids()) {
    const Element& e = graph_.element(id);
    if (e.dts.is_infinite()) {
      continue;
    }
    if (e.dts.ticks() + cutoff_ < now.ticks()) {
      (e.is_vertex ? prunable_vertices : prunable_edges).push_back(id);
    }
  }
  for (ElementId id : prunable_edges) {
    if (graph_.contains(id)) {
      graph_.prune_element(id);
    }
  }
  for (ElementId id : prunable_vertices) {
    if (graph_.contains(id)) {
      graph_.prune_element(id);
    }
  }
  std::vector<ChangeRecord> journal = graph_.drain_journal();
  if (!journal.empty()) {
    for (GdnNetwork& network : networks_) {
      network.execute_incremental(graph_, journal);
    }
  }
}

std::size_t AdaptationLoop::marking_count() const {
  std::size_t n = 0;
  for (const GdnNetwork& network : networks_) {
    n += network.marking_count();
  }
  return n;
}

std::vector<LoopStats> AdaptationLoop::run(const std::vector<ShsEvent>& log) {
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].timestamp < log[i - 1].timestamp) {
      throw std::invalid_argument("run: log is not sorted by timestamp");
    }
  }
  std::int64_t last = log.empty() ? 0 : log.back().timestamp;
  std::int64_t end = last + horizon_;
  std::int64_t count =
      std::max<std::int64_t>(1, (end + config_.period - 1) / config_.period);

  using Clock = std::chrono::steady_clock;
  auto micros = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::micro>(b - a).count();
  };

  std::vector<LoopStats> rows;
  std::size_t next_event = 0;
  for (std::int64_t k = 1; k <= count; ++k) {
    TimePoint now(k * config_.period);
    while (next_event < log.size() &&
           log[next_event].timestamp <= now.ticks()) {
      monitor(log[next_event]);
      ++next_event;
    }
    LoopStats row;
    row.invocation = static_cast<int>(k);
    row.time = now.ticks();

    auto t0 = Clock::now();
    std::vector<ViolationRecord> fresh = analyze(now);
    auto t1 = Clock::now();
    plan(now);
    auto t2 = Clock::now();
    execute(now);
    auto t3 = Clock::now();
    if (config_.variant == Variant::IntempoPlus) {
      maintain(now);
    }
    auto t4 = Clock::now();

    if (config_.record_timing) {
      row.analysis_us = micros(t0, t1);
      row.plan_us = micros(t1, t2);
      row.execute_us = micros(t2, t3);
      row.maintain_us = micros(t3, t4);
      row.reaction_us =
          row.analysis_us + row.plan_us + row.execute_us + row.maintain_us;
    }
    row.model_elements = graph_.element_count();
    row.marking_nodes = marking_count();
    row.new_violations = static_cast<int>(fresh.size());
    row.pending = last_pending_;
    rows.push_back(row);
  }
  return rows;
}

std::string stats_to_csv(const std::vector<LoopStats>& rows) {
  std::ostringstream out;
  out << "invocation,time,analysis_us,plan_us,execute_us,maintain_us,"
         "reaction_us,model_elements,marking_nodes,new_violations,pending\n";
  for (const auto& r : rows) {
    out << r.invocation << ',' << r.time << ',' << r.analysis_us << ','
        << r.plan_us << ',' << r.execute_us << ',' << r.maintain_us << ','
        << r.reaction_us << ',' << r.model_elements << ',' << r.marking_nodes
        << ',' << r.new_violations << ',' << r.pending << '\n';
  }
  return out.str();
}

nlohmann::ordered_json run_report_to_json(
    const nlohmann::ordered_json& config_echo,
    const std::vector<LoopStats>& rows,
    const std::vector<ViolationRecord>& ledger) {
  nlohmann::ordered_json doc;
  doc["config"] = config_echo;
  doc["invocations"] = nlohmann::ordered_json::array();
  double analysis = 0, plan = 0, execute = 0, maintain = 0, reaction = 0;
  std::size_t peak = 0;
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["invocation"] = r.invocation;
    row["time"] = r.time;
    row["analysisUs"] = r.analysis_us;
    row["planUs"] = r.plan_us;
    row["executeUs"] = r.execute_us;
    row["maintainUs"] = r.maintain_us;
    row["reactionUs"] = r.reaction_us;
    row["modelElements"] = r.model_elements;
    row["markingNodes"] = r.marking_nodes;
    row["newViolations"] = r.new_violations;
    row["pending"] = r.pending;
    doc["invocations"].push_back(std::move(row));
    analysis += r.analysis_us;
    plan += r.plan_us;
    execute += r.execute_us;
    maintain += r.maintain_us;
    reaction += r.reaction_us;
    peak = std::max(peak, r.model_elements);
  }
  doc["totals"] = {{"analysisUs", analysis},
                   {"planUs", plan},
                   {"executeUs", execute},
                   {"maintainUs", maintain},
                   {"reactionUs", reaction}};
  doc["peakElementCount"] = peak;
  doc["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : ledger) {
    doc["violations"].push_back({{"query", v.query},
                                 {"patient", v.patient},
                                 {"detectedAt", v.detected_at},
                                 {"matchStart", v.match_start},
                                 {"elements", v.elements}});
  }
  return doc;
}

}  // namespace tempoq::shs
