#ifndef TEMPOQ_SHS_HPP
#define TEMPOQ_SHS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempoq/gdn.hpp"
#include "tempoq/history_graph.hpp"
#include "tempoq/log_tools.hpp"
#include "tempoq/mtgc.hpp"

namespace tempoq::shs {

/// Metamodel of the smart healthcare scenario: a root service invoking
/// per-patient monitoring and drug services, probes attached to services,
/// and the adaptation bookkeeping types.
TypeGraph default_type_graph();

enum class Variant { Intempo, IntempoPlus };
std::string variant_name(Variant variant);
Variant variant_from_name(const std::string& name);

struct LoopConfig {
  Duration period = 3600;
  Variant variant = Variant::Intempo;
  std::vector<Query> queries;
  bool record_timing = true;
};

struct LoopStats {
  int invocation = 0;
  std::int64_t time = 0;
  double analysis_us = 0.0;
  double plan_us = 0.0;
  double execute_us = 0.0;
  double maintain_us = 0.0;
  double reaction_us = 0.0;
  std::size_t model_elements = 0;
  std::size_t marking_nodes = 0;
  int new_violations = 0;
  int pending = 0;
};

struct ViolationRecord {
  std::string query;
  std::string patient;
  std::int64_t detected_at = 0;
  std::int64_t match_start = 0;
  std::vector<ElementId> elements;
};

/// Monitor - analyze - plan - execute (- maintain) loop over one model and
/// one network per configured query. Strictly sequential.
class AdaptationLoop {
 public:
  explicit AdaptationLoop(LoopConfig config);

  /// Reflects one log event in the model. Events for unknown patients or
  /// closed episodes are recorded as warnings and skipped.
  void monitor(const ShsEvent& event);

  /// Incremental query execution, violation classification and issue
  /// annotation. Returns the newly detected definite violations.
  std::vector<ViolationRecord> analyze(TimePoint now);

  /// Attaches an effector to each service issued during the last analysis.
  void plan(TimePoint now);

  /// Performs the adaptation for each pending effector: administers
  /// antibiotics via a drug service and records the action. Consumed
  /// effectors are deleted and the episode is closed.
  void execute(TimePoint now);

  /// Prunes elements past their relevance window and re-executes the
  /// networks over the pruning changes.
  void maintain(TimePoint now);

  std::vector<LoopStats> run(const std::vector<ShsEvent>& log);

  const HistoryGraph& graph() const { return graph_; }
  const std::vector<GdnNetwork>& networks() const { return networks_; }
  const std::vector<ViolationRecord>& ledger() const { return ledger_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  Duration cutoff_window() const { return cutoff_; }
  Duration horizon() const { return horizon_; }
  std::size_t marking_count() const;

 private:
  struct PatientState {
    ElementId service = kNoElement;
    bool resolved = false;
    std::vector<ElementId> elements;
  };
  struct PlannedAdaptation {
    std::string patient;
    ElementId service = kNoElement;
    ElementId issue = kNoElement;
    ElementId effector = kNoElement;
  };

  void resolve_episode(PatientState& state, TimePoint now);
  std::string patient_of(const Binding& binding) const;

  LoopConfig config_;
  HistoryGraph graph_;
  std::vector<GdnNetwork> networks_;
  ElementId root_ = kNoElement;
  Duration cutoff_ = 0;
  Duration horizon_ = 0;
  std::map<std::string, PatientState> patients_;
  std::vector<ViolationRecord> ledger_;
  std::set<std::pair<std::string, std::vector<ElementId>>> reported_;
  std::vector<PlannedAdaptation> planned_;
  int last_pending_ = 0;
  std::vector<std::string> warnings_;
};

std::string stats_to_csv(const std::vector<LoopStats>& rows);
nlohmann::ordered_json run_report_to_json(
    const nlohmann::ordered_json& config_echo,
    const std::vector<LoopStats>& rows,
    const std::vector<ViolationRecord>& ledger);

}  // namespace tempoq::shs

#endif  // TEMPOQ_SHS_HPP
