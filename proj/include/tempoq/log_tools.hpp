#ifndef TEMPOQ_LOG_TOOLS_HPP
#define TEMPOQ_LOG_TOOLS_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace tempoq {

enum class ShsEventKind { ER, IV, RE };

struct ShsEvent {
  ShsEventKind kind = ShsEventKind::ER;
  std::string patient;
  std::int64_t timestamp = 0;

  friend bool operator==(const ShsEvent&, const ShsEvent&) = default;
};

std::string event_kind_name(ShsEventKind kind);

struct DistributionSpec {
  enum class Family { Weibull, Lognormal, Normal };
  Family family = Family::Normal;
  // Weibull: scale, shape. Lognormal: mu, sigma of the underlying normal.
  // Normal: mean, stddev.
  double a = 0.0;
  double b = 0.0;
};

struct LogSpec {
  int trajectory_count = 1049;
  DistributionSpec iat_er{DistributionSpec::Family::Weibull, 3.7e4, 0.9};
  DistributionSpec er_to_iv{DistributionSpec::Family::Weibull, 5.09e3, 0.59};
  DistributionSpec er_to_re{DistributionSpec::Family::Lognormal, 13.15, 0.53};
  // Fractions of trajectories containing IV / RE events. Not published for
  // the source data; defaults are project choices, override as needed.
  double iv_probability = 0.8;
  double re_probability = 0.8;
  int density_factor = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
  // Skip the bootstrap and draw inter-arrival times directly, scaled 1/k.
  bool simple = false;
};

/// One draw; uses inverse-CDF / Box-Muller over the engine's raw 64-bit
/// output so results are identical across standard libraries.
double sample(const DistributionSpec& spec, std::mt19937_64& rng);

/// Density-scaled synthetic log generation: a bootstrap over per-log mean
/// inter-arrival times fixes a normal law for ER arrivals compressed by the
/// density factor (negative draws are redrawn); IV/RE follow their fitted
/// distributions relative to each ER.
std::vector<ShsEvent> synthesize(const LogSpec& spec);

/// CSV with header `timestamp,patient_id,event`; events come back sorted by
/// timestamp (stable), with per-patient ER-first ordering validated.
std::vector<ShsEvent> read_log(std::istream& in);
std::vector<ShsEvent> read_log_file(const std::string& path);
void write_log(std::ostream& out, const std::vector<ShsEvent>& events);
void write_log_file(const std::string& path,
                    const std::vector<ShsEvent>& events);

LogSpec log_spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json log_spec_to_json(const LogSpec& spec);

}  // namespace tempoq

#endif  // TEMPOQ_LOG_TOOLS_HPP
