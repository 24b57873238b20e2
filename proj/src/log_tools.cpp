#include "tempoq/log_tools.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace tempoq {

std::string event_kind_name(ShsEventKind kind) {
  switch (kind) {
    case ShsEventKind::ER:
      return "ER";
    case ShsEventKind::IV:
      return "IV";
    case ShsEventKind::RE:
      return "RE";
  }
  return "ER";
}

namespace {

ShsEventKind kind_from_name(const std::string& name) {
  if (name == "ER") return ShsEventKind::ER;
  if (name == "IV") return ShsEventKind::IV;
  if (name == "RE") return ShsEventKind::RE;
  throw std::invalid_argument("log: unknown event kind '" + name + "'");
}

// Uniform in [0, 1) from the top 53 bits of the engine output.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_spec(const DistributionSpec& spec) {
  switch (spec.family) {
    case DistributionSpec::Family::Weibull:
      if (spec.a <= 0.0 || spec.b <= 0.0) {
        throw std::invalid_argument("weibull: scale and shape must be positive");
      }
      break;
    case DistributionSpec::Family::Lognormal:
      if (spec.b <= 0.0) {
        throw std::invalid_argument("lognormal: sigma must be positive");
      }
      break;
    case DistributionSpec::Family::Normal:
      if (spec.b < 0.0) {
        throw std::invalid_argument("normal: stddev must be non-negative");
      }
      break;
  }
}

double standard_normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  while (u1 <= 0.0) {
    u1 = uniform01(rng);
  }
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

double sample(const DistributionSpec& spec, std::mt19937_64& rng) {
  check_spec(spec);
  switch (spec.family) {
    case DistributionSpec::Family::Weibull: {
      double u = uniform01(rng);
      while (u <= 0.0) {
        u = uniform01(rng);
      }
      return spec.a * std::pow(-std::log(u), 1.0 / spec.b);
    }
    case DistributionSpec::Family::Lognormal:
      return std::exp(spec.a + spec.b * standard_normal(rng));
    case DistributionSpec::Family::Normal:
      if (spec.b == 0.0) {
        return spec.a;
      }
      return spec.a + spec.b * standard_normal(rng);
  }
  return 0.0;
}

std::vector<ShsEvent> synthesize(const LogSpec& spec) {
  if (!spec.has_seed) {
    throw std::invalid_argument("synthesize: a seed is required");
  }
  if (spec.density_factor < 1) {
    throw std::invalid_argument("synthesize: density factor must be >= 1");
  }
  if (spec.trajectory_count < 1) {
    throw std::invalid_argument("synthesize: trajectory count must be >= 1");
  }
  if (spec.iv_probability < 0.0 || spec.iv_probability > 1.0 ||
      spec.re_probability < 0.0 || spec.re_probability > 1.0) {
    throw std::invalid_argument("synthesize: probabilities must be in [0, 1]");
  }
  check_spec(spec.iat_er);
  check_spec(spec.er_to_iv);
  check_spec(spec.er_to_re);

  std::mt19937_64 rng(spec.seed);
  double k = static_cast<double>(spec.density_factor);

  DistributionSpec er_law;
  if (spec.simple) {
    er_law = spec.iat_er;  // drawn directly, scaled by 1/k below
  } else {
    // Mean inter-arrival times of 1000 sample logs sized like the source
    // log, bootstrap-resampled; their mean fixes the arrival law.
    constexpr int kSampleLogs = 1000;
    constexpr int kSourceTrajectories = 1049;
    std::vector<double> means;
    means.reserve(kSampleLogs);
    for (int s = 0; s < kSampleLogs; ++s) {
      double total = 0.0;
      for (int i = 0; i < kSourceTrajectories; ++i) {
        total += sample(spec.iat_er, rng);
      }
      means.push_back(total / kSourceTrajectories);
    }
    double resampled_total = 0.0;
    for (int s = 0; s < kSampleLogs; ++s) {
      std::size_t pick = static_cast<std::size_t>(uniform01(rng) * kSampleLogs);
      if (pick >= means.size()) {
        pick = means.size() - 1;
      }
      resampled_total += means[pick];
    }
    double mu = resampled_total / kSampleLogs;
    // The three-sigma rule keeps negative draws rare; they are redrawn.
    er_law = DistributionSpec{DistributionSpec::Family::Normal, mu / k,
                              mu / (3.0 * k)};
  }

  std::vector<ShsEvent> events;
  std::int64_t now = 0;
  std::int64_t last_arrival = 0;
  int digits = static_cast<int>(std::to_string(spec.trajectory_count).size());
  for (int t = 0; t < spec.trajectory_count; ++t) {
    double iat = sample(er_law, rng);
    while (iat < 0.0) {
      iat = sample(er_law, rng);
    }
    if (spec.simple) {
      iat /= k;
    }
    now += std::llround(iat);
    std::string num = std::to_string(t + 1);
    while (static_cast<int>(num.size()) < digits) {
      num.insert(num.begin(), '0');
    }
    std::string patient = "p" + num;
    events.push_back({ShsEventKind::ER, patient, now});
    last_arrival = now;
    if (uniform01(rng) < spec.iv_probability) {
      std::int64_t delta = std::max<std::int64_t>(1, std::llround(sample(spec.er_to_iv, rng)));
      events.push_back({ShsEventKind::IV, patient, now + delta});
    }
    if (uniform01(rng) < spec.re_probability) {
      std::int64_t delta = std::max<std::int64_t>(1, std::llround(sample(spec.er_to_re, rng)));
      events.push_back({ShsEventKind::RE, patient, now + delta});
    }
  }
  // The recorded period closes with the last arrival; follow-up events past
  // it fall outside the log, keeping spans compressed by the density factor.
  std::erase_if(events, [&](const ShsEvent& e) {
    return e.timestamp > last_arrival;
  });
  std::stable_sort(events.begin(), events.end(),
                   [](const ShsEvent& a, const ShsEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
  return events;
}

std::vector<ShsEvent> read_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("log: empty file");
  }
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
      s.pop_back();
    }
    return s;
  };
  if (strip(line) != "timestamp,patient_id,event") {
    throw std::invalid_argument(
        "log: expected header 'timestamp,patient_id,event'");
  }
  std::vector<ShsEvent> events;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip(line);
    if (line.empty()) {
      continue;
    }
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                             : line.find(',', c1 + 1);
    if (c2 == std::string::npos) {
      throw std::invalid_argument("log: malformed row at line " +
                                  std::to_string(lineno));
    }
    ShsEvent e;
    try {
      std::size_t used = 0;
      std::string ts = line.substr(0, c1);
      e.timestamp = std::stoll(ts, &used);
      if (used != ts.size()) {
        throw std::invalid_argument("trailing");
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("log: bad timestamp at line " +
                                  std::to_string(lineno));
    }
    if (e.timestamp < 0) {
      throw std::invalid_argument("log: negative timestamp at line " +
                                  std::to_string(lineno));
    }
    e.patient = line.substr(c1 + 1, c2 - c1 - 1);
    if (e.patient.empty()) {
      throw std::invalid_argument("log: empty patient id at line " +
                                  std::to_string(lineno));
    }
    try {
      e.kind = kind_from_name(line.substr(c2 + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("log: unknown event at line " +
                                  std::to_string(lineno));
    }
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const ShsEvent& a, const ShsEvent& b) {
                     return a.timestamp < b.timestamp;
                   });
  std::map<std::string, bool> seen_er;
  for (const auto& e : events) {
    if (e.kind == ShsEventKind::ER) {
      if (seen_er[e.patient]) {
        throw std::invalid_argument("log: duplicate ER for patient " +
                                    e.patient);
      }
      seen_er[e.patient] = true;
    } else if (!seen_er[e.patient]) {
      throw std::invalid_argument("log: " + event_kind_name(e.kind) +
                                  " precedes ER for patient " + e.patient);
    }
  }
  return events;
}

std::vector<ShsEvent> read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("log: cannot open " + path);
  }
  return read_log(in);
}

void write_log(std::ostream& out, const std::vector<ShsEvent>& events) {
  out << "timestamp,patient_id,event\n";
  for (const auto& e : events) {
    out << e.timestamp << ',' << e.patient << ',' << event_kind_name(e.kind)
        << '\n';
  }
}

void write_log_file(const std::string& path,
                    const std::vector<ShsEvent>& events) {
  std::ofstream out(path);
  if (!out) {
    throw std::invalid_argument("log: cannot open " + path + " for writing");
  }
  write_log(out, events);
}

namespace {

DistributionSpec distribution_from_json(const nlohmann::json& doc) {
  DistributionSpec spec;
  std::string family = doc.at("family").get<std::string>();
  if (family == "weibull") {
    spec.family = DistributionSpec::Family::Weibull;
    spec.a = doc.at("scale").get<double>();
    spec.b = doc.at("shape").get<double>();
  } else if (family == "lognormal") {
    spec.family = DistributionSpec::Family::Lognormal;
    spec.a = doc.at("mu").get<double>();
    spec.b = doc.at("sigma").get<double>();
  } else if (family == "normal") {
    spec.family = DistributionSpec::Family::Normal;
    spec.a = doc.at("mean").get<double>();
    spec.b = doc.at("stddev").get<double>();
  } else {
    throw std::invalid_argument("log spec: unknown family " + family);
  }
  check_spec(spec);
  return spec;
}

nlohmann::ordered_json distribution_to_json(const DistributionSpec& spec) {
  switch (spec.family) {
    case DistributionSpec::Family::Weibull:
      return {{"family", "weibull"}, {"scale", spec.a}, {"shape", spec.b}};
    case DistributionSpec::Family::Lognormal:
      return {{"family", "lognormal"}, {"mu", spec.a}, {"sigma", spec.b}};
    case DistributionSpec::Family::Normal:
      return {{"family", "normal"}, {"mean", spec.a}, {"stddev", spec.b}};
  }
  return {};
}

}  // namespace

LogSpec log_spec_from_json(const nlohmann::json& doc) {
  LogSpec spec;
  if (doc.contains("trajectoryCount")) {
    spec.trajectory_count = doc.at("trajectoryCount").get<int>();
  }
  if (doc.contains("iatEr")) {
    spec.iat_er = distribution_from_json(doc.at("iatEr"));
  }
  if (doc.contains("erToIv")) {
    spec.er_to_iv = distribution_from_json(doc.at("erToIv"));
  }
  if (doc.contains("erToRe")) {
    spec.er_to_re = distribution_from_json(doc.at("erToRe"));
  }
  if (doc.contains("ivProbability")) {
    spec.iv_probability = doc.at("ivProbability").get<double>();
  }
  if (doc.contains("reProbability")) {
    spec.re_probability = doc.at("reProbability").get<double>();
  }
  if (doc.contains("densityFactor")) {
    spec.density_factor = doc.at("densityFactor").get<int>();
  }
  if (doc.contains("seed")) {
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.has_seed = true;
  }
  if (doc.contains("simple")) {
    spec.simple = doc.at("simple").get<bool>();
  }
  return spec;
}

nlohmann::ordered_json log_spec_to_json(const LogSpec& spec) {
  nlohmann::ordered_json doc;
  doc["trajectoryCount"] = spec.trajectory_count;
  doc["iatEr"] = distribution_to_json(spec.iat_er);
  doc["erToIv"] = distribution_to_json(spec.er_to_iv);
  doc["erToRe"] = distribution_to_json(spec.er_to_re);
  doc["ivProbability"] = spec.iv_probability;
  doc["reProbability"] = spec.re_probability;
  doc["densityFactor"] = spec.density_factor;
  if (spec.has_seed) {
    doc["seed"] = spec.seed;
  }
  doc["simple"] = spec.simple;
  return doc;
}

}  // namespace tempoq
