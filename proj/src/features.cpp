#include "frost/features.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>
#include <ostream>

#include "frost/error.hpp"

namespace frost {

double reverse_wind_direction(double met_deg) {
  if (!(met_deg >= 0.0 && met_deg < 360.0)) {
    throw DomainError("wind direction " + std::to_string(met_deg) + " outside [0, 360)");
  }
  return met_deg < 180.0 ? met_deg + 180.0 : met_deg - 180.0;
}

WindComponents wind_to_components(double met_deg, double speed) {
  if (!(speed >= 0.0)) throw DomainError("wind speed must be non-negative");
  const double rad = reverse_wind_direction(met_deg) * std::numbers::pi / 180.0;
  return {speed * std::sin(rad), speed * std::cos(rad)};
}

ClimateVector climate_features(const ClimateObservation& obs) {
  const auto wind = wind_to_components(obs.wind_dir_met, obs.wind_speed);
  return {obs.temperature, obs.dew_point, obs.rh, wind.v_n, wind.v_e};
}

std::vector<Label> label_next_hour_min(const StationSeries& series, std::size_t horizon) {
  if (horizon == 0) throw DomainError("label horizon must be at least 1");
  const auto& obs = series.observations;
  std::vector<Label> labels;
  if (obs.size() <= horizon) return labels;
  labels.reserve(obs.size() - horizon);

  // monotone deque of indices with increasing temperatures over the window t+1..t+horizon
  std::deque<std::size_t> window;
  auto push = [&](std::size_t j) {
    while (!window.empty() && obs[window.back()].temperature >= obs[j].temperature) window.pop_back();
    window.push_back(j);
  };
  for (std::size_t j = 1; j <= horizon; ++j) push(j);
  for (std::size_t t = 0; t + horizon < obs.size(); ++t) {
    if (t > 0) {
      push(t + horizon);
      while (window.front() <= t) window.pop_front();
    }
    labels.push_back({t, obs[t].timestamp, obs[window.front()].temperature});
  }
  return labels;
}

bool TimeFilter::accepts(std::int64_t t) const noexcept {
  if (t < begin || t >= end) return false;
  if (stride <= 1) return true;
  std::int64_t r = (t - anchor) % stride;
  return r == 0;
}

std::vector<TrainingEntry> build_pair_entries(const StationSeries& source, const StationSeries& target,
                                              std::size_t horizon, const TimeFilter& filter) {
  const auto labels = label_next_hour_min(target, horizon);
  const auto& obs = source.observations;
  std::vector<TrainingEntry> entries;
  std::size_t i = 0;
  for (const auto& label : labels) {
    if (!filter.accepts(label.timestamp)) continue;
    while (i < obs.size() && obs[i].timestamp < label.timestamp) ++i;
    if (i == obs.size()) break;
    if (obs[i].timestamp != label.timestamp) continue;
    entries.push_back(TrainingEntry{source.attrs, target.attrs, climate_features(obs[i]), label.value, source.id,
                                    target.id, label.timestamp});
  }
  return entries;
}

void FeatureMatrix::push_back(std::span<const double> features, double label) {
  if (features.size() != cols) throw DomainError("feature row has wrong width");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label);
}

FeatureMatrix to_matrix(std::span<const TrainingEntry> entries) {
  FeatureMatrix m(kSpatialFeatureCount);
  m.reserve(entries.size());
  for (const auto& e : entries) {
    const auto f = e.features();
    m.push_back(f, e.label);
  }
  return m;
}

FeatureMatrix build_baseline_samples(const StationSeries& series, std::size_t horizon, const TimeFilter& filter) {
  FeatureMatrix m(kClimateFeatureCount);
  for (const auto& label : label_next_hour_min(series, horizon)) {
    if (!filter.accepts(label.timestamp)) continue;
    const auto climate = climate_features(series.observations[label.index]);
    m.push_back(climate, label.value);
  }
  return m;
}

ScalerStats fit_scaler(const FeatureMatrix& data) {
  const std::size_t n = data.rows();
  if (n == 0) throw DataError("cannot fit a scaler on zero entries");
  ScalerStats s;
  s.mean.assign(data.cols, 0.0);
  s.sd.assign(data.cols, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < data.cols; ++j) s.mean[j] += r[j];
    s.label_mean += data.y[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& m : s.mean) m *= inv_n;
  s.label_mean *= inv_n;

  double label_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = data.row(i);
    for (std::size_t j = 0; j < data.cols; ++j) {
      const double d = r[j] - s.mean[j];
      s.sd[j] += d * d;
    }
    const double d = data.y[i] - s.label_mean;
    label_ss += d * d;
  }
  auto finish = [&](double ss) {
    const double sd = std::sqrt(ss * inv_n);
    return (sd > 1e-12 && std::isfinite(sd)) ? sd : 1.0;
  };
  for (auto& v : s.sd) v = finish(v);
  s.label_sd = finish(label_ss);
  return s;
}

ScalerStats fit_scaler(std::span<const TrainingEntry> entries) { return fit_scaler(to_matrix(entries)); }

void apply_scaler(const ScalerStats& stats, std::span<double> features) {
  if (features.size() != stats.dims()) throw DomainError("scaler dimension mismatch");
  for (std::size_t j = 0; j < features.size(); ++j) features[j] = (features[j] - stats.mean[j]) / stats.sd[j];
}

FeatureMatrix apply_scaler(const ScalerStats& stats, FeatureMatrix data) {
  if (data.cols != stats.dims()) throw DomainError("scaler dimension mismatch");
  for (std::size_t i = 0; i < data.rows(); ++i) {
    apply_scaler(stats, data.row(i));
    data.y[i] = scale_label(stats, data.y[i]);
  }
  return data;
}

double scale_label(const ScalerStats& stats, double label) { return (label - stats.label_mean) / stats.label_sd; }

double invert_label(const ScalerStats& stats, double scaled) { return scaled * stats.label_sd + stats.label_mean; }

void write_entries_csv(std::span<const TrainingEntry> entries, std::ostream& out) {
  out << "source,target,timestamp,src_lon,src_lat,src_dem,src_ndvi,tgt_lon,tgt_lat,tgt_dem,tgt_ndvi,"
         "temperature,dew_point,rh,n_wind,e_wind,label\n";
  char buf[64];
  for (const auto& e : entries) {
    out << e.source.str() << ',' << e.target.str() << ',' << e.timestamp;
    for (double v : e.features()) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", e.label);
    out << buf;
  }
}

}  // namespace frost
