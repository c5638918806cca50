#include "stresscast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "stresscast/rng.hpp"

namespace stresscast {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SubjectTraits {
  double hr0;
  double eda0;
  double temp0;
  double bvp_amp;
  double drift_phase;
};

SubjectTraits subject_traits(std::uint64_t seed, const std::string& subject_id) {
  Rng rng(derive_seed(seed, "subject:" + subject_id));
  return {rng.uniform(62.0, 85.0), rng.uniform(1.0, 4.0), rng.uniform(32.0, 34.5), rng.uniform(40.0, 80.0),
          rng.uniform(0.0, kTwoPi)};
}

std::vector<double> place_tags(const SyntheticConfig& cfg, Rng& rng) {
  const double history = cfg.max_window_s + cfg.max_lead_s;
  const double gap = history + cfg.post_tag_buffer_s;
  const double lo = history;
  const double slack = cfg.session_duration_s - cfg.post_tag_buffer_s - lo - (cfg.events_per_session - 1) * gap;
  std::vector<double> offsets(static_cast<std::size_t>(cfg.events_per_session));
  for (auto& o : offsets) o = rng.uniform() * slack;
  std::sort(offsets.begin(), offsets.end());
  std::vector<double> tags;
  for (int i = 0; i < cfg.events_per_session; ++i) {
    // Flooring keeps the spacing >= gap because the offsets are sorted.
    tags.push_back(std::floor(lo + i * gap + offsets[static_cast<std::size_t>(i)]));
  }
  return tags;
}

double response_at(double t, const std::vector<double>& tags, double ramp) {
  double r = 0.0;
  for (double tag : tags) {
    if (t >= tag - ramp && t <= tag) {
      r = std::max(r, (t - (tag - ramp)) / ramp);
    } else if (t > tag && t <= tag + ramp) {
      r = std::max(r, 1.0 - (t - tag) / ramp);
    }
  }
  return r;
}

bool inside(double t, const std::vector<std::pair<double, double>>& segments) {
  return std::any_of(segments.begin(), segments.end(),
                     [t](const auto& s) { return t >= s.first && t < s.second; });
}

}  // namespace

void validate(const SyntheticConfig& cfg) {
  if (cfg.n_subjects < 1) throw ValidationError("n_subjects must be >= 1");
  if (cfg.weeks_per_subject < 1) throw ValidationError("weeks_per_subject must be >= 1");
  if (cfg.events_per_session < 1) throw ValidationError("events_per_session must be >= 1");
  const double min_duration = cfg.events_per_session * (cfg.max_window_s + cfg.post_tag_buffer_s + cfg.max_lead_s);
  if (!(cfg.session_duration_s >= min_duration)) {
    throw ValidationError("session_duration_s must be >= events x (max window + buffer + max lead) = " +
                          std::to_string(min_duration));
  }
  if (!(cfg.noise_scale >= 0.0)) throw ValidationError("noise_scale must be >= 0");
  if (!(cfg.response_ramp_s > 0.0)) throw ValidationError("response_ramp_s must be > 0");
  for (const auto& seg : cfg.activity_segments) {
    if (!(seg.first < seg.second)) throw ValidationError("activity segment with start >= end");
  }
  for (const auto& seg : cfg.relax_segments) {
    if (!(seg.first < seg.second)) throw ValidationError("relax segment with start >= end");
  }
}

std::string subject_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "S%02d", index);
  return buf;
}

Session generate_session(const SyntheticConfig& cfg, const std::string& subject_id, int week_index) {
  validate(cfg);
  if (week_index < 1) throw ValidationError("week_index must be >= 1");

  const SubjectTraits traits = subject_traits(cfg.seed, subject_id);
  Rng rng(derive_seed(cfg.seed, "generator:" + subject_id, static_cast<std::uint64_t>(week_index)));
  const double start = cfg.start_time + (week_index - 1) * 7.0 * 86400.0;
  const double duration = cfg.session_duration_s;
  const double ns = cfg.noise_scale;
  const auto& fx = cfg.event_effect;

  Session s;
  s.subject_id = subject_id;
  s.week_index = week_index;
  const std::vector<double> rel_tags = place_tags(cfg, rng);
  for (double t : rel_tags) s.tags.push_back(start + t);

  auto make = [&](ChannelKind kind) -> ChannelRecording& {
    auto& rec = s.channels[kind];
    rec.kind = kind;
    rec.start_time = start;
    rec.sample_rate = canonical_rate(kind);
    rec.samples.resize(static_cast<std::size_t>(std::llround(duration * rec.sample_rate)));
    return rec;
  };
  auto drift = [&](double t, double period) { return std::sin(kTwoPi * t / period + traits.drift_phase); };

  auto& hr = make(ChannelKind::HR);
  for (std::size_t i = 0; i < hr.samples.size(); ++i) {
    const double t = static_cast<double>(i) / hr.sample_rate;
    hr.samples[i] = traits.hr0 + 3.0 * drift(t, 1500.0) + fx.hr_bpm * response_at(t, rel_tags, cfg.response_ramp_s) +
                    1.0 * ns * rng.normal();
  }

  auto& eda = make(ChannelKind::EDA);
  for (std::size_t i = 0; i < eda.samples.size(); ++i) {
    const double t = static_cast<double>(i) / eda.sample_rate;
    eda.samples[i] = traits.eda0 + 0.1 * drift(t, 2100.0) +
                     fx.eda_us * response_at(t, rel_tags, cfg.response_ramp_s) + 0.02 * ns * rng.normal();
  }

  auto& temp = make(ChannelKind::TEMP);
  for (std::size_t i = 0; i < temp.samples.size(); ++i) {
    const double t = static_cast<double>(i) / temp.sample_rate;
    temp.samples[i] = traits.temp0 + 0.1 * drift(t, 2700.0) -
                      fx.temp_c * response_at(t, rel_tags, cfg.response_ramp_s) + 0.01 * ns * rng.normal();
  }

  auto& bvp = make(ChannelKind::BVP);
  double phase = 0.0;
  for (std::size_t i = 0; i < bvp.samples.size(); ++i) {
    const double t = static_cast<double>(i) / bvp.sample_rate;
    const double resp = response_at(t, rel_tags, cfg.response_ramp_s);
    const double rate_bpm = traits.hr0 + fx.hr_bpm * resp;
    phase += kTwoPi * rate_bpm / 60.0 / bvp.sample_rate;
    const double amp = traits.bvp_amp * (1.0 - fx.bvp_rel * resp);
    bvp.samples[i] = amp * (std::sin(phase) + 0.3 * std::sin(2.0 * phase + 0.5)) + 2.0 * ns * rng.normal();
  }

  auto& ax = make(ChannelKind::ACC_X);
  auto& ay = make(ChannelKind::ACC_Y);
  auto& az = make(ChannelKind::ACC_Z);
  const double gravity[3] = {6.0, -10.0, 62.0};
  const double axis_phase[3] = {0.0, 2.1, 4.2};
  ChannelRecording* axes[3] = {&ax, &ay, &az};
  for (std::size_t i = 0; i < ax.samples.size(); ++i) {
    const double t = static_cast<double>(i) / ax.sample_rate;
    const bool active = inside(t, cfg.activity_segments);
    for (int a = 0; a < 3; ++a) {
      double v = gravity[a] + 1.0 * ns * rng.normal();
      if (active) {
        v += cfg.activity_amplitude * std::sin(kTwoPi * cfg.activity_freq_hz * t + axis_phase[a]) +
             8.0 * ns * rng.normal();
      }
      axes[a]->samples[i] = std::round(v);
    }
  }

  for (const auto& seg : cfg.activity_segments) {
    s.baseline_intervals.push_back({start + seg.first, start + seg.second, BaselineLabel::Dance});
  }
  for (const auto& seg : cfg.relax_segments) {
    s.baseline_intervals.push_back({start + seg.first, start + seg.second, BaselineLabel::Relax});
  }
  std::sort(s.baseline_intervals.begin(), s.baseline_intervals.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return s;
}

}  // namespace stresscast
