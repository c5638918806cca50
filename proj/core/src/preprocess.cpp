#include "stresscast/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace stresscast {

const ChannelStage& PreprocessPlan::stage(ChannelKind kind) const {
  for (const auto& s : stages) {
    if (s.kind == kind) return s;
  }
  throw ValidationError("preprocess plan has no stage for " + std::string(to_string(kind)));
}

PreprocessPlan standard_plan() {
  const auto eda_lp = dsp::design_butterworth_lowpass(6, 1.0, canonical_rate(ChannelKind::EDA));
  const auto temp_lp = dsp::design_butterworth_lowpass(6, 1.0, canonical_rate(ChannelKind::TEMP));
  const auto bvp_bp = dsp::design_butterworth_bandpass(2, 2.0, 12.0, canonical_rate(ChannelKind::BVP));
  return PreprocessPlan{{
      {ChannelKind::BVP, bvp_bp, ResampleMethod::Fourier},
      {ChannelKind::EDA, eda_lp, ResampleMethod::Fourier},
      {ChannelKind::HR, std::nullopt, ResampleMethod::Linear},
      {ChannelKind::TEMP, temp_lp, ResampleMethod::Linear},
  }};
}

PreprocessedSession::PreprocessedSession(const Session& session, PreprocessPlan plan)
    : subject_id_(session.subject_id),
      week_index_(session.week_index),
      tags_(session.tags),
      baseline_(session.baseline_intervals),
      plan_(std::move(plan)) {
  for (ChannelKind kind : kModelChannels) {
    const auto& stage = plan_.stage(kind);
    ChannelRecording rec = session.channel(kind);
    if (stage.filter) {
      if (std::abs(stage.filter->sample_rate - rec.sample_rate) > 1e-9) {
        throw ValidationError("filter for " + std::string(to_string(kind)) + " designed for a different rate");
      }
      rec.samples = dsp::apply_filter(*stage.filter, rec.samples, dsp::FilterInit::SteadyState);
    }
    channels_[kind] = std::move(rec);
  }
  for (ChannelKind kind : {ChannelKind::ACC_X, ChannelKind::ACC_Y, ChannelKind::ACC_Z}) {
    channels_[kind] = session.channel(kind);
  }
  span_start_ = -INFINITY;
  span_end_ = INFINITY;
  for (const auto& [kind, rec] : session.channels) {
    span_start_ = std::max(span_start_, rec.start_time);
    span_end_ = std::min(span_end_, rec.end_time());
  }
}

std::span<const double> PreprocessedSession::slice(const ChannelRecording& rec, double start, double len_s) const {
  const auto first = std::llround((start - rec.start_time) * rec.sample_rate);
  const auto count = std::llround(len_s * rec.sample_rate);
  if (first < 0 || count < 1 || static_cast<std::size_t>(first + count) > rec.samples.size()) {
    throw DataError("window [" + std::to_string(start) + ", +" + std::to_string(len_s) + ") outside " +
                    std::string(to_string(rec.kind)) + " recording of " + subject_id_);
  }
  return {rec.samples.data() + first, static_cast<std::size_t>(count)};
}

Matrix PreprocessedSession::window_signal(double start, double len_s, double target_rate_hz) const {
  const auto n_out = static_cast<std::size_t>(std::llround(len_s * target_rate_hz));
  Matrix m(kNumModelChannels, n_out);
  for (std::size_t c = 0; c < kNumModelChannels; ++c) {
    const ChannelKind kind = kModelChannels[c];
    const auto& rec = channels_.at(kind);
    const auto raw = slice(rec, start, len_s);
    std::vector<double> res;
    if (plan_.stage(kind).resample == ResampleMethod::Fourier) {
      res = dsp::resample_fourier(raw, rec.sample_rate, target_rate_hz);
    } else {
      res = dsp::resample_linear(raw, rec.sample_rate, target_rate_hz);
    }
    if (res.size() != n_out) throw DataError("resampled window has unexpected length");
    std::copy(res.begin(), res.end(), m.row(c).begin());
  }
  return m;
}

Matrix PreprocessedSession::acc_window(double start, double len_s) const {
  const ChannelKind axes[] = {ChannelKind::ACC_X, ChannelKind::ACC_Y, ChannelKind::ACC_Z};
  const auto n = static_cast<std::size_t>(std::llround(len_s * kAccRate));
  Matrix m(3, n);
  for (std::size_t a = 0; a < 3; ++a) {
    const auto raw = slice(channels_.at(axes[a]), start, len_s);
    std::copy(raw.begin(), raw.end(), m.row(a).begin());
  }
  return m;
}

PreprocessedSession preprocess(const Session& session, const PreprocessPlan& plan) {
  return PreprocessedSession(session, plan);
}

}  // namespace stresscast
