#include "fbnc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fbnc {

namespace {

void require_stable(double lambda, double mu) {
  if (!(lambda < mu))
    throw std::domain_error("requires lambda < mu (stable load)");
}

double batch_stderr(const std::vector<double>& means) {
  if (means.size() < 2) return 0.0;
  double m = 0;
  for (double x : means) m += x;
  m /= double(means.size());
  double v = 0;
  for (double x : means) v += (x - m) * (x - m);
  v /= double(means.size() - 1);
  return std::sqrt(v / double(means.size()));
}

}  // namespace

double analytic_pi(std::uint64_t k, double lambda, double mu) {
  require_stable(lambda, mu);
  double alpha = lambda * (1.0 - mu) / (mu * (1.0 - lambda));
  return (1.0 - alpha) * std::pow(alpha, double(k));
}

double analytic_vq_mean(double lambda, double mu) {
  require_stable(lambda, mu);
  double rho = lambda / mu;
  return (1.0 - mu) * rho / (1.0 - rho);
}

double analytic_delay_mean(double lambda, double mu) {
  require_stable(lambda, mu);
  double rho = lambda / mu;
  return (1.0 - mu) / mu * rho / ((1.0 - rho) * (1.0 - rho));
}

double analytic_first_passage(std::uint64_t k, double lambda, double mu) {
  require_stable(lambda, mu);
  return double(k) / (mu - lambda);
}

double growth_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("growth fit needs at least 3 points");
  double sx = 0, sy = 0;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::domain_error("growth fit needs positive coordinates");
    sx += std::log(x);
    sy += std::log(y);
  }
  double mx = sx / double(points.size());
  double my = sy / double(points.size());
  double num = 0, den = 0;
  for (auto [x, y] : points) {
    double dx = std::log(x) - mx;
    num += dx * (std::log(y) - my);
    den += dx * dx;
  }
  if (den == 0.0) throw std::domain_error("degenerate x values");
  return num / den;
}

double power_coefficient(const std::vector<std::pair<double, double>>& points,
                         double p) {
  if (points.empty()) throw std::invalid_argument("no points");
  double acc = 0;
  for (auto [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw std::domain_error("power fit needs positive coordinates");
    acc += std::log(y) - p * std::log(x);
  }
  return std::exp(acc / double(points.size()));
}

double tv_distance_to_pi(const std::vector<std::uint64_t>& histogram,
                         double lambda, double mu) {
  require_stable(lambda, mu);
  std::uint64_t total = 0;
  for (auto c : histogram) total += c;
  if (total == 0) throw std::invalid_argument("empty histogram");
  double acc = 0.0;
  double tail = 1.0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    double pk = analytic_pi(k, lambda, mu);
    tail -= pk;
    acc += std::abs(double(histogram[k]) / double(total) - pk);
  }
  acc += std::max(tail, 0.0);  // analytic mass beyond the observed range
  return acc / 2.0;
}

Aggregator::Aggregator(Options opt) : opt_(opt) {
  const auto n = std::size_t(opt_.receivers);
  sum_vq_.assign(n, 0.0);
  dec_sum_.assign(n, 0.0);
  del_sum_.assign(n, 0.0);
  dec_cnt_.assign(n, 0);
  del_cnt_.assign(n, 0);
  delivered_front_.assign(n, 0);
}

Aggregator::Options Aggregator::from_config(const SimConfig& cfg) {
  Options o;
  o.receivers = cfg.receivers;
  o.warmup = cfg.effective_warmup();
  o.emptying_delays = cfg.policy == Policy::drop_when_decoded &&
                     cfg.coding == Coding::random_lc;
  return o;
}

void Aggregator::record_decode(std::size_t j, PacketId id,
                               std::uint64_t slot) {
  if (id < first_counted_) return;
  double d = double(slot - arrival_window_[std::size_t(id - window_base_ - 1)]);
  dec_sum_[j] += d;
  ++dec_cnt_[j];
  std::size_t b = std::size_t((slot - 1) / opt_.batch_slots);
  if (b >= dec_batch_sum_.size()) {
    dec_batch_sum_.resize(b + 1, 0.0);
    dec_batch_cnt_.resize(b + 1, 0);
  }
  dec_batch_sum_[b] += d;
  ++dec_batch_cnt_[b];
}

void Aggregator::record_delivery(std::size_t j, PacketId id,
                                 std::uint64_t slot) {
  if (id >= first_counted_) {
    std::size_t w = std::size_t(id - window_base_ - 1);
    double d = double(slot - arrival_window_[w]);
    del_sum_[j] += d;
    ++del_cnt_[j];
    std::size_t b = std::size_t((slot - 1) / opt_.batch_slots);
    if (b >= del_batch_sum_.size()) {
      del_batch_sum_.resize(b + 1, 0.0);
      del_batch_cnt_.resize(b + 1, 0);
    }
    del_batch_sum_[b] += d;
    ++del_batch_cnt_[b];
    if (remaining_window_[w] > 0 && --remaining_window_[w] == 0) {
      sys_sum_ += d;
      ++sys_cnt_;
    }
  }
}

void Aggregator::prune_window() {
  PacketId everyone = delivered_front_[0];
  for (PacketId f : delivered_front_) everyone = std::min(everyone, f);
  while (window_base_ < everyone) {
    arrival_window_.pop_front();
    remaining_window_.pop_front();
    ++window_base_;
  }
}

void Aggregator::on_slot(const SlotTrace& t) {
  ++slots_seen_;
  const auto n = std::size_t(opt_.receivers);

  if (t.arrivals > 0) {
    for (std::uint32_t i = 0; i < t.arrivals; ++i) {
      arrival_window_.push_back(t.slot);
      remaining_window_.push_back(std::uint8_t(opt_.receivers));
    }
    total_arrived_ = t.stream_len;
    if (t.slot <= opt_.warmup) first_counted_ = t.stream_len + 1;
  }

  // Delays: either the exact per-receiver events, or the baseline rule
  // where a virtual-queue emptying decodes and delivers everything arrived.
  if (opt_.emptying_delays) {
    for (std::size_t j = 0; j < n; ++j) {
      if (t.virt_q[j] != 0) continue;
      for (PacketId id = delivered_front_[j] + 1; id <= t.stream_len; ++id) {
        record_decode(j, id, t.slot);
        record_delivery(j, id, t.slot);
      }
      delivered_front_[j] = t.stream_len;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      for (PacketId id : t.decoded_ids[j]) record_decode(j, id, t.slot);
      if (t.delivered_to[j] > delivered_front_[j]) {
        for (PacketId id = delivered_front_[j] + 1; id <= t.delivered_to[j];
             ++id)
          record_delivery(j, id, t.slot);
        delivered_front_[j] = t.delivered_to[j];
      }
    }
  }
  prune_window();

  if (t.slot <= opt_.warmup) return;

  ++measured_;
  sum_q_aa_ += double(t.phys_q_after_arrival);
  sumsq_q_aa_ +=
      double(t.phys_q_after_arrival) * double(t.phys_q_after_arrival);
  sum_q_end_ += double(t.phys_q_end);
  double vq_avg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    sum_vq_[j] += double(t.virt_q[j]);
    vq_avg += double(t.virt_q[j]);
    std::size_t k = std::size_t(t.virt_q[j]);
    if (k >= vq_hist_.size()) vq_hist_.resize(k + 1, 0);
    ++vq_hist_[k];
  }
  vq_avg /= double(n);

  batch_q_ += double(t.phys_q_after_arrival);
  batch_vq_ += vq_avg;
  if (++batch_fill_ == opt_.batch_slots) {
    batch_means_q_.push_back(batch_q_ / double(opt_.batch_slots));
    batch_means_vq_.push_back(batch_vq_ / double(opt_.batch_slots));
    batch_q_ = batch_vq_ = 0;
    batch_fill_ = 0;
  }

  if (t.phys_q_end > 0) {
    ++busy_len_;
  } else if (busy_len_ > 0) {
    busy_sum_ += double(busy_len_);
    ++busy_cnt_;
    busy_len_ = 0;
  }
}

SummaryStats Aggregator::finish() const {
  SummaryStats s;
  const auto n = std::size_t(opt_.receivers);
  s.slots_measured = measured_;
  if (measured_ == 0) return s;
  s.valid = true;

  double m = double(measured_);
  s.mean_phys_q = sum_q_aa_ / m;
  s.var_phys_q = sumsq_q_aa_ / m - s.mean_phys_q * s.mean_phys_q;
  s.mean_phys_q_end = sum_q_end_ / m;
  s.stderr_phys_q = batch_stderr(batch_means_q_);

  s.mean_virt_q.resize(n);
  double vsum = 0, vsumsq = 0;
  for (std::size_t j = 0; j < n; ++j) {
    s.mean_virt_q[j] = sum_vq_[j] / m;
    vsum += s.mean_virt_q[j];
  }
  s.mean_virt_q_avg = vsum / double(n);
  (void)vsumsq;
  s.stderr_virt_q_avg = batch_stderr(batch_means_vq_);
  s.vq_histogram = vq_hist_;

  s.mean_decoding_delay_rx.resize(n, 0.0);
  s.mean_delivery_delay_rx.resize(n, 0.0);
  double dsum = 0, lsum = 0;
  std::uint64_t dcnt = 0, lcnt = 0;
  std::uint64_t arrived_counted =
      total_arrived_ >= first_counted_ - 1
          ? total_arrived_ - (first_counted_ - 1)
          : 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (dec_cnt_[j] > 0)
      s.mean_decoding_delay_rx[j] = dec_sum_[j] / double(dec_cnt_[j]);
    if (del_cnt_[j] > 0)
      s.mean_delivery_delay_rx[j] = del_sum_[j] / double(del_cnt_[j]);
    dsum += dec_sum_[j];
    dcnt += dec_cnt_[j];
    lsum += del_sum_[j];
    lcnt += del_cnt_[j];
    s.undelivered += arrived_counted - del_cnt_[j];
  }
  s.decoded_samples = dcnt;
  s.delivered_samples = lcnt;
  if (dcnt > 0) s.mean_decoding_delay = dsum / double(dcnt);
  if (lcnt > 0) s.mean_delivery_delay = lsum / double(lcnt);

  std::vector<double> dec_means, del_means;
  for (std::size_t b = 0; b < dec_batch_cnt_.size(); ++b) {
    if (dec_batch_cnt_[b] > 0)
      dec_means.push_back(dec_batch_sum_[b] / double(dec_batch_cnt_[b]));
  }
  for (std::size_t b = 0; b < del_batch_cnt_.size(); ++b) {
    if (del_batch_cnt_[b] > 0)
      del_means.push_back(del_batch_sum_[b] / double(del_batch_cnt_[b]));
  }
  s.stderr_decoding_delay = batch_stderr(dec_means);
  s.stderr_delivery_delay = batch_stderr(del_means);

  if (sys_cnt_ > 0) s.mean_system_delay = sys_sum_ / double(sys_cnt_);
  s.system_samples = sys_cnt_;
  if (busy_cnt_ > 0) s.mean_busy_period = busy_sum_ / double(busy_cnt_);
  s.busy_periods = busy_cnt_;
  return s;
}

SimulationOutcome simulate(const SimConfig& cfg) {
  Simulator sim(cfg);
  Aggregator agg(Aggregator::from_config(cfg));
  SimulationOutcome out;
  out.report = sim.run(agg);
  out.stats = agg.finish();
  return out;
}

void DelayRecorder::on_slot(const SlotTrace& t) {
  if (front_.empty()) front_.assign(n_, 0);
  while (records_.size() < t.stream_len) {
    DelayRecord r;
    r.packet = PacketId(records_.size() + 1);
    r.arrival_slot = t.slot;
    r.decode_slot.assign(n_, 0);
    r.delivery_slot.assign(n_, 0);
    records_.push_back(std::move(r));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    for (PacketId id : t.decoded_ids[j])
      records_[std::size_t(id - 1)].decode_slot[j] = t.slot;
    if (t.delivered_to[j] > front_[j]) {
      for (PacketId id = front_[j] + 1; id <= t.delivered_to[j]; ++id)
        records_[std::size_t(id - 1)].delivery_slot[j] = t.slot;
      front_[j] = t.delivered_to[j];
    }
  }
}

FirstPassageSink::FirstPassageSink(std::vector<std::uint64_t> ks,
                                   std::size_t receiver, std::uint64_t warmup)
    : ks_(std::move(ks)), rx_(receiver), warmup_(warmup) {
  start_.assign(ks_.size(), std::nullopt);
  sum_.assign(ks_.size(), 0.0);
  cnt_.assign(ks_.size(), 0);
}

void FirstPassageSink::on_slot(const SlotTrace& t) {
  if (t.slot <= warmup_) return;
  std::uint64_t vq = t.virt_q[rx_];
  for (std::size_t i = 0; i < ks_.size(); ++i) {
    if (start_[i]) {
      if (vq == 0) {
        sum_[i] += double(t.slot - *start_[i]);
        ++cnt_[i];
        start_[i].reset();
      }
    } else if (vq == ks_[i]) {
      start_[i] = t.slot;
    }
  }
}

double FirstPassageSink::mean(std::uint64_t k) const {
  for (std::size_t i = 0; i < ks_.size(); ++i) {
    if (ks_[i] == k && cnt_[i] > 0) return sum_[i] / double(cnt_[i]);
  }
  return 0.0;
}

std::uint64_t FirstPassageSink::count(std::uint64_t k) const {
  for (std::size_t i = 0; i < ks_.size(); ++i)
    if (ks_[i] == k) return cnt_[i];
  return 0;
}

}  // namespace fbnc
