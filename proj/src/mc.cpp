#include "relaycap/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace relaycap::mc {

using channel::SystemConfig;
using precoding::Scheme;

namespace {

constexpr long long kChunk = 4096;

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void check_preconditions(Scheme scheme, const SystemConfig& config,
                         long long samples) {
  config.validate();
  if (samples < 1000) {
    throw DomainError("monte carlo: at least 1000 samples required");
  }
  if (scheme == Scheme::ZF && config.M >= 1 && config.N <= config.M) {
    throw DomainError("zf: requires N > M");
  }
}

// Runs fn(chunk_first, chunk_last, chunk_slot) over the sample range on the
// requested number of threads; chunk slots keep results ordered.
template <typename Fn>
void run_chunks(long long samples, int threads, long long* chunk_count,
                const Fn& fn) {
  const long long chunks = (samples + kChunk - 1) / kChunk;
  *chunk_count = chunks;
  std::atomic<long long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&]() {
    try {
      for (;;) {
        const long long c = next.fetch_add(1);
        if (c >= chunks) return;
        const long long first = c * kChunk;
        const long long last = std::min(samples, first + kChunk);
        fn(first, last, c);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(error_mu);
      if (!error) error = std::current_exception();
    }
  };
  const int nthreads = std::min<long long>(resolve_threads(threads), chunks);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct MeanSe {
  double mean, se;
};

MeanSe finish(double sum, double sumsq, long long n) {
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace

CapacityEstimate estimate_capacity(Scheme scheme, const SystemConfig& config,
                                   long long samples, std::uint64_t seed,
                                   int threads) {
  check_preconditions(scheme, config, samples);
  long long chunks = 0;
  std::vector<double> sum, sumsq;
  {
    const long long n_chunks = (samples + kChunk - 1) / kChunk;
    sum.assign(n_chunks, 0.0);
    sumsq.assign(n_chunks, 0.0);
  }
  run_chunks(samples, threads, &chunks,
             [&](long long first, long long last, long long slot) {
               double s = 0.0, s2 = 0.0;
               for (long long i = first; i < last; ++i) {
                 const auto real = channel::sample_channels(config, seed, i);
                 const auto sinr = precoding::scheme_sinr(scheme, real, config);
                 const double cap = 0.5 * std::log2(1.0 + sinr.gamma_end);
                 s += cap;
                 s2 += cap * cap;
               }
               sum[slot] = s;
               sumsq[slot] = s2;
             });
  double total = 0.0, total_sq = 0.0;
  for (long long c = 0; c < chunks; ++c) {
    total += sum[c];
    total_sq += sumsq[c];
  }
  const MeanSe ms = finish(total, total_sq, samples);
  CapacityEstimate est;
  est.value = ms.mean;
  est.stderr_ = ms.se;
  est.samples = samples;
  est.method = "mc";
  est.seed = seed;
  return est;
}

MomentSummary collect_moments(Scheme scheme, const SystemConfig& config,
                              long long samples, std::uint64_t seed,
                              int threads) {
  check_preconditions(scheme, config, samples);
  struct Acc {
    double cap = 0, cap2 = 0, g1 = 0, g1_2 = 0, g1sq = 0, g1sq2 = 0,
           lng1 = 0, lng1_2 = 0, g2 = 0;
  };
  long long chunks = 0;
  std::vector<Acc> acc((samples + kChunk - 1) / kChunk);
  run_chunks(samples, threads, &chunks,
             [&](long long first, long long last, long long slot) {
               Acc a;
               for (long long i = first; i < last; ++i) {
                 const auto real = channel::sample_channels(config, seed, i);
                 const auto sinr = precoding::scheme_sinr(scheme, real, config);
                 const double cap = 0.5 * std::log2(1.0 + sinr.gamma_end);
                 const double g1 = sinr.gamma1;
                 const double lg = std::log(g1);
                 a.cap += cap;
                 a.cap2 += cap * cap;
                 a.g1 += g1;
                 a.g1_2 += g1 * g1;
                 a.g1sq += g1 * g1;
                 a.g1sq2 += g1 * g1 * g1 * g1;
                 a.lng1 += lg;
                 a.lng1_2 += lg * lg;
                 a.g2 += sinr.gamma2;
               }
               acc[slot] = a;
             });
  Acc t;
  for (long long c = 0; c < chunks; ++c) {
    t.cap += acc[c].cap;
    t.cap2 += acc[c].cap2;
    t.g1 += acc[c].g1;
    t.g1_2 += acc[c].g1_2;
    t.g1sq += acc[c].g1sq;
    t.g1sq2 += acc[c].g1sq2;
    t.lng1 += acc[c].lng1;
    t.lng1_2 += acc[c].lng1_2;
    t.g2 += acc[c].g2;
  }
  MomentSummary out;
  out.samples = samples;
  const MeanSe cap = finish(t.cap, t.cap2, samples);
  out.cap_mean = cap.mean;
  out.cap_se = cap.se;
  const MeanSe g1 = finish(t.g1, t.g1_2, samples);
  out.g1_mean = g1.mean;
  out.g1_se = g1.se;
  const MeanSe g1sq = finish(t.g1sq, t.g1sq2, samples);
  out.g1_sq_mean = g1sq.mean;
  out.g1_sq_se = g1sq.se;
  const MeanSe lng1 = finish(t.lng1, t.lng1_2, samples);
  out.lng1_mean = lng1.mean;
  out.lng1_se = lng1.se;
  out.g2_mean = t.g2 / samples;
  return out;
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
  return static_cast<double>(it - sorted.begin()) / sorted.size();
}

EmpiricalCdf empirical_cdf(Scheme scheme, const SystemConfig& config,
                           Metric which, long long samples, std::uint64_t seed,
                           int threads) {
  check_preconditions(scheme, config, samples);
  long long chunks = 0;
  std::vector<std::vector<double>> parts((samples + kChunk - 1) / kChunk);
  run_chunks(samples, threads, &chunks,
             [&](long long first, long long last, long long slot) {
               std::vector<double> vals;
               vals.reserve(last - first);
               for (long long i = first; i < last; ++i) {
                 const auto real = channel::sample_channels(config, seed, i);
                 const auto sinr = precoding::scheme_sinr(scheme, real, config);
                 switch (which) {
                   case Metric::Gamma1: vals.push_back(sinr.gamma1); break;
                   case Metric::Gamma2: vals.push_back(sinr.gamma2); break;
                   case Metric::GammaEnd: vals.push_back(sinr.gamma_end); break;
                   case Metric::Capacity:
                     vals.push_back(0.5 * std::log2(1.0 + sinr.gamma_end));
                     break;
                 }
               }
               parts[slot] = std::move(vals);
             });
  EmpiricalCdf ecdf;
  ecdf.sorted.reserve(samples);
  for (long long c = 0; c < chunks; ++c) {
    ecdf.sorted.insert(ecdf.sorted.end(), parts[c].begin(), parts[c].end());
  }
  std::sort(ecdf.sorted.begin(), ecdf.sorted.end());
  return ecdf;
}

double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& reference) {
  const std::size_t n = ecdf.sorted.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = reference(ecdf.sorted[i]);
    const double hi = static_cast<double>(i + 1) / n;
    const double lo = static_cast<double>(i) / n;
    worst = std::max({worst, std::abs(f - hi), std::abs(f - lo)});
  }
  return worst;
}

}  // namespace relaycap::mc
