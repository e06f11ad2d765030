#include "sap/cfilter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "sap/pruner.hpp"

namespace sap {

double CachedOracle::evaluate(const PruneMask& mask) {
  const std::string key = write_mask(mask);
  {
    std::lock_guard lock(mu_);
    ++calls_;
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const double metric = inner_.evaluate(mask);
  std::lock_guard lock(mu_);
  ++runs_;
  cache_.emplace(key, metric);
  return metric;
}

std::size_t CachedOracle::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t CachedOracle::evaluator_runs() const {
  std::lock_guard lock(mu_);
  return runs_;
}

const char* to_string(StopReason reason) {
  return reason == StopReason::kTolerance ? "tolerance" : "exhausted";
}

std::string CFReport::to_json() const {
  const auto head_json = [](const HeadId& h) { return nlohmann::json::array({h.layer, h.head}); };
  nlohmann::json j;
  j["dense_metric"] = dense_metric;
  j["tolerance_fraction"] = tolerance_fraction;
  auto cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"head", head_json(c.head)},
                     {"solo_metric", c.solo_metric},
                     {"degradation", c.degradation}});
  }
  j["candidates"] = std::move(cands);
  auto seq = nlohmann::json::array();
  for (const auto& h : sequence) seq.push_back(head_json(h));
  j["sequence"] = std::move(seq);
  auto steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"head", head_json(s.head)}, {"metric", s.metric}, {"accepted", s.accepted}});
  }
  j["steps"] = std::move(steps_json);
  j["stop_reason"] = stop ? nlohmann::json(to_string(*stop)) : nlohmann::json(nullptr);
  j["oracle_calls"] = oracle_calls;
  j["evaluator_runs"] = evaluator_runs;
  return j.dump(2) + "\n";
}

namespace {

double checked_evaluate(EvalOracle& oracle, const PruneMask& mask, std::optional<HeadId> head) {
  double metric = 0.0;
  try {
    metric = oracle.evaluate(mask);
  } catch (const OracleError& e) {
    throw OracleError(head, e.what());
  } catch (const std::exception& e) {
    throw OracleError(head, e.what());
  }
  if (!std::isfinite(metric)) throw OracleError(head, "non-finite metric");
  return metric;
}

void check_candidates(std::span<const HeadId> candidates, int layers, int heads_per_layer) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "candidate list is empty");
  std::set<HeadId> seen;
  for (const HeadId& h : candidates) {
    if (h.layer < 0 || h.layer >= layers || h.head < 0 || h.head >= heads_per_layer) {
      throw Error(ErrorCode::kInvalidArgument, "candidate " + to_string(h) + " out of range");
    }
    if (!seen.insert(h).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate candidate " + to_string(h));
    }
  }
}

}  // namespace

CFReport rank_candidates(std::span<const HeadId> candidates, EvalOracle& oracle, int layers,
                         int heads_per_layer) {
  check_candidates(candidates, layers, heads_per_layer);
  CFReport report;
  const PruneMask dense(layers, heads_per_layer);
  try {
    report.dense_metric = checked_evaluate(oracle, dense, std::nullopt);
  } catch (const OracleError& e) {
    throw FilterError(e, report);
  }

  std::vector<double> solo(candidates.size(), 0.0);
  const auto evaluate_one = [&](std::size_t i) {
    PruneMask mask = dense;
    mask.prune(candidates[i]);
    solo[i] = checked_evaluate(oracle, mask, candidates[i]);
  };

  const std::size_t workers =
      oracle.concurrent()
          ? std::min<std::size_t>(candidates.size(), std::max(1u, std::thread::hardware_concurrency()))
          : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      try {
        evaluate_one(i);
      } catch (const OracleError& e) {
        throw FilterError(e, report);
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(candidates.size());
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < candidates.size(); i = next++) {
            try {
              evaluate_one(i);
            } catch (...) {
              errors[i] = std::current_exception();
            }
          }
        });
      }
    }
    // Report the first failing candidate in input order, independent of scheduling.
    for (const auto& err : errors) {
      if (!err) continue;
      try {
        std::rethrow_exception(err);
      } catch (const OracleError& e) {
        throw FilterError(e, report);
      }
    }
  }

  report.candidates.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    report.candidates.push_back({candidates[i], solo[i], report.dense_metric - solo[i]});
  }
  std::sort(report.candidates.begin(), report.candidates.end(),
            [](const CandidateRecord& a, const CandidateRecord& b) {
              return a.degradation != b.degradation ? a.degradation < b.degradation : a.head < b.head;
            });
  return report;
}

CFResult filter_prune(std::span<const HeadId> candidates, EvalOracle& oracle,
                      double tolerance_fraction, int layers, int heads_per_layer,
                      double layer_collapse_fraction) {
  if (!(tolerance_fraction > 0.0 && tolerance_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tolerance fraction must be in (0, 1]");
  }
  if (!(layer_collapse_fraction > 0.0 && layer_collapse_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "layer collapse fraction must be in (0, 1]");
  }
  CachedOracle cached(oracle);
  const auto finish_counts = [&](CFReport& r) {
    r.tolerance_fraction = tolerance_fraction;
    r.oracle_calls = cached.calls();
    r.evaluator_runs = cached.evaluator_runs();
  };

  CFReport report;
  try {
    report = rank_candidates(candidates, cached, layers, heads_per_layer);
  } catch (const FilterError& e) {
    CFReport partial = e.partial_report();
    finish_counts(partial);
    throw FilterError(e, std::move(partial));
  }

  const double floor = tolerance_fraction * report.dense_metric;
  PruneMask mask(layers, heads_per_layer);
  report.stop = StopReason::kExhausted;
  for (const CandidateRecord& cand : report.candidates) {
    PruneMask trial = mask;
    trial.prune(cand.head);
    double metric = 0.0;
    try {
      metric = checked_evaluate(cached, trial, cand.head);
    } catch (const OracleError& e) {
      report.stop.reset();
      finish_counts(report);
      throw FilterError(e, report);
    }
    if (metric < floor) {
      report.steps.push_back({cand.head, metric, false});
      report.stop = StopReason::kTolerance;
      break;
    }
    report.steps.push_back({cand.head, metric, true});
    report.sequence.push_back(cand.head);
    mask = std::move(trial);
  }
  finish_counts(report);
  return CFResult{collapse_layers(mask, layer_collapse_fraction), std::move(report)};
}

}  // namespace sap
