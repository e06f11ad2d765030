#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sap/errors.hpp"
#include "sap/mask.hpp"

namespace sap {

/// Maps a prune mask to a quality metric (higher is better). Implementations
/// must be deterministic and must accept the empty (dense) mask.
class EvalOracle {
 public:
  virtual ~EvalOracle() = default;
  virtual double evaluate(const PruneMask& mask) = 0;
  /// True when evaluate() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

/// Memoizes an oracle by canonical mask JSON. calls() counts every request,
/// evaluator_runs() only the ones forwarded to the wrapped oracle.
class CachedOracle final : public EvalOracle {
 public:
  explicit CachedOracle(EvalOracle& inner) : inner_(inner) {}

  double evaluate(const PruneMask& mask) override;
  bool concurrent() const override { return inner_.concurrent(); }

  std::size_t calls() const;
  std::size_t evaluator_runs() const;

 private:
  EvalOracle& inner_;
  mutable std::mutex mu_;
  std::map<std::string, double> cache_;
  std::size_t calls_ = 0;
  std::size_t runs_ = 0;
};

struct CandidateRecord {
  HeadId head;
  double solo_metric = 0.0;
  double degradation = 0.0;  // dense_metric - solo_metric
};

struct CFStep {
  HeadId head;
  double metric = 0.0;
  bool accepted = false;
};

enum class StopReason { kTolerance, kExhausted };

const char* to_string(StopReason reason);

struct CFReport {
  double dense_metric = 0.0;
  double tolerance_fraction = 0.0;
  /// Ascending degradation, ties by (layer, head).
  std::vector<CandidateRecord> candidates;
  /// Heads kept pruned, in acceptance order.
  std::vector<HeadId> sequence;
  /// One entry per accepted head, plus the rejected step if iteration stopped early.
  std::vector<CFStep> steps;
  /// Empty while a run is incomplete (e.g. in the partial report of an aborted run).
  std::optional<StopReason> stop;
  std::size_t oracle_calls = 0;
  std::size_t evaluator_runs = 0;

  std::string to_json() const;
};

/// Raised when the oracle fails mid-run; carries everything computed so far.
class FilterError : public OracleError {
 public:
  FilterError(const OracleError& cause, CFReport partial)
      : OracleError(cause), partial_(std::move(partial)) {}

  const CFReport& partial_report() const { return partial_; }

 private:
  CFReport partial_;
};

/// Evaluates the dense mask, then each candidate pruned alone (concurrently
/// when the oracle allows), and orders candidates by ascending degradation.
/// Uses exactly candidates.size() + 1 oracle calls.
CFReport rank_candidates(std::span<const HeadId> candidates, EvalOracle& oracle, int layers,
                         int heads_per_layer);

struct CFResult {
  PruneMask mask;
  CFReport report;
};

/// Ranks candidates, then adds them one at a time in that order, stopping at
/// the first step whose metric drops below tolerance_fraction * dense_metric
/// (that head is not kept). Layer collapse is applied to the final mask.
CFResult filter_prune(std::span<const HeadId> candidates, EvalOracle& oracle,
                      double tolerance_fraction, int layers, int heads_per_layer,
                      double layer_collapse_fraction = 1.0);

}  // namespace sap
