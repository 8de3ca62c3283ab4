#pragma once

#include <future>
#include <optional>
#include <string>
#include <vector>

#include "typogen/mlogit.hpp"

namespace typogen {

struct StepwiseCandidate {
  std::string predictor;  // candidate for removal
  bool ok = false;
  double aic = 0.0;
  std::string error;  // set when the refit failed and the candidate was skipped
};

struct StepwiseStep {
  double current_aic = 0.0;
  std::vector<StepwiseCandidate> candidates;
  std::optional<std::string> removed;  // empty on the terminating step
};

struct StepwiseTrace {
  double initial_aic = 0.0;
  double final_aic = 0.0;
  std::vector<StepwiseStep> steps;
};

struct StepwiseResult {
  ModelSpec spec;
  MlogitFit fit;
  StepwiseTrace trace;
};

// Backward elimination on AIC: at every step refit without each remaining
// predictor, remove the one yielding the lowest AIC while that AIC does not
// exceed the current one (ties go to the earliest predictor in declared order),
// and stop when no removal helps. Candidates whose refit fails are skipped and
// recorded. Candidate refits may run concurrently; the removal decision is made
// only after all of them complete, so the result does not depend on thread count.
inline StepwiseResult backward_stepwise(const PredictorTable& table,
                                        const std::vector<std::string>& outcome,
                                        const ModelSpec& spec, const FitOptions& opts = {},
                                        unsigned threads = 1) {
  StepwiseResult res{spec, fit_mlogit(table, outcome, spec, opts), {}};
  res.spec.reference_class = res.fit.reference;
  res.trace.initial_aic = res.fit.aic;

  while (!res.spec.predictors.empty()) {
    StepwiseStep step;
    step.current_aic = res.fit.aic;

    auto try_candidate = [&](const std::string& predictor) {
      StepwiseCandidate cand;
      cand.predictor = predictor;
      ModelSpec reduced = res.spec;
      std::erase(reduced.predictors, predictor);
      try {
        cand.aic = fit_mlogit(table, outcome, reduced, opts).aic;
        cand.ok = true;
      } catch (const Error& e) {
        cand.error = e.what();
      }
      return cand;
    };

    if (threads <= 1 || res.spec.predictors.size() < 2) {
      for (const auto& predictor : res.spec.predictors)
        step.candidates.push_back(try_candidate(predictor));
    } else {
      std::vector<std::future<StepwiseCandidate>> futures;
      futures.reserve(res.spec.predictors.size());
      for (const auto& predictor : res.spec.predictors)
        futures.push_back(std::async(std::launch::async, try_candidate, predictor));
      for (auto& f : futures) step.candidates.push_back(f.get());
    }

    const StepwiseCandidate* best = nullptr;
    for (const auto& cand : step.candidates)
      if (cand.ok && (!best || cand.aic < best->aic)) best = &cand;

    if (!best || best->aic > res.fit.aic) {
      res.trace.steps.push_back(std::move(step));
      break;
    }

    step.removed = best->predictor;
    ModelSpec reduced = res.spec;
    std::erase(reduced.predictors, best->predictor);
    res.fit = fit_mlogit(table, outcome, reduced, opts);
    res.spec = std::move(reduced);
    res.trace.steps.push_back(std::move(step));
  }

  res.trace.final_aic = res.fit.aic;
  return res;
}

}  // namespace typogen
