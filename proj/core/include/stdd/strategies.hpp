#pragma once

#include <memory>
#include <string>

#include "stdd/dynamics.hpp"
#include "stdd/feasibility.hpp"
#include "stdd/scheduler.hpp"
#include "stdd/threshold.hpp"

namespace stdd {

// Classic confidence remasking: decode every masked token whose confidence
// reaches a single global threshold.
class FixedThresholdStrategy final : public Strategy {
public:
    explicit FixedThresholdStrategy(double tau = 0.95);

    std::string_view name() const override { return "fixed"; }
    StepDecision decide(const SequenceState& state, const StepObservation& obs,
                        const ConfidenceHistory& history) override;

    double tau() const noexcept { return tau_; }

private:
    double tau_;
};

// DUS-style dilated unmasking. Generation offset k belongs to group k mod B;
// the n-th call decodes all masked members of group n mod B at their argmax,
// ignoring confidence.
class DilatedUnmaskingStrategy final : public Strategy {
public:
    explicit DilatedUnmaskingStrategy(std::size_t groups = 8);

    std::string_view name() const override { return "dus"; }
    void begin(const SequenceState& state) override;
    StepDecision decide(const SequenceState& state, const StepObservation& obs,
                        const ConfidenceHistory& history) override;

    std::size_t groups() const noexcept { return groups_; }

private:
    std::size_t groups_;
    std::size_t cursor_ = 0;
};

struct StddConfig {
    dynamics::DynamicsConfig dynamics;
    threshold::ThresholdConfig threshold;
    feasibility::FeasibilityConfig feasibility;

    void validate() const;
    bool operator==(const StddConfig&) const = default;
};

// Per-token dynamic thresholds from temporal and spatial dynamics plus the
// suspected-fast / suspected-slow feasibility labels.
//
// Within a step: fast labels are checked first (content change remasks),
// then every position masked at step start gets tau = p*base + (1-p)*neighbour
// and is decoded when conf >= tau, otherwise its slow counter advances and may
// force a decode. Threshold decodes within the warm-up margin get fast labels.
// If nothing was decoded or remasked the progress fallback runs.
class StddStrategy final : public Strategy {
public:
    explicit StddStrategy(StddConfig cfg = {});

    std::string_view name() const override { return "stdd"; }
    void begin(const SequenceState& state) override;
    void finish() override;
    StepDecision decide(const SequenceState& state, const StepObservation& obs,
                        const ConfidenceHistory& history) override;

    const StddConfig& config() const noexcept { return cfg_; }
    const feasibility::LabelTable& labels() const noexcept { return labels_; }

    // Threshold of one masked position given the step's mixing weight.
    double threshold_for(Position pos, const SequenceState& state, const StepObservation& obs,
                         const ConfidenceHistory& history, double p) const;

private:
    StddConfig cfg_;
    feasibility::LabelTable labels_;
};

}  // namespace stdd
