#pragma once

#include "agelab/cohort/types.hpp"

#include <map>
#include <span>

namespace agelab::model {

/// Sex-specific training means of each disease-tagged biomarker among the
/// subjects normal (or binary-healthy) for that disease. These are the
/// substitution values for corrected pairs.
class CorrectionTable {
  public:
    static CorrectionTable build(const cohort::CohortTable &cohort,
                                 std::span<const std::size_t> train_ids);

    double substitution(cohort::Disease disease, const std::string &feature,
                        cohort::Sex sex) const;
    bool has(cohort::Disease disease, const std::string &feature) const;

    const std::map<std::string, std::array<double, 2>> &entries() const { return values_; }
    void set(cohort::Disease disease, const std::string &feature, double male, double female);

  private:
    static std::string key(cohort::Disease disease, const std::string &feature);
    // key "disease/feature" -> {male mean, female mean}
    std::map<std::string, std::array<double, 2>> values_;
};

/// Counterfactual healthy version of a diseased subject: every biomarker
/// tagged with one of the subject's illnesses is replaced by the normal-group
/// training mean, and the matching medication / history flags are cleared.
/// Subjects without any illness are returned unchanged.
cohort::SubjectRecord make_corrected_pair(const cohort::SubjectRecord &record,
                                          const cohort::MorbidityLabel &label,
                                          const cohort::Schema &schema,
                                          const CorrectionTable &table);

/// True when correction would substitute at least one biomarker (the pair is
/// informative for the contrastive loss).
bool has_biomarker_correction(const cohort::MorbidityLabel &label, const cohort::Schema &schema);

} // namespace agelab::model
