#include "agelab/cohort/labeling.hpp"

namespace agelab::cohort {

namespace {

struct Value {
    std::optional<double> v;

    bool ge(double threshold) const { return v.has_value() && *v >= threshold; }
    bool lt(double threshold) const { return v.has_value() && *v < threshold; }
    bool missing() const { return !v.has_value(); }
};

Value get(const SubjectRecord &r, const Schema &schema, const char *name) {
    if (!schema.contains(name)) {
        return {std::nullopt};
    }
    return {r.biomarkers[schema.index_of(name)]};
}

TriState tri_label(bool illness, bool normal, bool all_missing, bool medication,
                   std::vector<Disease> &indeterminate, Disease disease) {
    if (illness) {
        return TriState::illness;
    }
    if (all_missing && !medication) {
        indeterminate.push_back(disease);
        return TriState::pre;
    }
    if (normal) {
        return TriState::normal;
    }
    return TriState::pre;
}

} // namespace

MorbidityLabel label_morbidity(const SubjectRecord &record, const Schema &schema) {
    MorbidityLabel label;

    const Value fbs = get(record, schema, "FBS");
    const Value hba1c = get(record, schema, "HbA1c");
    const Value sbp = get(record, schema, "SBP");
    const Value dbp = get(record, schema, "DBP");
    const Value ldlc = get(record, schema, "LDLC");
    const Value tg = get(record, schema, "TG");
    const Value hdlc = get(record, schema, "HDLC");
    const Value wc = get(record, schema, "WC");

    // DM: illness at FBS >= 126 or HbA1c >= 6.5 or medication; normal below 100 / 5.7.
    label.dm = tri_label(fbs.ge(126.0) || hba1c.ge(6.5) || record.dm_medication,
                         fbs.lt(100.0) && hba1c.lt(5.7), fbs.missing() && hba1c.missing(),
                         record.dm_medication, label.indeterminate, Disease::dm);

    // HBP: illness at SBP >= 140 or DBP >= 90 or medication; normal below 120/80.
    label.hbp = tri_label(sbp.ge(140.0) || dbp.ge(90.0) || record.hbp_medication,
                          sbp.lt(120.0) && dbp.lt(80.0), sbp.missing() && dbp.missing(),
                          record.hbp_medication, label.indeterminate, Disease::hbp);

    // DLP: illness at LDLC >= 160 or TG >= 200 or HDLC < 40 or medication.
    label.dlp = tri_label(ldlc.ge(160.0) || tg.ge(200.0) || hdlc.lt(40.0) || record.dlp_medication,
                          ldlc.lt(100.0) && tg.lt(150.0) && hdlc.ge(60.0),
                          ldlc.missing() && tg.missing() && hdlc.missing(),
                          record.dlp_medication, label.indeterminate, Disease::dlp);

    // MS: three or more of five conditions, with sex-specific WC and HDLC cutoffs.
    const bool male = record.sex == Sex::male;
    int conditions = 0;
    conditions += wc.ge(male ? 90.0 : 85.0) ? 1 : 0;
    conditions += tg.ge(150.0) ? 1 : 0;
    conditions += hdlc.lt(male ? 40.0 : 50.0) ? 1 : 0;
    conditions += (sbp.ge(135.0) && dbp.ge(85.0)) ? 1 : 0;
    conditions += fbs.ge(100.0) ? 1 : 0;
    label.ms = conditions >= 3 ? BinaryState::with_disease : BinaryState::healthy;
    if (wc.missing() && tg.missing() && hdlc.missing() && sbp.missing() && dbp.missing() &&
        fbs.missing()) {
        label.indeterminate.push_back(Disease::ms);
    }

    label.cancer = record.cancer_history ? BinaryState::with_disease : BinaryState::healthy;
    label.cvd = record.cvd_history ? BinaryState::with_disease : BinaryState::healthy;
    label.cva = record.cva_history ? BinaryState::with_disease : BinaryState::healthy;

    label.overall = overall_state(label);
    return label;
}

void label_cohort(CohortTable &cohort) {
    cohort.labels.clear();
    cohort.labels.reserve(cohort.records.size());
    for (const auto &record : cohort.records) {
        cohort.labels.push_back(label_morbidity(record, cohort.schema));
    }
}

} // namespace agelab::cohort
