#include "lrmf/ensemble.hpp"

#include <cmath>
#include <map>

namespace lrmf {

void SnapshotEnsemble::validate() const {
    if (params.size() != 0 && params.rows() != outputs.cols()) {
        data_error("ensemble has " + std::to_string(outputs.cols()) + " output columns but " +
                   std::to_string(params.rows()) + " parameter rows");
    }
    if (cost.size() != 0 && cost.size() != outputs.cols()) {
        data_error("ensemble cost vector length does not match sample count");
    }
    if (!labels.empty() && static_cast<Index>(labels.size()) != outputs.rows()) {
        data_error("ensemble label count does not match output dimension");
    }
    if (row_scale.size() != 0 && row_scale.size() != outputs.rows()) {
        data_error("ensemble row scale length does not match output dimension");
    }
    if (!outputs.allFinite()) data_error("ensemble outputs contain non-finite values");
    if (params.size() != 0 && !params.allFinite()) data_error("ensemble parameters contain non-finite values");
    if (cost.size() != 0 && !cost.allFinite()) data_error("ensemble costs contain non-finite values");
}

std::vector<RowGroup> groups_from_labels(const SnapshotEnsemble& ensemble) {
    std::vector<RowGroup> groups;
    if (ensemble.labels.empty()) {
        RowGroup all{"all", {}};
        for (Index r = 0; r < ensemble.dim(); ++r) all.rows.push_back(r);
        groups.push_back(std::move(all));
        return groups;
    }
    std::map<std::string, std::size_t> slot;
    for (Index r = 0; r < ensemble.dim(); ++r) {
        const auto& label = ensemble.labels[static_cast<std::size_t>(r)];
        auto [it, inserted] = slot.emplace(label, groups.size());
        if (inserted) groups.push_back(RowGroup{label, {}});
        groups[it->second].rows.push_back(r);
    }
    return groups;
}

NormalizedEnsemble normalize_ensemble(const SnapshotEnsemble& ensemble, const std::vector<RowGroup>& groups) {
    NormalizedEnsemble out{ensemble, {}};
    if (out.ensemble.row_scale.size() == 0) out.ensemble.row_scale = Vector::Ones(ensemble.dim());
    const auto n = static_cast<double>(ensemble.samples());
    if (ensemble.samples() == 0) data_error("cannot normalize an empty ensemble");

    for (const auto& group : groups) {
        if (group.rows.empty()) config_error("normalization group '" + group.name + "' is empty");
        double energy = 0.0;
        for (Index j = 0; j < ensemble.samples(); ++j) {
            for (Index r : group.rows) energy += ensemble.outputs(r, j) * ensemble.outputs(r, j);
        }
        energy /= n;
        if (!(energy > 0.0)) data_error("normalization group '" + group.name + "' has zero energy");
        const double factor = std::sqrt(energy);
        for (Index r : group.rows) {
            out.ensemble.outputs.row(r) /= factor;
            out.ensemble.row_scale(r) *= factor;
        }
        out.factors.push_back(factor);
    }
    return out;
}

}  // namespace lrmf
