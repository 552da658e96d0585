#pragma once

// Replicated dose-response observations for one subgroup.

#include <cmath>
#include <string>
#include <vector>

#include "curveq/error.hpp"

namespace curveq {

struct GroupDataset {
    std::string label;
    std::vector<double> dose_levels;            // k distinct doses, ascending
    std::vector<std::vector<double>> responses; // responses[i] for dose_levels[i], >= 1 each

    int dose_count() const { return static_cast<int>(dose_levels.size()); }

    int n_total() const {
        size_t n = 0;
        for (const auto& r : responses) n += r.size();
        return static_cast<int>(n);
    }

    void validate() const {
        if (dose_levels.size() != responses.size())
            throw DomainError("dataset '" + label + "': dose/response shape mismatch");
        if (dose_levels.empty())
            throw DomainError("dataset '" + label + "': no dose levels");
        for (size_t i = 0; i < dose_levels.size(); ++i) {
            if (!std::isfinite(dose_levels[i]))
                throw DomainError("dataset '" + label + "': non-finite dose");
            if (i > 0 && !(dose_levels[i] > dose_levels[i - 1]))
                throw DomainError("dataset '" + label + "': dose levels must be strictly increasing");
            if (responses[i].empty())
                throw DomainError("dataset '" + label + "': dose level without responses");
            for (double y : responses[i])
                if (!std::isfinite(y))
                    throw DomainError("dataset '" + label + "': non-finite response");
        }
    }

    // Appends one observation, keeping dose levels sorted and distinct.
    void add_observation(double dose, double response) {
        auto it = dose_levels.begin();
        size_t i = 0;
        for (; it != dose_levels.end() && *it < dose; ++it, ++i) {}
        if (it != dose_levels.end() && *it == dose) {
            responses[i].push_back(response);
        } else {
            dose_levels.insert(it, dose);
            responses.insert(responses.begin() + static_cast<long>(i), {response});
        }
    }
};

} // namespace curveq
