#pragma once

#include <string>
#include <vector>

#include "nowkit/series.hpp"

namespace fx {

inline nowkit::TimeSeries annual(std::string id, int first_year, const std::vector<double>& values, int lag = 0) {
    nowkit::TimeSeries s{std::move(id), nowkit::Frequency::Annual, {}, {lag}};
    for (std::size_t k = 0; k < values.size(); ++k)
        s.observations.push_back({{first_year + static_cast<int>(k), 1, nowkit::Frequency::Annual}, values[k]});
    return s;
}

inline nowkit::TimeSeries monthly(std::string id, int first_year, int first_month, const std::vector<double>& values, int lag = 0) {
    nowkit::TimeSeries s{std::move(id), nowkit::Frequency::Monthly, {}, {lag}};
    auto m = nowkit::MonthIndex::of(first_year, first_month);
    for (double v : values) {
        s.observations.push_back({{m.year(), m.month(), nowkit::Frequency::Monthly}, v});
        m = m + 1;
    }
    return s;
}

inline nowkit::TimeSeries quarterly(std::string id, int first_year, int first_quarter, const std::vector<double>& values, int lag = 0) {
    nowkit::TimeSeries s{std::move(id), nowkit::Frequency::Quarterly, {}, {lag}};
    nowkit::Period p{first_year, first_quarter, nowkit::Frequency::Quarterly};
    for (double v : values) {
        s.observations.push_back({p, v});
        p = p.next();
    }
    return s;
}

inline std::string source_path(const std::string& rel) { return std::string(NOWKIT_SOURCE_DIR) + "/" + rel; }

}  // namespace fx
